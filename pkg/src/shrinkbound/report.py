"""Plain-text and CSV rendering of analysis results.

Percentages carry one decimal and effects three; JSON output goes through
the pydantic models and keeps full precision.
"""

from __future__ import annotations

import csv
import io

from .schemas import AnalysisReport, BoundsReport, ShrinkageResult, SweepTable, ThetaSummary


def pct(x: float) -> str:
    return f"{100.0 * x:.1f}%"


def eff(x: float) -> str:
    return f"{x:.3f}"


def interval(lo: float, hi: float) -> str:
    return f"[{eff(lo)}, {eff(hi)}]"


def _table(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]

    def fmt(r: list[str]) -> str:
        return "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))

    return [fmt(header), *(fmt(r) for r in rows)]


def _weight_matrix(result: ShrinkageResult) -> list[str]:
    header = ["weight of", *(f"{s.label}" for s in result.studies)]
    if result.overall is not None:
        header.append("overall")
    rows = []
    for i, label in enumerate(result.labels):
        row = [label, *(pct(s.expected_weights[i]) for s in result.studies)]
        if result.overall is not None:
            row.append(pct(result.overall.expected_weights[i]))
        rows.append(row)
    return _table(header, rows)


def _estimate_rows(studies: list[ThetaSummary], result: ShrinkageResult) -> list[str]:
    header = ["estimate", "weight", "mean", "sd", "interval", "gain"]
    rows = [
        [
            f"theta[{s.label}]",
            pct(s.expected_weights[s.index - 1]),
            eff(s.mean),
            eff(s.sd),
            interval(s.lo, s.hi),
            f"{s.precision_gain:.2f}",
        ]
        for s in studies
    ]
    if result.overall is not None:
        o = result.overall
        rows.append(["mu", "", eff(o.mean), eff(o.sd), interval(o.lo, o.hi), ""])
    return _table(header, rows)


def render_bounds(report: BoundsReport) -> str:
    header = ["study", "sigma", "FE", "coincidence"]
    with_actual = any(r.actual_weight is not None for r in report.rows)
    if with_actual:
        header.append("actual")
    rows = []
    for r in report.rows:
        row = [r.label, eff(r.sigma), pct(r.fe_weight), pct(r.coincidence_weight)]
        if with_actual:
            row.append(pct(r.actual_weight) if r.actual_weight is not None else "")
        rows.append(row)
    return "\n".join([f"Self-weight bounds under {report.prior}", *_table(header, rows)]) + "\n"


def render_analysis(report: AnalysisReport) -> str:
    result = report.result
    first = result.studies[0]
    lines = [
        f"Prior: {result.prior}   level: {pct(first.level)} ({first.interval_kind} intervals)",
        "",
        "Posterior mean shrinkage weights",
        *_weight_matrix(result),
        "",
        *_estimate_rows(result.studies, result),
    ]
    if result.tau is not None:
        t = result.tau
        lines += [
            "",
            f"tau: mean {eff(t.mean)}  median {eff(t.median)}  "
            f"{pct(t.level)} central interval {interval(t.lo, t.hi)}",
        ]
    if report.bounds is not None:
        lines += ["", render_bounds(report.bounds).rstrip("\n")]
    if report.oracle:
        lines += ["", "Brute-force cross-check"]
        header = ["study", "weight", "grid", "MC mean", "(MC se)"]
        rows = [
            [
                str(c.index),
                pct(c.quadrature_weight),
                pct(c.grid_weight.value),
                eff(c.monte_carlo.mean.value),
                f"{c.monte_carlo.mean.mc_std_error:.4f}",
            ]
            for c in report.oracle
        ]
        lines += _table(header, rows)
    return "\n".join(lines) + "\n"


def analysis_csv(result: ShrinkageResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "label", "weight", "mean", "sd", "lo", "hi"])
    for s in result.studies:
        writer.writerow([s.index, s.label, repr(s.expected_weights[s.index - 1]), repr(s.mean), repr(s.sd), repr(s.lo), repr(s.hi)])
    return buf.getvalue()


def bounds_csv(report: BoundsReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "label", "sigma", "fe", "coincidence", "actual"])
    for r in report.rows:
        actual = "" if r.actual_weight is None else repr(r.actual_weight)
        writer.writerow([r.index, r.label, repr(r.sigma), repr(r.fe_weight), repr(r.coincidence_weight), actual])
    return buf.getvalue()


def sweep_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([table.abscissa, "weight", "mean", "lo", "hi"])
    for r in table.rows:
        writer.writerow([repr(r.x), repr(r.weight), repr(r.mean), repr(r.lo), repr(r.hi)])
    return buf.getvalue()
