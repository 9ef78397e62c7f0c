"""Command-line front end: ``shrinkbound analyze|bounds|sweep|forest``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from pydantic import ValidationError

from . import __version__
from .bounds import bounds_report, discrepancy_sweep, prior_scale_sweep, se_from_sample_size
from .errors import DataError, DomainError, NumericalError, PriorSpecError, ShrinkboundError
from .forest import build_forest_svg
from .ingest import parse_dataset, parse_prior, read_studies
from .oracle import grid_expected_weight, mc_theta_distribution
from .posterior import analyze, single_study_summary
from .priors import HeterogeneityPrior
from .report import analysis_csv, bounds_csv, render_analysis, render_bounds, sweep_csv
from .schemas import AnalysisConfig, AnalysisReport, Dataset, OracleCheck, ShrinkageResult, label_index

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

ORACLE_GRID_SIZE = 1_000_000
ORACLE_SAMPLES = 1_000_000
ORACLE_SEED = 20240101


class UsageError(ShrinkboundError):
    """Malformed command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"{flag} expects comma-separated numbers, got {text!r}") from exc


def parse_delta_grid(text: str) -> list[float]:
    """``lo:hi:step`` as an inclusive grid; ``0:0:1`` is the single point 0."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"--delta expects lo:hi:step, got {text!r}") from exc
    if not all(math.isfinite(v) for v in (lo, hi, step)) or step <= 0 or hi < lo:
        raise UsageError(f"--delta needs finite lo <= hi and step > 0, got {text!r}")
    n = round((hi - lo) / step)
    if abs(lo + n * step - hi) > 1e-9 * max(1.0, abs(hi)):
        raise UsageError(f"--delta range {hi - lo:g} is not a multiple of step {step:g}")
    return [round(lo + i * step, 12) for i in range(n + 1)]


def _resolve_targets(labels: list[str], target: str | None) -> list[int] | None:
    if target is None:
        return None
    out = []
    for t in target.split(","):
        try:
            out.append(label_index(labels, t.strip()))
        except KeyError as exc:
            raise UsageError(f"unknown target study {t.strip()!r}; have {', '.join(labels)}") from exc
    return out


def _sigmas_from_args(args: argparse.Namespace) -> list[float] | None:
    if args.sigmas:
        return _float_list(args.sigmas, "--sigmas")
    if args.sizes:
        sizes = _float_list(args.sizes, "--sizes")
        return [se_from_sample_size(n, args.uisd) for n in sizes]
    return None


def _config(args: argparse.Namespace) -> AnalysisConfig:
    try:
        return AnalysisConfig(
            data=args.data,
            sigmas=_sigmas_from_args(args),
            prior=args.prior,
            level=args.level,
            interval=args.interval,
            target=args.target,
            format=args.format,
            oracle=getattr(args, "oracle", False),
            out=args.out,
        )
    except ValidationError as exc:
        err = exc.errors()[0]
        raise UsageError(f"--{err['loc'][0]}: {err['msg']}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write output: {exc.strerror}", path=out) from exc
    logger.info("wrote %s", out)


# --- commands ---


def _oracle_checks(dataset: Dataset, prior: HeterogeneityPrior, result: ShrinkageResult) -> list[OracleCheck]:
    checks = []
    for s in result.studies:
        j = s.index - 1
        checks.append(
            OracleCheck(
                index=s.index,
                quadrature_weight=s.expected_weights[j],
                grid_weight=grid_expected_weight(dataset, prior, j, j, ORACLE_GRID_SIZE),
                monte_carlo=mc_theta_distribution(
                    dataset, prior, j, ORACLE_SAMPLES, ORACLE_SEED, s.level
                ),
            )
        )
    return checks


def cmd_analyze(cfg: AnalysisConfig) -> str:
    if cfg.data is None:
        raise UsageError("analyze needs --data")
    prior = parse_prior(cfg.prior)
    studies = read_studies(cfg.data)
    if len(studies) == 1:
        summary = single_study_summary(studies[0], cfg.level, cfg.interval)
        result = ShrinkageResult(prior="none (single study)", labels=[studies[0].label], studies=[summary])
        report = AnalysisReport(result=result)
    else:
        dataset = Dataset(studies=studies)
        targets = _resolve_targets(dataset.labels, cfg.target)
        result = analyze(dataset, prior, cfg.level, cfg.interval, targets)
        report = AnalysisReport(
            result=result,
            bounds=bounds_report(prior, dataset=dataset),
            oracle=_oracle_checks(dataset, prior, result) if cfg.oracle else None,
        )
    if cfg.format == "json":
        return report.model_dump_json(indent=2) + "\n"
    if cfg.format == "csv":
        return analysis_csv(report.result)
    return render_analysis(report)


def cmd_bounds(cfg: AnalysisConfig) -> str:
    prior = parse_prior(cfg.prior)
    if cfg.data is not None:
        report = bounds_report(prior, dataset=parse_dataset(cfg.data))
    elif cfg.sigmas:
        report = bounds_report(prior, sigmas=cfg.sigmas)
    else:
        raise UsageError("bounds needs --data, --sigmas or --sizes")
    if cfg.format == "json":
        return report.model_dump_json(indent=2) + "\n"
    if cfg.format == "csv":
        return bounds_csv(report)
    return render_bounds(report)


def cmd_sweep(cfg: AnalysisConfig, delta: str | None, scales: str | None, family: str) -> str:
    if (delta is None) == (scales is None):
        raise UsageError("sweep needs exactly one of --delta or --scales")
    y = None
    if cfg.data is not None:
        dataset = parse_dataset(cfg.data)
        sigmas, labels = dataset.sigma.tolist(), dataset.labels
        y = dataset.y.tolist()
    elif cfg.sigmas:
        sigmas = cfg.sigmas
        labels = [str(i + 1) for i in range(len(sigmas))]
    else:
        raise UsageError("sweep needs --data, --sigmas or --sizes")
    targets = _resolve_targets(labels, cfg.target) or [0]
    if len(targets) > 1:
        raise UsageError("sweep takes a single --target")
    j = targets[0]
    if delta is not None:
        table = discrepancy_sweep(sigmas, parse_prior(cfg.prior), j, parse_delta_grid(delta), cfg.level, cfg.interval)
    else:
        table = prior_scale_sweep(
            sigmas, _float_list(scales, "--scales"), j, family, y=y, level=cfg.level, kind=cfg.interval
        )
    if cfg.format == "json":
        return table.model_dump_json(indent=2) + "\n"
    return sweep_csv(table)


def cmd_forest(cfg: AnalysisConfig) -> str:
    if cfg.data is None:
        raise UsageError("forest needs --data")
    if cfg.out is None:
        raise UsageError("forest needs --out <path>")
    studies = read_studies(cfg.data)
    shrinkage = []
    if cfg.target is not None and len(studies) > 1:
        dataset = Dataset(studies=studies)
        targets = _resolve_targets(dataset.labels, cfg.target)
        result = analyze(dataset, parse_prior(cfg.prior), cfg.level, cfg.interval, targets, with_tau=False)
        shrinkage = result.studies
    return build_forest_svg(studies, shrinkage, cfg.level)


# --- entry point ---


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shrinkbound", description="Shrinkage weights and bounds for two-level meta-analysis")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--data", help="CSV (study,y,sigma) or JSON file; cjd.csv and acidosis.csv are bundled")
    common.add_argument("--sigmas", help="comma-separated standard errors")
    common.add_argument("--sizes", help="comma-separated sample sizes (SE = uisd / sqrt(n))")
    common.add_argument("--uisd", type=float, default=4.0, help="unit-information SD for --sizes [4.0]")
    common.add_argument("--prior", default="half-normal:0.5", help="heterogeneity prior [half-normal:0.5]")
    common.add_argument("--level", type=float, default=0.95, help="credible level [0.95]")
    common.add_argument("--interval", choices=["central", "shortest"], default="shortest")
    common.add_argument("--target", help="study label or 1-based index (comma-separated for several)")
    common.add_argument("--format", choices=["text", "json", "csv"], default="text")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    analyze_p = sub.add_parser("analyze", parents=[common], help="posterior shrinkage weights and estimates")
    analyze_p.add_argument("--oracle", action="store_true", help="cross-check against brute-force oracles")

    sub.add_parser("bounds", parents=[common], help="FE / coincidence / actual self-weights")

    sweep_p = sub.add_parser("sweep", parents=[common], help="CSV table over a discrepancy or prior-scale grid")
    sweep_p.add_argument("--delta", help="inclusive grid lo:hi:step of y2 - y1 (k = 2)")
    sweep_p.add_argument("--scales", help="comma-separated prior scales")
    sweep_p.add_argument("--family", choices=["half-normal", "half-cauchy"], default="half-normal")

    sub.add_parser("forest", parents=[common], help="SVG forest plot with shrinkage rows for --target")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    verbose = False
    try:
        args = parser.parse_args(argv)
        verbose = args.verbose
        logging.basicConfig(
            level=logging.INFO if verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        cfg = _config(args)
        if args.command == "analyze":
            text = cmd_analyze(cfg)
        elif args.command == "bounds":
            text = cmd_bounds(cfg)
        elif args.command == "sweep":
            text = cmd_sweep(cfg, args.delta, args.scales, args.family)
        else:
            text = cmd_forest(cfg)
        _emit(text, cfg.out)
        return EXIT_OK
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, PriorSpecError) as exc:
        print(f"shrinkbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DomainError) as exc:
        logger.debug("command failed", exc_info=True)
        print(f"shrinkbound: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        logger.debug("numerical failure", exc_info=True)
        print(f"shrinkbound: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
