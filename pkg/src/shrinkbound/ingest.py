"""Reading study data files and heterogeneity prior specifications."""

from __future__ import annotations

import csv
import json
import logging
import math
from importlib import resources
try:
    from importlib.resources.abc import Traversable
except ImportError:  # Python < 3.11
    from importlib.abc import Traversable
from pathlib import Path

from pydantic import ValidationError

from .errors import DataError, DomainError, PriorSpecError
from .priors import HeterogeneityPrior
from .schemas import Dataset, Study

logger = logging.getLogger(__name__)

DATA_COLUMNS = ("study", "y", "sigma")
BUNDLED_DATASETS = ("cjd.csv", "acidosis.csv")


def resolve_data_path(name: str | Path) -> Path | Traversable:
    """Return ``name`` if it exists, else the bundled dataset of that name."""
    path = Path(name)
    if path.exists():
        return path
    if path.name in BUNDLED_DATASETS and path.name == str(name):
        logger.info("using bundled dataset %s", path.name)
        return resources.files("shrinkbound") / "data" / path.name
    raise DataError("file not found", path=str(name))


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    field = ".".join(str(p) for p in err["loc"])
    return f"{field}: {err['msg']}" if field else err["msg"]


def _study(row: dict, line: int, path: str) -> Study:
    try:
        return Study(label=str(row["study"]).strip(), y=float(row["y"]), sigma=float(row["sigma"]))
    except KeyError as exc:
        raise DataError(f"missing value for column {exc.args[0]!r}", line=line, path=path) from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise DataError(_first_error(exc), line=line, path=path) from exc
        raise DataError(f"non-numeric value in row {row}", line=line, path=path) from exc


def _read_csv(source: Path | Traversable, path: str) -> list[tuple[int, Study]]:
    with source.open("r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in reader.fieldnames or []]
        missing = [c for c in DATA_COLUMNS if c not in header]
        if missing:
            raise DataError(f"missing column(s): {', '.join(missing)}", line=1, path=path)
        reader.fieldnames = header
        rows = []
        for row in reader:
            if not any((v or "").strip() for v in row.values() if isinstance(v, str)):
                continue
            rows.append((reader.line_num, _study(row, reader.line_num, path)))
        return rows


def _read_json(source: Path | Traversable, path: str) -> list[tuple[int, Study]]:
    try:
        entries = json.loads(source.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON: {exc.msg}", line=exc.lineno, path=path) from exc
    if not isinstance(entries, list) or not all(isinstance(e, dict) for e in entries):
        raise DataError("expected a JSON array of objects", path=path)
    # JSON rows are numbered by array position, counting from 1
    return [(n, _study(e, n, path)) for n, e in enumerate(entries, start=1)]


def read_studies(path: str | Path) -> list[Study]:
    """All study rows of a CSV (``study,y,sigma``) or JSON file, in file order.

    Labels must be unique; a repeated label is reported at its second line.
    """
    source = resolve_data_path(path)
    label = str(path)
    read = _read_json if Path(source.name).suffix.lower() == ".json" else _read_csv
    try:
        rows = read(source, label)
    except UnicodeDecodeError as exc:
        raise DataError("file is not valid UTF-8", path=label) from exc
    except OSError as exc:
        raise DataError(f"cannot read file: {exc.strerror or exc}", path=label) from exc
    if not rows:
        raise DataError("no study rows", path=str(path))
    seen: dict[str, int] = {}
    for line, study in rows:
        if study.label in seen:
            raise DataError(
                f"duplicate study label {study.label!r} (first at line {seen[study.label]})",
                line=line,
                path=str(path),
            )
        seen[study.label] = line
    return [s for _, s in rows]


def parse_dataset(path: str | Path) -> Dataset:
    studies = read_studies(path)
    try:
        return Dataset(studies=studies)
    except ValidationError as exc:
        raise DataError(_first_error(exc), path=str(path)) from exc


# --- priors ---


def _prior_table_rows(p: Path, path: str) -> tuple[list[float], list[float]]:
    grid, dens = [], []
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if [h.strip() for h in reader.fieldnames or []] != ["tau", "density"]:
            raise PriorSpecError(f"{path}:1: prior table header must be 'tau,density'")
        for row in reader:
            try:
                grid.append(float(row["tau"]))
                dens.append(float(row["density"]))
            except (TypeError, ValueError) as exc:
                raise PriorSpecError(f"{path}:{reader.line_num}: non-numeric value") from exc
    return grid, dens


def _read_prior_table(path: str) -> HeterogeneityPrior:
    p = Path(path)
    if not p.exists():
        raise PriorSpecError(f"prior table {path!r} not found")
    try:
        grid, dens = _prior_table_rows(p, path)
    except UnicodeDecodeError as exc:
        raise PriorSpecError(f"prior table {path!r} is not valid UTF-8") from exc
    except OSError as exc:
        raise PriorSpecError(f"cannot read prior table {path!r}: {exc.strerror or exc}") from exc
    try:
        return HeterogeneityPrior.tabulated(grid, dens)
    except DomainError as exc:
        raise PriorSpecError(f"{path}: {exc}") from exc


def parse_prior(spec: str) -> HeterogeneityPrior:
    """Parse ``half-normal:<scale>``, ``half-cauchy:<scale>``, ``uniform:<upper>``
    or ``table:<path>``."""
    family, sep, arg = spec.strip().partition(":")
    family = family.strip().lower()
    if not sep or not arg.strip():
        raise PriorSpecError(f"prior spec {spec!r} must look like <family>:<parameter>")
    if family == "table":
        return _read_prior_table(arg.strip())
    if family not in ("half-normal", "half-cauchy", "uniform"):
        raise PriorSpecError(f"unknown prior family {family!r}")
    try:
        value = float(arg)
    except ValueError as exc:
        raise PriorSpecError(f"prior parameter {arg!r} is not a number") from exc
    if not (math.isfinite(value) and value > 0):
        raise PriorSpecError(f"prior parameter must be positive, got {arg.strip()}")
    return HeterogeneityPrior.of_family(family, value)
