"""Dataset files, config files, and JSON report assembly.

Datasets are CSV frequency tables with a ``value,count`` or ``label,count``
header, or bare newline-delimited observation lists. Labeled files map
labels onto consecutive integers in file order; a trailing label ending in
"+" (a censored top bin) is treated as the ordinary top support value.
Config files are flat ``key = value`` text mirroring the GridSpec and
EmConfig field names.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .em import FitResult
from .shape import ComparisonReport, ShapeSummary
from .types import CmpParams, EmConfig, FrequencyTable, GridSpec, MixtureParams, Support


class DatasetError(ValueError):
    """Malformed dataset file; the message carries the offending line."""


def _parse_int(text: str, what: str, lineno: int) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        raise DatasetError(f"line {lineno}: {what} {text!r} is not an integer") from None
    return value


def read_dataset(path: str | Path, lower: int | None = None, upper: int | None = None) -> FrequencyTable:
    """Parse a dataset file into a frequency table.

    ``lower``/``upper`` declare the support for raw observation lists and
    for value CSVs whose rows do not cover it; labeled files always span
    1..T in file order.
    """
    text = Path(path).read_text()
    if not text.strip():
        raise DatasetError(f"{path}: empty dataset file")
    first_line = next(line for line in text.splitlines() if line.strip())
    if "," in first_line:
        return _read_csv(text, lower, upper)
    return _read_raw(text, lower, upper)


def _read_csv(text: str, lower: int | None, upper: int | None) -> FrequencyTable:
    rows = list(csv.reader(_io.StringIO(text)))
    header = [cell.strip().lower() for cell in rows[0]]
    if header == ["value", "count"]:
        labeled = False
    elif header == ["label", "count"]:
        labeled = True
    else:
        raise DatasetError(
            f"line 1: header must be 'value,count' or 'label,count', got {rows[0]!r}"
        )
    entries = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise DatasetError(f"line {lineno}: expected 2 fields, got {len(row)}")
        key, count_text = row
        count = _parse_int(count_text, "count", lineno)
        if count < 0:
            raise DatasetError(f"line {lineno}: negative count {count}")
        entries.append((lineno, key.strip(), count))
    if not entries:
        raise DatasetError("no data rows found")

    if labeled:
        labels = [key for _, key, _ in entries]
        if len(set(labels)) != len(labels):
            raise DatasetError("duplicate labels")
        support = Support(1, len(labels))
        counts = np.array([c for _, _, c in entries])
        return FrequencyTable(support=support, counts=counts, labels=tuple(labels))

    by_value: dict[int, int] = {}
    for lineno, key, count in entries:
        value = _parse_int(key, "value", lineno)
        if value in by_value:
            raise DatasetError(f"line {lineno}: duplicate value {value}")
        by_value[value] = count
    lo = min(by_value) if lower is None else lower
    hi = max(by_value) if upper is None else upper
    for value in by_value:
        if not lo <= value <= hi:
            raise DatasetError(f"value {value} outside declared support [{lo}, {hi}]")
    support = Support(lo, hi)
    counts = np.array([by_value.get(v, 0) for v in range(lo, hi + 1)])
    return FrequencyTable(support=support, counts=counts)


def _read_raw(text: str, lower: int | None, upper: int | None) -> FrequencyTable:
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        values.append((_parse_int(line, "observation", lineno), lineno))
    if not values:
        raise DatasetError("no observations found")
    lo = min(v for v, _ in values) if lower is None else lower
    hi = max(v for v, _ in values) if upper is None else upper
    support = Support(lo, hi)
    counts = np.zeros(support.size, dtype=int)
    for value, lineno in values:
        if not lo <= value <= hi:
            raise DatasetError(f"line {lineno}: observation {value} outside support [{lo}, {hi}]")
        counts[value - lo] += 1
    return FrequencyTable(support=support, counts=counts)


def write_dataset(data: FrequencyTable) -> str:
    """CSV text that round-trips through :func:`read_dataset`."""
    out = _io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if data.labels is not None:
        writer.writerow(["label", "count"])
        for label, count in zip(data.labels, data.counts):
            writer.writerow([label, int(count)])
    else:
        writer.writerow(["value", "count"])
        for value, count in zip(data.support.values(), data.counts):
            writer.writerow([int(value), int(count)])
    return out.getvalue()


def flip_order(data: FrequencyTable) -> FrequencyTable:
    """Reverse the value ordering (counts and labels); support unchanged."""
    labels = tuple(reversed(data.labels)) if data.labels is not None else None
    return FrequencyTable(support=data.support, counts=data.counts[::-1].copy(), labels=labels)


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

_GRID_KEYS = {"nu_regions", "lambda_range", "points_per_region", "refinement_factor", "min_spacing"}
_EM_KEYS = {
    "max_em_iterations",
    "loglik_rel_tol",
    "inner_mstep_sweeps",
    "p_clamp",
    "init_strategies",
    "lambda_closeness_threshold",
}


def _parse_interval(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def parse_config(text: str) -> tuple[GridSpec, EmConfig]:
    """Parse ``key = value`` lines into grid and EM settings.

    Unknown keys are rejected; omitted keys keep their defaults. '#' starts
    a comment.
    """
    grid_kwargs: dict = {}
    em_kwargs: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "nu_regions":
            grid_kwargs[key] = tuple(_parse_interval(part) for part in value.split(","))
        elif key == "lambda_range":
            grid_kwargs[key] = None if value == "auto" else _parse_interval(value)
        elif key == "points_per_region":
            grid_kwargs[key] = int(value)
        elif key in ("refinement_factor", "min_spacing"):
            grid_kwargs[key] = float(value)
        elif key in ("max_em_iterations", "inner_mstep_sweeps"):
            em_kwargs[key] = int(value)
        elif key in ("loglik_rel_tol", "p_clamp", "lambda_closeness_threshold"):
            em_kwargs[key] = float(value)
        elif key == "init_strategies":
            em_kwargs[key] = tuple(part.strip() for part in value.split(","))
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    return GridSpec(**grid_kwargs), EmConfig(**em_kwargs)


def format_config(grid: GridSpec, config: EmConfig) -> str:
    """Render settings back into the flat config format."""
    lines = [
        "nu_regions = " + ",".join(f"{lo:g}:{hi:g}" for lo, hi in grid.nu_regions),
        "lambda_range = "
        + ("auto" if grid.lambda_range is None else f"{grid.lambda_range[0]:g}:{grid.lambda_range[1]:g}"),
        f"points_per_region = {grid.points_per_region}",
        f"refinement_factor = {grid.refinement_factor:g}",
        f"min_spacing = {grid.min_spacing:g}",
        f"max_em_iterations = {config.max_em_iterations}",
        f"loglik_rel_tol = {config.loglik_rel_tol:g}",
        f"inner_mstep_sweeps = {config.inner_mstep_sweeps}",
        f"p_clamp = {config.p_clamp:g}",
        "init_strategies = " + ",".join(config.init_strategies),
        f"lambda_closeness_threshold = {config.lambda_closeness_threshold:g}",
    ]
    return "\n".join(lines) + "\n"


def read_config(path: str | Path) -> tuple[GridSpec, EmConfig]:
    return parse_config(Path(path).read_text())


# ---------------------------------------------------------------------------
# JSON reports
# ---------------------------------------------------------------------------

def _params_dict(params: MixtureParams | CmpParams) -> dict:
    if isinstance(params, MixtureParams):
        return {
            "p": params.p,
            "lambda1": params.comp1.lam,
            "nu1": params.comp1.nu,
            "lambda2": params.comp2.lam,
            "nu2": params.comp2.nu,
        }
    return {"p": None, "lambda1": params.lam, "nu1": params.nu, "lambda2": None, "nu2": None}


def _shape_dict(shape: ShapeSummary) -> dict:
    return {
        "modes": shape.mode_values(),
        "lodes": shape.lode_values(),
        "peak_magnitudes": list(shape.peak_magnitudes),
        "dip_magnitudes": list(shape.dip_magnitudes),
    }


def fit_report(fit: FitResult) -> dict:
    """JSON-ready report for one fitted model."""
    report = {
        "model_kind": fit.model_kind,
        "params": _params_dict(fit.params),
        "loglik": fit.loglik,
        "complete_loglik": fit.complete_loglik,
        "aic": fit.aic,
        "aic_observed": fit.aic_observed,
        "k": fit.k,
        "expected_counts": [float(v) for v in fit.expected_counts],
        "modes": fit.shape.mode_values(),
        "lodes": fit.shape.lode_values(),
        "converged": fit.converged,
        "iterations": fit.iterations,
        "init_used": fit.init_used,
        "benchmark_superior": fit.benchmark_superior,
    }
    return report


def comparison_report(report: ComparisonReport) -> dict:
    """JSON-ready report for a multi-model comparison."""
    data = report.data
    models = []
    for mc in report.models:
        entry = fit_report(mc.fit)
        entry["max_abs_deviation"] = mc.max_abs_deviation
        entry["deviation_at_modes"] = list(mc.deviation_at_modes)
        entry["deviation_at_lodes"] = list(mc.deviation_at_lodes)
        models.append(entry)
    return {
        "support": [data.support.lower, data.support.upper],
        "n": data.n,
        "observed": [int(c) for c in data.counts],
        "labels": list(data.labels) if data.labels is not None else None,
        "data_shape": _shape_dict(report.data_shape),
        "models": models,
    }


def surface_report(
    p: float,
    lambda1: float,
    lambda2: float,
    nu1_grid,
    nu2_grid,
    matrix: np.ndarray,
) -> dict:
    return {
        "p": p,
        "lambda1": lambda1,
        "lambda2": lambda2,
        "nu1_grid": [float(v) for v in nu1_grid],
        "nu2_grid": [float(v) for v in nu2_grid],
        "loglik": [[float(v) for v in row] for row in np.atleast_2d(matrix)],
    }


def to_json(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"
