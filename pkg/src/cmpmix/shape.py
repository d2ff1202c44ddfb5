"""Shape analysis: modes, lodes, peaks, dips, AIC, and model comparison.

Counts are rounded to integers before detection by default, matching how
frequency tables are read in practice; adjacent equal values merge into
plateaus, and a plateau is a mode (lode) when strictly greater (smaller)
than its flanking plateaus. A relative-prominence filter then discards
micro-wiggles: a feature must stand out from its surroundings by at least
``min_prominence`` of the local level to count. Features with no higher
(lower) ground on either side, such as the global maximum, always count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .types import FrequencyTable, SupportMismatchError

if TYPE_CHECKING:  # pragma: no cover
    from .em import FitResult

DEFAULT_MIN_PROMINENCE = 0.05


def round_counts(values: np.ndarray) -> np.ndarray:
    """Round half away from zero, as count tables are conventionally shown."""
    return np.floor(np.asarray(values, dtype=float) + 0.5)


@dataclass(frozen=True)
class ShapeSummary:
    """Modes and lodes as plateau ranges, with their count magnitudes.

    Each range is an inclusive (start, end) pair in support-value
    coordinates; a single-point feature has start == end. Modes and lodes
    alternate along the support.
    """

    modes: tuple[tuple[int, int], ...]
    lodes: tuple[tuple[int, int], ...]
    peak_magnitudes: tuple[float, ...]
    dip_magnitudes: tuple[float, ...]

    def mode_values(self) -> list[list[int]]:
        return [list(range(a, b + 1)) for a, b in self.modes]

    def lode_values(self) -> list[list[int]]:
        return [list(range(a, b + 1)) for a, b in self.lodes]


def _plateaus(values: np.ndarray) -> list[tuple[int, int, float]]:
    """Maximal runs of equal adjacent values as (start, end, value)."""
    out = []
    start = 0
    for i in range(1, len(values)):
        if values[i] != values[start]:
            out.append((start, i - 1, float(values[start])))
            start = i
    out.append((start, len(values) - 1, float(values[start])))
    return out


def _side_extreme(levels: Sequence[float], i: int, step: int, kind: str) -> float | None:
    """Walk from plateau i until strictly higher (mode) / lower (lode) ground.

    Returns the saddle (min seen, for modes) or ridge (max seen, for lodes)
    along the walk, or None when the walk ends without reaching such ground
    (an "open" side).
    """
    h = levels[i]
    extreme = None
    j = i + step
    while 0 <= j < len(levels):
        v = levels[j]
        if kind == "mode":
            if v > h:
                return extreme if extreme is not None else h
            extreme = v if extreme is None else min(extreme, v)
        else:
            if v < h:
                return extreme if extreme is not None else h
            extreme = v if extreme is None else max(extreme, v)
        j += step
    return None


def _prominent(levels: Sequence[float], i: int, kind: str, min_prominence: float) -> bool:
    left = _side_extreme(levels, i, -1, kind)
    right = _side_extreme(levels, i, +1, kind)
    closed = [s for s in (left, right) if s is not None]
    if not closed:
        # No higher (lower) ground anywhere: global extreme, always kept.
        return True
    h = levels[i]
    if kind == "mode":
        saddle = max(closed)
        return h > 0 and (h - saddle) >= min_prominence * h
    ridge = min(closed)
    return ridge > 0 and (ridge - h) >= min_prominence * ridge


def _enforce_alternation(features: list[tuple[int, str, float]]) -> list[tuple[int, str, float]]:
    """Drop the weaker of any two consecutive same-kind features."""
    changed = True
    while changed:
        changed = False
        for i in range(len(features) - 1):
            (ia, ka, va), (ib, kb, vb) = features[i], features[i + 1]
            if ka != kb:
                continue
            if ka == "mode":
                drop = i + 1 if va >= vb else i
            else:
                drop = i + 1 if va <= vb else i
            del features[drop]
            changed = True
            break
    return features


def detect_shape(
    counts: np.ndarray,
    lower: int = 1,
    round_counts: bool = True,
    min_prominence: float = DEFAULT_MIN_PROMINENCE,
) -> ShapeSummary:
    """Locate mode and lode plateaus in a count vector.

    ``lower`` is the support value of the first entry, so reported ranges
    are in value coordinates. ``round_counts=False`` analyses the raw
    (e.g. expected-count or pmf) vector; ``min_prominence=0`` keeps every
    strict local extreme.
    """
    values = np.asarray(counts, dtype=float)
    if values.ndim != 1 or len(values) < 2:
        raise ValueError("detect_shape needs a 1-D vector of length >= 2")
    if round_counts:
        values = np.floor(values + 0.5)
    plats = _plateaus(values)
    levels = [v for _, _, v in plats]

    features: list[tuple[int, str, float]] = []
    for i, (_, _, v) in enumerate(plats):
        left = levels[i - 1] if i > 0 else None
        right = levels[i + 1] if i < len(plats) - 1 else None
        flanks = [f for f in (left, right) if f is not None]
        if not flanks:  # one plateau spanning everything: no shape features
            continue
        if all(v > f for f in flanks):
            kind = "mode"
        elif all(v < f for f in flanks):
            kind = "lode"
        else:
            continue
        if _prominent(levels, i, kind, min_prominence):
            features.append((i, kind, v))

    features = _enforce_alternation(features)

    modes, lodes, peaks, dips = [], [], [], []
    for i, kind, v in features:
        start, end, _ = plats[i]
        rng = (start + lower, end + lower)
        if kind == "mode":
            modes.append(rng)
            peaks.append(v)
        else:
            lodes.append(rng)
            dips.append(v)
    return ShapeSummary(
        modes=tuple(modes), lodes=tuple(lodes),
        peak_magnitudes=tuple(peaks), dip_magnitudes=tuple(dips),
    )


def expected_counts(pmf: np.ndarray, n: int) -> np.ndarray:
    """n * pmf(x) per value; sums to n when the pmf sums to 1."""
    pmf = np.asarray(pmf, dtype=float)
    if not np.isclose(pmf.sum(), 1.0, atol=1e-9):
        raise ValueError(f"pmf sums to {pmf.sum()}, expected 1")
    return n * pmf


def aic(loglik: float, k: int) -> float:
    """-2 * loglik + 2 * k; lower is better."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return -2.0 * loglik + 2.0 * k


@dataclass(frozen=True)
class ModelComparison:
    """One fitted model's fit statistics against a shared dataset."""

    fit: "FitResult"
    max_abs_deviation: float
    deviation_at_modes: tuple[float, ...]
    deviation_at_lodes: tuple[float, ...]


@dataclass(frozen=True)
class ComparisonReport:
    """Observed data, its shape, and per-model deviations."""

    data: FrequencyTable
    data_shape: ShapeSummary
    models: tuple[ModelComparison, ...]


def _range_deviation(observed: np.ndarray, expected: np.ndarray, rng: tuple[int, int], lower: int) -> float:
    a, b = rng[0] - lower, rng[1] - lower
    return float(np.max(np.abs(observed[a : b + 1] - expected[a : b + 1])))


def compare(data: FrequencyTable, fits: Sequence["FitResult"]) -> ComparisonReport:
    """Assemble per-model deviations at the observed modes and lodes."""
    lower = data.support.lower
    data_shape = detect_shape(data.counts, lower=lower)
    observed = data.counts.astype(float)
    models = []
    for fit in fits:
        if fit.support != data.support:
            raise SupportMismatchError(
                f"fit support {fit.support} does not match data support {data.support}"
            )
        exp = np.asarray(fit.expected_counts, dtype=float)
        models.append(
            ModelComparison(
                fit=fit,
                max_abs_deviation=float(np.max(np.abs(observed - exp))),
                deviation_at_modes=tuple(
                    _range_deviation(observed, exp, rng, lower) for rng in data_shape.modes
                ),
                deviation_at_lodes=tuple(
                    _range_deviation(observed, exp, rng, lower) for rng in data_shape.lodes
                ),
            )
        )
    return ComparisonReport(data=data, data_shape=data_shape, models=tuple(models))


def loglik_surface(
    data: FrequencyTable,
    p: float,
    lambda1: float,
    lambda2: float,
    nu1_grid: Sequence[float],
    nu2_grid: Sequence[float],
) -> np.ndarray:
    """Observed log-likelihood at every (nu1, nu2) node, row-major.

    Rows follow ``nu1_grid``, columns ``nu2_grid``; p and both rates stay
    fixed. Every cell is finite because positive rates give positive pmfs.
    """
    from .cmp import pmf_rows  # local import keeps module deps one-way

    nu1_grid = np.asarray(nu1_grid, dtype=float)
    nu2_grid = np.asarray(nu2_grid, dtype=float)
    P1 = pmf_rows(np.full(len(nu1_grid), lambda1), nu1_grid, data.support)
    P2 = pmf_rows(np.full(len(nu2_grid), lambda2), nu2_grid, data.support)
    M = p * P1[:, None, :] + (1.0 - p) * P2[None, :, :]
    return np.sum(data.counts[None, None, :] * np.log(M), axis=2)


def format_surface(nu1_grid: Sequence[float], nu2_grid: Sequence[float], matrix: np.ndarray) -> str:
    """Plain-text export: two axis header lines, then the matrix rows."""
    lines = [
        "# nu1: " + " ".join(f"{v:.6g}" for v in nu1_grid),
        "# nu2: " + " ".join(f"{v:.6g}" for v in nu2_grid),
    ]
    for row in np.atleast_2d(matrix):
        lines.append(" ".join(f"{v:.10g}" for v in row))
    return "\n".join(lines) + "\n"
