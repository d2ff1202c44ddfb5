"""Shared value types: supports, parameters, frequency tables, and settings.

Everything here is an immutable data carrier; the numerical work lives in
the sibling modules. Keeping the carriers in one place avoids circular
imports between the distribution, mixture, and fitting layers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class SupportMismatchError(ValueError):
    """Raised when two objects disagree about the integer support."""


@dataclass(frozen=True)
class Support:
    """Closed integer range [lower, upper] a truncated distribution lives on.

    Single-point supports are legal for the distribution layer (the pmf is
    then degenerate); fitting requires at least two points and checks that
    separately.
    """

    lower: int
    upper: int

    def __post_init__(self):
        if self.lower < 0:
            raise ValueError(f"support lower bound must be >= 0, got {self.lower}")
        if self.upper < self.lower:
            raise ValueError(f"support upper bound {self.upper} < lower bound {self.lower}")

    @property
    def size(self) -> int:
        return self.upper - self.lower + 1

    def values(self) -> np.ndarray:
        """All support points as an integer array."""
        return np.arange(self.lower, self.upper + 1)

    def index_of(self, x: int) -> int:
        if not self.lower <= x <= self.upper:
            raise ValueError(f"value {x} outside support [{self.lower}, {self.upper}]")
        return int(x) - self.lower


@dataclass(frozen=True)
class CmpParams:
    """One component's (lam, nu) pair: rate-like lam > 0, dispersion nu >= 0."""

    lam: float
    nu: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.nu < 0:
            raise ValueError(f"nu must be non-negative, got {self.nu}")


class DispersionClass(Enum):
    OVER = "over"    # nu < 1: longer tail than Poisson
    EQUI = "equi"    # nu == 1: Poisson
    UNDER = "under"  # nu > 1: shorter tail than Poisson


@dataclass(frozen=True)
class MixtureParams:
    """Two-component mixture: weight p on comp1, 1 - p on comp2."""

    p: float
    comp1: CmpParams
    comp2: CmpParams

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"mixing weight must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class FrequencyTable:
    """Observed data as one count per support value, with optional labels.

    Labels, when present, are ordered to match the support values (the
    first label belongs to ``support.lower``).
    """

    support: Support
    counts: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or len(counts) != self.support.size:
            raise ValueError(
                f"counts length {len(counts)} does not match support size {self.support.size}"
            )
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if not np.allclose(counts, np.rint(counts)):
            raise ValueError("counts must be integers")
        object.__setattr__(self, "counts", counts.astype(np.int64))
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.support.size:
                raise ValueError("labels length does not match support size")
            if len(set(labels)) != len(labels):
                raise ValueError("labels must be unique")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class GridSpec:
    """Settings for the refined grid searches used by all M-steps.

    ``nu_regions`` splits the dispersion axis into sub-ranges that each get
    ``points_per_region`` initial nodes; the rate axis gets
    ``points_per_region * len(nu_regions)`` nodes over ``lambda_range``.
    After the initial grid, the search repeatedly re-grids a window around
    the incumbent, shrinking the window by ``refinement_factor`` each stage,
    and stops before a stage whose node spacing would fall below
    ``min_spacing`` (so a large ``min_spacing`` disables refinement).
    ``lambda_range=None`` defaults to [0.05, 3 * upper support bound] at fit
    time.
    """

    nu_regions: tuple[tuple[float, float], ...] = ((0.0, 0.7), (0.7, 1.0), (1.0, 10.0))
    lambda_range: tuple[float, float] | None = None
    points_per_region: int = 12
    refinement_factor: float = 5.0
    min_spacing: float = 1e-3

    def __post_init__(self):
        regions = tuple((float(lo), float(hi)) for lo, hi in self.nu_regions)
        if not regions:
            raise ValueError("nu_regions must not be empty")
        prev_hi = None
        for lo, hi in regions:
            if lo < 0 or hi < lo:
                raise ValueError(f"bad nu region ({lo}, {hi})")
            if prev_hi is not None and lo < prev_hi:
                raise ValueError("nu regions must be ordered and disjoint")
            prev_hi = hi
        object.__setattr__(self, "nu_regions", regions)
        if self.lambda_range is not None:
            lo, hi = (float(v) for v in self.lambda_range)
            if not 0 < lo <= hi:
                raise ValueError(f"bad lambda_range ({lo}, {hi})")
            object.__setattr__(self, "lambda_range", (lo, hi))
        if self.points_per_region < 3:
            raise ValueError("points_per_region must be >= 3")
        if not self.refinement_factor > 1:
            raise ValueError("refinement_factor must be > 1")
        if not self.min_spacing > 0:
            raise ValueError("min_spacing must be > 0")

    @property
    def nu_max(self) -> float:
        return self.nu_regions[-1][1]

    @property
    def nu_min(self) -> float:
        return self.nu_regions[0][0]

    def resolve_lambda_range(self, support: Support) -> tuple[float, float]:
        if self.lambda_range is not None:
            return self.lambda_range
        return (0.05, 3.0 * support.upper)


@dataclass(frozen=True)
class EmConfig:
    """Iteration limits, tolerances, and initialization choices for fitting.

    ``loglik_rel_tol`` is relative: a step is considered converged when the
    log-likelihood gain is below ``tol * (1 + |loglik|)``. The mixing weight
    is kept inside [p_clamp, 1 - p_clamp] throughout iteration. When the
    benchmark mixture's two rates differ by less than
    ``lambda_closeness_threshold`` (in support units), the rate-based
    initialization falls back to the two observed peak locations.
    """

    max_em_iterations: int = 500
    loglik_rel_tol: float = 1e-8
    inner_mstep_sweeps: int = 5
    p_clamp: float = 1e-6
    init_strategies: tuple[str, ...] = ("poisson", "peaks", "peak_ratio")
    lambda_closeness_threshold: float = 0.5

    def __post_init__(self):
        if self.max_em_iterations < 1:
            raise ValueError("max_em_iterations must be >= 1")
        if not 0 < self.loglik_rel_tol < 1:
            raise ValueError("loglik_rel_tol must be in (0, 1)")
        if self.inner_mstep_sweeps < 1:
            raise ValueError("inner_mstep_sweeps must be >= 1")
        if not 0 < self.p_clamp < 0.5:
            raise ValueError("p_clamp must be in (0, 0.5)")
        strategies = tuple(self.init_strategies)
        known = {"poisson", "peaks", "peak_ratio"}
        bad = set(strategies) - known
        if bad or not strategies:
            raise ValueError(f"init_strategies must be a non-empty subset of {sorted(known)}")
        object.__setattr__(self, "init_strategies", strategies)
        if not self.lambda_closeness_threshold > 0:
            raise ValueError("lambda_closeness_threshold must be > 0")
