"""Constant-dispersion (truncated Poisson) mixture and single-component fits.

These share the CMP grid machinery with the dispersion axes pinned to 1, so
they inherit the same ascent, determinism, and tie-break behavior; they
serve as initialization sources and as the benchmark every mixture fit is
checked against. Truncation is respected: the component pmfs are
renormalized over the data's support.
"""

from __future__ import annotations

from dataclasses import replace

from .em import (
    PINNED_NU_REGION,
    FitResult,
    _em_run,
    _single_fit,
    mixture_fit_result,
    poisson_start,
    single_fit_result,
)
from .types import EmConfig, FrequencyTable, GridSpec


def fit_poisson_mixture(
    data: FrequencyTable, grid: GridSpec | None = None, config: EmConfig | None = None
) -> FitResult:
    """EM fit of the two-component truncated Poisson mixture (k = 3)."""
    grid = grid or GridSpec()
    config = config or EmConfig()
    if data.n < 1:
        raise ValueError("cannot fit empty data")
    if data.support.size < 2:
        raise ValueError("fitting needs at least 2 support points")
    pinned = replace(grid, nu_regions=PINNED_NU_REGION)
    init = poisson_start(data, grid)
    params, trace, iters, conv = _em_run(data, init, pinned, config)
    return mixture_fit_result(
        data, params, "poisson_mixture", trace, iters, conv, "peaks", grid, config
    )


def fit_single_poisson(data: FrequencyTable, grid: GridSpec | None = None) -> FitResult:
    """Maximum likelihood for a single truncated Poisson (k = 1)."""
    if data.n < 1:
        raise ValueError("cannot fit empty data")
    grid = grid or GridSpec()
    params, best = _single_fit(data, grid, pin_nu=True)
    return single_fit_result(data, params, best, "single_poisson", grid)
