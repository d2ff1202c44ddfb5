"""EM fitting with a two-step alternating grid-search M-step.

Each M-step alternates a 2-D grid search over the dispersion pair (rates
fixed) with one over the rate pair (dispersions fixed), refining a window
around the incumbent until the node spacing drops below the configured
minimum. The current parameter point is injected into every grid, so no
search can return a worse point than it was given and the outer EM loop
never decreases the observed log-likelihood. Ties between equal-likelihood
nodes break toward the lexicographically smallest value pair, which makes
fits reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .cmp import pmf_rows
from .mixture import (
    Responsibilities,
    canonicalize,
    complete_loglik,
    mixture_pmf,
    observed_loglik,
    responsibilities,
)
from .shape import ShapeSummary, aic, detect_shape
from .types import CmpParams, EmConfig, FrequencyTable, GridSpec, MixtureParams, Support

MODEL_K = {"cmp_mixture": 5, "poisson_mixture": 3, "single_cmp": 2, "single_poisson": 1}

# nu axes pinned to this region turn the CMP machinery into the
# constant-dispersion (Poisson) special case.
PINNED_NU_REGION = ((1.0, 1.0),)


@dataclass(frozen=True)
class FitResult:
    """A fitted model plus everything needed to report and compare it.

    ``loglik`` is the observed-data log-likelihood the optimizer maximizes.
    ``complete_loglik`` is the latent-variable log-likelihood at the final
    responsibilities; ``aic`` is computed from it (see README), while
    ``aic_observed`` is the classical -2*loglik + 2k. For single-component
    models the two coincide.
    """

    params: MixtureParams | CmpParams
    model_kind: str
    support: Support
    loglik: float
    complete_loglik: float
    k: int
    aic: float
    aic_observed: float
    expected_counts: np.ndarray
    shape: ShapeSummary
    loglik_trace: tuple[float, ...]
    iterations: int
    converged: bool
    init_used: str | None
    grid: GridSpec
    config: EmConfig | None
    benchmark: "FitResult | None" = None
    benchmark_superior: bool = False


# ---------------------------------------------------------------------------
# Grid-search machinery
# ---------------------------------------------------------------------------

def _axis_from_regions(regions: Sequence[tuple[float, float]], ppr: int) -> np.ndarray:
    parts = [
        np.linspace(lo, hi, ppr) if hi > lo else np.array([lo]) for lo, hi in regions
    ]
    return np.unique(np.concatenate(parts))


def _window_axis(center: float, width: float, bounds: tuple[float, float], ppr: int) -> np.ndarray:
    lo = max(bounds[0], center - width / 2.0)
    hi = min(bounds[1], center + width / 2.0)
    return np.unique(np.append(np.linspace(lo, hi, ppr), center))


def _mix_ll_matrix(counts: np.ndarray, p: float, P1: np.ndarray, P2: np.ndarray) -> np.ndarray:
    """Log-likelihood of every component-pmf pairing: shape (K1, K2).

    Zero-count support columns are dropped up front (the component pmfs are
    already normalized over the full support), which also keeps 0 * log(0)
    out of the sums.
    """
    pos = counts > 0
    if not pos.all():
        counts, P1, P2 = counts[pos], P1[:, pos], P2[:, pos]
    M = p * P1[:, None, :] + (1.0 - p) * P2[None, :, :]
    with np.errstate(divide="ignore"):
        L = np.log(M)
    return (counts * L).sum(axis=2)


def _refined_argmax(
    ll_matrix_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    axes: tuple[np.ndarray, np.ndarray],
    bounds: tuple[tuple[float, float], tuple[float, float]],
    start: tuple[float, float] | None,
    grid: GridSpec,
) -> tuple[float, float, float]:
    """Maximize over a 2-D grid with window refinement around the incumbent.

    The maximum over exact ties is the lexicographically smallest value
    pair; refinement stops before any stage whose node spacing would fall
    below ``grid.min_spacing``.
    """
    if start is not None:
        a1 = np.unique(np.append(axes[0], start[0]))
        a2 = np.unique(np.append(axes[1], start[1]))
    else:
        a1, a2 = axes
    (lo1, hi1), (lo2, hi2) = bounds
    width1, width2 = hi1 - lo1, hi2 - lo2
    best_ll = -np.inf
    best = (a1[0], a2[0])
    ppr = grid.points_per_region
    while True:
        LL = ll_matrix_fn(a1, a2)
        mx = LL.max()
        if mx > best_ll:
            i, j = np.argwhere(LL == mx)[0]
            best_ll = float(mx)
            best = (float(a1[i]), float(a2[j]))
        width1 /= grid.refinement_factor
        width2 /= grid.refinement_factor
        if max(width1, width2) / (ppr - 1) < grid.min_spacing:
            break
        a1 = _window_axis(best[0], width1, (lo1, hi1), ppr)
        a2 = _window_axis(best[1], width2, (lo2, hi2), ppr)
    return best[0], best[1], best_ll


# ---------------------------------------------------------------------------
# M-step
# ---------------------------------------------------------------------------

def m_step_nus(
    data: FrequencyTable,
    p: float,
    lambda1: float,
    lambda2: float,
    grid: GridSpec,
    start: tuple[float, float] | None = None,
) -> tuple[float, float, float]:
    """Maximize the observed log-likelihood over the (nu1, nu2) grid.

    ``start`` is the incoming point; it is injected into the grid so the
    returned log-likelihood is never below the one at entry.
    """
    base = _axis_from_regions(grid.nu_regions, grid.points_per_region)
    counts = data.counts

    def ll(a1, a2):
        P1 = pmf_rows(np.full(len(a1), lambda1), a1, data.support)
        P2 = pmf_rows(np.full(len(a2), lambda2), a2, data.support)
        return _mix_ll_matrix(counts, p, P1, P2)

    nb = (grid.nu_min, grid.nu_max)
    return _refined_argmax(ll, (base, base), (nb, nb), start, grid)


def m_step_lambdas(
    data: FrequencyTable,
    p: float,
    nu1: float,
    nu2: float,
    grid: GridSpec,
    start: tuple[float, float] | None = None,
) -> tuple[float, float, float]:
    """Mirror of :func:`m_step_nus` over the (lambda1, lambda2) grid."""
    lb = grid.resolve_lambda_range(data.support)
    base = np.linspace(lb[0], lb[1], grid.points_per_region * len(grid.nu_regions))
    counts = data.counts

    def ll(a1, a2):
        P1 = pmf_rows(a1, np.full(len(a1), nu1), data.support)
        P2 = pmf_rows(a2, np.full(len(a2), nu2), data.support)
        return _mix_ll_matrix(counts, p, P1, P2)

    return _refined_argmax(ll, (base, base), (lb, lb), start, grid)


def m_step(
    data: FrequencyTable, current: MixtureParams, grid: GridSpec, config: EmConfig
) -> MixtureParams:
    """Alternate the dispersion and rate searches at fixed mixing weight.

    The dispersion step runs first (it converges faster that way); sweeps
    stop early once the inner gain drops below the relative tolerance. The
    observed log-likelihood never decreases.
    """
    p = current.p
    l1, n1 = current.comp1.lam, current.comp1.nu
    l2, n2 = current.comp2.lam, current.comp2.nu
    ll_prev = observed_loglik(current, data)
    for _ in range(config.inner_mstep_sweeps):
        n1, n2, _ = m_step_nus(data, p, l1, l2, grid, start=(n1, n2))
        l1, l2, ll = m_step_lambdas(data, p, n1, n2, grid, start=(l1, l2))
        if ll - ll_prev <= config.loglik_rel_tol * (1.0 + abs(ll_prev)):
            break
        ll_prev = ll
    return MixtureParams(p=p, comp1=CmpParams(l1, n1), comp2=CmpParams(l2, n2))


def update_p(resp: Responsibilities, data: FrequencyTable, p_clamp: float = 1e-6) -> float:
    """Count-weighted mean responsibility, clamped away from 0 and 1."""
    if data.n == 0:
        raise ValueError("cannot update mixing weight on empty data")
    p = float(np.sum(data.counts * np.asarray(resp)) / data.n)
    return float(np.clip(p, p_clamp, 1.0 - p_clamp))


# ---------------------------------------------------------------------------
# Initialization
# ---------------------------------------------------------------------------

def is_bimodal(data: FrequencyTable) -> bool:
    """True when the empirical counts show at least two peaks."""
    return len(detect_shape(data.counts, lower=data.support.lower).modes) >= 2


def _peak_pair(data: FrequencyTable) -> tuple[int, int]:
    """Leftmost cell of the first peak and rightmost cell of the last."""
    shape = detect_shape(data.counts, lower=data.support.lower)
    if len(shape.modes) < 2:
        raise ValueError("data does not show two peaks")
    return shape.modes[0][0], shape.modes[-1][1]


def _mass_split(data: FrequencyTable, m1: int, m2: int) -> float:
    """Fraction of total mass nearer to m1; equidistant mass splits evenly."""
    xs = data.support.values()
    d1 = np.abs(xs - m1)
    d2 = np.abs(xs - m2)
    w = np.where(d1 < d2, 1.0, np.where(d1 == d2, 0.5, 0.0))
    return float(np.sum(w * data.counts) / data.n)


def _weighted_quantile(data: FrequencyTable, q: float) -> float:
    cdf = np.cumsum(data.counts) / data.n
    return float(data.support.values()[int(np.searchsorted(cdf, q, side="left"))])


def _clip_lam(value: float, grid: GridSpec, support: Support) -> float:
    lo, hi = grid.resolve_lambda_range(support)
    return float(np.clip(value, lo, hi))


def poisson_start(data: FrequencyTable, grid: GridSpec) -> MixtureParams:
    """Deterministic starting point for the constant-dispersion benchmark."""
    shape = detect_shape(data.counts, lower=data.support.lower)
    if len(shape.modes) >= 2:
        m1, m2 = shape.modes[0][0], shape.modes[-1][1]
        p = _mass_split(data, m1, m2)
    else:
        m1, m2 = _weighted_quantile(data, 0.25), _weighted_quantile(data, 0.75)
        if m2 <= m1:
            m2 = m1 + 1.0
        p = 0.5
    l1 = _clip_lam(m1, grid, data.support)
    l2 = _clip_lam(m2, grid, data.support)
    return MixtureParams(p=p, comp1=CmpParams(l1, 1.0), comp2=CmpParams(l2, 1.0))


def init_poisson(
    data: FrequencyTable,
    grid: GridSpec | None = None,
    config: EmConfig | None = None,
    poisson_fit: "FitResult | None" = None,
) -> MixtureParams:
    """Start from the fitted constant-dispersion mixture, dispersions at 1.

    When the benchmark's two rates come out closer than the configured
    threshold (it failed to separate the components), the rates are replaced
    by the two observed peak locations. A precomputed ``poisson_fit`` is
    reused when given.
    """
    from .baselines import fit_poisson_mixture

    grid = grid or GridSpec()
    config = config or EmConfig()
    if poisson_fit is None:
        poisson_fit = fit_poisson_mixture(data, grid, config)
    params = poisson_fit.params
    l1, l2 = params.comp1.lam, params.comp2.lam
    p = params.p
    if abs(l1 - l2) < config.lambda_closeness_threshold:
        m1, m2 = _peak_pair(data)
        l1 = _clip_lam(m1, grid, data.support)
        l2 = _clip_lam(m2, grid, data.support)
    return MixtureParams(p=p, comp1=CmpParams(l1, 1.0), comp2=CmpParams(l2, 1.0))


def init_peaks(data: FrequencyTable, grid: GridSpec | None = None) -> MixtureParams:
    """Rates at the two observed peaks, dispersions at 1, weight by mass."""
    grid = grid or GridSpec()
    m1, m2 = _peak_pair(data)
    p = _mass_split(data, m1, m2)
    return MixtureParams(
        p=p,
        comp1=CmpParams(_clip_lam(m1, grid, data.support), 1.0),
        comp2=CmpParams(_clip_lam(m2, grid, data.support), 1.0),
    )


def _ratio_law_nu(data: FrequencyTable, peak: int, inward: int, lam: float, grid: GridSpec) -> float:
    """Dispersion solving pmf(x-1)/pmf(x) = x**nu / lam at the peak edge.

    Uses the count ratio at the peak and its inward neighbor; zero counts
    are replaced by 0.5 before taking logs.
    """
    x = max(peak, inward)
    if x < 2:
        return 1.0
    lo = data.support.lower
    c_hi = max(float(data.counts[x - lo]), 0.5)
    c_lo = max(float(data.counts[x - 1 - lo]), 0.5)
    nu = (np.log(lam) + np.log(c_lo / c_hi)) / np.log(x)
    return float(np.clip(nu, grid.nu_min, grid.nu_max))


def init_peak_ratio(data: FrequencyTable, grid: GridSpec | None = None) -> MixtureParams:
    """Rates at the peaks, dispersions from the peak-edge frequency ratio.

    Each peak's inward neighbor is the one toward the other peak (so the
    right neighbor for the left peak, the left neighbor for the right one).
    """
    grid = grid or GridSpec()
    m1, m2 = _peak_pair(data)
    p = _mass_split(data, m1, m2)
    l1 = _clip_lam(m1, grid, data.support)
    l2 = _clip_lam(m2, grid, data.support)
    nu1 = _ratio_law_nu(data, m1, m1 + 1, l1, grid)
    nu2 = _ratio_law_nu(data, m2, m2 - 1, l2, grid)
    return MixtureParams(p=p, comp1=CmpParams(l1, nu1), comp2=CmpParams(l2, nu2))


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

def _em_run(
    data: FrequencyTable, init: MixtureParams, grid: GridSpec, config: EmConfig
) -> tuple[MixtureParams, tuple[float, ...], int, bool]:
    p = float(np.clip(init.p, config.p_clamp, 1.0 - config.p_clamp))
    params = MixtureParams(p=p, comp1=init.comp1, comp2=init.comp2)
    trace = [observed_loglik(params, data)]
    converged = False
    iterations = 0
    for it in range(config.max_em_iterations):
        resp = responsibilities(params, data)
        p = update_p(resp, data, config.p_clamp)
        params = m_step(data, replace(params, p=p), grid, config)
        trace.append(observed_loglik(params, data))
        iterations = it + 1
        if abs(trace[-1] - trace[-2]) <= config.loglik_rel_tol * (1.0 + abs(trace[-2])):
            converged = True
            break
    return params, tuple(trace), iterations, converged


def mixture_fit_result(
    data: FrequencyTable,
    params: MixtureParams,
    model_kind: str,
    trace: tuple[float, ...],
    iterations: int,
    converged: bool,
    init_used: str | None,
    grid: GridSpec,
    config: EmConfig | None,
    benchmark: FitResult | None = None,
    benchmark_superior: bool = False,
) -> FitResult:
    params = canonicalize(params, data.support)
    ll = observed_loglik(params, data)
    cll = complete_loglik(params, data, responsibilities(params, data))
    k = MODEL_K[model_kind]
    exp = data.n * mixture_pmf(params, data.support)
    return FitResult(
        params=params,
        model_kind=model_kind,
        support=data.support,
        loglik=ll,
        complete_loglik=cll,
        k=k,
        aic=aic(cll, k),
        aic_observed=aic(ll, k),
        expected_counts=exp,
        shape=_shape_of(exp, data.support),
        loglik_trace=trace,
        iterations=iterations,
        converged=converged,
        init_used=init_used,
        grid=grid,
        config=config,
        benchmark=benchmark,
        benchmark_superior=benchmark_superior,
    )


def _single_fit(data: FrequencyTable, grid: GridSpec, pin_nu: bool) -> tuple[CmpParams, float]:
    """Refined (lam, nu) grid maximization of the one-component likelihood."""
    lb = grid.resolve_lambda_range(data.support)
    lam_axis = np.linspace(lb[0], lb[1], grid.points_per_region * len(grid.nu_regions))
    if pin_nu:
        nu_axis, nu_bounds = np.array([1.0]), (1.0, 1.0)
    else:
        nu_axis = _axis_from_regions(grid.nu_regions, grid.points_per_region)
        nu_bounds = (grid.nu_min, grid.nu_max)
    counts = data.counts

    pos = counts > 0

    def ll(a_lam, a_nu):
        lam_mesh, nu_mesh = np.meshgrid(a_lam, a_nu, indexing="ij")
        P = pmf_rows(lam_mesh.ravel(), nu_mesh.ravel(), data.support)
        with np.errstate(divide="ignore"):
            L = np.log(P[:, pos])
        return (counts[pos] * L).sum(axis=1).reshape(len(a_lam), len(a_nu))

    lam, nu, best = _refined_argmax(ll, (lam_axis, nu_axis), (lb, nu_bounds), None, grid)
    return CmpParams(lam, nu), best


def _shape_of(expected: np.ndarray, support: Support) -> ShapeSummary:
    if support.size < 2:  # a single cell has no shape features
        return ShapeSummary(modes=(), lodes=(), peak_magnitudes=(), dip_magnitudes=())
    return detect_shape(expected, lower=support.lower)


def single_fit_result(
    data: FrequencyTable, params: CmpParams, loglik: float, model_kind: str, grid: GridSpec
) -> FitResult:
    from .cmp import pmf_truncated

    k = MODEL_K[model_kind]
    exp = data.n * pmf_truncated(params, data.support)
    return FitResult(
        params=params,
        model_kind=model_kind,
        support=data.support,
        loglik=loglik,
        complete_loglik=loglik,
        k=k,
        aic=aic(loglik, k),
        aic_observed=aic(loglik, k),
        expected_counts=exp,
        shape=_shape_of(exp, data.support),
        loglik_trace=(loglik,),
        iterations=1,
        converged=True,
        init_used="grid",
        grid=grid,
        config=None,
    )


def fit_single_cmp(data: FrequencyTable, grid: GridSpec | None = None) -> FitResult:
    """Maximum likelihood for a single truncated component, by refined grid."""
    if data.n < 1:
        raise ValueError("cannot fit empty data")
    grid = grid or GridSpec()
    params, best = _single_fit(data, grid, pin_nu=False)
    return single_fit_result(data, params, best, "single_cmp", grid)


def em_fit(
    data: FrequencyTable, grid: GridSpec | None = None, config: EmConfig | None = None
) -> FitResult:
    """Fit the two-component mixture, or a single component when unimodal.

    Unimodal data never gets a mixture (an identifiability guard): it
    routes to :func:`fit_single_cmp` with a single-component benchmark.
    Bimodal data runs one EM per enabled initialization strategy and keeps
    the best run by observed log-likelihood; the constant-dispersion
    mixture benchmark is always fitted and attached, and the result is
    flagged ``benchmark_superior`` in the rare case it wins.
    """
    from .baselines import fit_poisson_mixture, fit_single_poisson

    grid = grid or GridSpec()
    config = config or EmConfig()
    if data.n < 1:
        raise ValueError("cannot fit empty data")
    if data.support.size < 2:
        raise ValueError("fitting needs at least 2 support points")

    if not is_bimodal(data):
        single = fit_single_cmp(data, grid)
        bench = fit_single_poisson(data, grid)
        return replace(
            single,
            config=config,
            benchmark=bench,
            benchmark_superior=bench.loglik > single.loglik,
        )

    bench = fit_poisson_mixture(data, grid, config)
    initializers = {
        "poisson": lambda: init_poisson(data, grid, config, poisson_fit=bench),
        "peaks": lambda: init_peaks(data, grid),
        "peak_ratio": lambda: init_peak_ratio(data, grid),
    }
    runs = []
    for name in config.init_strategies:
        params, trace, iters, conv = _em_run(data, initializers[name](), grid, config)
        runs.append((trace[-1], name, params, trace, iters, conv))
    best_ll, name, params, trace, iters, conv = max(runs, key=lambda r: r[0])
    return mixture_fit_result(
        data, params, "cmp_mixture", trace, iters, conv, name, grid, config,
        benchmark=bench, benchmark_superior=bench.loglik > best_ll,
    )
