"""Truncated and untruncated Conway-Maxwell-Poisson distribution.

The pmf is proportional to lam**x / (x!)**nu. All probability work happens
in log space with a max-shift (lam**x and (x!)**nu overflow quickly even on
15-point supports). Log-factorials come from cumulative summation of log k,
which is exact for the small integer ranges involved.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .types import CmpParams, DispersionClass, FrequencyTable, Support


@lru_cache(maxsize=64)
def _log_factorials_cached(upper: int) -> np.ndarray:
    out = np.zeros(upper + 1)
    if upper >= 1:
        out[1:] = np.cumsum(np.log(np.arange(1, upper + 1, dtype=float)))
    out.setflags(write=False)
    return out


def log_factorials(upper: int) -> np.ndarray:
    """ln k! for k = 0..upper, by cumulative summation of ln k."""
    return _log_factorials_cached(upper)


def log_weight_rows(lams: np.ndarray, nus: np.ndarray, support: Support) -> np.ndarray:
    """Unnormalized log pmf rows, one per (lam, nu) pair: shape (K, S)."""
    xs = np.arange(support.lower, support.upper + 1, dtype=float)
    lf = log_factorials(support.upper)[support.lower :]
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    nus = np.atleast_1d(np.asarray(nus, dtype=float))
    return np.log(lams)[:, None] * xs[None, :] - nus[:, None] * lf[None, :]


def pmf_rows(lams: np.ndarray, nus: np.ndarray, support: Support) -> np.ndarray:
    """Normalized pmf rows for paired (lam, nu) arrays: shape (K, S)."""
    logw = log_weight_rows(lams, nus, support)
    # max-shift normalization, inlined: this sits on the fitting hot path
    shift = logw.max(axis=1, keepdims=True)
    w = np.exp(logw - shift)
    return w / w.sum(axis=1, keepdims=True)


def log_normalizer_truncated(params: CmpParams, support: Support) -> float:
    """log of sum_{j=lower..upper} lam**j / (j!)**nu."""
    logw = log_weight_rows([params.lam], [params.nu], support)
    return float(logsumexp(logw[0]))


def pmf_truncated(params: CmpParams, support: Support) -> np.ndarray:
    """Truncated pmf over the support; sums to 1."""
    return pmf_rows([params.lam], [params.nu], support)[0]


def pmf_untruncated(
    params: CmpParams, tail_epsilon: float = 1e-12, max_terms: int = 1_000_000
) -> np.ndarray:
    """Full-support pmf over {0..cutoff}, renormalized to sum to 1.

    The cutoff is extended until the terms are decreasing and the latest
    term falls below ``tail_epsilon`` times the running sum; once the term
    ratio lam / x**nu is below 1 the omitted tail is dominated by a
    geometric series. Requires nu > 0, or nu == 0 with lam < 1 (otherwise
    the series diverges). ``max_terms`` guards against pathologically slow
    convergence (tiny nu with large lam).
    """
    lam, nu = params.lam, params.nu
    if nu == 0 and lam >= 1:
        raise ValueError(f"series diverges for nu=0 with lam={lam} >= 1")
    log_lam = np.log(lam)
    log_terms = [0.0]  # x = 0 term is 1
    log_sum = 0.0
    log_eps = np.log(tail_epsilon)
    x = 0
    while True:
        x += 1
        if x > max_terms:
            raise ValueError(f"series did not converge within {max_terms} terms")
        log_term = log_terms[-1] + log_lam - nu * np.log(x)
        decreasing = log_term < log_terms[-1]
        log_terms.append(log_term)
        log_sum = np.logaddexp(log_sum, log_term)
        if decreasing and log_term < log_eps + log_sum:
            break
    log_terms = np.array(log_terms)
    return np.exp(log_terms - logsumexp(log_terms))


def successive_ratio(x: int, params: CmpParams) -> float:
    """P(X = x-1) / P(X = x) = x**nu / lam, for x >= 1."""
    if x < 1:
        raise ValueError(f"successive ratio needs x >= 1, got {x}")
    return float(x) ** params.nu / params.lam


def moments_truncated(params: CmpParams, support: Support) -> tuple[float, float]:
    """(mean, variance) of the truncated distribution."""
    pmf = pmf_truncated(params, support)
    xs = support.values().astype(float)
    mean = float(np.sum(xs * pmf))
    var = float(np.sum(xs * xs * pmf) - mean * mean)
    return mean, max(var, 0.0)


def classify_dispersion(params: CmpParams) -> DispersionClass:
    if params.nu < 1:
        return DispersionClass.OVER
    if params.nu == 1:
        return DispersionClass.EQUI
    return DispersionClass.UNDER


def sample_counts_from_pmf(pmf: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """n inverse-CDF draws against a precomputed CDF, as a count vector."""
    cdf = np.cumsum(pmf)
    u = rng.random(n)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(pmf) - 1)
    return np.bincount(idx, minlength=len(pmf))


def sample_truncated(params: CmpParams, support: Support, n: int, seed: int) -> FrequencyTable:
    """n iid draws from the truncated pmf; deterministic for a fixed seed."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    counts = sample_counts_from_pmf(pmf_truncated(params, support), n, rng)
    return FrequencyTable(support=support, counts=counts)
