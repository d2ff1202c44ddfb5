"""Two-component truncated CMP mixture: pmf, likelihoods, responsibilities.

Responsibilities are stored per support value rather than per observation:
the posterior weight of component 1 depends on an observation only through
its value, and data arrives as frequency tables anyway.
"""

from __future__ import annotations

import numpy as np

from .cmp import moments_truncated, pmf_rows, sample_counts_from_pmf
from .types import FrequencyTable, MixtureParams, Support, SupportMismatchError

# One posterior weight per support value, each in [0, 1].
Responsibilities = np.ndarray


def component_pmfs(mix: MixtureParams, support: Support) -> np.ndarray:
    """Both component pmfs as a (2, S) array."""
    return pmf_rows(
        [mix.comp1.lam, mix.comp2.lam], [mix.comp1.nu, mix.comp2.nu], support
    )


def mixture_pmf(mix: MixtureParams, support: Support) -> np.ndarray:
    """p * pmf1 + (1 - p) * pmf2 pointwise; sums to 1."""
    f = component_pmfs(mix, support)
    return mix.p * f[0] + (1.0 - mix.p) * f[1]


def observed_loglik(mix: MixtureParams, data: FrequencyTable) -> float:
    """Grouped log-likelihood: sum_x counts(x) * ln(mixture pmf at x)."""
    m = mixture_pmf(mix, data.support)
    with np.errstate(divide="ignore"):
        logm = np.log(m)
    terms = np.where(data.counts > 0, data.counts * logm, 0.0)
    return float(np.sum(terms))


def responsibilities(mix: MixtureParams, data: FrequencyTable) -> Responsibilities:
    """Posterior weight of component 1 at every support value."""
    f = component_pmfs(mix, data.support)
    num = mix.p * f[0]
    denom = num + (1.0 - mix.p) * f[1]
    return num / denom


def complete_loglik(
    mix: MixtureParams, data: FrequencyTable, resp: Responsibilities
) -> float:
    """Latent-variable log-likelihood with expected memberships plugged in.

    Terms with a responsibility of exactly 0 or 1 drop their vanishing side
    (0 * ln 0 is taken as 0), so boundary mixing weights stay evaluable.
    """
    resp = np.asarray(resp, dtype=float)
    if resp.shape != (data.support.size,):
        raise SupportMismatchError(
            f"responsibilities length {resp.shape} does not match support size {data.support.size}"
        )
    f = component_pmfs(mix, data.support)
    with np.errstate(divide="ignore"):
        side1 = np.log(mix.p) + np.log(f[0]) if mix.p > 0 else np.full(data.support.size, -np.inf)
        side2 = (
            np.log(1.0 - mix.p) + np.log(f[1])
            if mix.p < 1
            else np.full(data.support.size, -np.inf)
        )
    with np.errstate(invalid="ignore"):  # 0 * -inf inside the discarded branch
        t1 = np.where(resp > 0, resp * side1, 0.0)
        t2 = np.where(resp < 1, (1.0 - resp) * side2, 0.0)
    return float(np.sum(data.counts * (t1 + t2)))


def sample_mixture(mix: MixtureParams, support: Support, n: int, seed: int) -> FrequencyTable:
    """n draws: pick component 1 with probability p, then sample it."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    f = component_pmfs(mix, support)
    pick1 = rng.random(n) < mix.p
    n1 = int(pick1.sum())
    counts = sample_counts_from_pmf(f[0], n1, rng) + sample_counts_from_pmf(f[1], n - n1, rng)
    return FrequencyTable(support=support, counts=counts)


def canonicalize(mix: MixtureParams, support: Support) -> MixtureParams:
    """Order components so comp1 has the smaller truncated mean.

    Ties break toward the smaller nu. Applied only at output boundaries;
    fitting never reorders mid-iteration.
    """
    m1, _ = moments_truncated(mix.comp1, support)
    m2, _ = moments_truncated(mix.comp2, support)
    if m1 > m2 or (m1 == m2 and mix.comp1.nu > mix.comp2.nu):
        return MixtureParams(p=1.0 - mix.p, comp1=mix.comp2, comp2=mix.comp1)
    return mix
