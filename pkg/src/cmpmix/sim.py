"""Named simulation scenarios: sample from a known mixture, fit, compare."""

from __future__ import annotations

from dataclasses import dataclass

from .baselines import fit_poisson_mixture
from .em import em_fit
from .mixture import sample_mixture
from .shape import ComparisonReport, compare
from .types import CmpParams, EmConfig, GridSpec, MixtureParams, Support


@dataclass(frozen=True)
class ScenarioPreset:
    """A generator mixture, its support, and the default sample size."""

    name: str
    generator: MixtureParams
    support: Support
    n: int


PRESETS: dict[str, ScenarioPreset] = {
    p.name: p
    for p in (
        ScenarioPreset(
            name="bimodal10",
            generator=MixtureParams(0.3, CmpParams(1.0, 3.0), CmpParams(8.0, 0.7)),
            support=Support(1, 10),
            n=100,
        ),
        ScenarioPreset(
            name="bimodal5",
            generator=MixtureParams(0.3, CmpParams(1.0, 1.5), CmpParams(5.0, 0.7)),
            support=Support(1, 5),
            n=100,
        ),
        ScenarioPreset(
            name="bimodal15a",
            generator=MixtureParams(0.8, CmpParams(2.0, 0.5), CmpParams(15.0, 0.7)),
            support=Support(1, 15),
            n=1000,
        ),
        ScenarioPreset(
            name="bimodal15b",
            generator=MixtureParams(0.4, CmpParams(1.0, 1.5), CmpParams(15.0, 1.2)),
            support=Support(1, 15),
            n=1000,
        ),
    )
}


def run_scenario(
    preset: ScenarioPreset,
    seed: int,
    grid: GridSpec | None = None,
    config: EmConfig | None = None,
    n: int | None = None,
) -> ComparisonReport:
    """Sample from the preset's generator, fit both mixtures, and compare.

    Deterministic per (preset, seed, grid, config); ``n`` overrides the
    preset's sample size.
    """
    data = sample_mixture(preset.generator, preset.support, n or preset.n, seed)
    cmp_fit = em_fit(data, grid, config)
    pois_fit = cmp_fit.benchmark
    if pois_fit is None or pois_fit.model_kind not in ("poisson_mixture", "single_poisson"):
        pois_fit = fit_poisson_mixture(data, grid, config)
    return compare(data, [pois_fit, cmp_fit])
