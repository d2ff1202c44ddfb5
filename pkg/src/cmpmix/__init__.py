"""Two-component truncated Conway-Maxwell-Poisson mixtures for bimodal
discrete data: distribution primitives, EM fitting with grid-search
M-steps, constant-dispersion baselines, shape evaluation, and simulation.
"""

from .baselines import fit_poisson_mixture, fit_single_poisson
from .cmp import (
    classify_dispersion,
    log_normalizer_truncated,
    moments_truncated,
    pmf_truncated,
    pmf_untruncated,
    sample_truncated,
    successive_ratio,
)
from .em import (
    FitResult,
    em_fit,
    fit_single_cmp,
    init_peak_ratio,
    init_peaks,
    init_poisson,
    is_bimodal,
    m_step,
    m_step_lambdas,
    m_step_nus,
    update_p,
)
from .io import flip_order, parse_config, read_dataset, write_dataset
from .mixture import (
    complete_loglik,
    mixture_pmf,
    observed_loglik,
    responsibilities,
    sample_mixture,
)
from .shape import (
    ComparisonReport,
    ShapeSummary,
    aic,
    compare,
    detect_shape,
    expected_counts,
    loglik_surface,
)
from .sim import PRESETS, ScenarioPreset, run_scenario
from .types import (
    CmpParams,
    DispersionClass,
    EmConfig,
    FrequencyTable,
    GridSpec,
    MixtureParams,
    Support,
    SupportMismatchError,
)

__version__ = "0.1.0"

__all__ = [
    "CmpParams",
    "ComparisonReport",
    "DispersionClass",
    "EmConfig",
    "FitResult",
    "FrequencyTable",
    "GridSpec",
    "MixtureParams",
    "PRESETS",
    "ScenarioPreset",
    "ShapeSummary",
    "Support",
    "SupportMismatchError",
    "aic",
    "classify_dispersion",
    "compare",
    "complete_loglik",
    "detect_shape",
    "em_fit",
    "expected_counts",
    "fit_poisson_mixture",
    "fit_single_cmp",
    "fit_single_poisson",
    "flip_order",
    "init_peak_ratio",
    "init_peaks",
    "init_poisson",
    "is_bimodal",
    "log_normalizer_truncated",
    "loglik_surface",
    "m_step",
    "m_step_lambdas",
    "m_step_nus",
    "mixture_pmf",
    "moments_truncated",
    "observed_loglik",
    "parse_config",
    "pmf_truncated",
    "pmf_untruncated",
    "read_dataset",
    "responsibilities",
    "run_scenario",
    "sample_mixture",
    "sample_truncated",
    "successive_ratio",
    "update_p",
    "write_dataset",
]
