"""Generalized cepstral estimation and cascade linear system identification.

Estimates generalized cepstral coefficients of stationary processes and
d-dimensional random fields from periodogram data, applies the small-sample
bias correction, solves the regularized dual moment-matching problem, and
factors the resulting rational spectrum into a cascade of identical
minimum-phase subsystems.
"""

from .numerics import Alpha, gamma_fn, pochhammer, hyp2f1_diag, quadrature_mean
from .signal import (
    SampleRecord,
    RationalFilter,
    dft,
    idft,
    dft_nd,
    gen_white_noise,
    impulse_response,
    filter_apply,
    gen_periodic_gaussian,
    cascade_apply,
)
from .spectra import (
    FrequencyGrid,
    PeriodogramValues,
    CovarianceSet,
    periodogram,
    biased_covariances,
    covariances_from_periodogram,
    windowed_periodogram,
)
from .cepstral import (
    GenCepstralSet,
    gen_log,
    true_gen_cepstral,
    true_covariances,
    estimate_gen_cepstral,
    correction_constant,
)
from .consistency import (
    MCConfig,
    MomentReport,
    theoretical_power_moments,
    mc_estimator_study,
    cross_power_moment,
    spectral_component_covariance,
    correlation_sum,
    variance_bound,
    assumption2_report,
)
from .dualopt import (
    TrigPoly,
    MomentData,
    DualSolution,
    SolverConfig,
    eval_trig_poly,
    dual_objective,
    dual_gradient,
    solve_dual,
    optimal_spectrum,
    moment_residuals,
)
from .factorization import (
    SpectralFactor,
    bauer_factorize_1d,
    min_phase_roots_1d,
    factorize_2d_separable,
    factorability_check_2d,
)
from .pipeline import (
    CascadeModel,
    IdentificationConfig,
    RunReport,
    whiten_input,
    identify_cascade,
    parameter_error,
    spectrum_error,
)
from .estimator import CascadeIdentifier, CepstralFeatures

__version__ = "0.1.0"

__all__ = [
    "Alpha",
    "gamma_fn",
    "pochhammer",
    "hyp2f1_diag",
    "quadrature_mean",
    "SampleRecord",
    "RationalFilter",
    "dft",
    "idft",
    "dft_nd",
    "gen_white_noise",
    "impulse_response",
    "filter_apply",
    "gen_periodic_gaussian",
    "cascade_apply",
    "FrequencyGrid",
    "PeriodogramValues",
    "CovarianceSet",
    "periodogram",
    "biased_covariances",
    "covariances_from_periodogram",
    "windowed_periodogram",
    "GenCepstralSet",
    "gen_log",
    "true_gen_cepstral",
    "true_covariances",
    "estimate_gen_cepstral",
    "correction_constant",
    "MCConfig",
    "MomentReport",
    "theoretical_power_moments",
    "mc_estimator_study",
    "cross_power_moment",
    "spectral_component_covariance",
    "correlation_sum",
    "variance_bound",
    "assumption2_report",
    "TrigPoly",
    "MomentData",
    "DualSolution",
    "SolverConfig",
    "eval_trig_poly",
    "dual_objective",
    "dual_gradient",
    "solve_dual",
    "optimal_spectrum",
    "moment_residuals",
    "SpectralFactor",
    "bauer_factorize_1d",
    "min_phase_roots_1d",
    "factorize_2d_separable",
    "factorability_check_2d",
    "CascadeModel",
    "IdentificationConfig",
    "RunReport",
    "whiten_input",
    "identify_cascade",
    "parameter_error",
    "spectrum_error",
    "CascadeIdentifier",
    "CepstralFeatures",
]
