"""Edge vs. cloud detection limits for type-based multiple access (TBMA).

Multi-cell IoT sensing where each sensor signals a quantized measurement by
preamble choice.  The package computes analytical error exponents for
edge-local and cloud-joint hypothesis testing, simulates the physical layer,
and runs the matching MAP detectors.
"""

from .model import (
    ConfigError,
    GaussianSurrogate,
    HypothesisVector,
    QoIPrior,
    SystemConfig,
    UnsupportedConfigError,
    all_hypotheses,
    build_prior_from_rho,
    cloud_surrogate,
    config_from_dict,
    config_to_dict,
    edge_surrogate,
    load_config,
    save_config,
    validate_config,
)
from .exponents import (
    ExponentReport,
    NumericalError,
    ProbeRow,
    QuantizationSolution,
    alpha_chernoff,
    chernoff_information,
    cloud_exponent,
    edge_exponent,
    interference_limit_probe,
    solve_quantization_noise,
)
from .simulate import (
    ReceivedBlock,
    RngSeed,
    empirical_moments,
    quantize_block,
    quantize_vectors,
    sample_interval,
    sample_intervals,
)
from .detectors import (
    DetectionOutcome,
    ErrorProbEstimate,
    ExponentFit,
    cloud_map_detect,
    edge_map_detect,
    estimate_error_prob,
    exact_map_detect,
    exact_poisson_mixture_loglik,
    fit_exponent,
    wilson_interval,
)
from . import recipes

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "UnsupportedConfigError",
    "NumericalError",
    "HypothesisVector",
    "QoIPrior",
    "SystemConfig",
    "GaussianSurrogate",
    "all_hypotheses",
    "build_prior_from_rho",
    "validate_config",
    "load_config",
    "save_config",
    "config_from_dict",
    "config_to_dict",
    "edge_surrogate",
    "cloud_surrogate",
    "alpha_chernoff",
    "chernoff_information",
    "edge_exponent",
    "cloud_exponent",
    "solve_quantization_noise",
    "interference_limit_probe",
    "ExponentReport",
    "QuantizationSolution",
    "ProbeRow",
    "RngSeed",
    "ReceivedBlock",
    "sample_interval",
    "sample_intervals",
    "quantize_block",
    "quantize_vectors",
    "empirical_moments",
    "DetectionOutcome",
    "ErrorProbEstimate",
    "ExponentFit",
    "edge_map_detect",
    "cloud_map_detect",
    "exact_map_detect",
    "exact_poisson_mixture_loglik",
    "estimate_error_prob",
    "wilson_interval",
    "fit_exponent",
    "recipes",
]
