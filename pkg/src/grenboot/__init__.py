"""Monotone density estimation on [0, 1] with bootstrap inference.

The package fits the nonparametric maximum likelihood estimator for a
non-increasing density (the left derivative of the least concave majorant
of the empirical distribution function), smooths it with a boundary
corrected kernel estimator, and calibrates pointwise confidence intervals
and L1 confidence bands by resampling from the smooth. A Monte Carlo lab
for the limiting argmax process provides the constants the calibrations
are checked against.
"""

__version__ = "0.1.0"

from .density import (AnalyticDensity, ConcaveMajorant, EmpiricalCDF, Sample,
                      StepDensity, grenander_fit, l1_distance,
                      l1_shape_integral, least_concave_majorant,
                      rate_constant, sup_distance, triangular_density,
                      trunc_exp_density, uniform_density)
from .inference import (L1BandResult, PointwiseCIResult, band_contains,
                        empirical_quantile, l1_band,
                        naive_bootstrap_deviations, smoothed_pointwise_ci,
                        supersample_centering)
from .integrate import adaptive_simpson, integrate_piecewise
from .limits import (LimitConstants, LimitSimConfig, PathGrid,
                     WindowTooSmallError, argmax_process, chernoff_draw,
                     chernoff_sample, doubled_draw, doubled_sample,
                     doubled_scaling_check, estimate_constants,
                     l1_centering_constant, simulate_path)
from .resampling import (EnvelopeError, RngStream, envelope_bound,
                         multinomial_bootstrap, rejection_sample,
                         sample_from_analytic, subsample_without_replacement)
from .smoothing import (BIWEIGHT, DEFAULT_L1_RULE, DEFAULT_POINTWISE_RULE,
                        EPANECHNIKOV, BandwidthRule, ConditionReport,
                        DegenerateEstimateError, Kernel, SmoothedDensity,
                        check_kernel_conditions, fit_smoothed, kernel_by_name,
                        kernel_satisfies)

__all__ = [
    "AnalyticDensity", "BIWEIGHT", "BandwidthRule", "ConcaveMajorant",
    "ConditionReport", "DEFAULT_L1_RULE", "DEFAULT_POINTWISE_RULE",
    "DegenerateEstimateError", "EPANECHNIKOV", "EmpiricalCDF",
    "EnvelopeError", "Kernel", "L1BandResult", "LimitConstants",
    "LimitSimConfig", "PathGrid", "PointwiseCIResult", "RngStream", "Sample",
    "SmoothedDensity", "StepDensity", "WindowTooSmallError",
    "adaptive_simpson", "argmax_process", "band_contains", "chernoff_draw",
    "chernoff_sample", "check_kernel_conditions", "doubled_draw",
    "doubled_sample", "doubled_scaling_check", "empirical_quantile",
    "envelope_bound", "estimate_constants", "fit_smoothed", "grenander_fit",
    "integrate_piecewise", "kernel_by_name", "kernel_satisfies", "l1_band",
    "l1_centering_constant", "l1_distance", "l1_shape_integral",
    "least_concave_majorant", "multinomial_bootstrap",
    "naive_bootstrap_deviations", "rate_constant", "rejection_sample",
    "sample_from_analytic", "simulate_path", "smoothed_pointwise_ci",
    "subsample_without_replacement", "sup_distance", "supersample_centering",
    "triangular_density", "trunc_exp_density", "uniform_density",
]
