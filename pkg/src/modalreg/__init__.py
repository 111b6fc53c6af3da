"""Nonparametric and varying-coefficient modal regression.

Local-polynomial kernel modal regression fitted by a modal EM algorithm,
with plug-in bandwidth selection, a varying-coefficient extension,
mean/median/M-estimation baselines, and a Monte-Carlo study harness.
"""

from .bandwidth import DensityDerivatives, PilotFit, PluginContext, \
    PluginQuantities, error_density_derivatives, modal_linear_pilot, \
    optimal_bandwidths, plugin_quantities, select_bandwidths, \
    vc_modal_pilot, vc_optimal_bandwidths, vc_plugin_quantities, \
    vc_select_bandwidths
from .baselines import BaselineMethod, BaselineSpec, bandwidth_grid, \
    cv_bandwidth, local_fit_curve, local_linear_mean, local_m_huber, \
    local_median, vc_baseline_fit
from .errors import AllFitsFailed, DegenerateWindow, DimensionError, \
    InvalidPlugin, ModalRegressionError, NonconcaveAtZero, NonFiniteError, \
    OutOfRange, ParseError, RateViolation, SingularDesign, ZeroCurvature
from .kernels import KernelFamily, KernelMoments, KernelSpec, kernel_eval, \
    kernel_moments
from .modal_lpr import Bandwidths, CurveEstimate, Dataset, EMConfig, \
    ModalCoefficients, PointFit, e_step, fit_curve, fit_point, \
    local_constant_mode, m_step, objective
from .varying_coeff import VCCoefficients, VCCurveEstimate, VCDataset, \
    VCPointFit, vc_e_step, vc_fit_curves, vc_fit_point, vc_m_step, \
    vc_objective, vc_predict

__version__ = "0.1.0"

__all__ = [
    "Bandwidths", "CurveEstimate", "Dataset", "EMConfig",
    "ModalCoefficients", "PointFit", "e_step", "fit_curve", "fit_point",
    "local_constant_mode", "m_step", "objective",
    "VCCoefficients", "VCCurveEstimate", "VCDataset", "VCPointFit",
    "vc_e_step", "vc_fit_curves", "vc_fit_point", "vc_m_step",
    "vc_objective", "vc_predict",
    "KernelFamily", "KernelMoments", "KernelSpec", "kernel_eval",
    "kernel_moments",
    "BaselineMethod", "BaselineSpec", "bandwidth_grid", "cv_bandwidth",
    "local_fit_curve", "local_linear_mean", "local_m_huber", "local_median",
    "vc_baseline_fit",
    "DensityDerivatives", "PilotFit", "PluginContext", "PluginQuantities",
    "error_density_derivatives", "modal_linear_pilot", "optimal_bandwidths",
    "plugin_quantities", "select_bandwidths", "vc_modal_pilot",
    "vc_optimal_bandwidths", "vc_plugin_quantities", "vc_select_bandwidths",
    "ModalRegressionError", "AllFitsFailed", "DegenerateWindow",
    "DimensionError", "InvalidPlugin", "NonconcaveAtZero", "NonFiniteError",
    "OutOfRange", "ParseError", "RateViolation", "SingularDesign",
    "ZeroCurvature",
    "__version__",
]
