"""Plug-in global optimal bandwidth selection.

The closed-form optimizer of the asymptotic weighted MISE surface

    K/(n h1 h2^3) + M h1^4 + N h2^4 + 2 L h1^2 h2^2

is h1 = [3K / (4 n d^5 (L + N d^2))]^(1/8), h2 = d*h1 with
d^2 = (sqrt(L^2 + 3MN) + L)/N.  The unknowns feeding K, M, N, L are
replaced by estimates: a cubic modal pilot fit for the regression curvature
and Gaussian kernel density derivatives of the pilot residuals at zero for
the error-density terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from ._em import intercept_starts, multistart_em
from .errors import InvalidPlugin, NonconcaveAtZero, ZeroCurvature
from .kernels import KernelMoments, KernelSpec, kernel_moments
from .modal_lpr import Bandwidths, Dataset, EMConfig
from .varying_coeff import VCDataset

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Bandwidth constants for the density-derivative estimates at 0, per
# derivative order: h_v = C_v * scale * n^(-1/(2v+5)).  Derivatives need
# larger bandwidths; the constants keep the squared bias comfortably below
# typical plug-in tolerances on normal-reference scales.
_DERIV_H_CONST = {0: 0.9, 2: 0.55, 3: 0.6}

_DENSITY_FLOOR_FRAC = 1e-3


class PluginContext(str, Enum):
    SCALAR = "scalar"
    VARYING_COEFFICIENT = "varying_coefficient"


@dataclass(frozen=True)
class PilotFit:
    """Cubic modal pilot: coefficient rows alpha (one per covariate for the
    varying-coefficient case, a single row for the scalar case), residuals,
    and the fixed response bandwidth the pilot EM used."""

    alpha: np.ndarray
    residuals: np.ndarray
    pilot_h2: float

    def curvature(self, x) -> np.ndarray:
        """m-hat''(x) = 2*alpha_2 + 6*alpha_3*x for the scalar pilot."""
        a = self.alpha.ravel()
        return 2.0 * a[2] + 6.0 * a[3] * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class DensityDerivatives:
    """Estimates g-hat^(v)(0) of the error density at its center."""

    g0: float
    g2: float
    g3: float
    deriv_h: float
    hs: tuple = ()

    def __post_init__(self):
        if not self.g0 > 0:
            raise NonconcaveAtZero("estimated density at 0 is not positive")
        if not self.g2 < 0:
            raise NonconcaveAtZero("estimated density is not concave at 0")


@dataclass(frozen=True)
class PluginQuantities:
    K: float
    M: float
    N: float
    L: float
    delta: float
    context: PluginContext = PluginContext.SCALAR


def reference_scale(sample: np.ndarray) -> float:
    """min(sd, IQR/1.34), the usual normal-reference spread estimate."""
    sd = float(np.std(sample))
    q75, q25 = np.percentile(sample, [75.0, 25.0])
    iqr = float(q75 - q25)
    vals = [v for v in (sd, iqr / 1.34) if v > 0]
    if not vals:
        raise ValueError("degenerate residual spread")
    return min(vals)


def _pilot_h2(ols_resid: np.ndarray) -> float:
    return 0.9 * reference_scale(ols_resid) * ols_resid.size ** (-0.2)


def _modal_pilot(D: np.ndarray, y: np.ndarray, cfg: EMConfig):
    """Gaussian-kernel modal fit with no predictor weighting (the modal
    linear regression estimator on the given design)."""
    alpha_ols, *_ = np.linalg.lstsq(D, y, rcond=None)
    resid_ols = y - D @ alpha_ols
    h2p = _pilot_h2(resid_ols)
    starts = intercept_starts(alpha_ols, resid_ols, cfg.n_starts)
    kw = np.ones(y.size)
    res = multistart_em(D, y, kw, h2p, starts,
                        cfg.max_iter, cfg.tol_obj, cfg.tol_param)
    return res.theta, y - D @ res.theta, h2p


def modal_linear_pilot(data: Dataset, cfg: EMConfig = EMConfig()) -> PilotFit:
    """Cubic modal regression pilot m(x) ~ alpha0 + alpha1 x + ... + alpha3 x^3."""
    if data.n < 8:
        raise ValueError("pilot needs at least 8 observations")
    D = np.vander(data.x, 4, increasing=True)
    alpha, resid, h2p = _modal_pilot(D, data.y, cfg)
    return PilotFit(alpha=alpha, residuals=resid, pilot_h2=h2p)


def vc_modal_pilot(data: VCDataset, cfg: EMConfig = EMConfig()) -> PilotFit:
    """Cubic-in-u modal pilot for every coefficient function: the design has
    columns x_j * u^k, k = 0..3, and alpha is returned as a p-by-4 matrix."""
    U = np.vander(data.u, 4, increasing=True)
    D = np.hstack([data.X[:, [j]] * U for j in range(data.p)])
    alpha, resid, h2p = _modal_pilot(D, data.y, cfg)
    return PilotFit(alpha=alpha.reshape(data.p, 4), residuals=resid, pilot_h2=h2p)


def error_density_derivatives(pilot: PilotFit,
                              adjusted: np.ndarray | None = None,
                              deriv_h: dict | None = None) -> DensityDerivatives:
    """Gaussian-kernel estimates of g^(v)(0), v = 0, 2, 3, from the centered
    pilot residuals.

    Uses analytic derivatives of the normal kernel; each order gets its own
    normal-reference bandwidth h_v ~ n^(-1/(2v+5)) unless overridden.
    """
    eps = np.asarray(pilot.residuals if adjusted is None else adjusted,
                     dtype=float)
    if eps.size == 0:
        raise ValueError("empty residual sample")
    n = eps.size
    scale = reference_scale(eps) if eps.size > 1 and np.ptp(eps) > 0 else 1.0
    hs = {}
    for v in (0, 2, 3):
        if deriv_h and v in deriv_h:
            hs[v] = float(deriv_h[v])
        else:
            hs[v] = _DERIV_H_CONST[v] * scale * n ** (-1.0 / (2 * v + 5))
    est = {}
    for v in (0, 2, 3):
        z = -eps / hs[v]          # kernel argument of the KDE derivative at 0
        phi = np.exp(-0.5 * z * z) / _SQRT_2PI
        if v == 0:
            herm = 1.0
        elif v == 2:
            herm = z * z - 1.0
        else:
            herm = -(z ** 3 - 3.0 * z)
        est[v] = float(np.sum(herm * phi)) / (n * hs[v] ** (v + 1))
    return DensityDerivatives(g0=est[0], g2=est[2], g3=est[3],
                              deriv_h=hs[0], hs=(hs[0], hs[2], hs[3]))


def _design_density(x: np.ndarray) -> np.ndarray:
    """Gaussian KDE of the design density at the sample points, floored to
    avoid ratio blowup at the edges."""
    n = x.size
    h = 0.9 * reference_scale(x) * n ** (-0.2)
    z = (x[:, None] - x[None, :]) / h
    f = np.exp(-0.5 * z * z).sum(axis=1) / (n * h * _SQRT_2PI)
    return np.maximum(f, _DENSITY_FLOOR_FRAC * f.max())


def _delta_from(K: float, M: float, N: float, L: float) -> float:
    if N <= 0 or (M <= 0 and L <= 0):
        raise ZeroCurvature("bandwidth ratio undefined (N <= 0 or flat curvature)")
    d2 = (math.sqrt(L * L + 3.0 * M * N) + L) / N
    if not d2 > 0:
        raise ZeroCurvature("nonpositive squared bandwidth ratio")
    return math.sqrt(d2)


def plugin_quantities(data: Dataset, pilot: PilotFit, dens: DensityDerivatives,
                      km: KernelMoments | None = None,
                      kernel: KernelSpec = KernelSpec()) -> PluginQuantities:
    """Empirical K, M, N, L with weight function w(x) = f(x)."""
    km = km or kernel_moments(kernel, 1)
    f = _design_density(data.x)
    m2 = pilot.curvature(data.x)
    bias_x = 0.5 * m2 * km.mu2
    bias_e = -dens.g3 / (2.0 * dens.g2)
    K = float(np.mean(dens.g0 * km.tilde_nu * km.nu0 / (dens.g2 ** 2 * f)))
    M = float(np.mean(bias_x ** 2))
    N = float(bias_e ** 2)
    L = float(np.mean(bias_x) * bias_e)
    delta = _delta_from(K, M, N, L)
    return PluginQuantities(K=K, M=M, N=N, L=L, delta=delta,
                            context=PluginContext.SCALAR)


def vc_plugin_quantities(data: VCDataset, pilot: PilotFit,
                         dens: DensityDerivatives,
                         km: KernelMoments | None = None,
                         kernel: KernelSpec = KernelSpec(),
                         literal_m_tilde: bool = False) -> PluginQuantities:
    """Empirical tilde quantities for the varying-coefficient bandwidth.

    Covariate moments are estimated globally (index and covariates treated
    as independent) and the error-density derivatives are pooled, matching
    the scalar plug-in's independence reading.  ``literal_m_tilde`` switches
    the curvature weights in M-tilde from the coefficient second derivatives
    g_j'' to their u-derivative (a literal alternative reading that
    degenerates to zero under the independence assumption).
    """
    km = km or kernel_moments(kernel, 1)
    p = data.p
    Sigma = data.X.T @ data.X / data.n
    mean_x = data.X.mean(axis=0)
    f = _design_density(data.u)
    # g_j''(u) from the cubic pilot rows; the literal variant differentiates
    # the (u-constant) covariate moments instead and is identically zero.
    if literal_m_tilde:
        V = np.zeros((data.n, p))
    else:
        V = 2.0 * pilot.alpha[:, 2][None, :] + \
            6.0 * pilot.alpha[:, 3][None, :] * data.u[:, None]
    Sigma_inv = np.linalg.inv(Sigma)
    g0, g2, g3 = dens.g0, dens.g2, dens.g3
    K = float(p * km.tilde_nu * km.nu0 * np.mean(1.0 / f))
    quad = np.einsum("ij,jk,ik->i", V, Sigma, V)
    M = float(0.25 * km.mu2 ** 2 * (g2 ** 2 / g0) * np.mean(quad))
    N = float(0.25 * (g3 ** 2 / g0) * (mean_x @ Sigma_inv @ mean_x))
    L = float(-0.25 * km.mu2 * (g2 * g3 / g0) * np.mean(V @ mean_x))
    delta = _delta_from(K, M, N, L)
    return PluginQuantities(K=K, M=M, N=N, L=L, delta=delta,
                            context=PluginContext.VARYING_COEFFICIENT)


def _bandwidths_from(q: PluginQuantities, n: int) -> Bandwidths:
    d = q.delta
    if not (d > 0 and np.isfinite(d)):
        raise InvalidPlugin("bandwidth ratio must be positive")
    denom = q.L + q.N * d * d
    if not (denom > 0 and q.K > 0):
        raise InvalidPlugin("closed-form bandwidth preconditions violated")
    h1 = (3.0 * q.K / (4.0 * n * d ** 5 * denom)) ** 0.125
    return Bandwidths(h1=h1, h2=d * h1)


def optimal_bandwidths(q: PluginQuantities, n: int) -> Bandwidths:
    """Closed-form minimizer of the asymptotic weighted MISE surface."""
    return _bandwidths_from(q, n)


def vc_optimal_bandwidths(q: PluginQuantities, n: int) -> Bandwidths:
    """Same algebraic form as the scalar case, on the tilde quantities."""
    if q.context is not PluginContext.VARYING_COEFFICIENT:
        raise InvalidPlugin("expected varying-coefficient plug-in quantities")
    return _bandwidths_from(q, n)


def select_bandwidths(data: Dataset, cfg: EMConfig = EMConfig()) -> Bandwidths:
    """Full scalar plug-in pipeline: pilot, density derivatives, quantities,
    closed form.  Failures surface as explicit errors (no silent defaults)."""
    pilot = modal_linear_pilot(data, cfg)
    dens = error_density_derivatives(pilot)
    q = plugin_quantities(data, pilot, dens, kernel=cfg.kernel)
    return optimal_bandwidths(q, data.n)


def vc_select_bandwidths(data: VCDataset, cfg: EMConfig = EMConfig()) -> Bandwidths:
    """Varying-coefficient plug-in pipeline."""
    pilot = vc_modal_pilot(data, cfg)
    dens = error_density_derivatives(pilot)
    q = vc_plugin_quantities(data, pilot, dens, kernel=cfg.kernel)
    return vc_optimal_bandwidths(q, data.n)
