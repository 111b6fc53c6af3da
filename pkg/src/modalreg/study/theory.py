"""Monte-Carlo verification of the asymptotic bias/variance/normality
results, for both the scalar and the varying-coefficient estimators.

The theoretical quantities (error-density derivatives at the mode, design
density, curvature, covariate moment matrices) are computed from the known
simulation laws by analytic mixture derivatives and numerical integration,
independently of the estimation code they check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import kstest

from ..errors import RateViolation
from ..kernels import KernelSpec, kernel_moments
from ..modal_lpr import Bandwidths, EMConfig, fit_point
from ..varying_coeff import vc_fit_point
from .scenarios import ScalarScenario, VCScenario

_RATE_MIN_NH1H25 = 1.0
_RATE_MAX_H1SQ_OVER_H2 = 0.5


def _check_rates(n: int, bw: Bandwidths):
    if n * bw.h1 * bw.h2 ** 5 < _RATE_MIN_NH1H25:
        raise RateViolation("n*h1*h2^5 too small for the asymptotic regime")
    if bw.h1 ** 2 / bw.h2 > _RATE_MAX_H1SQ_OVER_H2:
        raise RateViolation("h1^2/h2 too large for the asymptotic regime")


def _require_homoscedastic(scenario, where=(0.0, 0.5, 1.0)):
    s = np.asarray(scenario.sigma_fn(np.asarray(where)))
    if not np.allclose(s, s[0]):
        raise ValueError("theory check requires an x-independent error law")
    return float(s[0])


@dataclass(frozen=True)
class ScalarTheory:
    """Ingredients of the p=1, v=0 asymptotic variance and bias."""

    g0: float
    g2: float
    g3: float
    f_x0: float
    m2_x0: float
    mu2: float
    nu0: float
    tilde_nu: float

    def variance(self, n: int, bw: Bandwidths) -> float:
        return self.g0 * self.tilde_nu * self.nu0 / (
            n * bw.h1 * bw.h2 ** 3 * self.g2 ** 2 * self.f_x0)

    def bias(self, bw: Bandwidths) -> float:
        return 0.5 * self.m2_x0 * self.mu2 * bw.h1 ** 2 \
            - self.g3 * bw.h2 ** 2 / (2.0 * self.g2)


def scalar_theory(scenario: ScalarScenario, x0: float,
                  kernel: KernelSpec = KernelSpec()) -> ScalarTheory:
    """Theorem ingredients from the known simulation law (uniform design)."""
    sigma0 = _require_homoscedastic(scenario)
    mix = scenario.error
    t_mode = mix.mode()
    # error e = y - mode(x) has density g(t) = f_mix(t_mode + t/s)/s
    g = {k: float(mix.derivative(t_mode, k)) / sigma0 ** (k + 1)
         for k in (0, 2, 3)}
    # curvature of the mode curve by central finite differences
    h = 1e-4
    m2 = (scenario.mode_curve(x0 + h) - 2.0 * scenario.mode_curve(x0)
          + scenario.mode_curve(x0 - h)) / h ** 2
    km = kernel_moments(kernel, 1)
    return ScalarTheory(g0=g[0], g2=g[2], g3=g[3], f_x0=1.0, m2_x0=float(m2),
                        mu2=km.mu2, nu0=km.nu0, tilde_nu=km.tilde_nu)


@dataclass
class TheoryCheckReport:
    n: int
    replications: int
    empirical_variance: float
    theoretical_variance: float
    variance_ratio: float
    empirical_bias: float
    theoretical_bias: float
    ks_distance: float
    estimates: np.ndarray


def mc_theory_check(scenario: ScalarScenario, x0: float, bw: Bandwidths,
                    n: int, replications: int, seed: int,
                    cfg: EMConfig = EMConfig()) -> TheoryCheckReport:
    """Empirical moments of the local-linear modal estimate at x0 versus the
    asymptotic formulas, plus a Kolmogorov-Smirnov normality diagnostic."""
    _check_rates(n, bw)
    theory = scalar_theory(scenario, x0, cfg.kernel)
    truth = float(scenario.mode_curve(x0))
    est = np.empty(replications)
    for rep in range(replications):
        data = scenario.sample(n, seed, rep)
        est[rep] = fit_point(data, x0, bw, cfg).coefficients.beta[0]
    var_th = theory.variance(n, bw)
    bias_th = theory.bias(bw)
    z = (est - truth - bias_th) / math.sqrt(var_th)
    return TheoryCheckReport(
        n=n, replications=replications,
        empirical_variance=float(est.var(ddof=1)),
        theoretical_variance=var_th,
        variance_ratio=float(est.var(ddof=1) / var_th),
        empirical_bias=float(est.mean() - truth),
        theoretical_bias=bias_th,
        ks_distance=float(kstest(z, "norm").statistic),
        estimates=est)


def _covariate_second_moment(rho: float, order: int = 40) -> np.ndarray:
    """E[x x^T] for x = (1, x1, x2), correlated standard normals, by
    Gauss-Hermite quadrature (kept numeric as an independent oracle)."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / weights.sum()
    z1 = nodes[:, None]
    z2 = nodes[None, :]
    w = weights[:, None] * weights[None, :]
    x1 = np.broadcast_to(z1, w.shape)
    x2 = rho * z1 + math.sqrt(1.0 - rho ** 2) * z2
    ones = np.ones_like(x1)
    cols = [ones, x1, x2]
    S = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            S[i, j] = float(np.sum(w * cols[i] * cols[j]))
    return S


@dataclass(frozen=True)
class VCTheory:
    q0: float
    q2: float
    q3: float
    f_u0: float
    Sigma: np.ndarray
    g2_u0: np.ndarray          # second derivatives of the coefficient functions
    mean_x: np.ndarray
    mu2: float
    nu0: float
    tilde_nu: float

    def covariance(self, n: int, bw: Bandwidths) -> np.ndarray:
        Delta_inv = np.linalg.inv(self.q2 * self.Sigma)
        Delta_t = self.q0 * self.Sigma
        return self.tilde_nu * self.nu0 / (n * bw.h1 * bw.h2 ** 3 * self.f_u0) \
            * Delta_inv @ Delta_t @ Delta_inv

    def bias(self, bw: Bandwidths) -> np.ndarray:
        alpha_sum = self.q2 * self.Sigma @ self.g2_u0
        beta = self.q3 * self.mean_x
        Delta_inv = np.linalg.inv(self.q2 * self.Sigma)
        return 0.5 * Delta_inv @ (self.mu2 * bw.h1 ** 2 * alpha_sum
                                  - bw.h2 ** 2 * beta)


def vc_theory(scenario: VCScenario, u0: float,
              kernel: KernelSpec = KernelSpec()) -> VCTheory:
    sigma0 = _require_homoscedastic(scenario)
    mix = scenario.error
    t_mode = mix.mode()
    q = {k: float(mix.derivative(t_mode, k)) / sigma0 ** (k + 1)
         for k in (0, 2, 3)}
    h = 1e-4
    g2 = (scenario.coefficients(u0 + h) - 2.0 * scenario.coefficients(u0)
          + scenario.coefficients(u0 - h)) / h ** 2
    km = kernel_moments(kernel, 1)
    Sigma = _covariate_second_moment(scenario.rho)
    return VCTheory(q0=q[0], q2=q[2], q3=q[3], f_u0=1.0, Sigma=Sigma,
                    g2_u0=np.asarray(g2, dtype=float).ravel(),
                    mean_x=np.array([1.0, 0.0, 0.0]),
                    mu2=km.mu2, nu0=km.nu0, tilde_nu=km.tilde_nu)


@dataclass
class VCTheoryCheckReport:
    n: int
    replications: int
    empirical_cov_diag: np.ndarray
    theoretical_cov_diag: np.ndarray
    diag_ratios: np.ndarray
    empirical_bias: np.ndarray
    theoretical_bias: np.ndarray
    estimates: np.ndarray


def vc_theory_check(scenario: VCScenario, u0: float, bw: Bandwidths,
                    n: int, replications: int, seed: int,
                    cfg: EMConfig = EMConfig()) -> VCTheoryCheckReport:
    """Empirical covariance of the fitted coefficient vector versus the
    asymptotic covariance, for an x-and-u-independent error law."""
    _check_rates(n, bw)
    theory = vc_theory(scenario, u0, cfg.kernel)
    sigma0 = _require_homoscedastic(scenario)
    # The modal intercept absorbs sigma0 * mode(eps).
    truth = scenario.coefficients(u0).ravel().copy()
    truth[0] += sigma0 * scenario.error.mode()
    p = scenario.p
    est = np.empty((replications, p))
    for rep in range(replications):
        data = scenario.sample(n, seed, rep)
        est[rep] = vc_fit_point(data, u0, bw, cfg).coefficients.b
    emp_cov = np.cov(est, rowvar=False)
    th_cov = theory.covariance(n, bw)
    return VCTheoryCheckReport(
        n=n, replications=replications,
        empirical_cov_diag=np.diag(emp_cov).copy(),
        theoretical_cov_diag=np.diag(th_cov).copy(),
        diag_ratios=np.diag(emp_cov) / np.diag(th_cov),
        empirical_bias=est.mean(axis=0) - truth,
        theoretical_bias=theory.bias(bw),
        estimates=est)
