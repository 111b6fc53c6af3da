"""Simulation scenarios: the heteroscedastic sine model with a skewed
two-component normal error mixture, and the two varying-coefficient models.

All randomness flows through counter-based Philox streams keyed by
(seed, replication index), so parallel and serial runs generate identical
samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.stats import norm

from ..modal_lpr import Dataset
from ..varying_coeff import VCDataset


def substream(seed: int, rep: int = 0) -> np.random.Generator:
    """Philox substream for one replication; distinct (seed, rep) pairs give
    independent, reproducible streams regardless of execution order."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, rep],
                                                             dtype=np.uint64)))


@dataclass(frozen=True)
class ErrorMixture:
    """Two-component (or general) normal mixture error law."""

    weights: tuple = (0.5, 0.5)
    means: tuple = (-1.0, 1.0)
    sds: tuple = (2.5, 0.5)

    def __post_init__(self):
        if not math.isclose(sum(self.weights), 1.0, abs_tol=1e-12):
            raise ValueError("mixture weights must sum to 1")
        if any(s <= 0 for s in self.sds):
            raise ValueError("mixture sds must be positive")

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        out = sum(w * norm.pdf(t, m, s)
                  for w, m, s in zip(self.weights, self.means, self.sds))
        return out

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return sum(w * norm.cdf(t, m, s)
                   for w, m, s in zip(self.weights, self.means, self.sds))

    def interval_prob(self, lo, hi):
        return self.cdf(hi) - self.cdf(lo)

    def derivative(self, t, k: int):
        """k-th derivative of the mixture density (probabilists' Hermite)."""
        t = np.asarray(t, dtype=float)
        out = 0.0
        for w, m, s in zip(self.weights, self.means, self.sds):
            z = (t - m) / s
            he = np.polynomial.hermite_e.hermeval(z, [0.0] * k + [1.0])
            out = out + w * (-1.0) ** k * he * norm.pdf(t, m, s) / s ** k
        return out

    @property
    def mean(self) -> float:
        return float(sum(w * m for w, m in zip(self.weights, self.means)))

    @property
    def var(self) -> float:
        m = self.mean
        return float(sum(w * (s * s + (mu - m) ** 2)
                         for w, mu, s in zip(self.weights, self.means, self.sds)))

    @property
    def sd(self) -> float:
        return math.sqrt(self.var)

    def mode(self) -> float:
        """Global maximizer of the mixture density (numeric)."""
        lo = min(m - 4 * s for m, s in zip(self.means, self.sds))
        hi = max(m + 4 * s for m, s in zip(self.means, self.sds))
        best_x, best_v = None, -np.inf
        for m, s in zip(self.means, self.sds):
            res = minimize_scalar(lambda t: -self.pdf(t),
                                  bounds=(max(lo, m - 2 * s), min(hi, m + 2 * s)),
                                  method="bounded",
                                  options={"xatol": 1e-12})
            if -res.fun > best_v:
                best_x, best_v = float(res.x), float(-res.fun)
        return best_x

    def median(self) -> float:
        lo = min(m - 8 * s for m, s in zip(self.means, self.sds))
        hi = max(m + 8 * s for m, s in zip(self.means, self.sds))
        return float(brentq(lambda t: self.cdf(t) - 0.5, lo, hi, xtol=1e-12))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal(n)
        u = rng.random(n)
        comp = (u >= self.weights[0]).astype(int)
        means = np.asarray(self.means)[comp]
        sds = np.asarray(self.sds)[comp]
        return means + sds * z


#: The skewed error mixture used throughout the simulation study.
STUDY_MIXTURE = ErrorMixture()


# Module-level curve functions (not lambdas) so scenarios pickle cleanly
# for process-based parallel studies.
def _sine_mean(x):
    return 2.0 * np.sin(np.pi * np.asarray(x, dtype=float))


def _linear_sigma(x):
    return 1.0 + 2.0 * np.asarray(x, dtype=float)


def _const_sigma(x, sigma0=1.0):
    return sigma0 * np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ScalarScenario:
    """y = mean_fn(x) + sigma_fn(x) * eps with x ~ U(0, 1)."""

    name: str
    error: ErrorMixture = STUDY_MIXTURE
    mean_fn: Callable = _sine_mean
    sigma_fn: Callable = _linear_sigma

    def mode_curve(self, x):
        return self.mean_fn(x) + self.sigma_fn(x) * self.error.mode()

    def median_curve(self, x):
        return self.mean_fn(x) + self.sigma_fn(x) * self.error.median()

    def mean_curve(self, x):
        return self.mean_fn(x) + self.sigma_fn(x) * self.error.mean

    def interval_prob(self, x, lo, hi):
        """Exact P(Y in [lo, hi] | X = x) from the conditional mixture."""
        m = self.mean_fn(x)
        s = self.sigma_fn(x)
        return self.error.interval_prob((lo - m) / s, (hi - m) / s)

    def sample(self, n: int, seed: int, rep: int = 0) -> Dataset:
        rng = substream(seed, rep)
        x = rng.random(n)
        eps = self.error.sample(rng, n)
        y = self.mean_fn(x) + self.sigma_fn(x) * eps
        return Dataset(x=x, y=y)


def example1() -> ScalarScenario:
    return ScalarScenario(name="example1")


def homoscedastic_scalar(sigma0: float = 1.0,
                         error: ErrorMixture = STUDY_MIXTURE) -> ScalarScenario:
    """Constant-scale variant used for the asymptotic theory checks."""
    from functools import partial
    return ScalarScenario(name=f"homoscedastic({sigma0})", error=error,
                          sigma_fn=partial(_const_sigma, sigma0=sigma0))


_RHO = 1.0 / math.sqrt(2.0)

def _m1_g0(u):
    return np.exp(2.0 * u - 1.0)


def _m1_g1(u):
    return 8.0 * u * (1.0 - u)


def _m1_g2(u):
    return 2.0 * np.sin(2.0 * np.pi * u) ** 2


def _m2_g0(u):
    return np.sin(2.0 * np.pi * u)


def _m2_g1(u):
    return (2.0 * u - 1.0) ** 2 + 0.5


def _m2_g2(u):
    return np.exp(2.0 * u - 1.0) - 1.0


_VC_MODELS: dict[int, tuple] = {
    1: (_m1_g0, _m1_g1, _m1_g2),
    2: (_m2_g0, _m2_g1, _m2_g2),
}


@dataclass(frozen=True)
class VCScenario:
    """y = sum_j g_j(u) x_j + sigma_fn(u) * eps with u ~ U(0,1) independent
    of the (correlated standard normal) covariates."""

    name: str
    g_funcs: tuple
    error: ErrorMixture = STUDY_MIXTURE
    sigma_fn: Callable = _linear_sigma
    rho: float = _RHO

    @property
    def p(self) -> int:
        return len(self.g_funcs)

    def coefficients(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.stack([np.broadcast_to(g(u), u.shape) for g in self.g_funcs],
                        axis=-1)

    def regression_surface(self, u, X):
        return np.sum(self.coefficients(u) * X, axis=-1)

    def mode_surface(self, u, X):
        return self.regression_surface(u, X) + self.sigma_fn(u) * self.error.mode()

    def interval_prob(self, u, X, lo, hi):
        m = self.regression_surface(u, X)
        s = self.sigma_fn(u)
        return self.error.interval_prob((lo - m) / s, (hi - m) / s)

    def sample(self, n: int, seed: int, rep: int = 0) -> VCDataset:
        rng = substream(seed, rep)
        u = rng.random(n)
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        x1 = z1
        x2 = self.rho * z1 + math.sqrt(1.0 - self.rho ** 2) * z2
        X = np.column_stack([np.ones(n), x1, x2])
        eps = self.error.sample(rng, n)
        y = self.regression_surface(u, X) + self.sigma_fn(u) * eps
        return VCDataset(u=u, X=X, y=y)


def vc_model(model: int) -> VCScenario:
    if model not in _VC_MODELS:
        raise ValueError("model must be 1 or 2")
    g0, g1, g2 = _VC_MODELS[model]
    return VCScenario(name=f"vc_model{model}", g_funcs=(g0, g1, g2))


def homoscedastic_vc(model: int, sigma0: float = 1.0) -> VCScenario:
    """Constant-scale varying-coefficient variant for the theory checks."""
    from functools import partial
    g0, g1, g2 = _VC_MODELS[model]
    return VCScenario(name=f"vc_model{model}_homoscedastic({sigma0})",
                      g_funcs=(g0, g1, g2),
                      sigma_fn=partial(_const_sigma, sigma0=sigma0))


def generate_example1(n: int, seed: int, rep: int = 0):
    """Reproducible Example-1 sample plus its truth curves."""
    sc = example1()
    return sc.sample(n, seed, rep), sc


def generate_vc_model(model: int, n: int, seed: int, rep: int = 0):
    sc = vc_model(model)
    return sc.sample(n, seed, rep), sc
