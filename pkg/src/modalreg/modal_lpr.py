"""Local polynomial modal regression.

The estimator maximizes, over theta = (beta_0, ..., beta_p),

    (1/n) sum_i K_h1(x_i - x0) * phi_h2(y_i - sum_j beta_j (x_i - x0)^j)

via a modal EM alternation: normalized kernel-times-Gaussian
responsibilities (E), then a weighted least-squares polynomial solve (M).
beta_v estimates m^(v)(x0)/v!.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ._em import (
    MultistartResult,
    em_objective,
    gaussian_resp,
    intercept_starts,
    multistart_em,
    weighted_lstsq,
)
from .errors import DegenerateWindow, ModalRegressionError
from .kernels import KernelSpec, kernel_eval


@dataclass(frozen=True)
class Dataset:
    """Scalar-predictor sample (x_i, y_i), i = 1..n."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if x.size < 2:
            raise ValueError("need at least two observations")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("non-finite values in dataset")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class Bandwidths:
    """Predictor-space (h1) and response-space (h2) smoothing scales."""

    h1: float
    h2: float

    def __post_init__(self):
        if not (np.isfinite(self.h1) and self.h1 > 0):
            raise ValueError("h1 must be positive and finite")
        if not (np.isfinite(self.h2) and self.h2 > 0):
            raise ValueError("h2 must be positive and finite")


@dataclass(frozen=True)
class EMConfig:
    max_iter: int = 500
    tol_obj: float = 1e-8
    tol_param: float = 1e-6
    n_starts: int = 5
    seed: int = 0
    order: int = 1
    kernel: KernelSpec = field(default_factory=KernelSpec)

    def __post_init__(self):
        if self.max_iter < 1 or self.n_starts < 1:
            raise ValueError("max_iter and n_starts must be >= 1")
        if self.tol_obj <= 0 or self.tol_param <= 0:
            raise ValueError("tolerances must be positive")
        if self.order < 0:
            raise ValueError("order must be >= 0")


@dataclass(frozen=True)
class ModalCoefficients:
    """Local polynomial coefficients (beta_0..beta_p) centered at x0."""

    beta: np.ndarray
    center: float

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))

    @property
    def order(self) -> int:
        return self.beta.size - 1

    def derivative(self, v: int) -> float:
        """m_hat^(v)(x0) = v! * beta_v."""
        return float(_factorial(v) * self.beta[v])


def _factorial(v: int) -> int:
    out = 1
    for k in range(2, v + 1):
        out *= k
    return out


@dataclass
class PointFit:
    coefficients: ModalCoefficients | None
    objective: float
    iterations: int
    converged: bool
    n_starts_used: int
    start_objectives: np.ndarray
    error: ModalRegressionError | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class CurveEstimate:
    grid: np.ndarray
    fits: list
    derivative_order: int = 0

    def values(self) -> np.ndarray:
        """v! * beta_v per grid point; NaN where the point fit failed."""
        v = self.derivative_order
        fac = _factorial(v)
        out = np.full(self.grid.size, np.nan)
        for i, fit in enumerate(self.fits):
            if fit.ok and fit.coefficients.beta.size > v:
                out[i] = fac * fit.coefficients.beta[v]
        return out


def _kernel_weights(data: Dataset, x0: float, bw: Bandwidths, kernel: KernelSpec):
    return kernel_eval(kernel, (data.x - x0) / bw.h1) / bw.h1


def _scaled_design(x: np.ndarray, x0: float, p: int, h1: float) -> np.ndarray:
    t = (x - x0) / h1
    return np.vander(t, p + 1, increasing=True)


def objective(data: Dataset, theta: ModalCoefficients, bw: Bandwidths,
              kernel: KernelSpec = KernelSpec()) -> float:
    """Direct evaluation of the sample modal objective at theta."""
    beta = theta.beta
    if not np.all(np.isfinite(beta)):
        raise ValueError("non-finite coefficients")
    d = data.x - theta.center
    pred = np.polynomial.polynomial.polyval(d, beta)
    kw = _kernel_weights(data, theta.center, bw, kernel)
    return float(np.mean(kw * gaussian_resp(data.y - pred, bw.h2)))


def e_step(data: Dataset, theta: ModalCoefficients, bw: Bandwidths,
           kernel: KernelSpec = KernelSpec()) -> np.ndarray:
    """Responsibilities pi_j, proportional to the j-th objective term."""
    d = data.x - theta.center
    pred = np.polynomial.polynomial.polyval(d, theta.beta)
    kw = _kernel_weights(data, theta.center, bw, kernel)
    w = kw * gaussian_resp(data.y - pred, bw.h2)
    s = float(w.sum())
    if s <= 0.0 or not np.isfinite(s):
        raise DegenerateWindow("all kernel products are zero at x0")
    return w / s


def m_step(data: Dataset, weights: np.ndarray, x0: float, p: int) -> ModalCoefficients:
    """Weighted least-squares polynomial solve with the given responsibilities."""
    d = data.x - x0
    D = np.vander(d, p + 1, increasing=True)
    beta = weighted_lstsq(D, data.y, np.asarray(weights, dtype=float))
    return ModalCoefficients(beta=beta, center=x0)


def fit_point(data: Dataset, x0: float, bw: Bandwidths, cfg: EMConfig) -> PointFit:
    """Multi-start modal EM at a single evaluation point."""
    p = cfg.order
    kw = _kernel_weights(data, x0, bw, cfg.kernel)
    if not np.any(kw > 0):
        raise DegenerateWindow(f"no observation inside the h1-window at x0={x0}")
    D = _scaled_design(data.x, x0, p, bw.h1)
    # Start 1: kernel-weighted mean polynomial fit; further starts perturb
    # the intercept by local residual percentiles.
    theta_ls = weighted_lstsq(D, data.y, kw)
    resid = (data.y - D @ theta_ls)[kw > 0]
    starts = intercept_starts(theta_ls, resid, cfg.n_starts)
    res = multistart_em(D, data.y, kw, bw.h2, starts,
                        cfg.max_iter, cfg.tol_obj, cfg.tol_param)
    scale = bw.h1 ** np.arange(p + 1)
    beta = res.theta / scale
    return PointFit(
        coefficients=ModalCoefficients(beta=beta, center=x0),
        objective=res.objective / data.n,
        iterations=res.iterations,
        converged=res.converged,
        n_starts_used=res.n_starts_used,
        start_objectives=res.start_objectives / data.n,
    )


def fit_curve(data: Dataset, grid, bw: Bandwidths, cfg: EMConfig,
              v: int = 0) -> CurveEstimate:
    """Independent fit_point per grid point; per-point failures are recorded
    in the fit rather than aborting the curve."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty evaluation grid")
    if v > cfg.order:
        raise ValueError("derivative order exceeds polynomial order")
    fits = []
    for x0 in grid:
        try:
            fits.append(fit_point(data, float(x0), bw, cfg))
        except ModalRegressionError as err:
            fits.append(PointFit(
                coefficients=None, objective=np.nan, iterations=0,
                converged=False, n_starts_used=0,
                start_objectives=np.empty(0), error=err))
    return CurveEstimate(grid=grid, fits=fits, derivative_order=v)


def local_constant_mode(data: Dataset, x0: float, bw: Bandwidths,
                        cfg: EMConfig) -> float:
    """Conditional mode of the joint kernel density estimate at x0 (p = 0)."""
    fit = fit_point(data, x0, bw, replace(cfg, order=0))
    return float(fit.coefficients.beta[0])
