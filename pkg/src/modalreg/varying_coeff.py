"""Varying-coefficient modal regression.

Mode(y | x, u) = sum_j g_j(u) x_j, with the coefficient functions and their
derivatives estimated at an index point u0 by maximizing

    sum_i K_h1(u_i - u0) * phi_h2(y_i - sum_j {b_j + c_j (u_i - u0)} x_ij)

through the same modal EM alternation as the scalar estimator.  Internally
theta = (b, h1*c) so the two column blocks have comparable scale; the scalar
local-linear fit is the exact special case p = 1, X == 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._em import gaussian_resp, intercept_starts, multistart_em, weighted_lstsq
from .errors import DegenerateWindow, ModalRegressionError, OutOfRange
from .kernels import KernelSpec, kernel_eval
from .modal_lpr import Bandwidths, EMConfig


@dataclass(frozen=True)
class VCDataset:
    """Sample (x_i, u_i, y_i) with x_i a p-vector whose first entry is 1."""

    u: np.ndarray
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if u.ndim != 1 or y.ndim != 1 or X.ndim != 2:
            raise ValueError("u, y must be 1-d and X 2-d")
        if not (u.size == y.size == X.shape[0]):
            raise ValueError("inconsistent sample sizes")
        if not np.all(X[:, 0] == 1.0):
            raise ValueError("first covariate column must be identically 1")
        if not all(np.all(np.isfinite(a)) for a in (u, X, y)):
            raise ValueError("non-finite values in dataset")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.u.size

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class VCCoefficients:
    """Coefficient values b and derivative values c at the index point u0."""

    b: np.ndarray
    c: np.ndarray
    center: float

    def __post_init__(self):
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        if self.b.shape != self.c.shape:
            raise ValueError("b and c must have equal length")


@dataclass
class VCPointFit:
    coefficients: VCCoefficients | None
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
class VCCurveEstimate:
    grid: np.ndarray
    fits: list

    def coefficient_matrix(self) -> np.ndarray:
        """Grid-by-p matrix of b-hat values; NaN rows where the fit failed."""
        p = next(f.coefficients.b.size for f in self.fits if f.ok)
        out = np.full((self.grid.size, p), np.nan)
        for i, fit in enumerate(self.fits):
            if fit.ok:
                out[i] = fit.coefficients.b
        return out


def _kernel_weights(data: VCDataset, u0: float, bw: Bandwidths,
                    kernel: KernelSpec):
    return kernel_eval(kernel, (data.u - u0) / bw.h1) / bw.h1


def _scaled_design(data: VCDataset, u0: float, h1: float) -> np.ndarray:
    t = (data.u - u0) / h1
    return np.hstack([data.X, data.X * t[:, None]])


def _residuals(data: VCDataset, theta: VCCoefficients) -> np.ndarray:
    d = data.u - theta.center
    return data.y - data.X @ theta.b - (data.X @ theta.c) * d


def vc_objective(data: VCDataset, theta: VCCoefficients, bw: Bandwidths,
                 kernel: KernelSpec = KernelSpec()) -> float:
    """Direct evaluation of the varying-coefficient modal objective."""
    if not (np.all(np.isfinite(theta.b)) and np.all(np.isfinite(theta.c))):
        raise ValueError("non-finite coefficients")
    kw = _kernel_weights(data, theta.center, bw, kernel)
    return float(np.sum(kw * gaussian_resp(_residuals(data, theta), bw.h2)))


def vc_e_step(data: VCDataset, theta: VCCoefficients, bw: Bandwidths,
              kernel: KernelSpec = KernelSpec()) -> np.ndarray:
    kw = _kernel_weights(data, theta.center, bw, kernel)
    w = kw * gaussian_resp(_residuals(data, theta), bw.h2)
    s = float(w.sum())
    if s <= 0.0 or not np.isfinite(s):
        raise DegenerateWindow("all kernel products are zero at u0")
    return w / s


def vc_m_step(data: VCDataset, weights: np.ndarray, u0: float) -> VCCoefficients:
    """Weighted least squares on the expanded design [X, X*(u-u0)]."""
    d = data.u - u0
    D = np.hstack([data.X, data.X * d[:, None]])
    theta = weighted_lstsq(D, data.y, np.asarray(weights, dtype=float))
    p = data.p
    return VCCoefficients(b=theta[:p], c=theta[p:], center=u0)


def vc_fit_point(data: VCDataset, u0: float, bw: Bandwidths,
                 cfg: EMConfig) -> VCPointFit:
    """Multi-start modal EM for the coefficient functions at u0."""
    kw = _kernel_weights(data, u0, bw, cfg.kernel)
    if not np.any(kw > 0):
        raise DegenerateWindow(f"no observation inside the h1-window at u0={u0}")
    D = _scaled_design(data, u0, bw.h1)
    theta_ls = weighted_lstsq(D, data.y, kw)
    resid = (data.y - D @ theta_ls)[kw > 0]
    starts = intercept_starts(theta_ls, resid, cfg.n_starts)
    res = multistart_em(D, data.y, kw, bw.h2, starts,
                        cfg.max_iter, cfg.tol_obj, cfg.tol_param)
    p = data.p
    coef = VCCoefficients(b=res.theta[:p], c=res.theta[p:] / bw.h1, center=u0)
    return VCPointFit(
        coefficients=coef,
        objective=res.objective,
        iterations=res.iterations,
        converged=res.converged,
        n_starts_used=res.n_starts_used,
        start_objectives=res.start_objectives,
    )


def vc_fit_curves(data: VCDataset, grid, bw: Bandwidths,
                  cfg: EMConfig) -> VCCurveEstimate:
    """Per-point fits over a u grid with per-point error isolation."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty evaluation grid")
    fits = []
    for u0 in grid:
        try:
            fits.append(vc_fit_point(data, float(u0), bw, cfg))
        except ModalRegressionError as err:
            fits.append(VCPointFit(
                coefficients=None, objective=np.nan, iterations=0,
                converged=False, n_starts_used=0,
                start_objectives=np.empty(0), error=err))
    return VCCurveEstimate(grid=grid, fits=fits)


def vc_predict(fit: VCCurveEstimate, u: float, x) -> float:
    """Predicted conditional mode sum_j g_hat_j(u) x_j, with linear
    interpolation of the fitted coefficient functions between grid points."""
    grid = fit.grid
    if u < grid.min() or u > grid.max():
        raise OutOfRange(f"u={u} outside fitted grid [{grid.min()}, {grid.max()}]")
    B = fit.coefficient_matrix()
    x = np.asarray(x, dtype=float)
    g = np.array([np.interp(u, grid, B[:, j]) for j in range(B.shape[1])])
    return float(g @ x)
