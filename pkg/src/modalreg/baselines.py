"""Comparator estimators: local linear mean (LL), local M-estimate with
Huber loss (LM), and local median (LMD), plus varying-coefficient versions
and cross-validated bandwidth selection.

The robust losses are solved by iteratively reweighted least squares; the
median uses the smoothed absolute loss sqrt(r^2 + delta^2) with a tiny
smoothing constant, which keeps the solver inside plain linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AllFitsFailed, SingularDesign
from .kernels import KernelSpec, kernel_eval
from .modal_lpr import Dataset
from .varying_coeff import VCDataset

HUBER_C_DEFAULT = 1.345
_L1_SMOOTH = 1e-6
_IRLS_MAX_ITER = 200
_IRLS_TOL = 1e-10
_DET_FLOOR = 1e-13


class BaselineMethod(str, Enum):
    LL = "ll"
    LM = "lm"
    LMD = "lmd"


@dataclass(frozen=True)
class BaselineSpec:
    method: BaselineMethod
    h: float
    huber_c: float = HUBER_C_DEFAULT

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("bandwidth must be positive")
        if self.method is BaselineMethod.LM and self.huber_c <= 0:
            raise ValueError("huber_c must be positive")


def _robust_weights(r: np.ndarray, method: BaselineMethod, huber_c: float,
                    in_window: np.ndarray) -> np.ndarray:
    """IRLS weights psi(r)/r for the chosen loss, rowwise over eval points."""
    if method is BaselineMethod.LL:
        return np.ones_like(r)
    if method is BaselineMethod.LMD:
        return 1.0 / np.sqrt(r * r + _L1_SMOOTH ** 2)
    # Huber with per-iteration MAD scale over the in-window residuals.
    # Rows with an empty window are junk either way; zero them instead of
    # letting nanmedian warn on an all-NaN slice.
    empty = ~in_window.any(axis=-1, keepdims=True)
    r_w = np.where(in_window | empty, np.where(empty, 0.0, r), np.nan)
    med = np.nanmedian(r_w, axis=-1, keepdims=True)
    scale = 1.4826 * np.nanmedian(np.abs(r_w - med), axis=-1, keepdims=True)
    scale = np.maximum(scale, 1e-12)
    cut = huber_c * scale
    a = np.abs(r)
    return np.where(a <= cut, 1.0, cut / np.maximum(a, 1e-300))


def local_fit_curve(data: Dataset, grid, h: float, method: BaselineMethod,
                    huber_c: float = HUBER_C_DEFAULT,
                    kernel: KernelSpec = KernelSpec()) -> np.ndarray:
    """Local-linear fits at every grid point at once.

    Returns the fitted intercepts; NaN where the local design is singular
    or the window is empty.  IRLS is vectorized across evaluation points
    with closed-form 2x2 solves.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    d = data.x[None, :] - grid[:, None]
    kw = kernel_eval(kernel, d / h) / h
    in_window = kw > 0
    out = np.full(grid.size, np.nan)
    ok = in_window.sum(axis=1) >= 2

    a = np.zeros(grid.size)
    b = np.zeros(grid.size)
    w_rob = np.ones_like(kw)
    n_iter = 1 if method is BaselineMethod.LL else _IRLS_MAX_ITER
    singular = np.zeros(grid.size, dtype=bool)
    for _ in range(n_iter):
        W = kw * w_rob
        S0 = W.sum(axis=1)
        S1 = (W * d).sum(axis=1)
        S2 = (W * d * d).sum(axis=1)
        T0 = (W * data.y).sum(axis=1)
        T1 = (W * d * data.y).sum(axis=1)
        det = S0 * S2 - S1 * S1
        scale = np.maximum(S0 * S2, 1e-300)
        singular = det <= _DET_FLOOR * scale
        det_safe = np.where(singular, 1.0, det)
        a_new = (S2 * T0 - S1 * T1) / det_safe
        b_new = (S0 * T1 - S1 * T0) / det_safe
        delta = np.max(np.abs(a_new - a) + np.abs(b_new - b), initial=0.0,
                       where=ok & ~singular)
        a, b = a_new, b_new
        if method is BaselineMethod.LL or delta < _IRLS_TOL:
            break
        r = data.y[None, :] - (a[:, None] + b[:, None] * d)
        w_rob = _robust_weights(r, method, huber_c, in_window)
    out[ok & ~singular] = a[ok & ~singular]
    return out


def _scalar_point(data: Dataset, x0: float, h: float, method: BaselineMethod,
                  huber_c: float = HUBER_C_DEFAULT,
                  kernel: KernelSpec = KernelSpec()) -> float:
    val = local_fit_curve(data, [x0], h, method, huber_c, kernel)[0]
    if not np.isfinite(val):
        raise SingularDesign(f"local linear fit undefined at x0={x0}")
    return float(val)


def local_linear_mean(data: Dataset, x0: float, h: float,
                      kernel: KernelSpec = KernelSpec()) -> float:
    """Intercept of the kernel-weighted least-squares line at x0."""
    return _scalar_point(data, x0, h, BaselineMethod.LL, kernel=kernel)


def local_median(data: Dataset, x0: float, h: float,
                 kernel: KernelSpec = KernelSpec()) -> float:
    """Local-linear minimizer of kernel-weighted absolute loss at x0."""
    return _scalar_point(data, x0, h, BaselineMethod.LMD, kernel=kernel)


def local_m_huber(data: Dataset, x0: float, h: float,
                  c: float = HUBER_C_DEFAULT,
                  kernel: KernelSpec = KernelSpec()) -> float:
    """Local-linear Huber M-estimate at x0 with tuning constant c."""
    return _scalar_point(data, x0, h, BaselineMethod.LM, huber_c=c, kernel=kernel)


def vc_baseline_fit(data: VCDataset, u0: float, spec: BaselineSpec,
                    kernel: KernelSpec = KernelSpec()) -> np.ndarray:
    """Local-linear-in-u fit of the coefficient functions at u0 for the
    chosen loss; returns the p coefficient values b-hat."""
    d = data.u - u0
    kw = kernel_eval(kernel, d / spec.h) / spec.h
    in_window = kw > 0
    D = np.hstack([data.X, data.X * d[:, None]])
    p2 = D.shape[1]
    theta = np.zeros(p2)
    w_rob = np.ones(data.n)
    n_iter = 1 if spec.method is BaselineMethod.LL else _IRLS_MAX_ITER
    for _ in range(n_iter):
        W = kw * w_rob
        A = D.T @ (D * W[:, None])
        rhs = D.T @ (W * data.y)
        lam = 1e-10 * np.trace(A) / p2
        A_r = A + lam * np.eye(p2)
        if not np.all(np.isfinite(A_r)) or np.linalg.cond(A_r) > 1e12:
            raise SingularDesign(f"varying-coefficient design singular at u0={u0}")
        theta_new = np.linalg.solve(A_r, rhs)
        delta = float(np.max(np.abs(theta_new - theta)))
        theta = theta_new
        if spec.method is BaselineMethod.LL or delta < _IRLS_TOL:
            break
        r = data.y - D @ theta
        w_rob = _robust_weights(r, spec.method, spec.huber_c, in_window)
    return theta[:data.p]


def bandwidth_grid(span: float, n_grid: int = 20) -> np.ndarray:
    """Log-spaced candidate bandwidths from 0.05 to 1.0 times the span."""
    return span * np.logspace(np.log10(0.05), 0.0, n_grid)


def _fold_ids(n: int, fold_count: int) -> np.ndarray:
    return np.arange(n) % fold_count


def cv_bandwidth(data, method: BaselineMethod, fold_count: int = 5,
                 huber_c: float = HUBER_C_DEFAULT,
                 kernel: KernelSpec = KernelSpec(),
                 n_grid: int = 20) -> float:
    """Grid-search bandwidth minimizing out-of-fold prediction error.

    Squared error for LL and LM, absolute error for LMD.  A candidate is
    discarded if any held-out prediction fails; if every candidate is
    discarded the search raises AllFitsFailed.
    """
    if fold_count < 2:
        raise ValueError("fold_count must be >= 2")
    scalar = isinstance(data, Dataset)
    loc = data.x if scalar else data.u
    span = float(loc.max() - loc.min())
    if span <= 0:
        raise ValueError("degenerate predictor range")
    folds = _fold_ids(data.n, fold_count)
    grid = bandwidth_grid(span, n_grid)
    best_h, best_score = None, np.inf
    for h in grid:
        errs = []
        failed = False
        for k in range(fold_count):
            test = folds == k
            train = ~test
            try:
                if scalar:
                    sub = Dataset(data.x[train], data.y[train])
                    pred = local_fit_curve(sub, data.x[test], h, method,
                                           huber_c, kernel)
                    if not np.all(np.isfinite(pred)):
                        failed = True
                        break
                    resid = data.y[test] - pred
                else:
                    sub = VCDataset(data.u[train], data.X[train], data.y[train])
                    spec = BaselineSpec(method, h, huber_c)
                    resid = np.empty(int(test.sum()))
                    for i, idx in enumerate(np.flatnonzero(test)):
                        b = vc_baseline_fit(sub, float(data.u[idx]), spec, kernel)
                        resid[i] = data.y[idx] - b @ data.X[idx]
            except SingularDesign:
                failed = True
                break
            errs.append(np.abs(resid) if method is BaselineMethod.LMD
                        else resid ** 2)
        if failed:
            continue
        score = float(np.mean(np.concatenate(errs)))
        if score < best_score:
            best_h, best_score = float(h), score
    if best_h is None:
        raise AllFitsFailed("every candidate bandwidth failed on some fold")
    return best_h
