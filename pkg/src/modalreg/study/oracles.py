"""Brute-force oracles used to cross-check the EM estimators."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from .._em import gaussian_resp
from ..errors import DegenerateWindow
from ..kernels import KernelSpec, kernel_eval
from ..modal_lpr import Bandwidths, Dataset


def local_constant_profile(data: Dataset, x0: float, bw: Bandwidths,
                           kernel: KernelSpec = KernelSpec()):
    """Kernel weights and the local-constant objective y -> (1/n) sum_i
    K_h1(x_i-x0) phi_h2(y_i-y), vectorized over candidate y values."""
    kw = kernel_eval(kernel, (data.x - x0) / bw.h1) / bw.h1
    if not np.any(kw > 0):
        raise DegenerateWindow(f"no observation inside the h1-window at x0={x0}")

    def profile(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        vals = (kw[None, :] * gaussian_resp(data.y[None, :] - y[:, None], bw.h2)
                ).sum(axis=1) / data.n
        return vals

    return kw, profile


def grid_search_mode_oracle(data: Dataset, x0: float, bw: Bandwidths,
                            y_range: tuple | None = None,
                            grid_size: int = 512,
                            kernel: KernelSpec = KernelSpec()) -> float:
    """Exhaustive maximization of the local-constant modal objective over a
    y grid, refined by bounded scalar optimization between the best grid
    point's neighbors."""
    if grid_size < 100:
        raise ValueError("grid_size must be >= 100")
    kw, profile = local_constant_profile(data, x0, bw, kernel)
    if y_range is None:
        yw = data.y[kw > 0]
        y_range = (float(yw.min()) - bw.h2, float(yw.max()) + bw.h2)
    grid = np.linspace(y_range[0], y_range[1], grid_size)
    vals = profile(grid)
    k = int(np.argmax(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid_size - 1)]
    res = minimize_scalar(lambda y: -profile(y)[0], bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-10})
    return float(res.x) if -res.fun >= vals[k] else float(grid[k])
