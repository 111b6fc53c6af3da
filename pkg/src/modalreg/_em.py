"""Shared modal-EM machinery.

Both the scalar local-polynomial fit and the varying-coefficient fit reduce
to the same alternation: kernel-times-Gaussian responsibilities, then a
weighted least-squares solve on a (scaled) design matrix.  Keeping one code
path here makes the two estimators numerically identical in the special case
where they coincide.

Internally the design is scaled so that every column is O(1) near the
evaluation point (powers of (x - x0)/h1, or covariates times (u - u0)/h1);
callers rescale coefficients on the way out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWindow, SingularDesign

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_RIDGE = 1e-10
_COND_LIMIT = 1e12
_TIE_TOL = 1e-10

# Percentiles of local residuals used to perturb the intercept for the
# default five-start policy (start 1 is the weighted mean fit itself).
_DEFAULT_PERCENTILES = (10.0, 35.0, 65.0, 90.0)


def start_percentiles(n_starts: int) -> np.ndarray:
    if n_starts <= 1:
        return np.empty(0)
    if n_starts == 5:
        return np.asarray(_DEFAULT_PERCENTILES)
    return np.linspace(10.0, 90.0, n_starts - 1)


def gaussian_resp(r: np.ndarray, h2: float) -> np.ndarray:
    """phi_{h2}(r) = phi(r/h2)/h2 for the standard normal phi."""
    z = r / h2
    return np.exp(-0.5 * z * z) / (h2 * _SQRT_2PI)


def weighted_lstsq(D: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Solve the ridge-stabilized weighted normal equations.

    Raises SingularDesign when the stabilized system is still effectively
    rank deficient (condition estimate above 1e12).
    """
    wD = D * w[:, None]
    A = D.T @ wD
    b = wD.T @ y
    k = A.shape[0]
    if not np.all(np.isfinite(A)):
        raise SingularDesign("weighted design is not finite")
    lam = _RIDGE * np.trace(A) / k
    A_r = A + lam * np.eye(k)
    if np.linalg.cond(A_r) > _COND_LIMIT:
        raise SingularDesign("weighted design is numerically rank deficient")
    sol = np.linalg.solve(A_r, b)
    # One refinement step against the unridged normal equations, with the
    # ridged matrix as preconditioner: on well-posed systems this removes
    # the O(lam*cond) ridge bias, so the M-step maximizes its surrogate to
    # second order and EM ascent holds to the stated 1e-12 slack; exactly
    # collinear systems keep the stabilized ridge solution.
    sol += np.linalg.solve(A_r, b - A @ sol)
    return sol


@dataclass
class EMRun:
    theta: np.ndarray
    objective: float          # sum_i kw_i * phi_{h2}(r_i)
    iterations: int
    converged: bool


def em_objective(D, y, kw, theta, h2) -> float:
    return float(np.sum(kw * gaussian_resp(y - D @ theta, h2)))


def em_run(D, y, kw, h2, theta0, max_iter, tol_obj, tol_param) -> EMRun:
    """Run the E/M alternation from one starting vector.

    Monotone ascent of the objective is inherited from the EM construction;
    the ridge perturbation in the M-step is far below the stopping
    tolerances.
    """
    theta = np.asarray(theta0, dtype=float).copy()
    obj = em_objective(D, y, kw, theta, h2)
    if obj <= 0.0 or not np.isfinite(obj):
        raise DegenerateWindow("no observation carries weight at the start")
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = kw * gaussian_resp(y - D @ theta, h2)
        s = float(w.sum())
        if s <= 0.0 or not np.isfinite(s):
            raise DegenerateWindow("all kernel products vanished")
        theta_new = weighted_lstsq(D, y, w / s)
        obj_new = em_objective(D, y, kw, theta_new, h2)
        d_theta = float(np.max(np.abs(theta_new - theta)))
        d_obj = abs(obj_new - obj)
        theta, obj = theta_new, obj_new
        if d_obj < tol_obj * abs(obj) or d_theta < tol_param:
            converged = True
            break
    return EMRun(theta=theta, objective=obj, iterations=it, converged=converged)


@dataclass
class MultistartResult:
    theta: np.ndarray
    objective: float
    iterations: int
    converged: bool
    n_starts_used: int
    start_objectives: np.ndarray


def multistart_em(D, y, kw, h2, starts, max_iter, tol_obj, tol_param) -> MultistartResult:
    """Run EM from each start and pick the best final objective.

    Ties within 1e-10 (relative to the best objective) are broken toward the
    solution whose intercept is closest to start 1's intercept, which biases
    deterministically toward the central mode.
    """
    runs = []
    objs = np.full(len(starts), -np.inf)
    first_err = None
    for i, theta0 in enumerate(starts):
        try:
            run = em_run(D, y, kw, h2, theta0, max_iter, tol_obj, tol_param)
        except DegenerateWindow as err:
            if first_err is None:
                first_err = err
            runs.append(None)
            continue
        runs.append(run)
        objs[i] = run.objective
    if not np.isfinite(objs).any():
        raise first_err if first_err is not None else DegenerateWindow(
            "every EM start failed")
    best_obj = float(objs.max())
    anchor = float(starts[0][0])
    best = None
    for run in runs:
        if run is None:
            continue
        if run.objective < best_obj - _TIE_TOL * max(1.0, abs(best_obj)):
            continue
        if best is None or abs(run.theta[0] - anchor) < abs(best.theta[0] - anchor):
            best = run
    return MultistartResult(
        theta=best.theta,
        objective=best.objective,
        iterations=best.iterations,
        converged=best.converged,
        n_starts_used=len(starts),
        start_objectives=objs,
    )


def intercept_starts(theta_ls: np.ndarray, residuals: np.ndarray,
                     n_starts: int) -> list[np.ndarray]:
    """Build the multi-start list: the mean fit itself, then intercept
    perturbations by local-residual percentiles."""
    starts = [np.asarray(theta_ls, dtype=float)]
    if n_starts > 1 and residuals.size:
        for q in np.percentile(residuals, start_percentiles(n_starts)):
            t = starts[0].copy()
            t[0] += q
            starts.append(t)
    return starts[:n_starts] if n_starts >= 1 else starts[:1]
