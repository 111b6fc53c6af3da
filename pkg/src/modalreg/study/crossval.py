"""Cross-validated point-prediction error (median of squared prediction
errors), for d-fold CV and Monte-Carlo CV splits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bandwidth import select_bandwidths, vc_select_bandwidths
from ..baselines import BaselineMethod, BaselineSpec, cv_bandwidth, \
    local_fit_curve, vc_baseline_fit
from ..errors import ModalRegressionError
from ..modal_lpr import Dataset, EMConfig, fit_point
from ..varying_coeff import VCDataset, vc_fit_point
from .coverage import METHOD_LLMR
from .scenarios import substream


@dataclass(frozen=True)
class MSPEReport:
    method: str
    mode: str
    median_mspe: float
    sd_mspe: float
    folds_used: int
    folds_failed: int


def _predict_scalar(train: Dataset, x_test: np.ndarray, method: str,
                    cfg: EMConfig) -> np.ndarray:
    if method == METHOD_LLMR:
        bw = select_bandwidths(train, cfg)
        out = np.full(x_test.size, np.nan)
        for i, x0 in enumerate(x_test):
            try:
                out[i] = fit_point(train, float(x0), bw, cfg).coefficients.beta[0]
            except ModalRegressionError:
                pass
        return out
    m = BaselineMethod(method)
    h = cv_bandwidth(train, m)
    return local_fit_curve(train, x_test, h, m)


def _predict_vc(train: VCDataset, u_test: np.ndarray, X_test: np.ndarray,
                method: str, cfg: EMConfig) -> np.ndarray:
    out = np.full(u_test.size, np.nan)
    if method == METHOD_LLMR:
        bw = vc_select_bandwidths(train, cfg)
        for i, u0 in enumerate(u_test):
            try:
                b = vc_fit_point(train, float(u0), bw, cfg).coefficients.b
                out[i] = b @ X_test[i]
            except ModalRegressionError:
                pass
        return out
    m = BaselineMethod(method)
    h = cv_bandwidth(train, m)
    spec = BaselineSpec(m, h)
    for i, u0 in enumerate(u_test):
        try:
            b = vc_baseline_fit(train, float(u0), spec)
            out[i] = b @ X_test[i]
        except ModalRegressionError:
            pass
    return out


def _splits(n: int, mode, seed: int):
    """Yield boolean test masks for the requested CV mode."""
    kind = mode[0]
    rng = substream(seed)
    if kind == "kfold":
        d = int(mode[1])
        if d < 2:
            raise ValueError("fold count must be >= 2")
        perm = rng.permutation(n)
        for chunk in np.array_split(perm, d):
            mask = np.zeros(n, dtype=bool)
            mask[chunk] = True
            yield mask
    elif kind == "mccv":
        d = int(mode[1])
        reps = int(mode[2])
        if d < 1 or d >= n or reps < 2:
            raise ValueError("need 1 <= test size < n and >= 2 splits")
        for _ in range(reps):
            idx = rng.choice(n, size=d, replace=False)
            mask = np.zeros(n, dtype=bool)
            mask[idx] = True
            yield mask
    else:
        raise ValueError(f"unknown CV mode {kind!r}")


def cv_mspe(data, method: str, mode, seed: int,
            cfg: EMConfig = EMConfig()) -> MSPEReport:
    """Median and sd, across folds/splits, of the per-fold median of squared
    held-out prediction errors.  Failed folds are excluded with a count."""
    method = method.lower()
    scalar = isinstance(data, Dataset)
    fold_medians = []
    failed = 0
    for test in _splits(data.n, mode, seed):
        train = ~test
        try:
            if scalar:
                sub = Dataset(data.x[train], data.y[train])
                pred = _predict_scalar(sub, data.x[test], method, cfg)
            else:
                sub = VCDataset(data.u[train], data.X[train], data.y[train])
                pred = _predict_vc(sub, data.u[test], data.X[test], method, cfg)
            err = (data.y[test] - pred) ** 2
            err = err[np.isfinite(err)]
            if err.size == 0:
                raise ModalRegressionError("no held-out point predicted")
            fold_medians.append(float(np.median(err)))
        except ModalRegressionError:
            failed += 1
    if not fold_medians:
        raise ModalRegressionError("every fold failed")
    arr = np.asarray(fold_medians)
    return MSPEReport(method=method, mode=str(mode),
                      median_mspe=float(np.median(arr)),
                      sd_mspe=float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
                      folds_used=arr.size, folds_failed=failed)
