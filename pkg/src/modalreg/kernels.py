"""Predictor kernels, their moment constants, and the Gaussian response
kernel used by the modal objective.

The predictor kernel is configurable (Epanechnikov by default, Gaussian as a
smooth alternative).  The response kernel is always the standard normal
density: the EM M-step's closed form depends on it, so it is not a knob.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

SQRT_2PI = math.sqrt(2.0 * math.pi)

#: nu-tilde = int t^2 phi(t)^2 dt for the standard normal density.
TILDE_NU = 1.0 / (4.0 * math.sqrt(math.pi))


class KernelFamily(str, Enum):
    EPANECHNIKOV = "epanechnikov"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class KernelSpec:
    """Choice of predictor kernel.

    Epanechnikov has compact support [-1, 1] and satisfies the usual
    regularity assumptions; Gaussian is offered for smoothness experiments
    (note its support is unbounded, so window-emptiness diagnostics never
    trigger with it).
    """

    family: KernelFamily = KernelFamily.EPANECHNIKOV

    @staticmethod
    def from_name(name: str) -> "KernelSpec":
        return KernelSpec(KernelFamily(name.lower()))


def kernel_eval(spec: KernelSpec, t):
    """Evaluate the unscaled kernel K(t).  Accepts scalars or arrays.

    The scaled form K_h(x) = K(x/h)/h is computed by callers.
    """
    t = np.asarray(t, dtype=float)
    if spec.family is KernelFamily.EPANECHNIKOV:
        out = np.where(np.abs(t) <= 1.0, 0.75 * (1.0 - t * t), 0.0)
    else:
        out = np.exp(-0.5 * t * t) / SQRT_2PI
    return out if out.ndim else float(out)


def gaussian_density(t):
    """Standard normal density, the fixed response kernel."""
    t = np.asarray(t, dtype=float)
    out = np.exp(-0.5 * t * t) / SQRT_2PI
    return out if out.ndim else float(out)


def _double_factorial(j: int) -> int:
    out = 1
    while j > 1:
        out *= j
        j -= 2
    return out


@dataclass(frozen=True)
class KernelMoments:
    """Moments mu_j = int t^j K dt and nu_j = int t^j K^2 dt, j = 0..2p+2.

    Odd entries are exact zeros by symmetry.  ``tilde_nu`` is the response
    kernel constant int t^2 phi(t)^2 dt.
    """

    mu: tuple
    nu: tuple
    tilde_nu: float = TILDE_NU

    @property
    def mu2(self) -> float:
        return self.mu[2]

    @property
    def nu0(self) -> float:
        return self.nu[0]


def kernel_moments(spec: KernelSpec, p: int) -> KernelMoments:
    """Closed-form kernel moments through order 2p+2."""
    if p < 0:
        raise ValueError("p must be >= 0")
    order = 2 * p + 2
    mu = []
    nu = []
    for j in range(order + 1):
        if j % 2 == 1:
            mu.append(0.0)
            nu.append(0.0)
            continue
        if spec.family is KernelFamily.EPANECHNIKOV:
            # int t^j 0.75(1-t^2) dt over [-1,1]
            mu.append(3.0 / ((j + 1) * (j + 3)))
            # int t^j 0.5625(1-t^2)^2 dt over [-1,1]
            nu.append(1.125 * (1.0 / (j + 1) - 2.0 / (j + 3) + 1.0 / (j + 5)))
        else:
            # N(0,1) moments; K^2 integrates against a N(0, 1/2) profile.
            mu.append(float(_double_factorial(j - 1)) if j else 1.0)
            nu.append(_double_factorial(j - 1) * 0.5 ** (j // 2) / (2.0 * math.sqrt(math.pi))
                      if j else 1.0 / (2.0 * math.sqrt(math.pi)))
    return KernelMoments(mu=tuple(mu), nu=tuple(nu))
