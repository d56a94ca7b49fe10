import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ccqme.errors import CoefficientSingularity, OutOfDomain
from ccqme.oracle.green import GreenFunction
from ccqme.oracle.kernels import AsymptoticKernels, InfluenceKernels
from ccqme.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExactCoefficients:
    time: float
    gamma_q: float
    gamma_p: float
    d_q: float
    d_p: float


@dataclass(frozen=True)
class CoefficientSeries:
    times: np.ndarray
    gamma_q: np.ndarray
    gamma_p: np.ndarray
    d_q: np.ndarray
    d_p: np.ndarray
    kq: np.ndarray
    kp: np.ndarray
    skipped: Tuple[float, ...] = ()

    def at(self, t: float) -> ExactCoefficients:
        ok = np.isfinite(self.gamma_q)
        ts = self.times[ok]
        if t < ts[0] or t > ts[-1]:
            raise OutOfDomain(f"t={t:.6g} outside the coefficient grid")
        return ExactCoefficients(
            time=t,
            gamma_q=float(np.interp(t, ts, self.gamma_q[ok])),
            gamma_p=float(np.interp(t, ts, self.gamma_p[ok])),
            d_q=float(np.interp(t, ts, self.d_q[ok])),
            d_p=float(np.interp(t, ts, self.d_p[ok])),
        )


def damping_coefficients(green: GreenFunction, t: float, tolerances: Tolerances = DEFAULT_TOLERANCES):
    """(gamma_q(t), gamma_p(t)) from G and its first three derivatives."""
    g, g1, g2, g3 = (green(t, k) for k in range(4))
    den = g1 * g1 - g * g2
    if abs(den) < tolerances.coefficient_singularity * (g1 * g1 + abs(g * g2)):
        raise CoefficientSingularity(t)
    return (g2 * g2 - g1 * g3) / den, (g * g3 - g1 * g2) / den


def exact_coefficients(
    green: GreenFunction,
    kernels: InfluenceKernels | AsymptoticKernels,
    t: float = math.inf,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ExactCoefficients:
    if math.isinf(t):
        if not isinstance(kernels, AsymptoticKernels):
            raise OutOfDomain("t = infinity needs asymptotic kernels")
        gq, gp = green.asymptotic_damping()
        return ExactCoefficients(t, gq, gp, d_q=gq * kernels.kq - kernels.kp, d_p=gp * kernels.kp)

    if not isinstance(kernels, InfluenceKernels):
        raise OutOfDomain("finite t needs kernels on a time grid")
    gq, gp = damping_coefficients(green, t, tolerances)
    k = kernels.at(t)
    d_q = 0.5 * k["kq_ddot"] - k["kp"] + gq * k["kq"] + 0.5 * gp * k["kq_dot"]
    d_p = 0.5 * k["kp_dot"] + 0.5 * gq * k["kq_dot"] + gp * k["kp"]
    return ExactCoefficients(t, gq, gp, d_q, d_p)


def coefficient_series(
    green: GreenFunction, kernels: InfluenceKernels, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> CoefficientSeries:
    """Coefficients on every kernel grid point; singular points are reported and left as NaN."""
    n = kernels.times.size
    out = {name: np.full(n, np.nan) for name in ("gamma_q", "gamma_p", "d_q", "d_p")}
    skipped = []
    for i, t in enumerate(kernels.times):
        try:
            c = exact_coefficients(green, kernels, float(t), tolerances)
        except CoefficientSingularity:
            skipped.append(float(t))
            continue
        out["gamma_q"][i], out["gamma_p"][i] = c.gamma_q, c.gamma_p
        out["d_q"][i], out["d_p"][i] = c.d_q, c.d_p
    if skipped:
        logger.warning("skipped %d time points where the coefficient denominator vanishes", len(skipped))
    return CoefficientSeries(
        times=kernels.times, kq=kernels.kq, kp=kernels.kp, skipped=tuple(skipped), **out
    )
