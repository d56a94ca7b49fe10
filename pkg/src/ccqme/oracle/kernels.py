"""Real-time influence kernels K_q, K_p of the exact oscillator.

K_q(t) = 2 int_0^t ds G(s) F_q(s) with F_q(s) = int_0^s Re C(u) G(s - u) du, and
likewise K_p with G'. The convolutions use product integration: G is linear on
each grid cell and the moments int Re C and int u Re C over the cell are exact,
so the logarithmic singularity of a Drude correlator at u = 0 costs nothing.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from tqdm import tqdm

from ccqme.bath import BathSpec
from ccqme.bath.correlation import coth_density, frequency_breaks, upper_frequency
from ccqme.bath.quadrature import QuadSum
from ccqme.errors import GridTooCoarse, OutOfDomain
from ccqme.oracle.green import GreenFunction
from ccqme.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InfluenceKernels:
    times: np.ndarray
    kq: np.ndarray
    kp: np.ndarray
    kq_dot: np.ndarray
    kp_dot: np.ndarray
    kq_ddot: np.ndarray
    # finite differences of kp_dot; no coefficient formula needs it
    kp_ddot: np.ndarray

    def at(self, t: float) -> dict[str, float]:
        if t < self.times[0] or t > self.times[-1]:
            raise OutOfDomain(f"t={t:.6g} outside the kernel grid")
        return {
            name: float(np.interp(t, self.times, getattr(self, name)))
            for name in ("kq", "kp", "kq_dot", "kp_dot", "kq_ddot")
        }


@dataclass(frozen=True)
class AsymptoticKernels:
    kq: float
    kp: float


def _correlator_moments(bath: BathSpec, tau: float, tolerances: Tolerances) -> tuple[float, float]:
    """(int_0^tau Re C(u) du, int_0^tau u Re C(u) du) by frequency quadrature."""
    if tau == 0.0:
        return 0.0, 0.0
    h = coth_density(bath)
    scale = bath.frequency_scale
    near = min(0.5 * scale, 10.0 / tau + 0.05 * scale)
    top = max(upper_frequency(bath), 2.0 * near)

    def near0(w):
        return h(w) * tau * np.sinc(w * tau / math.pi)

    def near1(w):
        return h(w) * (tau * tau * np.sinc(w * tau / math.pi) - 0.5 * tau * tau * np.sinc(0.5 * w * tau / math.pi) ** 2)

    def over_w(w):
        return h(w) / w

    def over_w2(w):
        return h(w) / (w * w)

    def minus_over_w2(w):
        return -h(w) / (w * w)

    limit = max(tolerances.quad_limit, int(4 * tau * near) + 50)
    i0 = QuadSum(tolerances, f"int Re C on [0, {tau:.6g}]").add(near0, 0.0, near, limit=limit)
    i1 = QuadSum(tolerances, f"int u Re C on [0, {tau:.6g}]").add(near1, 0.0, near, limit=limit)
    sin_part = QuadSum(tolerances, "sin moment")
    for a, b in [(near, top), (top, np.inf)]:
        sin_part.add(over_w, a, b, weight="sin", wvar=tau)
        i1.add(over_w2, a, b, weight="cos", wvar=tau)
        i1.add(minus_over_w2, a, b)
    s = sin_part.result()
    return i0.result() + s, i1.result() + tau * s


def _convolve(a: np.ndarray, b: np.ndarray, samples: np.ndarray) -> np.ndarray:
    """F_k = sum_{j<k} a_j g_{k-j} + b_j g_{k-j-1} for k = 0..n."""
    n = a.size
    full_a = np.convolve(a, samples)
    full_b = np.convolve(b, samples)
    out = np.zeros(n + 1)
    out[1:] = full_a[1 : n + 1] + full_b[:n]
    out[1:n] -= a[1:n] * samples[0]
    return out


def _uniform_step(times: np.ndarray) -> float:
    if times.ndim != 1 or times.size < 3 or times[0] != 0.0:
        raise OutOfDomain("kernel grid must be a 1-d array starting at t = 0 with at least 3 points")
    steps = np.diff(times)
    h = float(steps[0])
    if not np.allclose(steps, h, rtol=1e-9, atol=0.0):
        raise OutOfDomain("kernel grid must be uniform")
    return h


def influence_kernels(
    green: GreenFunction,
    baths: Sequence[BathSpec],
    times,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    check: bool = True,
    progress: bool = False,
) -> InfluenceKernels:
    times = np.asarray(times, dtype=float)
    h = _uniform_step(times)

    i0 = np.zeros_like(times)
    i1 = np.zeros_like(times)
    for bath in baths:
        for k, tau in enumerate(tqdm(times, desc="correlator moments", disable=not progress)):
            m0, m1 = _correlator_moments(bath, tau, tolerances)
            i0[k] += m0
            i1[k] += m1

    d0, d1 = np.diff(i0), np.diff(i1)
    a = (times[1:] * d0 - d1) / h
    b = (d1 - times[:-1] * d0) / h

    g0, g1 = green(times, 0), green(times, 1)
    fq = _convolve(a, b, g0)
    fp = _convolve(a, b, g1)

    kq_dot = 2.0 * g0 * fq
    kp_dot = 2.0 * g1 * fp
    kernels = InfluenceKernels(
        times=times,
        kq=cumulative_trapezoid(kq_dot, times, initial=0.0),
        kp=cumulative_trapezoid(kp_dot, times, initial=0.0),
        kq_dot=kq_dot,
        kp_dot=kp_dot,
        kq_ddot=2.0 * g1 * fq + 2.0 * g0 * fp,
        kp_ddot=np.gradient(kp_dot, times),
    )
    if check:
        _check_against_differences(kernels)
    return kernels


def _check_against_differences(k: InfluenceKernels, tolerance: float = 1e-3) -> None:
    """Grid resolution checks.

    K_q and K_p are trapezoid integrals of their rates, so their error is estimated by
    repeating the integration on every other grid point (Richardson). Near t = 0 the
    K_p rate behaves like t log t, which rules out comparing plain differences of K_p
    against it. The analytic second derivative of K_q is compared against central
    differences of its rate.
    """
    for name, value, deriv in (("K_q", k.kq, k.kq_dot), ("K_p", k.kp, k.kp_dot)):
        coarse = cumulative_trapezoid(deriv[::2], k.times[::2], initial=0.0)
        scale = max(float(np.max(np.abs(value))), 1e-300)
        err = float(np.max(np.abs(value[::2] - coarse))) / (3.0 * scale)
        _report(name, err, tolerance)

    fd = np.gradient(k.kq_dot, k.times)[2:-2]
    ref = k.kq_ddot[2:-2]
    scale = max(float(np.max(np.abs(k.kq_ddot))), 1e-300)
    _report("dK_q", float(np.max(np.abs(fd - ref))) / scale if ref.size else 0.0, tolerance)


def _report(name: str, err: float, tolerance: float) -> None:
    if err > tolerance:
        raise GridTooCoarse(f"{name}: estimated discretization error {err:.3g} (relative); refine the kernel grid")
    logger.debug("%s grid check: %.3g", name, err)


def asymptotic_kernels(
    green: GreenFunction, baths: Sequence[BathSpec], tolerances: Tolerances = DEFAULT_TOLERANCES
) -> AsymptoticKernels:
    """K_q and K_p at t -> infinity: int J coth(beta w/2) |G~(-iw)|^2 (times w^2 for K_p)."""
    omega, width = green.omega, max(green.gamma, 1e-9)
    kq = kp = 0.0
    for bath in baths:
        h = coth_density(bath)

        def fq(w, h=h):
            return h(w) * abs(green.laplace(-1j * w)) ** 2

        def fp(w, h=h):
            return w * w * fq(w)

        breaks = [*frequency_breaks(bath), omega, *(omega + s * width for s in (-2, -0.5, 0.5, 2))]
        top = upper_frequency(bath) + 4.0 * omega
        kq += QuadSum(tolerances, "K_q(inf)").add_segments(fq, 0.0, top, breaks).add(fq, top, np.inf).result()
        kp += QuadSum(tolerances, "K_p(inf)").add_segments(fp, 0.0, top, breaks).add(fp, top, np.inf).result()
    return AsymptoticKernels(kq=kq, kp=kp)
