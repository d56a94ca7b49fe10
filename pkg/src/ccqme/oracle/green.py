"""Retarded position autocorrelation G(t) of the damped oscillator with Drude damping.

G~(z) = (w_D + z) / (z^3 + z^2 w_D + z (Omega^2 + gamma w_D) + w_D Omega^2)
is inverted by partial fractions, G(t) = sum_k c_k t^{m_k} e^{z_k t}.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from ccqme.bath import BathSpec, LorentzDrude
from ccqme.errors import OutOfDomain, RepeatedRoots, RepeatedRootsWarning, UnsupportedBathCombination

logger = logging.getLogger(__name__)

# roots closer than this (relative to the largest root) are merged
_ROOT_MERGE = 1e-7

Term = Tuple[complex, int, complex]  # coefficient, power of t, exponent


def _differentiate(terms: Sequence[Term]) -> Tuple[Term, ...]:
    out = []
    for c, m, z in terms:
        out.append((c * z, m, z))
        if m > 0:
            out.append((c * m, m - 1, z))
    return tuple(out)


@dataclass(frozen=True)
class GreenFunction:
    omega: float
    omega_d: float
    gamma: float
    roots: Tuple[complex, ...]
    terms: Tuple[Term, ...]
    confluent: bool = False

    def derivative_terms(self, order: int) -> Tuple[Term, ...]:
        terms = self.terms
        for _ in range(order):
            terms = _differentiate(terms)
        return terms

    def __call__(self, t, order: int = 0) -> np.ndarray:
        """The ``order``-th time derivative of G at t (scalar or array)."""
        t = np.asarray(t, dtype=float)
        total = np.zeros(t.shape, dtype=np.complex128)
        for c, m, z in self.derivative_terms(order):
            total += c * t**m * np.exp(z * t)
        return total.real if total.ndim else float(total.real)

    def laplace(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        return (self.omega_d + z) / self.characteristic(z)

    def characteristic(self, z) -> np.ndarray:
        wd, w2 = self.omega_d, self.omega**2
        return z**3 + z**2 * wd + z * (w2 + self.gamma * wd) + wd * w2

    def slow_roots(self) -> Tuple[complex, complex]:
        """The two roots with the largest real part; they set the long-time dynamics."""
        ordered = sorted(self.roots, key=lambda z: -z.real)
        return ordered[0], ordered[1]

    def asymptotic_damping(self) -> Tuple[float, float]:
        """(gamma_q, gamma_p) at t -> infinity: G'' + gamma_p G' + gamma_q G = 0 on the slow pair."""
        z1, z2 = self.slow_roots()
        return float((z1 * z2).real), float(-(z1 + z2).real)


def _drude_parameters(baths: Sequence[BathSpec]) -> Tuple[float, float]:
    if not baths:
        raise UnsupportedBathCombination("the exact oscillator needs at least one bath")
    cutoffs, gamma = set(), 0.0
    for b in baths:
        if not isinstance(b.spectral, LorentzDrude):
            raise UnsupportedBathCombination("the exact oscillator supports Lorentz-Drude baths only")
        if b.normalization != "caldeira-leggett":
            raise UnsupportedBathCombination(
                "the exact oscillator needs the caldeira-leggett correlator normalization"
            )
        cutoffs.add(b.spectral.omega_d)
        gamma += b.spectral.gamma
    if len(cutoffs) > 1:
        raise UnsupportedBathCombination(f"baths must share one Drude cutoff, got {sorted(cutoffs)}")
    return gamma, cutoffs.pop()


def _cluster(roots: np.ndarray) -> list[tuple[complex, int]]:
    scale = max(float(np.max(np.abs(roots))), 1e-300)
    groups: list[list[complex]] = []
    for z in roots:
        for g in groups:
            if abs(g[0] - z) < _ROOT_MERGE * scale:
                g.append(z)
                break
        else:
            groups.append([z])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def _partial_fractions(omega_d: float, clusters: list[tuple[complex, int]]) -> Tuple[Term, ...]:
    def num(z):
        return omega_d + z

    mult = sorted(m for _, m in clusters)
    if mult == [1, 1, 1]:
        zs = [z for z, _ in clusters]
        terms = []
        for i, z in enumerate(zs):
            others = [zs[j] for j in range(3) if j != i]
            terms.append((num(z) / ((z - others[0]) * (z - others[1])), 0, z))
        return tuple(terms)
    if mult == [1, 2]:
        a = next(z for z, m in clusters if m == 2)
        b = next(z for z, m in clusters if m == 1)
        ca = (a - b - num(a)) / (a - b) ** 2
        cb = num(a) / (a - b)
        cc = num(b) / (b - a) ** 2
        return ((ca, 0, a), (cb, 1, a), (cc, 0, b))
    if mult == [3]:
        a = clusters[0][0]
        return ((1.0 + 0j, 1, a), (0.5 * num(a), 2, a))
    raise RepeatedRoots(f"unexpected root multiplicities {mult}")


def green_function(omega: float, baths: Sequence[BathSpec]) -> GreenFunction:
    """G for an oscillator of frequency ``omega`` coupled to Drude baths sharing one cutoff.

    Several baths enter through the summed strength gamma = sum_i gamma_i.
    """
    if not omega > 0:
        raise OutOfDomain(f"oscillator frequency must be positive, got {omega}")
    gamma, wd = _drude_parameters(baths)
    roots = np.roots([1.0, wd, omega**2 + gamma * wd, wd * omega**2]).astype(np.complex128)
    clusters = _cluster(roots)
    confluent = len(clusters) < 3
    if confluent:
        warnings.warn(
            f"characteristic cubic has repeated roots {clusters}; using confluent partial fractions",
            RepeatedRootsWarning,
            stacklevel=2,
        )
    terms = _partial_fractions(wd, clusters)
    green = GreenFunction(
        omega=omega,
        omega_d=wd,
        gamma=gamma,
        roots=tuple(complex(z) for z, _ in clusters),
        terms=terms,
        confluent=confluent,
    )
    if max(z.real for z in green.roots) >= 0:
        logger.warning("Green function has a non-decaying root: %s", green.roots)
    return green


def memory_kernel_solution(omega: float, baths: Sequence[BathSpec], times) -> np.ndarray:
    """G(t) from G'' + int kappa G' + Omega^2 G = 0 with the Drude kernel kappa = gamma w_D e^{-w_D t}.

    The memory integral y(t) obeys y' = gamma w_D G' - w_D y, so the problem is a plain ODE.
    """
    gamma, wd = _drude_parameters(baths)
    times = np.asarray(times, dtype=float)

    def rhs(_, x):
        g, gdot, y = x
        return [gdot, -y - omega**2 * g, gamma * wd * gdot - wd * y]

    sol = solve_ivp(
        rhs, (0.0, float(times[-1])), [0.0, 1.0, 0.0], method="DOP853", t_eval=times, rtol=1e-11, atol=1e-13
    )
    if not sol.success:
        raise OutOfDomain(f"memory-kernel ODE failed: {sol.message}")
    return sol.y[0]
