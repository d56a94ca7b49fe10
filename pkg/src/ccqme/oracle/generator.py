"""The exact oscillator master equation

d rho/dt = -(i/2)[p^2 + gamma_q q^2, rho] - D_p [q, [q, rho]]
           - (i/2) gamma_p [q, {p, rho}] + D_q [q, [p, rho]].
"""
import logging
import math
import warnings
from typing import Sequence

import numpy as np

from ccqme.bath import BathSpec
from ccqme.errors import TruncationWarning
from ccqme.linalg import EigenSystem, anticommutator, commutator
from ccqme.models import ladder_operators, top_population
from ccqme.oracle.coefficients import CoefficientSeries, ExactCoefficients, exact_coefficients
from ccqme.oracle.green import green_function
from ccqme.oracle.kernels import asymptotic_kernels
from ccqme.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


def exact_generator_apply(coeffs: ExactCoefficients, rho: np.ndarray, q: np.ndarray, p: np.ndarray) -> np.ndarray:
    h_eff = 0.5 * (p @ p + coeffs.gamma_q * (q @ q))
    return (
        -1j * commutator(h_eff, rho)
        - coeffs.d_p * commutator(q, commutator(q, rho))
        - 0.5j * coeffs.gamma_p * commutator(q, anticommutator(p, rho))
        + coeffs.d_q * commutator(q, commutator(p, rho))
    )


class ExactHarmonicGenerator:
    """Exact oscillator generator with fixed (asymptotic) or tabulated time-dependent coefficients.

    q and p are rotated into ``eig``'s basis when given, so the output lives in the
    same frame as the approximate generators.
    """

    name = "exact_ho"

    def __init__(self, coefficients: ExactCoefficients | CoefficientSeries, q: np.ndarray, p: np.ndarray,
                 eig: EigenSystem | None = None):
        if eig is not None:
            q, p = eig.to_eigenbasis(q), eig.to_eigenbasis(p)
        self.q = q
        self.p = p
        self.coefficients = coefficients
        self.time_dependent = isinstance(coefficients, CoefficientSeries)
        self._p2 = p @ p
        self._q2 = q @ q

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    def coefficients_at(self, t: float) -> ExactCoefficients:
        if self.time_dependent:
            return self.coefficients.at(min(t, float(self.coefficients.times[-1])))
        return self.coefficients

    def __call__(self, t, rho):
        c = self.coefficients_at(t)
        q, p = self.q, self.p
        h_eff = 0.5 * (self._p2 + c.gamma_q * self._q2)
        return (
            -1j * commutator(h_eff, rho)
            - c.d_p * commutator(q, commutator(q, rho))
            - 0.5j * c.gamma_p * commutator(q, anticommutator(p, rho))
            + c.d_q * commutator(q, commutator(p, rho))
        )

    def __repr__(self) -> str:
        return f"ExactHarmonicGenerator(dim={self.dim}, time_dependent={self.time_dependent})"


def asymptotic_oracle(
    omega: float,
    levels: int,
    baths: Sequence[BathSpec],
    eig: EigenSystem | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ExactHarmonicGenerator:
    """Exact generator in the Markovian limit, where every coefficient has relaxed."""
    green = green_function(omega, baths)
    kernels = asymptotic_kernels(green, baths, tolerances)
    coeffs = exact_coefficients(green, kernels, math.inf, tolerances)
    logger.info(
        "exact coefficients: gamma_q=%.6g gamma_p=%.6g D_q=%.6g D_p=%.6g",
        coeffs.gamma_q, coeffs.gamma_p, coeffs.d_q, coeffs.d_p,
    )
    q, p = ladder_operators(omega, levels)
    return ExactHarmonicGenerator(coeffs, q, p, eig)


def check_truncation(rho: np.ndarray, tolerances: Tolerances = DEFAULT_TOLERANCES, guard: int = 5) -> bool:
    """Warn when the top ``guard`` Fock levels carry more than the allowed population."""
    top = top_population(rho, guard)
    if top > tolerances.truncation_population:
        warnings.warn(
            f"top {guard} Fock levels hold population {top:.3g}; increase the truncation",
            TruncationWarning,
            stacklevel=2,
        )
        return False
    return True
