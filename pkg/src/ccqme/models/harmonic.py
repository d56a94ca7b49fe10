"""Truncated harmonic oscillator, unit mass: H = p^2/2 + Omega^2 q^2/2."""
import math
from dataclasses import dataclass

import numpy as np

from ccqme.errors import DimensionMismatch, OutOfDomain


MIN_MODEL_LEVELS = 10


@dataclass(frozen=True)
class HarmonicOscillator:
    omega: float
    levels: int

    def __post_init__(self):
        if not self.omega > 0:
            raise OutOfDomain(f"oscillator frequency must be positive, got {self.omega}")
        if self.levels < MIN_MODEL_LEVELS:
            raise OutOfDomain(f"oscillator model needs at least {MIN_MODEL_LEVELS} Fock levels, got {self.levels}")


def annihilation(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels)), k=1).astype(np.complex128)


def ladder_operators(omega: float, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum in the Fock basis; shared by the models and the exact oracle."""
    a = annihilation(levels)
    ad = a.conj().T
    q = (a + ad) / math.sqrt(2.0 * omega)
    p = 1j * math.sqrt(0.5 * omega) * (ad - a)
    return q, p


def build_harmonic(omega: float, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """(H, S = q) for the truncated oscillator; accepts any N >= 2, unlike HarmonicOscillator."""
    if not omega > 0:
        raise OutOfDomain(f"oscillator frequency must be positive, got {omega}")
    if levels < 2:
        raise DimensionMismatch(f"need at least 2 Fock levels, got {levels}")
    h = np.diag((np.arange(levels) + 0.5) * omega).astype(np.complex128)
    q, _ = ladder_operators(omega, levels)
    return h, q


def fock_state(levels: int, n: int) -> np.ndarray:
    if not 0 <= n < levels:
        raise DimensionMismatch(f"Fock state {n} outside 0..{levels - 1}")
    rho = np.zeros((levels, levels), dtype=np.complex128)
    rho[n, n] = 1.0
    return rho


def top_population(rho: np.ndarray, guard: int = 5) -> float:
    """Population of the top ``guard`` Fock levels, the truncation diagnostic."""
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
    return float(np.max(np.sum(diag[..., -guard:], axis=-1)))
