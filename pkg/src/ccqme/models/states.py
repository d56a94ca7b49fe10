"""Initial states, all returned in the model (not eigen-) basis."""
import math

import numpy as np
from scipy.linalg import expm

from ccqme.errors import DimensionMismatch, OutOfDomain
from ccqme.linalg import EigenSystem, as_density_matrix


def thermal_state(h: np.ndarray, beta0: float) -> np.ndarray:
    """e^{-beta0 H}/Z; the harmonic benchmarks start from beta0 = 1/Omega."""
    if not beta0 > 0:
        raise OutOfDomain(f"inverse temperature must be positive, got {beta0}")
    shifted = h - np.min(np.linalg.eigvalsh(h)) * np.eye(h.shape[0])
    rho = expm(-beta0 * shifted)
    return as_density_matrix(rho / np.trace(rho))


def superposition_state(dim: int, n: int, m: int) -> np.ndarray:
    """|psi><psi| with psi = (|n> + |m>)/sqrt(2) in the model basis."""
    if not (0 <= n < dim and 0 <= m < dim) or n == m:
        raise DimensionMismatch(f"superposition needs two distinct levels in 0..{dim - 1}, got {n}, {m}")
    psi = np.zeros(dim, dtype=np.complex128)
    psi[[n, m]] = 1.0 / math.sqrt(2.0)
    return np.outer(psi, psi.conj())


def ground_state(eig: EigenSystem) -> np.ndarray:
    """Pure many-body ground state of H in the model basis."""
    psi = eig.basis[:, 0]
    return np.outer(psi, psi.conj())
