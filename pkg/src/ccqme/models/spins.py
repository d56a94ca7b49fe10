import logging
from functools import reduce

import numpy as np

from ccqme.errors import ChainTooLong, OutOfDomain

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY = np.eye(2, dtype=np.complex128)

MAX_CHAIN = 12


def build_spin_boson(epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """(H = (epsilon/2) sigma_x, S = sigma_z)."""
    if not epsilon > 0:
        raise OutOfDomain(f"tunnelling splitting must be positive, got {epsilon}")
    return 0.5 * epsilon * SIGMA_X, SIGMA_Z.copy()


def site_operator(op: np.ndarray, site: int, length: int) -> np.ndarray:
    """``op`` acting on 1-based ``site`` of a chain of ``length`` spins."""
    if not 1 <= site <= length:
        raise OutOfDomain(f"site {site} outside 1..{length}")
    factors = [op if k == site else IDENTITY for k in range(1, length + 1)]
    return reduce(np.kron, factors)


def ising_fields(length: int, coupling: float) -> tuple[np.ndarray, np.ndarray]:
    """Slowly twisting transverse and longitudinal fields h_x^i, h_z^i for i = 1..L."""
    i = np.arange(1, length + 1)
    ramp = (i - 1) / (length - 1)
    return (0.8 + 0.2 * ramp) * coupling, (0.7 - 0.2 * ramp) * coupling


def build_ising_chain(length: int, coupling: float) -> tuple[np.ndarray, np.ndarray]:
    """Open chain -J sum s_z s_z + sum (h_x s_x + h_z s_z); S = s_z on site L/2 (1-based)."""
    if length < 2 or length > MAX_CHAIN:
        raise ChainTooLong(f"chain length must be in 2..{MAX_CHAIN}, got {length}")
    if length % 2:
        raise OutOfDomain(f"central-site coupling needs an even chain length, got {length}")
    hx, hz = ising_fields(length, coupling)
    dim = 2**length

    # sigma_z is diagonal: build the zz and z parts from bit patterns
    bits = (np.arange(dim)[:, None] >> (length - np.arange(1, length + 1))[None, :]) & 1
    z = 1.0 - 2.0 * bits  # z[s, i-1] = eigenvalue of sigma_z^i on basis state s
    diag = -coupling * np.sum(z[:, :-1] * z[:, 1:], axis=1) + z @ hz
    h = np.diag(diag).astype(np.complex128)
    for site in range(1, length + 1):
        h += hx[site - 1] * site_operator(SIGMA_X, site, length)

    s = site_operator(SIGMA_Z, length // 2, length)
    logger.debug("Ising chain L=%d built, dim %d", length, dim)
    return h, s


def ising_chain_bruteforce(length: int, coupling: float) -> np.ndarray:
    """Dense tensor-product construction of the same Hamiltonian, for cross-checks."""
    hx, hz = ising_fields(length, coupling)
    h = np.zeros((2**length, 2**length), dtype=np.complex128)
    for site in range(1, length):
        h -= coupling * site_operator(SIGMA_Z, site, length) @ site_operator(SIGMA_Z, site + 1, length)
    for site in range(1, length + 1):
        h += hx[site - 1] * site_operator(SIGMA_X, site, length)
        h += hz[site - 1] * site_operator(SIGMA_Z, site, length)
    return h
