"""Dense Hermitian linear algebra and density-matrix hygiene.

Matrices are plain complex ``numpy`` arrays. Functions that act on operators
accept stacks of matrices (leading axes) wherever that is cheap, so the
vectorizer and the integrator can push batches through the same code.
"""
import logging
import warnings
from dataclasses import dataclass

import numpy as np

from ccqme.errors import DegenerateSpectrum, DimensionMismatch, NonHermitianInput, NonUnitTrace
from ccqme.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


def dag(x: np.ndarray) -> np.ndarray:
    return np.swapaxes(x, -1, -2).conj()


def hermitize(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + dag(x))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def hermiticity_error(x: np.ndarray) -> float:
    """Largest |x - x^dagger| entry relative to the largest entry of x."""
    scale = float(np.max(np.abs(x))) if x.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(x - dag(x)))) / scale


def as_hermitian(matrix, tolerances: Tolerances = DEFAULT_TOLERANCES, name: str = "operator") -> np.ndarray:
    """Validate a HermitianOperator and return it as a read-only complex array."""
    h = np.array(matrix, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {h.shape}")
    err = hermiticity_error(h)
    if err > tolerances.hermitian_operator:
        raise NonHermitianInput(f"{name} is not Hermitian (relative error {err:.3g})")
    h = hermitize(h)
    h.setflags(write=False)
    return h


def as_density_matrix(matrix, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Validate a DensityMatrix: Hermitian, unit trace. Positivity is not required."""
    rho = np.array(matrix, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got shape {rho.shape}")
    if float(np.max(np.abs(rho - dag(rho)))) > tolerances.hermitian_density:
        raise NonHermitianInput("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tolerances.trace:
        raise NonUnitTrace(f"density matrix trace is {tr.real:.12g}, expected 1")
    rho = hermitize(rho)
    rho.setflags(write=False)
    return rho


def normalize_state(x: np.ndarray) -> np.ndarray:
    """Hermitize and renormalize the trace (used after null-space extraction)."""
    rho = hermitize(x)
    tr = np.trace(rho).real
    if tr == 0.0 or not np.isfinite(tr):
        raise NonUnitTrace("cannot normalize a traceless matrix")
    return rho / tr


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray
    basis: np.ndarray
    degeneracy_gap: float
    degeneracy_threshold: float

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    @property
    def degenerate(self) -> bool:
        return self.degeneracy_gap < self.degeneracy_threshold

    @property
    def bohr(self) -> np.ndarray:
        """Antisymmetric matrix of Bohr frequencies E_n - E_m."""
        return self.energies[:, None] - self.energies[None, :]

    def to_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        return dag(self.basis) @ op @ self.basis

    def from_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        return self.basis @ op @ dag(self.basis)

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.energies) @ dag(self.basis)

    def gibbs_populations(self, beta: float) -> np.ndarray:
        w = np.exp(-beta * (self.energies - self.energies[0]))
        return w / w.sum()

    def gibbs_state(self, beta: float) -> np.ndarray:
        """Canonical Gibbs state e^{-beta H}/Z in the eigenbasis."""
        return np.diag(self.gibbs_populations(beta)).astype(np.complex128)


def diagonalize(h, tolerances: Tolerances = DEFAULT_TOLERANCES) -> EigenSystem:
    h = as_hermitian(h, tolerances, name="Hamiltonian")
    energies, basis = np.linalg.eigh(h)

    # fix the eigenvector phases: largest component real and positive
    pivots = np.argmax(np.abs(basis), axis=0)
    phases = basis[pivots, np.arange(basis.shape[1])]
    basis = basis * (np.abs(phases) / phases)[None, :]

    if energies.shape[0] > 1:
        gap = float(np.min(np.diff(energies)))
        span = float(energies[-1] - energies[0])
    else:
        gap, span = np.inf, 0.0
    threshold = tolerances.degeneracy * (span if span > 0 else 1.0)

    eig = EigenSystem(energies=energies, basis=basis, degeneracy_gap=gap, degeneracy_threshold=threshold)
    err = float(np.max(np.abs(eig.reconstruct() - h))) / max(float(np.max(np.abs(h))), 1e-300)
    if err > tolerances.reconstruction:
        logger.warning("eigen-reconstruction error %.3g exceeds %.1g", err, tolerances.reconstruction)
    if eig.degenerate:
        warnings.warn(
            f"spectrum is degenerate within {threshold:.3g} (smallest gap {gap:.3g}); "
            "Q-bar coherences between degenerate levels are excluded",
            DegenerateSpectrum,
            stacklevel=2,
        )
    return eig


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> np.ndarray | float:
    """(1/2) sum |eigenvalues of rho1 - rho2|; stacks are handled elementwise."""
    rho1 = np.asarray(rho1)
    rho2 = np.asarray(rho2)
    if rho1.shape != rho2.shape:
        raise DimensionMismatch(f"shapes differ: {rho1.shape} vs {rho2.shape}")
    evals = np.linalg.eigvalsh(hermitize(rho1 - rho2))
    dist = 0.5 * np.sum(np.abs(evals), axis=-1)
    return float(dist) if np.ndim(dist) == 0 else dist


def min_eigenvalue(rho: np.ndarray) -> np.ndarray | float:
    evals = np.linalg.eigvalsh(hermitize(np.asarray(rho)))
    low = evals[..., 0]
    return float(low) if np.ndim(low) == 0 else low
