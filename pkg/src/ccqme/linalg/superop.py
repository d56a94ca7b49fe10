"""Superoperator matrices and their null space."""
import logging
from dataclasses import dataclass
from itertools import islice
from typing import Callable, Iterable, Iterator, List

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ccqme.errors import DimensionMismatch, NoConvergence, NonUniqueSteadyState
from ccqme.linalg.operators import normalize_state
from ccqme.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

Action = Callable[[float, np.ndarray], np.ndarray]

# basis matrices pushed through an action per call, bounded by memory
_VECTORIZE_BUDGET = 4_000_000


def batched(iterable: Iterable, n: int) -> Iterator[List]:
    it = iter(iterable)
    while True:
        batch = list(islice(it, n))
        if not batch:
            return
        yield batch


@dataclass(frozen=True)
class VectorizedGenerator:
    """Row-major matrix form of a linear map on d x d matrices: vec[i*d + j] = rho[i, j]."""

    matrix: np.ndarray
    dim: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        return (self.matrix @ rho.reshape(-1, d * d).T).T.reshape(rho.shape)

    def trace_leak(self) -> float:
        """Largest |d tr(rho)/dt| over basis inputs; zero for a trace-preserving map."""
        d = self.dim
        diag = np.arange(d) * (d + 1)
        return float(np.max(np.abs(self.matrix[diag, :].sum(axis=0))))


def vectorize(action: Action, dim: int, t: float = np.inf) -> VectorizedGenerator:
    """Build the d^2 x d^2 matrix of ``action(t, .)`` by feeding it basis matrices in chunks."""
    if dim <= 0:
        raise DimensionMismatch(f"dimension must be positive, got {dim}")
    n = dim * dim
    chunk = max(1, _VECTORIZE_BUDGET // n)
    matrix = np.empty((n, n), dtype=np.complex128)
    for cols in batched(range(n), chunk):
        idx = np.asarray(cols)
        basis = np.zeros((idx.size, dim, dim), dtype=np.complex128)
        basis[np.arange(idx.size), idx // dim, idx % dim] = 1.0
        out = np.asarray(action(t, basis))
        if out.shape != basis.shape:
            raise DimensionMismatch(f"action returned shape {out.shape}, expected {basis.shape}")
        matrix[:, idx] = out.reshape(idx.size, n).T
    return VectorizedGenerator(matrix=matrix, dim=dim)


def _start_block(dim: int, size: int) -> np.ndarray:
    eye = np.eye(dim, dtype=np.complex128).reshape(-1)
    ramp = np.diag(np.linspace(1.0, 2.0, dim)).astype(np.complex128).reshape(-1)
    coherent = np.ones((dim, dim), dtype=np.complex128)
    np.fill_diagonal(coherent, np.linspace(1.0, 2.0, dim) ** 2)
    columns = [eye, ramp, coherent.reshape(-1)]
    if size > 3:
        rng = np.random.default_rng(size)
        extra = rng.normal(size=(dim * dim, size - 3)) + 1j * rng.normal(size=(dim * dim, size - 3))
        columns.extend(extra.T)
    q, _ = np.linalg.qr(np.stack(columns[:size], axis=1))
    return q


def _ritz(L: np.ndarray, lu, q: np.ndarray, null_tol: float, max_iter: int):
    prev = None
    for it in range(max_iter):
        q, _ = np.linalg.qr(lu_solve(lu, q))
        theta, y = np.linalg.eig(q.conj().T @ (L @ q))
        x = q @ y
        x /= np.linalg.norm(x, axis=0)
        residual = np.linalg.norm(L @ x, axis=0)
        order = np.argsort(residual)
        if prev is not None and np.allclose(residual[order], prev, rtol=1e-3, atol=null_tol * 1e-3):
            break
        prev = residual[order]
    logger.debug("block of %d: stopped after %d sweeps, residuals %s", q.shape[1], it + 1, residual[order])
    return x, residual, order


def steady_state(
    gen: VectorizedGenerator,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    max_iter: int = 40,
) -> np.ndarray:
    """Unit-trace null vector of a vectorized generator.

    Shifted inverse subspace iteration; Ritz vectors whose residual ||L x|| vanishes
    span the null space. The block doubles while every Ritz vector is a null vector,
    so a degenerate null space is reported with its full dimension.
    """
    L = gen.matrix
    n = L.shape[0]
    scale = float(np.max(np.abs(L))) or 1.0
    shift = 1e3 * np.finfo(float).eps * scale
    lu = lu_factor(L + shift * np.eye(n))
    null_tol = tolerances.null_eigenvalue * scale

    size = min(3, n)
    while True:
        x, residual, order = _ritz(L, lu, _start_block(gen.dim, size), null_tol, max_iter)
        null = int(np.sum(residual <= null_tol))
        if null < size or size == n:
            break
        size = min(2 * size, n)

    if null == 0:
        raise NoConvergence(f"no null vector found (smallest residual {residual.min() / scale:.3g} relative)")
    if null > 1:
        raise NonUniqueSteadyState(null)

    vec = x[:, order[0]]
    rho = normalize_state(vec.reshape(gen.dim, gen.dim))
    res = float(np.max(np.abs(gen.apply(rho)))) / scale
    if res > tolerances.steady_residual:
        raise NoConvergence(f"steady-state residual {res:.3g} exceeds {tolerances.steady_residual:.1g}")
    return rho
