from ccqme.linalg.operators import (
    EigenSystem,
    anticommutator,
    as_density_matrix,
    as_hermitian,
    commutator,
    dag,
    diagonalize,
    hermiticity_error,
    hermitize,
    min_eigenvalue,
    normalize_state,
    trace_distance,
)
from ccqme.linalg.superop import VectorizedGenerator, batched, steady_state, vectorize

__all__ = [
    "EigenSystem",
    "VectorizedGenerator",
    "anticommutator",
    "as_density_matrix",
    "as_hermitian",
    "batched",
    "commutator",
    "dag",
    "diagonalize",
    "hermiticity_error",
    "hermitize",
    "min_eigenvalue",
    "normalize_state",
    "steady_state",
    "trace_distance",
    "vectorize",
]
