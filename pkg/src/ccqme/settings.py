from dataclasses import dataclass, fields, replace
from typing import Any, Dict


@dataclass(frozen=True)
class Tolerances:
    hermitian_operator: float = 1e-12
    hermitian_density: float = 1e-10
    trace: float = 1e-10
    reconstruction: float = 1e-9

    # quadrature
    quad_abs: float = 1e-9
    quad_rel: float = 1e-7
    quad_limit: int = 400

    # relative to the spectral span / largest rate
    degeneracy: float = 1e-9
    decoupled_level: float = 1e-12
    coefficient_singularity: float = 1e-12

    # integration
    trace_drift: float = 1e-8
    local_error: float = 1e-6
    self_check_steps: int = 10

    # steady state
    steady_residual: float = 1e-10
    null_eigenvalue: float = 1e-8
    dense_max_dim: int = 64

    # harmonic oscillator truncation guard
    truncation_population: float = 1e-6

    def updated(self, **overrides: Any) -> "Tolerances":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown tolerance keys: {sorted(unknown)}")
        return replace(self, **overrides)

    def as_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_TOLERANCES = Tolerances()
