"""Fixed-step RK4 propagation of a generator action."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Literal

import numpy as np
from tqdm import tqdm

from ccqme.errors import DimensionMismatch, OutOfDomain, StepTooLarge, TraceDrift
from ccqme.generators import GeneratorAction
from ccqme.linalg import as_density_matrix, min_eigenvalue
from ccqme.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

# above this dimension only eigenbasis diagonals are kept per output time
FULL_STORAGE_MAX_DIM = 256


@dataclass
class IntegratorConfig:
    step: float = 0.01
    storage: Literal["auto", "full", "diagonal"] = "auto"
    track_min_eigenvalue: bool = True
    self_check: bool = True
    progress: bool = False
    tolerances: Tolerances = field(default_factory=Tolerances)


@dataclass
class Trajectory:
    """States of one run in the system eigenbasis at the output times."""

    method: str
    t_grid: np.ndarray
    diagonals: np.ndarray  # (n_t, d) real populations
    snapshots: np.ndarray | None = None  # (n_t, d, d) when stored in full
    observables: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.diagonals.shape[1]

    @property
    def final_state(self) -> np.ndarray:
        if self.snapshots is None:
            raise OutOfDomain(f"{self.method}: trajectory keeps populations only")
        return self.snapshots[-1]

    def add_observable(self, name: str, series) -> None:
        series = np.asarray(series, dtype=float)
        if series.shape != self.t_grid.shape:
            raise DimensionMismatch(f"observable {name!r} has shape {series.shape}, expected {self.t_grid.shape}")
        self.observables[name] = series

    def columns(self) -> Dict[str, np.ndarray]:
        return {"t": self.t_grid, **self.observables}

    def to_rows(self) -> list[dict[str, float]]:
        cols = self.columns()
        return [{k: float(v[i]) for k, v in cols.items()} for i in range(self.t_grid.size)]


def output_grid(t_max: float, step: float, stride: int = 1) -> np.ndarray:
    """Output times 0, stride*h, 2*stride*h, ... up to t_max."""
    if step <= 0 or stride < 1 or t_max < 0:
        raise OutOfDomain("need step > 0, stride >= 1 and t_max >= 0")
    dt = step * stride
    n = int(math.floor(t_max / dt + 1e-9))
    return dt * np.arange(n + 1)


def rk4_step(gen: GeneratorAction, t: float, rho: np.ndarray, h: float) -> np.ndarray:
    k1 = gen(t, rho)
    k2 = gen(t + 0.5 * h, rho + 0.5 * h * k1)
    k3 = gen(t + 0.5 * h, rho + 0.5 * h * k2)
    k4 = gen(t + h, rho + h * k3)
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _step_bound(gen: GeneratorAction) -> float | None:
    system = getattr(gen, "system", None)
    if system is None or system.dim < 2:
        return None
    span = float(np.ptp(system.eig.energies))
    return 0.05 / span if span > 0 else None


def _self_check(gen: GeneratorAction, rho: np.ndarray, h: float, steps: int, tol: float) -> None:
    """Compare single RK4 steps against two half steps from the same state."""
    t = 0.0
    worst = 0.0
    for _ in range(steps):
        full = rk4_step(gen, t, rho, h)
        half = rk4_step(gen, t + 0.5 * h, rk4_step(gen, t, rho, 0.5 * h), 0.5 * h)
        err = float(np.max(np.abs(full - half)))
        worst = max(worst, err)
        if err > tol:
            raise StepTooLarge(f"local error {err:.3g} at t={t:.4g} exceeds {tol:.1g}; reduce the step h={h:.4g}")
        rho, t = half, t + h
    logger.debug("step self-check: worst local error %.3g over %d steps", worst, steps)


def integrate(
    gen: GeneratorAction,
    rho0: np.ndarray,
    t_grid,
    cfg: IntegratorConfig | None = None,
) -> Trajectory:
    """Integrate d rho/dt = gen(t, rho) with fixed RK4 steps, sampling at ``t_grid``.

    Each output interval is split into the smallest number of equal steps not
    longer than ``cfg.step``. Trace is checked at every output time and never
    renormalized.
    """
    cfg = cfg or IntegratorConfig()
    tol = cfg.tolerances
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(np.diff(t_grid) <= 0):
        raise OutOfDomain("output grid must be a non-empty, strictly increasing 1-d array")
    rho = as_density_matrix(rho0, tol).astype(np.complex128)
    d = rho.shape[0]
    if d != gen.dim:
        raise DimensionMismatch(f"initial state is {d}x{d}, generator acts on dimension {gen.dim}")

    bound = _step_bound(gen)
    if bound is not None and cfg.step > bound:
        logger.warning("%s: step %.4g exceeds 0.05/max|Delta| = %.4g", gen.name, cfg.step, bound)
    if cfg.self_check and tol.self_check_steps > 0:
        _self_check(gen, rho, cfg.step, tol.self_check_steps, tol.local_error)

    full = cfg.storage == "full" or (cfg.storage == "auto" and d <= FULL_STORAGE_MAX_DIM)
    n_t = t_grid.size
    diagonals = np.empty((n_t, d))
    snapshots = np.empty((n_t, d, d), dtype=np.complex128) if full else None
    trace = np.empty(n_t)
    low = np.full(n_t, np.nan)

    t = float(t_grid[0])
    for k, t_out in enumerate(tqdm(t_grid, desc=f"integrating {gen.name}", disable=not cfg.progress)):
        span = t_out - t
        if span > 0:
            n_sub = max(1, math.ceil(span / cfg.step - 1e-9))
            h = span / n_sub
            for i in range(n_sub):
                rho = rk4_step(gen, t + i * h, rho, h)
            t = float(t_out)

        tr = np.trace(rho).real
        drift = abs(tr - 1.0)
        if drift > tol.trace_drift:
            raise TraceDrift(t, drift)
        trace[k] = tr
        diagonals[k] = np.diagonal(rho).real
        if full:
            snapshots[k] = rho
        if cfg.track_min_eigenvalue:
            low[k] = min_eigenvalue(rho)

    traj = Trajectory(method=gen.name, t_grid=t_grid, diagonals=diagonals, snapshots=snapshots)
    traj.add_observable("ground_pop", diagonals[:, 0])
    traj.add_observable("min_eig", low)
    traj.add_observable("trace", trace)
    logger.info(
        "%s: integrated to t=%.4g, lowest eigenvalue %.3g, trace drift %.2g",
        gen.name, t_grid[-1], np.nanmin(low) if cfg.track_min_eigenvalue else float("nan"),
        float(np.max(np.abs(trace - 1.0))),
    )
    return traj
