import logging
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from ccqme.errors import GridMismatch, OutOfDomain
from ccqme.linalg import EigenSystem, trace_distance
from ccqme.propagate.integrate import Trajectory

logger = logging.getLogger(__name__)


def ground_state_population(traj: Trajectory, eig: EigenSystem | None = None) -> np.ndarray:
    """<0|rho(t)|0> in the system eigenbasis.

    Trajectories are already stored in the eigenbasis; ``eig`` is only needed for
    states given in the model basis (see ``population``).
    """
    return traj.diagonals[:, 0].copy()


def population(rho: np.ndarray, eig: EigenSystem, level: int = 0) -> float:
    """Population of eigenstate ``level`` for a state in the model basis."""
    return float(eig.to_eigenbasis(rho)[level, level].real)


def distance_series(a: Trajectory, b: Trajectory) -> np.ndarray:
    if a.t_grid.shape != b.t_grid.shape or not np.allclose(a.t_grid, b.t_grid, rtol=1e-12, atol=1e-12):
        raise GridMismatch(f"{a.method} and {b.method} were sampled on different time grids")
    if a.snapshots is None or b.snapshots is None:
        raise GridMismatch("trace distance needs full snapshots on both trajectories")
    return np.atleast_1d(trace_distance(a.snapshots, b.snapshots))


def time_averaged_distance(series, t_grid, tau_r: float) -> float:
    """tau_R^{-1} int_0^{tau_R} dist dt by the trapezoid rule, the endpoint interpolated."""
    series = np.asarray(series, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if series.shape != t_grid.shape:
        raise GridMismatch("series and time grid differ in length")
    if not tau_r > 0:
        raise OutOfDomain(f"relaxation time must be positive, got {tau_r}")
    if t_grid[0] > 0 or t_grid[-1] < tau_r * (1 - 1e-12):
        raise OutOfDomain(f"time grid [{t_grid[0]:.4g}, {t_grid[-1]:.4g}] does not cover [0, {tau_r:.4g}]")
    inside = t_grid < tau_r
    ts = np.append(t_grid[inside], tau_r)
    ys = np.append(series[inside], np.interp(tau_r, t_grid, series))
    return float(trapezoid(ys, ts) / tau_r)


def negative_population_mass(rho: np.ndarray) -> float:
    """Sum of the strictly negative eigenbasis populations; accepts a matrix or its diagonal."""
    rho = np.asarray(rho)
    pops = np.diagonal(rho).real if rho.ndim == 2 else rho.real
    return float(np.sum(pops[pops < 0.0]))


def relaxation_time(gammas: Sequence[float]) -> float:
    """tau_R = 2/gamma, with gamma the summed coupling of all baths."""
    total = float(sum(gammas))
    if total <= 0:
        raise OutOfDomain("relaxation time needs a positive total coupling")
    return 2.0 / total
