import logging
import math

import numpy as np

from ccqme.errors import NoConvergence, OutOfDomain
from ccqme.generators import GeneratorAction, vectorize_generator
from ccqme.linalg import normalize_state, steady_state
from ccqme.propagate.integrate import rk4_step
from ccqme.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


def long_time_state(
    gen: GeneratorAction,
    rho0: np.ndarray,
    step: float,
    t_max: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    check_every: int = 200,
) -> np.ndarray:
    """Propagate with the asymptotic generator until max |L rho| drops below the steady-state residual."""
    n_steps = int(math.ceil(t_max / step))
    if n_steps < 1:
        raise OutOfDomain("long-time propagation needs t_max > 0")
    rho = np.array(rho0, dtype=np.complex128)
    res = math.inf
    for k in range(1, n_steps + 1):
        rho = rk4_step(gen, math.inf, rho, step)
        if k % check_every and k != n_steps:
            continue
        res = float(np.max(np.abs(gen(math.inf, rho))))
        if res <= tolerances.steady_residual:
            logger.info("%s: stationary after t=%.4g (residual %.3g)", gen.name, k * step, res)
            return normalize_state(rho)
    raise NoConvergence(f"{gen.name}: not stationary after t={t_max:.4g} (residual {res:.3g})")


def find_steady_state(
    gen: GeneratorAction,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    rho0: np.ndarray | None = None,
    step: float = 0.01,
    t_max: float = 1e4,
) -> np.ndarray:
    """Null vector of the asymptotic generator; dense up to ``dense_max_dim``, propagation above."""
    if gen.dim <= tolerances.dense_max_dim:
        return steady_state(vectorize_generator(gen, math.inf), tolerances)
    if rho0 is None:
        rho0 = np.eye(gen.dim, dtype=np.complex128) / gen.dim
    logger.info("%s: dim %d above the dense limit, relaxing by propagation", gen.name, gen.dim)
    return long_time_state(gen, rho0, step, t_max, tolerances)
