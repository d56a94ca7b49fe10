import logging
import math
import warnings
from typing import Protocol, runtime_checkable

import numpy as np

from ccqme.errors import SecularityWarning
from ccqme.generators.actions import (
    ccqme_apply,
    hamiltonian_apply,
    lindblad_secular_apply,
    redfield_apply,
)
from ccqme.generators.system import CoupledSystem
from ccqme.linalg import VectorizedGenerator, vectorize

logger = logging.getLogger(__name__)


@runtime_checkable
class GeneratorAction(Protocol):
    name: str
    dim: int
    time_dependent: bool

    def __call__(self, t: float, rho: np.ndarray) -> np.ndarray: ...


class _SystemGenerator:
    name = "generator"

    def __init__(self, system: CoupledSystem, time_dependent: bool = False):
        self.system = system
        self.time_dependent = time_dependent

    @property
    def dim(self) -> int:
        return self.system.dim

    def _horizon(self, t: float) -> float:
        return t if self.time_dependent else math.inf

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, baths={len(self.system.couplings)})"


class RedfieldGenerator(_SystemGenerator):
    name = "redfield"

    def __call__(self, t, rho):
        horizon = self._horizon(t)
        out = hamiltonian_apply(self.system, rho)
        for i in range(len(self.system.couplings)):
            out = out + redfield_apply(self.system, i, rho, horizon)
        return out


class CCQMEGenerator(_SystemGenerator):
    """Redfield parts at horizon t (or infinity) acting on (I - sum_j Qbar^j) rho; Q-bar is always static."""

    name = "ccqme"

    def __init__(self, system: CoupledSystem, time_dependent: bool = False, qbar_scale: float | None = None):
        super().__init__(system, time_dependent)
        self.qbar_scale = system.config.qbar_scale if qbar_scale is None else qbar_scale

    def __call__(self, t, rho):
        return ccqme_apply(self.system, rho, self._horizon(t), self.qbar_scale)


class LindbladGenerator(_SystemGenerator):
    name = "lindblad"

    def __init__(self, system: CoupledSystem):
        super().__init__(system, time_dependent=False)
        self._check_secular()

    def _check_secular(self) -> None:
        bohr = self.system.bohr
        off = ~np.eye(self.dim, dtype=bool)
        for k, c in enumerate(self.system.couplings):
            pairs = np.round(bohr[(c.weights > 0) & off], 9)
            if pairs.size and np.unique(pairs).size < pairs.size:
                warnings.warn(
                    f"bath {k}: distinct transitions share a Bohr frequency; the secular approximation "
                    "drops their interference",
                    SecularityWarning,
                    stacklevel=3,
                )
                return

    def __call__(self, t, rho):
        out = hamiltonian_apply(self.system, rho)
        for i in range(len(self.system.couplings)):
            out = out + lindblad_secular_apply(self.system, i, rho)
        return out


def vectorize_generator(gen: GeneratorAction, t: float = math.inf) -> VectorizedGenerator:
    logger.debug("vectorizing %s at t=%s", gen, t)
    return vectorize(gen, gen.dim, t)


GENERATORS = {
    "redfield": RedfieldGenerator,
    "lindblad": LindbladGenerator,
    "ccqme": CCQMEGenerator,
}
