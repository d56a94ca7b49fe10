from dataclasses import dataclass

import numpy as np

from ccqme.models.harmonic import (
    HarmonicOscillator,
    annihilation,
    build_harmonic,
    fock_state,
    ladder_operators,
    top_population,
)
from ccqme.models.spins import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    build_ising_chain,
    build_spin_boson,
    ising_chain_bruteforce,
    ising_fields,
    site_operator,
)
from ccqme.models.states import ground_state, superposition_state, thermal_state
from ccqme.models.units import energy_to_kelvin, kelvin_to_energy


@dataclass(frozen=True)
class SpinBoson:
    epsilon: float


@dataclass(frozen=True)
class IsingChain:
    length: int
    coupling: float = 1.0


ModelSpec = HarmonicOscillator | SpinBoson | IsingChain


@dataclass(frozen=True)
class Model:
    spec: ModelSpec
    hamiltonian: np.ndarray
    coupling: np.ndarray

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def energy_scale(self) -> float:
        """Omega, epsilon or J: the unit natural-unit parameters refer to."""
        if isinstance(self.spec, HarmonicOscillator):
            return self.spec.omega
        if isinstance(self.spec, SpinBoson):
            return self.spec.epsilon
        return self.spec.coupling


def build_model(spec: ModelSpec) -> Model:
    if isinstance(spec, HarmonicOscillator):
        h, s = build_harmonic(spec.omega, spec.levels)
    elif isinstance(spec, SpinBoson):
        h, s = build_spin_boson(spec.epsilon)
    elif isinstance(spec, IsingChain):
        h, s = build_ising_chain(spec.length, spec.coupling)
    else:
        raise TypeError(f"unknown model spec {spec!r}")
    return Model(spec, h, s)


__all__ = [
    "HarmonicOscillator",
    "IsingChain",
    "Model",
    "ModelSpec",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SpinBoson",
    "annihilation",
    "build_harmonic",
    "build_ising_chain",
    "build_model",
    "build_spin_boson",
    "energy_to_kelvin",
    "fock_state",
    "ground_state",
    "ising_chain_bruteforce",
    "ising_fields",
    "kelvin_to_energy",
    "ladder_operators",
    "site_operator",
    "superposition_state",
    "thermal_state",
    "top_population",
]
