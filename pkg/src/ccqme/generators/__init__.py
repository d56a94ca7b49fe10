from ccqme.generators.actions import (
    ccqme_apply,
    formal_energy_derivative,
    hamiltonian_apply,
    lamb_shift,
    lindblad_secular_apply,
    mean_force_state,
    qbar_apply,
    qbar_pauli_part,
    qbar_population_lindblad,
    redfield_apply,
    secular_rates,
)
from ccqme.generators.generator import (
    GENERATORS,
    CCQMEGenerator,
    GeneratorAction,
    LindbladGenerator,
    RedfieldGenerator,
    vectorize_generator,
)
from ccqme.generators.system import (
    BathCoupling,
    CoupledSystem,
    GeneratorConfig,
    QBarAction,
    build_coupled_system,
)

__all__ = [
    "GENERATORS",
    "BathCoupling",
    "CCQMEGenerator",
    "CoupledSystem",
    "GeneratorAction",
    "GeneratorConfig",
    "LindbladGenerator",
    "QBarAction",
    "RedfieldGenerator",
    "build_coupled_system",
    "ccqme_apply",
    "formal_energy_derivative",
    "hamiltonian_apply",
    "lamb_shift",
    "lindblad_secular_apply",
    "mean_force_state",
    "qbar_apply",
    "qbar_pauli_part",
    "qbar_population_lindblad",
    "redfield_apply",
    "secular_rates",
    "vectorize_generator",
]
