from ccqme.propagate.benchmark import (
    APPROXIMATE_METHODS,
    HarmonicBenchmark,
    HarmonicRun,
    approximate_generator,
    consistency_ratios,
    harmonic_cell,
    harmonic_system,
    run_harmonic_benchmark,
    stationarity_residual,
    steady_state_report,
)
from ccqme.propagate.integrate import IntegratorConfig, Trajectory, integrate, output_grid, rk4_step
from ccqme.propagate.metrics import (
    distance_series,
    ground_state_population,
    negative_population_mass,
    population,
    relaxation_time,
    time_averaged_distance,
)
from ccqme.propagate.steady import find_steady_state, long_time_state
from ccqme.propagate.sweep import SweepCell, SweepResult, sweep

__all__ = [
    "APPROXIMATE_METHODS",
    "HarmonicBenchmark",
    "HarmonicRun",
    "IntegratorConfig",
    "SweepCell",
    "SweepResult",
    "Trajectory",
    "approximate_generator",
    "consistency_ratios",
    "distance_series",
    "find_steady_state",
    "ground_state_population",
    "harmonic_cell",
    "harmonic_system",
    "integrate",
    "long_time_state",
    "negative_population_mass",
    "output_grid",
    "population",
    "relaxation_time",
    "rk4_step",
    "run_harmonic_benchmark",
    "stationarity_residual",
    "steady_state_report",
    "sweep",
    "time_averaged_distance",
]
