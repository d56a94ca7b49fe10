"""Damped-oscillator benchmark: approximate master equations against the exact oracle."""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Sequence, Tuple

import numpy as np

from ccqme.bath import BathSpec, LorentzDrude
from ccqme.errors import OutOfDomain
from ccqme.generators import (
    GENERATORS,
    CCQMEGenerator,
    CoupledSystem,
    GeneratorAction,
    GeneratorConfig,
    build_coupled_system,
    mean_force_state,
)
from ccqme.linalg import min_eigenvalue, trace_distance
from ccqme.models import build_harmonic, thermal_state
from ccqme.oracle import ExactHarmonicGenerator, asymptotic_oracle, check_truncation
from ccqme.propagate.integrate import IntegratorConfig, Trajectory, integrate, output_grid
from ccqme.propagate.metrics import distance_series, relaxation_time, time_averaged_distance
from ccqme.propagate.steady import find_steady_state
from ccqme.propagate.sweep import CellExperiment
from ccqme.settings import Tolerances

logger = logging.getLogger(__name__)

APPROXIMATE_METHODS = ("redfield", "lindblad", "ccqme")


@dataclass
class HarmonicBenchmark:
    omega: float = 1.0
    levels: int = 60
    omega_d: float = 5.0
    gammas: Tuple[float, ...] = (0.2,)
    temperatures: Tuple[float, ...] = (0.3,)
    # initial state e^{-beta0 H}/Z
    beta0: float = 1.0
    # None: run to the relaxation time 2/gamma
    t_max: float | None = None
    step: float = 0.01
    stride: int = 5
    methods: Tuple[str, ...] = APPROXIMATE_METHODS
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if len(self.gammas) != len(self.temperatures):
            raise OutOfDomain("one coupling strength per bath temperature is required")
        unknown = set(self.methods) - set(APPROXIMATE_METHODS)
        if unknown:
            raise OutOfDomain(f"unknown methods {sorted(unknown)}")

    def baths(self) -> list[BathSpec]:
        return [
            BathSpec(LorentzDrude(g, self.omega_d), t, counterterm=True, normalization="caldeira-leggett")
            for g, t in zip(self.gammas, self.temperatures)
        ]

    @property
    def tau_r(self) -> float:
        return relaxation_time(self.gammas)


@dataclass
class HarmonicRun:
    system: CoupledSystem
    exact: Trajectory
    trajectories: Dict[str, Trajectory]
    tau_r: float

    def max_distance(self, method: str) -> float:
        return float(np.max(self.trajectories[method].observables["dist_to_exact"]))


def approximate_generator(method: str, system: CoupledSystem, time_dependent: bool = False) -> GeneratorAction:
    if method not in GENERATORS:
        raise OutOfDomain(f"unknown method {method!r}; expected one of {sorted(GENERATORS)}")
    if method == "lindblad":
        return GENERATORS[method](system)
    return GENERATORS[method](system, time_dependent=time_dependent)


def harmonic_system(cfg: HarmonicBenchmark) -> tuple[CoupledSystem, ExactHarmonicGenerator]:
    h, q = build_harmonic(cfg.omega, cfg.levels)
    baths = cfg.baths()
    gen_cfg = replace(cfg.generator, tolerances=cfg.tolerances)
    system = build_coupled_system(h, [(q, b) for b in baths], cfg=gen_cfg)
    exact = asymptotic_oracle(cfg.omega, cfg.levels, baths, eig=system.eig, tolerances=cfg.tolerances)
    return system, exact


def run_harmonic_benchmark(cfg: HarmonicBenchmark, progress: bool = False) -> HarmonicRun:
    system, exact_gen = harmonic_system(cfg)
    h, _ = build_harmonic(cfg.omega, cfg.levels)
    rho0 = system.eig.to_eigenbasis(thermal_state(h, cfg.beta0))
    t_max = cfg.t_max if cfg.t_max is not None else cfg.tau_r
    t_grid = output_grid(t_max, cfg.step, cfg.stride)
    int_cfg = IntegratorConfig(step=cfg.step, storage="full", progress=progress, tolerances=cfg.tolerances)

    exact = integrate(exact_gen, rho0, t_grid, int_cfg)
    check_truncation(exact.snapshots, cfg.tolerances)
    trajectories = {}
    for method in cfg.methods:
        traj = integrate(approximate_generator(method, system), rho0, t_grid, int_cfg)
        traj.add_observable("dist_to_exact", distance_series(traj, exact))
        trajectories[method] = traj
    return HarmonicRun(system=system, exact=exact, trajectories=trajectories, tau_r=cfg.tau_r)


def steady_state_report(cfg: HarmonicBenchmark) -> Dict[str, Dict[str, float]]:
    """Per method: steady-state ground population, lowest eigenvalue and distance to the exact steady state."""
    system, exact_gen = harmonic_system(cfg)
    exact = find_steady_state(exact_gen, cfg.tolerances)
    report = {"exact_ho": _steady_metrics(exact, exact)}
    for method in cfg.methods:
        rho = find_steady_state(approximate_generator(method, system), cfg.tolerances)
        report[method] = _steady_metrics(rho, exact)
    return report


def _steady_metrics(rho: np.ndarray, exact: np.ndarray) -> Dict[str, float]:
    return {
        "ground_pop": float(rho[0, 0].real),
        "min_eig": float(min_eigenvalue(rho)),
        "dist_to_exact": float(trace_distance(rho, exact)),
    }


def harmonic_cell(base: HarmonicBenchmark) -> CellExperiment:
    """Sweep cell over ``temperature`` and ``gamma`` (applied to every bath)."""

    def experiment(params: Dict[str, float]) -> Dict[str, float]:
        n = len(base.gammas)
        cfg = replace(
            base,
            gammas=(params.get("gamma", base.gammas[0]),) * n,
            temperatures=(params.get("temperature", base.temperatures[0]),) * n,
        )
        run = run_harmonic_benchmark(cfg)
        steady = steady_state_report(cfg)
        metrics = {}
        for method, traj in run.trajectories.items():
            dist = traj.observables["dist_to_exact"]
            metrics[f"{method}_avg_dist"] = time_averaged_distance(dist, traj.t_grid, run.tau_r)
            metrics[f"{method}_max_dist"] = float(np.max(dist))
            metrics[f"{method}_steady_min_eig"] = steady[method]["min_eig"]
            metrics[f"{method}_steady_ground_pop"] = steady[method]["ground_pop"]
        return metrics

    return experiment


def stationarity_residual(system: CoupledSystem, qbar_scale: float = 1.0) -> float:
    """Largest entry of CCQME applied to its own mean-force construction."""
    rho = mean_force_state(system)
    return float(np.max(np.abs(CCQMEGenerator(system, qbar_scale=qbar_scale)(math.inf, rho))))


def consistency_ratios(cfg: HarmonicBenchmark, gammas: Sequence[float]) -> Dict[str, list[float]]:
    """dist(steady, exact steady)/gamma per method along a coupling scan."""
    out: Dict[str, list[float]] = {m: [] for m in cfg.methods}
    for g in gammas:
        report = steady_state_report(replace(cfg, gammas=(g,) * len(cfg.gammas)))
        for m in cfg.methods:
            out[m].append(report[m]["dist_to_exact"] / g)
    return out
