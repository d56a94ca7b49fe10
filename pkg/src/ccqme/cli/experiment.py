"""Turn an ExperimentConfig into systems, generators, trajectories and tables."""
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, List

import numpy as np

from ccqme.bath import RateTableConfig, build_rate_table, correlator, matsubara_correlator
from ccqme.bath.spectral import LorentzDrude
from ccqme.cli.config import BathConfig, ExperimentConfig
from ccqme.errors import ConfigError, GridTooCoarse, OutOfDomain
from ccqme.generators import CCQMEGenerator, CoupledSystem, GeneratorAction, GeneratorConfig, build_coupled_system
from ccqme.linalg import as_density_matrix, min_eigenvalue, trace_distance
from ccqme.models import (
    HarmonicOscillator,
    Model,
    build_model,
    fock_state,
    ground_state,
    ladder_operators,
    superposition_state,
    thermal_state,
)
from ccqme.oracle import (
    ExactHarmonicGenerator,
    asymptotic_kernels,
    asymptotic_oracle,
    check_truncation,
    coefficient_series,
    exact_coefficients,
    green_function,
    influence_kernels,
    memory_kernel_solution,
)
from ccqme.propagate import (
    IntegratorConfig,
    Trajectory,
    approximate_generator,
    distance_series,
    find_steady_state,
    integrate,
    negative_population_mass,
    output_grid,
    time_averaged_distance,
)
from ccqme.propagate.sweep import CellExperiment

logger = logging.getLogger(__name__)


@dataclass
class Experiment:
    cfg: ExperimentConfig
    model: Model
    system: CoupledSystem

    @property
    def t_max(self) -> float:
        return self.cfg.time.t_max if self.cfg.time.t_max is not None else self.cfg.tau_r

    @property
    def t_grid(self) -> np.ndarray:
        return output_grid(self.t_max, self.cfg.time.step, self.cfg.time.stride)


def build_experiment(cfg: ExperimentConfig) -> Experiment:
    model = build_model(cfg.model.spec())
    gen_cfg = GeneratorConfig(
        horizon_step=cfg.time.step,
        qbar_scale=cfg.qbar_scale,
        rates=RateTableConfig(tolerances=cfg.tolerances),
        tolerances=cfg.tolerances,
    )
    exp = Experiment(cfg, model, None)
    horizon = exp.t_max if cfg.time_dependent else math.inf
    exp.system = build_coupled_system(
        model.hamiltonian, [(model.coupling, b) for b in cfg.bath_specs()], horizon=horizon, cfg=gen_cfg
    )
    return exp


def exact_generator(exp: Experiment) -> ExactHarmonicGenerator:
    spec = exp.model.spec
    if not isinstance(spec, HarmonicOscillator):
        raise ConfigError("the exact oracle needs the harmonic model")
    baths = exp.cfg.bath_specs()
    tol = exp.cfg.tolerances
    if exp.cfg.oracle.markovian:
        return asymptotic_oracle(spec.omega, spec.levels, baths, eig=exp.system.eig, tolerances=tol)
    green = green_function(spec.omega, baths)
    grid = output_grid(exp.t_max, exp.cfg.time.step, 1)
    series = coefficient_series(green, influence_kernels(green, baths, grid, tol), tol)
    q, p = ladder_operators(spec.omega, spec.levels)
    return ExactHarmonicGenerator(series, q, p, exp.system.eig)


def generators(exp: Experiment) -> Dict[str, GeneratorAction]:
    out: Dict[str, GeneratorAction] = {}
    for method in exp.cfg.methods:
        if method == "exact_ho":
            out[method] = exact_generator(exp)
        elif method == "ccqme":
            out[method] = CCQMEGenerator(exp.system, exp.cfg.time_dependent, exp.cfg.qbar_scale)
        else:
            out[method] = approximate_generator(method, exp.system, exp.cfg.time_dependent)
    return out


def initial_state(exp: Experiment) -> np.ndarray:
    """The configured initial state, returned in the system eigenbasis."""
    init = exp.cfg.initial
    h, d = exp.model.hamiltonian, exp.model.dim
    if init.kind == "gibbs":
        rho = thermal_state(h, init.beta0)
    elif init.kind == "fock":
        rho = fock_state(d, init.n)
    elif init.kind == "superposition":
        rho = superposition_state(d, init.n, init.m)
    elif init.kind == "ground":
        rho = ground_state(exp.system.eig)
    else:
        try:
            rho = np.load(init.path)
        except OSError as exc:
            raise ConfigError(f"cannot load initial state {init.path}: {exc}") from exc
    rho = as_density_matrix(rho, exp.cfg.tolerances)
    return exp.system.eig.to_eigenbasis(rho)


def run_trajectories(exp: Experiment, progress: bool = False) -> Dict[str, Trajectory]:
    gens = generators(exp)
    rho0 = initial_state(exp)
    storage = exp.cfg.time.storage
    if "exact_ho" in gens:
        storage = "full"
    int_cfg = IntegratorConfig(step=exp.cfg.time.step, storage=storage, progress=progress,
                               tolerances=exp.cfg.tolerances)
    t_grid = exp.t_grid
    trajectories = {name: integrate(gen, rho0, t_grid, int_cfg) for name, gen in gens.items()}
    for traj in trajectories.values():
        traj.add_observable("neg_pop_mass", [negative_population_mass(d) for d in traj.diagonals])

    exact = trajectories.get("exact_ho")
    if exact is not None:
        check_truncation(exact.snapshots, exp.cfg.tolerances)
        for name, traj in trajectories.items():
            traj.add_observable("dist_to_exact", distance_series(traj, exact))
    return trajectories


def steady_report(exp: Experiment) -> tuple[List[Dict[str, float]], Dict[str, np.ndarray]]:
    """Rows of steady-state metrics per method, plus the eigenbasis populations."""
    gens = generators(exp)
    states = {
        name: find_steady_state(gen, exp.cfg.tolerances, step=exp.cfg.time.step)
        for name, gen in gens.items()
    }
    exact = states.get("exact_ho")
    rows = []
    for name, rho in states.items():
        row = {
            "method": name,
            "ground_pop": float(rho[0, 0].real),
            "min_eig": float(min_eigenvalue(rho)),
            "neg_pop_mass": negative_population_mass(rho),
        }
        if exact is not None:
            row["dist_to_exact"] = float(trace_distance(rho, exact))
        rows.append(row)
    populations = {name: np.diagonal(rho).real.copy() for name, rho in states.items()}
    return rows, populations


def _with_cell(cfg: ExperimentConfig, params: Dict[str, float]) -> ExperimentConfig:
    baths = tuple(
        BathConfig(
            spectral=b.spectral,
            strength=params.get("gamma", b.strength),
            cutoff=b.cutoff,
            temperature=params.get("temperature", b.temperature),
            counterterm=b.counterterm,
            normalization=b.normalization,
        )
        for b in cfg.baths
    )
    return replace(cfg, baths=baths, sweep=())


def sweep_experiment(cfg: ExperimentConfig) -> CellExperiment:
    """Per cell: steady-state positivity and ground population, and the time-averaged
    distance to the exact oracle over [0, tau_R] when it is configured."""

    def experiment(params: Dict[str, float]) -> Dict[str, float]:
        exp = build_experiment(_with_cell(cfg, params))
        metrics: Dict[str, float] = {}
        rows, _ = steady_report(exp)
        for row in rows:
            metrics[f"{row['method']}_steady_min_eig"] = row["min_eig"]
            metrics[f"{row['method']}_steady_ground_pop"] = row["ground_pop"]
            if "dist_to_exact" in row:
                metrics[f"{row['method']}_steady_dist"] = row["dist_to_exact"]
        if "exact_ho" in exp.cfg.methods:
            exp.cfg = replace(exp.cfg, time=replace(exp.cfg.time, t_max=max(exp.t_max, exp.cfg.tau_r)))
            for name, traj in run_trajectories(exp).items():
                if name == "exact_ho":
                    continue
                dist = traj.observables["dist_to_exact"]
                metrics[f"{name}_avg_dist"] = time_averaged_distance(dist, traj.t_grid, exp.cfg.tau_r)
                metrics[f"{name}_max_dist"] = float(np.max(dist))
        return metrics

    return experiment


def correlator_table(cfg: ExperimentConfig, bath_index: int, verify: bool = False) -> Dict[str, np.ndarray]:
    """C(t) on (0, t_max]; t = 0 is left out since Re C(0) diverges for a Drude bath."""
    bath = cfg.bath_specs()[bath_index]
    k = cfg.kernels
    t = output_grid(k.correlator_t_max, k.correlator_step)[1:]
    c = np.array([correlator(bath, ti, cfg.tolerances) for ti in t])
    table = {"t": t, "re_c": c.real, "im_c": c.imag}
    if verify and isinstance(bath.spectral, LorentzDrude):
        m = np.array([matsubara_correlator(bath, ti) for ti in t])
        table["re_c_matsubara"] = m.real
        table["im_c_matsubara"] = m.imag
    return table


def rate_table(exp: Experiment, bath_index: int) -> Dict[str, np.ndarray]:
    cfg = exp.cfg
    bath = cfg.bath_specs()[bath_index]
    if cfg.kernels.energies:
        energies = np.asarray(cfg.kernels.energies, dtype=float)
    else:
        scale = exp.model.energy_scale
        energies = np.linspace(-3.0 * scale, 3.0 * scale, 121)
    table = build_rate_table(bath, energies, RateTableConfig(tolerances=cfg.tolerances))
    w, v = table.lookup(energies)
    return {"E": energies, "w_re": w.real, "w_im": w.imag, "v_re": v.real, "v_im": v.imag}


def coefficient_table(exp: Experiment, verify: bool = False) -> tuple[Dict[str, np.ndarray], Dict[str, float]]:
    """Time-dependent exact coefficients and kernels, plus their t -> infinity values."""
    spec = exp.model.spec
    if not isinstance(spec, HarmonicOscillator):
        raise ConfigError("exact coefficients need the harmonic model")
    baths = exp.cfg.bath_specs()
    tol = exp.cfg.tolerances
    green = green_function(spec.omega, baths)
    grid = output_grid(exp.t_max, exp.cfg.time.step, exp.cfg.time.stride)
    kernels = influence_kernels(green, baths, grid, tol, check=verify)
    series = coefficient_series(green, kernels, tol)
    limit = exact_coefficients(green, asymptotic_kernels(green, baths, tol), math.inf, tol)
    table = {
        "t": series.times, "gamma_q": series.gamma_q, "gamma_p": series.gamma_p,
        "d_q": series.d_q, "d_p": series.d_p, "k_q": series.kq, "k_p": series.kp,
    }
    asymptotic = {"gamma_q": limit.gamma_q, "gamma_p": limit.gamma_p, "d_q": limit.d_q, "d_p": limit.d_p}
    return table, asymptotic


def verification_rows(exp: Experiment) -> List[Dict[str, object]]:
    """Expensive cross-checks: Matsubara correlators, memory-kernel ODE, kernel finite differences, KMS."""
    cfg = exp.cfg
    rows: List[Dict[str, object]] = []

    def record(check: str, value: float, limit: float) -> None:
        rows.append({"check": check, "value": value, "limit": limit, "ok": bool(value <= limit)})
        if value > limit:
            logger.warning("verification %s: %.3g exceeds %.3g", check, value, limit)

    for k, coupling in enumerate(exp.system.couplings):
        record(f"kms_bath{k}", coupling.rates.kms_violation(), 1e-8)
        bath = coupling.bath
        if isinstance(bath.spectral, LorentzDrude):
            ts = np.linspace(0.5, 3.0, 6) / bath.frequency_scale
            err = max(abs(correlator(bath, t, cfg.tolerances) - matsubara_correlator(bath, t)) for t in ts)
            ref = max(abs(matsubara_correlator(bath, t)) for t in ts)
            record(f"matsubara_bath{k}", err / ref, 1e-4)

    spec = exp.model.spec
    if isinstance(spec, HarmonicOscillator) and "exact_ho" in cfg.methods:
        baths = cfg.bath_specs()
        green = green_function(spec.omega, baths)
        grid = output_grid(exp.t_max, cfg.time.step)
        ode = memory_kernel_solution(spec.omega, baths, grid)
        record("green_vs_memory_ode", float(np.max(np.abs(green(grid) - ode))), 1e-6)
        try:
            influence_kernels(green, baths, grid, cfg.tolerances, check=True)
            record("kernel_finite_differences", 0.0, 0.0)
        except GridTooCoarse as exc:
            logger.warning("%s", exc)
            record("kernel_finite_differences", 1.0, 0.0)
    return rows


def check_sweepable(cfg: ExperimentConfig) -> None:
    if not cfg.sweep:
        raise ConfigError("the config has no [sweep] table")
    for name, values in cfg.sweep:
        if not values:
            raise OutOfDomain(f"sweep axis {name} is empty")
