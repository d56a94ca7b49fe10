import math
import time

import numpy as np
import pytest

from conftest import drude_bath
from ccqme.errors import DimensionMismatch, GridMismatch, NoConvergence, OutOfDomain, SecularityWarning, StepTooLarge, TraceDrift
from ccqme.generators import CCQMEGenerator, LindbladGenerator, RedfieldGenerator, build_coupled_system
from ccqme.linalg import trace_distance
from ccqme.models import build_harmonic, superposition_state
from ccqme.propagate import (
    HarmonicBenchmark,
    IntegratorConfig,
    Trajectory,
    consistency_ratios,
    distance_series,
    find_steady_state,
    ground_state_population,
    harmonic_cell,
    harmonic_system,
    integrate,
    long_time_state,
    negative_population_mass,
    output_grid,
    relaxation_time,
    rk4_step,
    run_harmonic_benchmark,
    stationarity_residual,
    steady_state_report,
    sweep,
    time_averaged_distance,
)


class UnitaryGenerator:
    name = "unitary"
    time_dependent = False

    def __init__(self, energies):
        self.h = np.diag(np.asarray(energies, dtype=complex))
        self.dim = self.h.shape[0]

    def __call__(self, t, rho):
        return -1j * (self.h @ rho - rho @ self.h)


class LeakyGenerator(UnitaryGenerator):
    name = "leaky"

    def __call__(self, t, rho):
        return -0.1 * rho


PLUS = superposition_state(2, 0, 1)


def test_output_grid():
    np.testing.assert_allclose(output_grid(1.0, 0.01, 10), np.linspace(0.0, 1.0, 11))
    assert output_grid(0.0, 0.01).tolist() == [0.0]
    with pytest.raises(OutOfDomain):
        output_grid(1.0, 0.01, 0)


def test_unitary_coherence_keeps_its_modulus():
    traj = integrate(UnitaryGenerator([0.0, 1.0]), PLUS, output_grid(10.0, 0.01, 10))
    coherence = np.abs(traj.snapshots[:, 0, 1])
    np.testing.assert_allclose(coherence, 0.5, atol=1e-8)
    phase = traj.snapshots[-1, 0, 1]
    assert phase == pytest.approx(0.5 * np.exp(1j * 10.0), abs=1e-8)
    np.testing.assert_allclose(traj.observables["trace"], 1.0, atol=1e-12)


def test_rk4_is_fourth_order():
    gen = UnitaryGenerator([0.0, 2.0])
    exact = 0.5 * np.exp(2j)
    errors = []
    for h in (0.1, 0.05):
        rho = np.array(PLUS)
        for k in range(int(round(1.0 / h))):
            rho = rk4_step(gen, k * h, rho, h)
        errors.append(abs(rho[0, 1] - exact))
    assert 12.0 <= errors[0] / errors[1] <= 20.0


def test_trace_drift_is_an_error():
    with pytest.raises(TraceDrift):
        integrate(LeakyGenerator([0.0, 1.0]), PLUS, output_grid(1.0, 0.01, 10))


def test_oversized_step_is_caught():
    with pytest.raises(StepTooLarge):
        integrate(UnitaryGenerator([0.0, 1000.0]), PLUS, output_grid(1.0, 0.01), IntegratorConfig(step=0.01))


def test_diagonal_storage():
    cfg = IntegratorConfig(storage="diagonal")
    traj = integrate(UnitaryGenerator([0.0, 1.0]), PLUS, output_grid(1.0, 0.01, 10), cfg)
    assert traj.snapshots is None
    np.testing.assert_allclose(traj.diagonals, 0.5)
    with pytest.raises(OutOfDomain):
        traj.final_state
    with pytest.raises(GridMismatch):
        distance_series(traj, traj)


def test_trajectory_rows():
    traj = integrate(UnitaryGenerator([0.0, 1.0]), PLUS, output_grid(0.1, 0.01, 5))
    rows = traj.to_rows()
    assert [r["t"] for r in rows] == pytest.approx([0.0, 0.05, 0.1])
    assert set(rows[0]) == {"t", "ground_pop", "min_eig", "trace"}
    with pytest.raises(DimensionMismatch):
        traj.add_observable("bad", [1.0])


def test_ground_state_population_of_gibbs(ho_system):
    rho = ho_system.eig.gibbs_state(1 / 0.3)
    traj = integrate(UnitaryGenerator(ho_system.eig.energies), rho, output_grid(1.0, 0.01, 20))
    np.testing.assert_allclose(ground_state_population(traj), 1 - math.exp(-1 / 0.3), rtol=1e-3)
    plus = integrate(UnitaryGenerator([0.0, 1.0]), PLUS, output_grid(0.0, 0.01))
    assert ground_state_population(plus)[0] == pytest.approx(0.5)


def test_distance_series_and_average():
    gen = UnitaryGenerator([0.0, 1.0])
    a = integrate(gen, PLUS, output_grid(2.0, 0.01, 10))
    b = integrate(gen, PLUS, output_grid(2.0, 0.01, 10))
    np.testing.assert_allclose(distance_series(a, b), 0.0, atol=1e-15)
    c = integrate(gen, PLUS, output_grid(1.0, 0.01, 10))
    with pytest.raises(GridMismatch):
        distance_series(a, c)


def test_time_average():
    t = np.linspace(0.0, 12.0, 121)
    assert time_averaged_distance(np.full_like(t, 0.3), t, 10.0) == pytest.approx(0.3)
    assert time_averaged_distance(t, t, 10.0) == pytest.approx(5.0)
    # tau_R off the grid: the endpoint is interpolated
    assert time_averaged_distance(t, t, 9.95) == pytest.approx(9.95 / 2)
    with pytest.raises(OutOfDomain):
        time_averaged_distance(t, t, 20.0)
    with pytest.raises(GridMismatch):
        time_averaged_distance(t[:-1], t, 10.0)


def test_relaxation_time():
    assert relaxation_time([0.2]) == pytest.approx(10.0)
    assert relaxation_time([0.2, 0.2]) == pytest.approx(5.0)
    with pytest.raises(OutOfDomain):
        relaxation_time([])


def test_negative_population_mass():
    assert negative_population_mass(np.eye(3) / 3) == 0.0
    assert negative_population_mass(np.diag([1.05, -0.05])) == pytest.approx(-0.05)
    assert negative_population_mass(np.array([0.6, 0.5, -0.07, -0.03])) == pytest.approx(-0.1)


def test_long_time_limit_matches_null_space():
    h, q = build_harmonic(1.0, 6)
    system = build_coupled_system(h, [(q, drude_bath())])
    gen = CCQMEGenerator(system)
    dense = find_steady_state(gen)
    relaxed = long_time_state(gen, system.eig.gibbs_state(1.0), step=0.01, t_max=400.0)
    assert trace_distance(dense, relaxed) < 1e-6


def test_long_time_state_gives_up():
    with pytest.raises(NoConvergence):
        long_time_state(UnitaryGenerator([0.0, 1.0]), PLUS, step=0.01, t_max=1.0)


def test_sweep_single_cell_equals_direct_call():
    def experiment(params):
        return {"value": params["x"] ** 2 + params["y"]}

    result = sweep([("x", [3.0]), ("y", [0.5])], experiment)
    assert result.shape == (1, 1)
    assert result.cells[0].metrics == experiment({"x": 3.0, "y": 0.5})
    assert result.cells[0].ok


def test_sweep_order_does_not_depend_on_workers():
    rng = np.random.default_rng(3)
    delays = rng.uniform(0.0, 0.01, size=12)

    def experiment(params):
        time.sleep(delays[int(params["a"]) * 3 + int(params["b"])])
        return {"sum": params["a"] + params["b"], "prod": params["a"] * params["b"]}

    axes = [("a", [0.0, 1.0, 2.0, 3.0]), ("b", [0.0, 1.0, 2.0])]
    serial = sweep(axes, experiment, workers=1)
    parallel = sweep(axes, experiment, workers=4)
    assert serial.to_rows() == parallel.to_rows()
    assert [c.index for c in parallel.cells][:4] == [(0, 0), (0, 1), (0, 2), (1, 0)]


def test_sweep_records_failed_cells():
    def experiment(params):
        if params["gamma"] > 1.0:
            raise NoConvergence("no stationary state")
        return {"value": params["gamma"]}

    result = sweep([("gamma", [0.5, 1.5])], experiment, workers=2)
    assert [c.ok for c in result.cells] == [True, False]
    assert "NoConvergence" in result.failed()[0].error
    rows = result.to_rows()
    assert math.isnan(rows[1]["value"])
    assert rows[1]["gamma_index"] == 1


def test_sweep_rejects_non_finite_axes():
    with pytest.raises(OutOfDomain):
        sweep([("gamma", [0.1, math.inf])], lambda params: {})


def test_small_harmonic_benchmark():
    cfg = HarmonicBenchmark(levels=8, t_max=0.5, stride=10)
    with pytest.warns(SecularityWarning):
        run = run_harmonic_benchmark(cfg)
    assert set(run.trajectories) == {"redfield", "lindblad", "ccqme"}
    for method, traj in run.trajectories.items():
        dist = traj.observables["dist_to_exact"]
        assert dist[0] == pytest.approx(0.0, abs=1e-12)
        assert np.all(dist < 0.1), method
    assert run.tau_r == pytest.approx(10.0)


def test_benchmark_rejects_unknown_methods():
    with pytest.raises(OutOfDomain):
        HarmonicBenchmark(methods=("exact",))
    with pytest.raises(OutOfDomain):
        HarmonicBenchmark(gammas=(0.2, 0.2), temperatures=(0.3,))


# acceptance-scale reproductions


@pytest.mark.slow
def test_damped_oscillator_dynamics():
    with pytest.warns(SecularityWarning):
        run = run_harmonic_benchmark(HarmonicBenchmark(t_max=10.0))
    assert run.max_distance("ccqme") < 0.01
    assert 0.06 <= run.max_distance("redfield") <= 0.10
    assert 0.03 <= run.max_distance("lindblad") <= 0.07
    assert np.max(run.trajectories["redfield"].observables["ground_pop"]) > 1.0
    assert np.max(run.trajectories["ccqme"].observables["ground_pop"]) <= 1.0 + 1e-6


@pytest.mark.slow
def test_damped_oscillator_steady_states():
    with pytest.warns(SecularityWarning):
        report = steady_state_report(HarmonicBenchmark())
    assert report["redfield"]["ground_pop"] > 1.0
    assert report["ccqme"]["dist_to_exact"] < report["redfield"]["dist_to_exact"]
    assert report["lindblad"]["dist_to_exact"] > report["ccqme"]["dist_to_exact"]


@pytest.mark.slow
def test_second_order_consistency():
    with pytest.warns(SecularityWarning):
        ratios = consistency_ratios(HarmonicBenchmark(), [0.05, 0.1, 0.2])
    ccqme = ratios["ccqme"]
    assert ccqme[0] < ccqme[1] < ccqme[2]
    for method in ("redfield", "lindblad"):
        values = ratios[method]
        assert max(values) / min(values) < 1.3


@pytest.mark.slow
@pytest.mark.parametrize("gamma", [0.05, 0.2, 0.4])
def test_lindblad_is_coupling_independent(gamma):
    cfg = HarmonicBenchmark(gammas=(gamma,), methods=("lindblad",))
    h, q = build_harmonic(cfg.omega, cfg.levels)
    system = build_coupled_system(h, [(q, b) for b in cfg.baths()])
    with pytest.warns(SecularityWarning):
        rho = find_steady_state(LindbladGenerator(system))
    assert trace_distance(rho, system.eig.gibbs_state(1 / 0.3)) < 1e-8


@pytest.mark.slow
def test_two_bath_transport():
    cfg = HarmonicBenchmark(levels=20, gammas=(0.2, 0.2), temperatures=(0.3, 0.5), t_max=20.0, stride=10)
    system, exact_gen = harmonic_system(cfg)
    rho0 = system.eig.to_eigenbasis(superposition_state(20, 0, 1))
    grid = output_grid(cfg.t_max, cfg.step, cfg.stride)
    exact = integrate(exact_gen, rho0, grid)
    redfield = integrate(RedfieldGenerator(system), rho0, grid)
    ccqme = integrate(CCQMEGenerator(system), rho0, grid)
    assert np.max(redfield.observables["ground_pop"]) > 1.0
    assert np.max(ccqme.observables["ground_pop"]) <= 1.0 + 1e-6
    d_ccqme, d_redfield = distance_series(ccqme, exact), distance_series(redfield, exact)
    assert np.all(d_ccqme[1:] < d_redfield[1:])


@pytest.mark.slow
def test_stationarity_residual_scaling():
    residuals = []
    for gamma in (0.1, 0.05):
        h, q = build_harmonic(1.0, 30)
        residuals.append(stationarity_residual(build_coupled_system(h, [(q, drude_bath(gamma=gamma))])))
    assert 6.0 <= residuals[0] / residuals[1] <= 10.0


@pytest.mark.slow
def test_harmonic_grid_cells():
    axes = [("temperature", np.linspace(0.2, 1.0, 4)), ("gamma", np.linspace(0.05, 0.4, 4))]
    result = sweep(axes, harmonic_cell(HarmonicBenchmark()), workers=4)
    assert not result.failed()
    metrics = [c.metrics for c in result.cells]
    for m in metrics:
        assert m["ccqme_avg_dist"] <= m["redfield_avg_dist"]
        assert m["ccqme_avg_dist"] <= m["lindblad_avg_dist"]
        assert m["ccqme_steady_min_eig"] >= -1e-6
    assert any(m["redfield_steady_min_eig"] < -1e-4 for m in metrics)


@pytest.mark.slow
def test_high_temperature_agreement():
    cfg = HarmonicBenchmark(temperatures=(1.0,), t_max=10.0)
    with pytest.warns(SecularityWarning):
        run = run_harmonic_benchmark(cfg)
    dist = {m: run.max_distance(m) for m in cfg.methods}
    assert max(dist.values()) <= 3 * min(dist.values())
    assert dist["ccqme"] == min(dist.values())
    with pytest.warns(SecularityWarning):
        report = steady_state_report(cfg)
    assert report["redfield"]["min_eig"] >= -1e-10
