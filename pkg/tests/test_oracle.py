import math

import numpy as np
import pytest

from conftest import drude_bath, random_density_matrix
from ccqme.bath import BathSpec, LorentzDrude, OhmicExp
from ccqme.errors import GridTooCoarse, OutOfDomain, TruncationWarning, UnsupportedBathCombination
from ccqme.models import fock_state, ladder_operators
from ccqme.oracle import (
    ExactCoefficients,
    ExactHarmonicGenerator,
    asymptotic_kernels,
    asymptotic_oracle,
    check_truncation,
    coefficient_series,
    damping_coefficients,
    exact_coefficients,
    exact_generator_apply,
    green_function,
    influence_kernels,
    memory_kernel_solution,
)
from ccqme.propagate import find_steady_state


@pytest.fixture(scope="module")
def green():
    return green_function(1.0, [drude_bath()])


def test_green_initial_conditions(green):
    assert green(0.0) == pytest.approx(0.0, abs=1e-10)
    assert green(0.0, 1) == pytest.approx(1.0, abs=1e-10)
    assert sum(c for c, m, _ in green.terms if m == 0) == pytest.approx(0.0, abs=1e-10)


def test_green_roots_decay(green):
    assert len(green.roots) == 3
    assert max(z.real for z in green.roots) < 0


def test_green_undamped_limit():
    g = green_function(1.0, [drude_bath(gamma=1e-6)])
    t = np.linspace(0.0, 10.0, 201)
    np.testing.assert_allclose(g(t), np.sin(t), atol=1e-4)


@pytest.mark.parametrize("gamma", [0.05, 0.2, 0.4])
def test_green_matches_memory_kernel_ode(gamma):
    baths = [drude_bath(gamma=gamma)]
    t = np.linspace(0.0, 20.0, 401)
    np.testing.assert_allclose(green_function(1.0, baths)(t), memory_kernel_solution(1.0, baths, t), atol=1e-6)


def test_green_sums_the_bath_strengths():
    single = green_function(1.0, [drude_bath(gamma=0.4)])
    double = green_function(1.0, [drude_bath(gamma=0.2), drude_bath(gamma=0.2, temperature=0.5)])
    t = np.linspace(0.0, 10.0, 51)
    np.testing.assert_allclose(single(t), double(t), atol=1e-12)


@pytest.mark.parametrize(
    "baths",
    [
        [BathSpec(OhmicExp(0.1, 1.0), 0.3, normalization="caldeira-leggett")],
        [BathSpec(LorentzDrude(0.2, 5.0), 0.3)],
        [drude_bath(omega_d=5.0), drude_bath(omega_d=4.0)],
        [],
    ],
)
def test_unsupported_bath_combinations(baths):
    with pytest.raises(UnsupportedBathCombination):
        green_function(1.0, baths)


def test_damping_is_temperature_independent():
    cold = green_function(1.0, [drude_bath(temperature=0.3)])
    hot = green_function(1.0, [drude_bath(temperature=1.0)])
    for t in (0.5, 2.0, 8.0):
        assert damping_coefficients(cold, t) == pytest.approx(damping_coefficients(hot, t), rel=1e-12)


def test_damping_relaxes_to_slow_roots(green):
    gq_inf, gp_inf = green.asymptotic_damping()
    gq, gp = damping_coefficients(green, 50.0)
    assert gq == pytest.approx(gq_inf, rel=1e-6)
    assert gp == pytest.approx(gp_inf, rel=1e-6)


def test_weak_damping_recovers_bare_frequency():
    gq, gp = green_function(1.0, [drude_bath(gamma=1e-6)]).asymptotic_damping()
    assert gq == pytest.approx(1.0, rel=1e-3)
    assert gp == pytest.approx(1e-6, rel=0.1)


@pytest.mark.parametrize("step", [0.02, 0.01])
def test_kernels_start_at_zero_and_pass_grid_check(green, step):
    # 0.02 = min(0.02/Omega, 0.2/omega_D), the default integration step
    times = step * np.arange(int(round(5.0 / step)) + 1)
    kernels = influence_kernels(green, [drude_bath()], times, check=True)
    assert kernels.kq[0] == 0.0 and kernels.kp[0] == 0.0
    assert kernels.kq_dot[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.isfinite(kernels.kq_ddot))
    with pytest.raises(OutOfDomain):
        kernels.at(6.0)


def test_kernels_are_additive_over_baths(green):
    times = np.linspace(0.0, 2.0, 101)
    left, right = drude_bath(gamma=0.1, temperature=0.3), drude_bath(gamma=0.1, temperature=0.5)
    both = influence_kernels(green, [left, right], times, check=False)
    one = influence_kernels(green, [left], times, check=False)
    two = influence_kernels(green, [right], times, check=False)
    np.testing.assert_allclose(both.kq, one.kq + two.kq, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(both.kp, one.kp + two.kp, rtol=1e-12, atol=1e-15)


def test_coarse_kernel_grid_is_rejected(green):
    with pytest.raises(GridTooCoarse):
        influence_kernels(green, [drude_bath()], 0.5 * np.arange(41), check=True)


def test_kernel_grid_must_be_uniform(green):
    with pytest.raises(OutOfDomain):
        influence_kernels(green, [drude_bath()], np.array([0.0, 0.1, 0.3, 0.4]))


def test_asymptotic_coefficients_of_equal_baths():
    split = [drude_bath(gamma=0.1), drude_bath(gamma=0.1)]
    whole = [drude_bath(gamma=0.2)]
    a = exact_coefficients(green_function(1.0, split), asymptotic_kernels(green_function(1.0, split), split))
    b = exact_coefficients(green_function(1.0, whole), asymptotic_kernels(green_function(1.0, whole), whole))
    assert a.d_q == pytest.approx(b.d_q, rel=1e-8)
    assert a.d_p == pytest.approx(b.d_p, rel=1e-8)
    assert a.gamma_q == pytest.approx(b.gamma_q, rel=1e-12)


def test_exact_coefficients_need_matching_kernels(green):
    with pytest.raises(OutOfDomain):
        exact_coefficients(green, influence_kernels(green, [drude_bath()], np.linspace(0, 1, 11), check=False))
    with pytest.raises(OutOfDomain):
        exact_coefficients(green, asymptotic_kernels(green, [drude_bath()]), t=1.0)


def test_coefficient_series_interpolates(green):
    times = np.linspace(0.0, 3.0, 301)
    series = coefficient_series(green, influence_kernels(green, [drude_bath()], times, check=False))
    # G(0) = 0 makes the denominator vanish only at t = 0
    assert series.skipped in ((), (0.0,))
    c = series.at(1.505)
    lo, hi = series.at(1.5), series.at(1.51)
    assert min(lo.d_p, hi.d_p) <= c.d_p <= max(lo.d_p, hi.d_p)
    with pytest.raises(OutOfDomain):
        series.at(3.5)


def test_exact_generator_preserves_trace_and_hermiticity(rng):
    q, p = ladder_operators(1.0, 20)
    coeffs = ExactCoefficients(math.inf, gamma_q=1.02, gamma_p=0.19, d_q=0.03, d_p=0.11)
    rho = np.zeros((20, 20), dtype=complex)
    rho[:15, :15] = random_density_matrix(rng, 15)
    out = exact_generator_apply(coeffs, rho, q, p)
    assert abs(np.trace(out)) < 1e-8
    assert np.max(np.abs(out - out.conj().T)) < 1e-12
    gen = ExactHarmonicGenerator(coeffs, q, p)
    np.testing.assert_allclose(gen(0.0, rho), out, atol=1e-14)
    assert not gen.time_dependent


def test_exact_steady_state_reproduces_kernel_moments():
    baths = [drude_bath()]
    green = green_function(1.0, baths)
    kernels = asymptotic_kernels(green, baths)
    gen = asymptotic_oracle(1.0, 40, baths)
    rho = find_steady_state(gen)
    q, p = ladder_operators(1.0, 40)
    assert np.trace(q @ q @ rho).real == pytest.approx(kernels.kq, rel=1e-5)
    assert np.trace(p @ p @ rho).real == pytest.approx(kernels.kp, rel=1e-5)


def test_truncation_guard():
    assert check_truncation(fock_state(20, 0))
    with pytest.warns(TruncationWarning):
        assert not check_truncation(fock_state(20, 18))


@pytest.mark.slow
def test_time_dependent_coefficients_reach_their_limit():
    baths = [drude_bath()]
    green = green_function(1.0, baths)
    times = np.linspace(0.0, 40.0, 4001)
    series = coefficient_series(green, influence_kernels(green, baths, times, check=False))
    limit = exact_coefficients(green, asymptotic_kernels(green, baths))
    final = series.at(40.0)
    assert final.d_p == pytest.approx(limit.d_p, rel=1e-3)
    assert final.d_q == pytest.approx(limit.d_q, rel=1e-2, abs=1e-4)
