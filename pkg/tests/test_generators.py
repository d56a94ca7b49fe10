import math
from contextlib import nullcontext

import numpy as np
import pytest

from conftest import drude_bath, random_hermitian
from ccqme.bath import BathSpec, LorentzDrude
from ccqme.errors import DecoupledLevel, DegenerateSpectrum, DimensionMismatch, OutOfDomain, SecularityWarning
from ccqme.generators import (
    GENERATORS,
    CCQMEGenerator,
    LindbladGenerator,
    RedfieldGenerator,
    build_coupled_system,
    formal_energy_derivative,
    lamb_shift,
    mean_force_state,
    qbar_apply,
    qbar_pauli_part,
    qbar_population_lindblad,
    redfield_apply,
    secular_rates,
    vectorize_generator,
)
from ccqme.linalg import steady_state, trace_distance
from ccqme.models import build_harmonic
from ccqme.oracle import green_function
from ccqme.propagate import sweep

SYSTEMS = ["ho_system", "spin_boson_system", "generic_system", "two_bath_system"]


def _all_generators(system):
    with pytest.warns(SecularityWarning) if _shares_bohr(system) else nullcontext():
        lindblad = LindbladGenerator(system)
    return [RedfieldGenerator(system), CCQMEGenerator(system), lindblad]


def _shares_bohr(system):
    off = ~np.eye(system.dim, dtype=bool)
    for c in system.couplings:
        pairs = np.round(system.bohr[(c.weights > 0) & off], 9)
        if np.unique(pairs).size < pairs.size:
            return True
    return False


def test_coupling_operator_structure(ho_system, spin_boson_system, two_bath_system):
    s = ho_system.couplings[0].operator
    n = np.arange(ho_system.dim)
    assert np.all(s[np.abs(n[:, None] - n[None, :]) != 1] == 0)
    sb = spin_boson_system.couplings[0].operator
    assert sb[0, 0] == 0 and sb[1, 1] == 0
    assert abs(sb[0, 1]) == pytest.approx(1.0)
    assert len(two_bath_system.couplings) == 2
    assert [c.bath.temperature for c in two_bath_system.couplings] == [0.3, 0.5]


def test_coupling_operator_dimension_checked():
    h, _ = build_harmonic(1.0, 4)
    with pytest.raises(DimensionMismatch):
        build_coupled_system(h, [(np.eye(3), drude_bath())])


@pytest.mark.parametrize("name", SYSTEMS)
def test_generators_preserve_trace_and_hermiticity(name, request, rng):
    system = request.getfixturevalue(name)
    rho = random_hermitian(rng, system.dim, count=50)
    for gen in _all_generators(system):
        out = gen(math.inf, rho)
        assert np.max(np.abs(np.trace(out, axis1=-2, axis2=-1))) < 1e-9, gen.name
        assert np.max(np.abs(out - np.swapaxes(out.conj(), -1, -2))) < 1e-9, gen.name


@pytest.mark.parametrize("name", SYSTEMS)
def test_vectorized_generators_have_no_trace_leak(name, request):
    system = request.getfixturevalue(name)
    for gen in _all_generators(system):
        assert vectorize_generator(gen).trace_leak() < 1e-9


@pytest.mark.parametrize("name", ["ho_system", "spin_boson_system", "generic_system"])
def test_redfield_population_part_vanishes_on_gibbs(name, request):
    system = request.getfixturevalue(name)
    beta = system.couplings[0].bath.beta
    out = redfield_apply(system, 0, system.eig.gibbs_state(beta))
    scale = np.max(np.abs(secular_rates(system, 0)))
    assert np.max(np.abs(np.diagonal(out))) < 1e-8 * max(scale, 1.0)


@pytest.mark.parametrize("name", ["ho_system", "spin_boson_system", "generic_system"])
def test_qbar_coherences_invert_the_bohr_rotation(name, request, rng):
    system = request.getfixturevalue(name)
    rho = random_hermitian(rng, system.dim)
    q = qbar_apply(system, 0, rho)
    r = redfield_apply(system, 0, rho)
    off = ~np.eye(system.dim, dtype=bool)
    np.testing.assert_allclose((1j * system.bohr * q)[off], r[off], atol=1e-12)


@pytest.mark.parametrize("name", ["ho_system", "spin_boson_system", "generic_system"])
def test_energy_derivative_of_gibbs_populations(name, request):
    system = request.getfixturevalue(name)
    beta = system.couplings[0].bath.beta
    p = system.eig.gibbs_populations(beta)
    np.testing.assert_allclose(formal_energy_derivative(system, 0, p), -beta * p, rtol=1e-8, atol=1e-12)


def test_energy_derivative_two_level_formula(spin_boson_system):
    c = spin_boson_system.couplings[0]
    p = np.array([0.9, 0.1])
    weight = abs(c.operator[0, 1]) ** 2
    expected = weight * (c.v[0, 1].real * p[1] + c.v[1, 0].real * p[0]) / (weight * c.w[1, 0].real)
    assert formal_energy_derivative(spin_boson_system, 0, p)[0] == pytest.approx(expected, rel=1e-12)


def test_decoupled_level_is_reported():
    h = np.diag([0.0, 1.0, 2.5])
    s = np.zeros((3, 3))
    s[0, 1] = s[1, 0] = 1.0
    with pytest.warns(DecoupledLevel):
        system = build_coupled_system(h, [(s, drude_bath())])
    assert system.couplings[0].qbar.decoupled_levels == (2,)
    assert formal_energy_derivative(system, 0, np.array([0.5, 0.3, 0.2]))[2] == 0.0
    assert any("decoupled" in note for note in system.diagnostics)


def test_ccqme_without_qbar_is_redfield(generic_system, rng):
    rho = random_hermitian(rng, generic_system.dim, count=5)
    ccqme = CCQMEGenerator(generic_system, qbar_scale=0.0)(math.inf, rho)
    np.testing.assert_array_equal(ccqme, RedfieldGenerator(generic_system)(math.inf, rho))


def test_two_baths_share_one_correction(two_bath_system, rng):
    system = two_bath_system
    rho = random_hermitian(rng, system.dim)
    corrected = rho - qbar_apply(system, 0, rho) - qbar_apply(system, 1, rho)
    expected = -1j * system.bohr * rho + redfield_apply(system, 0, corrected) + redfield_apply(system, 1, corrected)
    np.testing.assert_allclose(CCQMEGenerator(system)(math.inf, rho), expected, atol=1e-13)


def test_redfield_is_zero_map_at_t0_without_counterterm(rng):
    h, q = build_harmonic(1.0, 4)
    bath = BathSpec(LorentzDrude(0.2, 5.0), 0.3, normalization="caldeira-leggett")
    system = build_coupled_system(h, [(q, bath)])
    rho = random_hermitian(rng, 4)
    assert np.all(redfield_apply(system, 0, rho, t=0.0) == 0)


def test_lindblad_maps_diagonal_to_diagonal(ho_system):
    with pytest.warns(SecularityWarning):
        gen = LindbladGenerator(ho_system)
    p = np.linspace(1.0, 0.1, ho_system.dim)
    out = gen(math.inf, np.diag(p / p.sum()).astype(complex))
    assert np.all(out[~np.eye(ho_system.dim, dtype=bool)] == 0)


def test_lamb_shift_is_weighted_sum(generic_system):
    c = generic_system.couplings[0]
    np.testing.assert_allclose(lamb_shift(generic_system, 0), (c.weights * c.w.imag).sum(axis=0))


@pytest.mark.parametrize("gamma", [0.05, 0.2, 0.4])
def test_lindblad_steady_state_is_gibbs(gamma):
    h, q = build_harmonic(1.0, 10)
    system = build_coupled_system(h, [(q, drude_bath(gamma=gamma))])
    with pytest.warns(SecularityWarning):
        gen = LindbladGenerator(system)
    rho = steady_state(vectorize_generator(gen))
    assert trace_distance(rho, system.eig.gibbs_state(1 / 0.3)) < 1e-8


def test_jump_form_of_qbar_populations(generic_system, rng):
    q = generic_system.couplings[0].qbar
    rho = np.diag(np.array([0.4, 0.3, 0.2, 0.1])).astype(complex)
    if np.any(q.gain < 0):
        with pytest.raises(OutOfDomain):
            qbar_population_lindblad(generic_system, 0, rho)
    else:
        out = qbar_population_lindblad(generic_system, 0, rho)
        np.testing.assert_allclose(np.diagonal(out).real, qbar_pauli_part(generic_system, 0, np.diagonal(rho).real))


def test_mean_force_state_is_a_state(ho_system):
    rho = mean_force_state(ho_system)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-14
    # coupling lowers the ground population below the Gibbs value
    assert rho[0, 0].real < ho_system.eig.gibbs_populations(1 / 0.3)[0]


def test_registry():
    assert set(GENERATORS) == {"redfield", "lindblad", "ccqme"}



def _degenerate_pair(gap):
    return np.diag([0.0, 1.0, 1.0 + gap, 2.5]), random_hermitian(np.random.default_rng(3), 4)


def test_degenerate_spectrum_is_flagged_on_the_system():
    h, s = _degenerate_pair(0.0)
    with pytest.warns(DegenerateSpectrum):
        system = build_coupled_system(h, [(s, drude_bath())])
    assert system.degenerate
    assert any("degenerate spectrum" in note for note in system.diagnostics)

    h, s = _degenerate_pair(0.5)
    system = build_coupled_system(h, [(s, drude_bath())])
    assert not system.degenerate
    assert not any("degenerate spectrum" in note for note in system.diagnostics)


def test_degeneracy_flag_is_per_system_under_threads():
    def cell(params):
        h, s = _degenerate_pair(params["gap"])
        system = build_coupled_system(h, [(s, drude_bath())])
        return {"degenerate": float(system.degenerate)}

    gaps = [0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5]
    result = sweep([("gap", gaps)], cell, workers=4)
    assert not result.failed()
    for c in result.cells:
        assert c.metrics["degenerate"] == float(c.params["gap"] == 0.0)


def test_counterterm_restores_the_oscillator_frequency():
    h, q = build_harmonic(1.0, 6)
    bare = BathSpec(LorentzDrude(0.02, 5.0), 0.3, normalization="caldeira-leggett")
    dressed = drude_bath(gamma=0.02)
    shift = dressed.counterterm_shift
    assert shift == pytest.approx(0.02 * 5.0 / 2)

    plain = lamb_shift(build_coupled_system(h, [(q, bare)]), 0)
    renorm = lamb_shift(build_coupled_system(h, [(q, dressed)]), 0)
    # <n|q^2|n> = n + 1/2 below the truncated top level
    n = np.arange(5)
    np.testing.assert_allclose((renorm - plain)[:5], shift * (n + 0.5), rtol=1e-9)

    spacing = np.diff(renorm[:5])
    np.testing.assert_allclose(spacing, spacing[0], rtol=1e-9)
    gq, gp = green_function(1.0, [dressed]).asymptotic_damping()
    exact = math.sqrt(gq - gp**2 / 4) - 1.0
    assert spacing[0] == pytest.approx(0.02 * 5.0 / (2 * 26.0), rel=1e-3)
    assert spacing[0] == pytest.approx(exact, rel=0.05)
