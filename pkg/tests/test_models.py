import math

import numpy as np
import pytest

from ccqme.errors import ChainTooLong, DimensionMismatch, NegativeTemperature, OutOfDomain
from ccqme.linalg import diagonalize
from ccqme.models import (
    HarmonicOscillator,
    IsingChain,
    SpinBoson,
    build_harmonic,
    build_ising_chain,
    build_model,
    build_spin_boson,
    energy_to_kelvin,
    fock_state,
    ground_state,
    ising_chain_bruteforce,
    ising_fields,
    kelvin_to_energy,
    ladder_operators,
    superposition_state,
    thermal_state,
    top_population,
)


def test_two_level_oscillator():
    h, q = build_harmonic(1.0, 2)
    np.testing.assert_allclose(np.diagonal(h).real, [0.5, 1.5])
    assert q[0, 1] == pytest.approx(1 / math.sqrt(2))
    assert q[0, 0] == 0 and q[1, 1] == 0


def test_position_has_no_diagonal_and_canonical_commutator():
    levels = 12
    q, p = ladder_operators(2.0, levels)
    assert np.all(np.diagonal(q) == 0)
    comm = q @ p - p @ q
    # the truncation spoils [q, p] = i only in the top level
    np.testing.assert_allclose(comm[:-1, :-1], 1j * np.eye(levels - 1), atol=1e-12)


def test_oscillator_validation():
    with pytest.raises(OutOfDomain):
        HarmonicOscillator(-1.0, 10)
    with pytest.raises(OutOfDomain, match="at least 10"):
        HarmonicOscillator(1.0, 9)
    assert HarmonicOscillator(1.0, 10).levels == 10
    with pytest.raises(DimensionMismatch):
        build_harmonic(1.0, 1)


def test_spin_boson():
    h, s = build_spin_boson(math.pi / 2)
    eig = diagonalize(h)
    np.testing.assert_allclose(eig.energies, [-math.pi / 4, math.pi / 4])
    s_eig = eig.to_eigenbasis(s)
    assert abs(s_eig[0, 1]) == pytest.approx(1.0)
    assert abs(s_eig[0, 0]) < 1e-14
    with pytest.raises(OutOfDomain):
        build_spin_boson(0.0)


def test_ising_fields_of_two_sites():
    hx, hz = ising_fields(2, 1.0)
    np.testing.assert_allclose(hx, [0.8, 1.0])
    np.testing.assert_allclose(hz, [0.7, 0.5])


@pytest.mark.parametrize("length", [2, 4])
def test_ising_chain_matches_tensor_products(length):
    h, s = build_ising_chain(length, 1.0)
    np.testing.assert_allclose(h, ising_chain_bruteforce(length, 1.0), atol=1e-13)
    assert s.shape == (2**length, 2**length)
    assert np.allclose(s, np.diag(np.diagonal(s)))


def test_ising_spectrum_is_not_degenerate():
    h, _ = build_ising_chain(6, 1.0)
    eig = diagonalize(h)
    assert np.min(np.diff(eig.energies)) > 1e-6


@pytest.mark.parametrize("length", [1, 14])
def test_ising_chain_length_bounds(length):
    with pytest.raises(ChainTooLong):
        build_ising_chain(length, 1.0)


def test_ising_needs_a_central_site():
    with pytest.raises(OutOfDomain):
        build_ising_chain(3, 1.0)


def test_kelvin_conversion():
    assert kelvin_to_energy(0.0) == 0.0
    assert kelvin_to_energy(50.0) == pytest.approx(6.546, rel=1e-3)
    assert kelvin_to_energy(50.0, "fs") == pytest.approx(6.546e-3, rel=1e-3)
    assert energy_to_kelvin(kelvin_to_energy(50.0)) == pytest.approx(50.0, rel=1e-12)
    with pytest.raises(NegativeTemperature):
        kelvin_to_energy(-1.0)
    with pytest.raises(OutOfDomain):
        kelvin_to_energy(1.0, "ns")


def test_thermal_state_of_oscillator():
    h, _ = build_harmonic(1.0, 40)
    rho = thermal_state(h, 1 / 0.3)
    assert rho[0, 0].real == pytest.approx(1 - math.exp(-1 / 0.3), rel=1e-10)
    with pytest.raises(OutOfDomain):
        thermal_state(h, 0.0)


def test_superposition_and_fock_states():
    rho = superposition_state(4, 0, 1)
    assert rho[0, 0].real == pytest.approx(0.5)
    assert rho[0, 1].real == pytest.approx(0.5)
    assert np.trace(rho).real == pytest.approx(1.0)
    with pytest.raises(DimensionMismatch):
        superposition_state(4, 2, 2)
    assert fock_state(5, 3)[3, 3] == 1.0
    with pytest.raises(DimensionMismatch):
        fock_state(5, 5)
    assert top_population(fock_state(10, 9)) == 1.0
    assert top_population(fock_state(10, 4)) == 0.0


def test_ground_state_is_pure():
    h, _ = build_ising_chain(4, 1.0)
    eig = diagonalize(h)
    rho = ground_state(eig)
    assert np.trace(rho @ rho).real == pytest.approx(1.0)
    assert eig.to_eigenbasis(rho)[0, 0].real == pytest.approx(1.0)


def test_build_model():
    assert build_model(HarmonicOscillator(1.0, 10)).dim == 10
    assert build_model(SpinBoson(2.0)).energy_scale == 2.0
    chain = build_model(IsingChain(4, 0.5))
    assert chain.dim == 16
    assert chain.energy_scale == 0.5
