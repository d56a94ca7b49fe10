import numpy as np
import pytest

from ccqme.bath import BathSpec, LorentzDrude, OhmicExp
from ccqme.generators import build_coupled_system
from ccqme.models import build_harmonic, build_spin_boson, kelvin_to_energy


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng: np.random.Generator, dim: int, count: int | None = None) -> np.ndarray:
    shape = (dim, dim) if count is None else (count, dim, dim)
    a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return 0.5 * (a + np.swapaxes(a.conj(), -1, -2))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def drude_bath(gamma: float = 0.2, temperature: float = 0.3, omega_d: float = 5.0) -> BathSpec:
    return BathSpec(LorentzDrude(gamma, omega_d), temperature, counterterm=True, normalization="caldeira-leggett")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def ho_system():
    """Eight-level oscillator in the gamma = 0.2, T = 0.3 Drude bath."""
    h, q = build_harmonic(1.0, 8)
    return build_coupled_system(h, [(q, drude_bath())])


@pytest.fixture(scope="session")
def spin_boson_system():
    h, s = build_spin_boson(np.pi / 2)
    bath = BathSpec(OhmicExp(0.01485, 2.2), kelvin_to_energy(50.0))
    return build_coupled_system(h, [(s, bath)])


@pytest.fixture(scope="session")
def generic_system():
    """Four levels with distinct Bohr frequencies, a rotated Hamiltonian and a dense coupling."""
    gen = np.random.default_rng(7)
    u = random_unitary(gen, 4)
    h = u @ np.diag([0.0, 0.7, 1.9, 3.2]) @ u.conj().T
    s = random_hermitian(gen, 4)
    bath = BathSpec(LorentzDrude(0.1, 5.0), 0.5)
    return build_coupled_system(h, [(s, bath)])


@pytest.fixture(scope="session")
def two_bath_system():
    h, q = build_harmonic(1.0, 6)
    return build_coupled_system(h, [(q, drude_bath(0.2, 0.3)), (q, drude_bath(0.2, 0.5))])
