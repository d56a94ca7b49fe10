"""Generator actions rho -> L[rho] in the system eigenbasis.

Every action accepts a single matrix or a stack (..., d, d).
"""
import math

import numpy as np

from ccqme.errors import OutOfDomain
from ccqme.generators.system import CoupledSystem
from ccqme.linalg import dag, normalize_state


def _diagonal(rho: np.ndarray) -> np.ndarray:
    return np.diagonal(rho, axis1=-2, axis2=-1)


def _set_diagonal(out: np.ndarray, values: np.ndarray) -> np.ndarray:
    idx = np.arange(out.shape[-1])
    out[..., idx, idx] = values
    return out


def hamiltonian_apply(sys: CoupledSystem, rho: np.ndarray) -> np.ndarray:
    """-i[H_S, rho]; H_S is diagonal here."""
    return -1j * sys.bohr * rho


def redfield_apply(sys: CoupledSystem, bath_index: int, rho: np.ndarray, t: float = math.inf) -> np.ndarray:
    """-S SS rho + S rho SS^dag - rho SS^dag S + SS rho S, with SS the convolution operator at horizon t."""
    coupling = sys.couplings[bath_index]
    s = coupling.operator
    conv = coupling.convolution(sys.bohr, t, sys.config)
    conv_d = dag(conv)
    x = conv @ rho
    return -s @ x + (s @ rho) @ conv_d - (rho @ conv_d) @ s + x @ s


def secular_rates(sys: CoupledSystem, bath_index: int) -> np.ndarray:
    """gamma_nm = 2 |S_nm|^2 W'(Delta_nm), the rate of the jump |n><m|."""
    c = sys.couplings[bath_index]
    return 2.0 * c.weights * c.w.real


def lamb_shift(sys: CoupledSystem, bath_index: int) -> np.ndarray:
    """Diagonal of H^LS: sum_n |S_nm|^2 W''(Delta_nm)."""
    c = sys.couplings[bath_index]
    return (c.weights * c.w.imag).sum(axis=0)


def lindblad_secular_apply(sys: CoupledSystem, bath_index: int, rho: np.ndarray) -> np.ndarray:
    """-i[H^LS, rho] plus the secular dissipator; -i[H_S, rho] is added by the generator."""
    gamma = secular_rates(sys, bath_index)
    kappa = gamma.sum(axis=0)
    h_ls = lamb_shift(sys, bath_index)

    out = (-0.5 * (kappa[:, None] + kappa[None, :]) - 1j * (h_ls[:, None] - h_ls[None, :])) * rho
    p = _diagonal(rho)
    return _set_diagonal(out, _diagonal(out) + p @ gamma.T)


def formal_energy_derivative(sys: CoupledSystem, bath_index: int, populations: np.ndarray) -> np.ndarray:
    """D_n, the formal derivative of rho with respect to E_n, from populations alone.

    Levels whose denominator vanishes (decoupled from the bath) get D_n = 0; they
    are reported once when the system is built.
    """
    q = sys.couplings[bath_index].qbar
    p = np.asarray(populations)
    num = p @ q.derivative_gain.T + q.derivative_loss * p
    norm = q.derivative_norm
    safe = np.where(norm > 0, norm, 1.0)
    return np.where(norm > 0, num / safe, 0.0)


def qbar_pauli_part(sys: CoupledSystem, bath_index: int, populations: np.ndarray) -> np.ndarray:
    q = sys.couplings[bath_index].qbar
    p = np.asarray(populations)
    return p @ q.gain.T - q.loss * p


def qbar_apply(sys: CoupledSystem, bath_index: int, rho: np.ndarray) -> np.ndarray:
    q = sys.couplings[bath_index].qbar
    out = redfield_apply(sys, bath_index, rho) * q.coherence_divisor
    p = _diagonal(rho)
    pop = qbar_pauli_part(sys, bath_index, p) + q.shift * formal_energy_derivative(sys, bath_index, p)
    return _set_diagonal(out, pop)


def qbar_population_lindblad(sys: CoupledSystem, bath_index: int, rho: np.ndarray) -> np.ndarray:
    """Pauli part of Q-bar written with jump operators sqrt(|S_nl|^2 V''_nl) |n><l|.

    Only defined when every V''_nl entry that is coupled is non-negative.
    """
    q = sys.couplings[bath_index].qbar
    if np.any(q.gain < 0):
        raise OutOfDomain("jump-operator form needs non-negative V'' on every coupled pair")
    d = sys.dim
    out = np.zeros_like(rho)
    for n, l in zip(*np.nonzero(q.gain)):
        jump = np.zeros((d, d), dtype=np.complex128)
        jump[n, l] = math.sqrt(q.gain[n, l])
        jump_d = dag(jump)
        out += jump @ rho @ jump_d - 0.5 * (jump_d @ jump @ rho + rho @ jump_d @ jump)
    return out


def ccqme_apply(sys: CoupledSystem, rho: np.ndarray, t: float = math.inf, qbar_scale: float | None = None):
    """-i[H_S, rho] + sum_i R_t^i[(I - sum_j Qbar^j) rho]."""
    scale = sys.config.qbar_scale if qbar_scale is None else qbar_scale
    corrected = rho
    if scale != 0.0:
        qsum = sum(qbar_apply(sys, j, rho) for j in range(len(sys.couplings)))
        corrected = rho - scale * qsum
    out = hamiltonian_apply(sys, rho)
    for i in range(len(sys.couplings)):
        out = out + redfield_apply(sys, i, corrected, t)
    return out


def mean_force_state(sys: CoupledSystem, bath_index: int = 0) -> np.ndarray:
    """(I + Qbar)[rho_G] at the designated bath's temperature, hermitized and renormalized."""
    beta = sys.couplings[bath_index].bath.beta
    rho_g = sys.eig.gibbs_state(beta)
    return normalize_state(rho_g + qbar_apply(sys, bath_index, rho_g))
