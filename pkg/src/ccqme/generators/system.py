"""A system Hamiltonian wired to one or more baths, everything in the system eigenbasis."""
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import List, Sequence, Tuple

import numpy as np

from ccqme.bath import BathSpec, RateTable, RateTableConfig, TimeDependentRates, build_rate_table
from ccqme.errors import DecoupledLevel, DegeneratePairSkipped, DimensionMismatch, NonHermitianInput
from ccqme.linalg import EigenSystem, as_hermitian, diagonalize, hermiticity_error
from ccqme.settings import Tolerances

logger = logging.getLogger(__name__)


@dataclass
class GeneratorConfig:
    # finite horizon: Redfield parts use W(E, t) tabulated up to this time
    horizon: float = math.inf
    # grid step of the time-dependent tables; the integrator step is a good choice
    horizon_step: float = 0.01
    qbar_scale: float = 1.0
    rates: RateTableConfig = field(default_factory=RateTableConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)


@dataclass(frozen=True)
class QBarAction:
    """Precomputed pieces of the Q-bar superoperator for one bath."""

    coherence_divisor: np.ndarray  # 1/(i Delta_nm), zero on the diagonal and for skipped pairs
    skipped_pairs: Tuple[Tuple[int, int], ...]
    gain: np.ndarray  # |S_nl|^2 V''(Delta_nl)
    loss: np.ndarray  # sum_l |S_nl|^2 V''(Delta_ln)
    shift: np.ndarray  # sum_l |S_nl|^2 W''(Delta_ln)
    derivative_gain: np.ndarray  # |S_nl|^2 V'(Delta_nl), l != n
    derivative_loss: np.ndarray  # sum_{l != n} |S_nl|^2 V'(Delta_ln)
    derivative_norm: np.ndarray  # sum_{l != n} |S_ln|^2 W'(Delta_ln), zero marks a decoupled level
    decoupled_levels: Tuple[int, ...]


@dataclass(frozen=True)
class BathCoupling:
    operator: np.ndarray  # S in the eigenbasis
    bath: BathSpec
    rates: RateTable
    weights: np.ndarray  # |S_nm|^2
    w: np.ndarray  # W(Delta_nm), zero where S_nm = 0
    v: np.ndarray
    qbar: QBarAction
    timed_rates: TimeDependentRates | None = None

    def convolution(self, bohr: np.ndarray, t: float = math.inf, cfg: GeneratorConfig | None = None) -> np.ndarray:
        """The convolution operator S_nm W(Delta_nm, t)."""
        if math.isinf(t):
            return self.operator * self.w
        if t <= 0.0:
            return self.operator * (1j * self.bath.counterterm_shift)
        if self.timed_rates is not None and t <= self.timed_rates.t_max:
            table = self.timed_rates.at(t)
        else:
            cfg = cfg or GeneratorConfig()
            logger.debug("building W(E, t) at t=%.6g outside the tabulated range", t)
            table = build_rate_table(
                self.bath, bohr[self.weights > 0], RateTableConfig(horizon=t, tolerances=cfg.tolerances)
            )
        w_t, _ = _rate_matrices(table, bohr, self.weights > 0)
        return self.operator * w_t


@dataclass(frozen=True)
class CoupledSystem:
    eig: EigenSystem
    couplings: Tuple[BathCoupling, ...]
    config: GeneratorConfig
    diagnostics: Tuple[str, ...] = ()

    @property
    def degenerate(self) -> bool:
        return self.eig.degenerate

    @property
    def dim(self) -> int:
        return self.eig.dim

    @property
    def bohr(self) -> np.ndarray:
        return self.eig.bohr

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.diag(self.eig.energies).astype(np.complex128)


def _rate_matrices(table: RateTable, bohr: np.ndarray, mask: np.ndarray):
    w = np.zeros(bohr.shape, dtype=np.complex128)
    v = np.zeros(bohr.shape, dtype=np.complex128)
    if mask.any():
        w[mask], v[mask] = table.lookup(bohr[mask])
    return w, v


def _coupling_mask(s: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(s)))
    if scale == 0.0:
        return np.zeros(s.shape, dtype=bool)
    return np.abs(s) > 1e-14 * scale


def build_qbar(eig: EigenSystem, weights: np.ndarray, w: np.ndarray, v: np.ndarray,
               tolerances: Tolerances) -> Tuple[QBarAction, List[str]]:
    notes: List[str] = []
    bohr = eig.bohr
    d = eig.dim
    off = ~np.eye(d, dtype=bool)

    keep = off & (np.abs(bohr) > eig.degeneracy_threshold)
    divisor = np.zeros((d, d), dtype=np.complex128)
    divisor[keep] = 1.0 / (1j * bohr[keep])
    skipped = tuple((int(n), int(m)) for n, m in zip(*np.nonzero(off & ~keep)))
    if skipped:
        msg = f"Q-bar coherences skipped for {len(skipped)} quasi-degenerate pairs, e.g. {list(skipped[:6])}"
        warnings.warn(msg, DegeneratePairSkipped, stacklevel=3)
        notes.append(msg)

    w1, w2 = w.real, w.imag
    v1, v2 = v.real, v.imag
    gain = weights * v2
    loss = (weights * v2.T).sum(axis=1)
    shift = (weights * w2.T).sum(axis=1)
    off_weights = weights * off
    derivative_gain = off_weights * v1
    derivative_loss = (off_weights * v1.T).sum(axis=1)
    norm = (off_weights * w1).sum(axis=0)  # sum_l |S_ln|^2 W'(Delta_ln)

    max_rate = float(np.max(np.abs(weights * w1))) if weights.size else 0.0
    floor = tolerances.decoupled_level * max_rate
    decoupled = tuple(int(n) for n in np.nonzero(norm <= floor)[0])
    if decoupled:
        msg = f"levels {list(decoupled)} are decoupled from the bath; their energy derivative is set to 0"
        warnings.warn(msg, DecoupledLevel, stacklevel=3)
        notes.append(msg)
    norm = np.where(norm <= floor, 0.0, norm)

    action = QBarAction(
        coherence_divisor=divisor,
        skipped_pairs=skipped,
        gain=gain,
        loss=loss,
        shift=shift,
        derivative_gain=derivative_gain,
        derivative_loss=derivative_loss,
        derivative_norm=norm,
        decoupled_levels=decoupled,
    )
    return action, notes


def build_coupled_system(
    h,
    couplings: Sequence[Tuple[np.ndarray, BathSpec]],
    horizon: float = math.inf,
    cfg: GeneratorConfig | None = None,
) -> CoupledSystem:
    cfg = cfg or GeneratorConfig()
    if not math.isinf(horizon):
        cfg = replace(cfg, horizon=horizon)
    tol = cfg.tolerances

    eig = diagonalize(h, tol)
    notes: List[str] = []
    if eig.degenerate:
        notes.append(
            f"degenerate spectrum: smallest gap {eig.degeneracy_gap:.3g} below {eig.degeneracy_threshold:.3g}"
        )

    d = eig.dim
    bohr = eig.bohr
    built = []
    for k, (s_op, bath) in enumerate(couplings):
        s_op = as_hermitian(s_op, tol, name=f"coupling operator {k}")
        if s_op.shape != (d, d):
            raise DimensionMismatch(f"coupling operator {k} has shape {s_op.shape}, Hamiltonian is {d}x{d}")
        s = eig.to_eigenbasis(s_op)
        if hermiticity_error(s) > 1e-10:
            raise NonHermitianInput(f"coupling operator {k} lost hermiticity in the eigenbasis")
        mask = _coupling_mask(s)
        s = np.where(mask, s, 0.0)
        weights = np.abs(s) ** 2

        rate_cfg = RateTableConfig(
            interpolate_above=cfg.rates.interpolate_above,
            spline_points=cfg.rates.spline_points,
            workers=cfg.rates.workers,
            progress=cfg.rates.progress,
            tolerances=tol,
        )
        table = build_rate_table(bath, bohr[mask], rate_cfg)
        w, v = _rate_matrices(table, bohr, mask)
        qbar, qnotes = build_qbar(eig, weights, w, v, tol)
        notes += qnotes

        timed = None
        if not math.isinf(cfg.horizon):
            timed = TimeDependentRates(bath, bohr[mask], cfg.horizon, cfg.horizon_step, tol, cfg.rates.progress)
        built.append(BathCoupling(s, bath, table, weights, w, v, qbar, timed))
        logger.info(
            "bath %d: T=%.4g, %d distinct Bohr frequencies, counter-term %s",
            k, bath.temperature, len(table), "on" if bath.counterterm else "off",
        )

    return CoupledSystem(eig=eig, couplings=tuple(built), config=cfg, diagnostics=tuple(notes))
