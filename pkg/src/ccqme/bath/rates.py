"""Half-Fourier transforms W(E) of the bath correlator and their energy derivatives V(E)."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from tqdm import tqdm

from ccqme.bath.correlation import correlator, frequency_breaks, upper_frequency
from ccqme.bath.quadrature import QuadSum
from ccqme.bath.spectral import BathSpec
from ccqme.errors import OutOfDomain, QuadratureFailure
from ccqme.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

# energies are matched after rounding to this many decimals
_KEY_DECIMALS = 12


def _principal_value(fun, bath: BathSpec, energy: float, tolerances: Tolerances, what: str) -> float:
    """P int fun(w) / (w + E) dw over the real line."""
    pole = -energy
    half = max(0.5 * bath.temperature, 0.25 * abs(pole))
    lo, hi = pole - half, pole + half
    top = upper_frequency(bath) + abs(energy)
    breaks = [0.0, top, -top]
    for b in frequency_breaks(bath):
        breaks += [b, -b]

    def regular(w):
        return fun(w) / (w + energy)

    total = QuadSum(tolerances, what, energy=energy)
    total.add(fun, lo, hi, weight="cauchy", wvar=pole)
    total.add_segments(regular, -np.inf, lo, breaks)
    total.add_segments(regular, hi, np.inf, breaks)
    return total.result()


def _finite_horizon_transform(fun, bath: BathSpec, energy: float, horizon: float, tolerances: Tolerances,
                              what: str) -> complex:
    """int fun(w) K(w + E, t) dw with K(x, t) = int_0^t e^{-i x tau} d tau.

    K = sin(xt)/x - i (1 - cos(xt))/x. Near x = 0 the combination is integrated
    directly; away from it the oscillating parts use Fourier-weighted quadrature.
    """
    t = float(horizon)
    e = float(energy)
    delta = min(0.5 * bath.frequency_scale, 10.0 / t + 0.05 * bath.frequency_scale)
    top = upper_frequency(bath) + abs(e)

    def near_re(x):
        return fun(x - e) * t * np.sinc(x * t / math.pi)

    def near_im(x):
        return fun(x - e) * 2.0 * np.sin(0.5 * x * t) ** 2 / x if x != 0.0 else 0.0

    # fold x < 0 onto x > 0: sin(xt)/x is even in x, (1 - cos(xt))/x is odd
    def even(x):
        return (fun(x - e) + fun(-x - e)) / x

    def odd(x):
        return (fun(x - e) - fun(-x - e)) / x

    def minus_odd(x):
        return -odd(x)

    re = QuadSum(tolerances, f"Re {what}", energy=e)
    im = QuadSum(tolerances, f"Im {what}", energy=e)
    limit = max(tolerances.quad_limit, int(4 * t * delta) + 50)
    re.add(near_re, -delta, delta, limit=limit)
    im.add(near_im, -delta, delta, limit=limit)
    for a, b in [(delta, top), (top, np.inf)]:
        re.add(even, a, b, weight="sin", wvar=t)
        im.add(odd, a, b)
        im.add(minus_odd, a, b, weight="cos", wvar=t)
    return complex(re.result(), -im.result())


def half_fourier_W(
    bath: BathSpec, energy: float, horizon: float = math.inf, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> complex:
    """W(E, t) = int_0^t C(tau) e^{-iE tau} d tau; the counter-term shift is included in W''."""
    if not horizon > 0:
        raise OutOfDomain(f"horizon must be positive, got {horizon}")
    e = float(energy)
    if math.isinf(horizon):
        w_re = math.pi * float(bath.spectrum(-e))
        w_im = -_principal_value(bath.spectrum, bath, e, tolerances, "W''")
        return complex(w_re, w_im + bath.counterterm_shift)
    w = _finite_horizon_transform(bath.spectrum, bath, e, horizon, tolerances, "W(E, t)")
    return w + 1j * bath.counterterm_shift


def deriv_V(
    bath: BathSpec, energy: float, horizon: float = math.inf, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> complex:
    """V(E, t) = dW/dE = int_0^t (-i tau) C(tau) e^{-iE tau} d tau."""
    if not horizon > 0:
        raise OutOfDomain(f"horizon must be positive, got {horizon}")
    e = float(energy)
    if math.isinf(horizon):
        v_re = -math.pi * float(bath.spectrum_derivative(-e))
        v_im = _principal_value(bath.spectrum_derivative, bath, e, tolerances, "V''")
        return complex(v_re, v_im)
    return -_finite_horizon_transform(bath.spectrum_derivative, bath, e, horizon, tolerances, "V(E, t)")


def energy_keys(energies) -> np.ndarray:
    e = np.round(np.asarray(energies, dtype=float).ravel(), _KEY_DECIMALS)
    return np.unique(e + 0.0)


@dataclass(frozen=True)
class RateTable:
    energies: np.ndarray
    w: np.ndarray
    v: np.ndarray
    beta: float
    horizon: float = math.inf

    def __len__(self) -> int:
        return self.energies.shape[0]

    def _index(self, delta) -> np.ndarray:
        keys = np.round(np.asarray(delta, dtype=float), _KEY_DECIMALS) + 0.0
        idx = np.searchsorted(self.energies, keys)
        idx = np.clip(idx, 0, max(len(self) - 1, 0))
        if len(self) == 0 or not np.array_equal(self.energies[idx], keys):
            raise OutOfDomain("rate table does not cover every requested Bohr frequency")
        return idx

    def lookup(self, delta) -> tuple[np.ndarray, np.ndarray]:
        """W and V at each entry of ``delta`` (any shape)."""
        idx = self._index(delta)
        return self.w[idx], self.v[idx]

    def kms_violation(self) -> float:
        """Largest relative deviation from W'(-D) = e^{beta D} W'(D) over the table, |beta D| <= 30."""
        worst = 0.0
        for k, e in enumerate(self.energies):
            if e <= 0 or self.beta * e > 30:
                continue
            j = np.searchsorted(self.energies, -e)
            if j >= len(self) or self.energies[j] != -e:
                continue
            expected = math.exp(self.beta * e) * self.w[k].real
            worst = max(worst, abs(self.w[j].real - expected) / max(abs(expected), 1e-300))
        return worst


@dataclass
class RateTableConfig:
    horizon: float = math.inf
    # above this many distinct energies W'' and V'' are splined on a uniform grid
    interpolate_above: int = 512
    spline_points: int = 2049
    workers: int = 1
    progress: bool = False
    tolerances: Tolerances = field(default_factory=Tolerances)


def _evaluate(bath: BathSpec, energy: float, cfg: RateTableConfig) -> tuple[complex, complex]:
    return (
        half_fourier_W(bath, energy, cfg.horizon, cfg.tolerances),
        deriv_V(bath, energy, cfg.horizon, cfg.tolerances),
    )


def _evaluate_many(bath: BathSpec, energies: np.ndarray, cfg: RateTableConfig, what: str):
    w = np.empty(energies.shape[0], dtype=np.complex128)
    v = np.empty(energies.shape[0], dtype=np.complex128)
    if cfg.workers <= 1:
        for i, e in enumerate(tqdm(energies, desc=what, disable=not cfg.progress)):
            w[i], v[i] = _evaluate(bath, e, cfg)
        return w, v

    with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
        futures = {ex.submit(_evaluate, bath, e, cfg): i for i, e in enumerate(energies)}
        for fut in tqdm(as_completed(futures), total=len(futures), desc=what, disable=not cfg.progress):
            i = futures[fut]
            try:
                w[i], v[i] = fut.result()
            except QuadratureFailure:
                logger.error("rate evaluation failed at E=%.6g", energies[i])
                raise
    return w, v


def build_rate_table(bath: BathSpec, bohr_frequencies, cfg: RateTableConfig | None = None) -> RateTable:
    cfg = cfg or RateTableConfig()
    keys = energy_keys(bohr_frequencies)
    if keys.size == 0:
        empty = np.empty(0, dtype=np.complex128)
        return RateTable(keys, empty, empty.copy(), bath.beta, cfg.horizon)

    if math.isinf(cfg.horizon) and keys.size > cfg.interpolate_above:
        w, v = _splined_rates(bath, keys, cfg)
    else:
        w, v = _evaluate_many(bath, keys, cfg, "rate table")
    logger.debug("rate table: %d energies, horizon %s", keys.size, cfg.horizon)
    return RateTable(keys, w, v, bath.beta, cfg.horizon)


def _splined_rates(bath: BathSpec, keys: np.ndarray, cfg: RateTableConfig):
    # W' and V' are closed forms; only the principal-value parts are splined
    grid = np.linspace(keys[0], keys[-1], cfg.spline_points)
    w_grid, v_grid = _evaluate_many(bath, grid, cfg, "rate spline")
    w_im = CubicSpline(grid, w_grid.imag)(keys)
    v_im = CubicSpline(grid, v_grid.imag)(keys)
    w = math.pi * bath.spectrum(-keys) + 1j * w_im
    v = -math.pi * bath.spectrum_derivative(-keys) + 1j * v_im
    logger.info("splined W'' and V'' from %d nodes for %d distinct Bohr frequencies", grid.size, keys.size)
    return w, v


class TimeDependentRates:
    """W(E, t) and V(E, t) on a uniform time grid, linearly interpolated in t.

    C(tau) is sampled at cell midpoints, which tolerates the integrable
    singularity a Lorentz-Drude correlator has at tau = 0.
    """

    def __init__(self, bath: BathSpec, energies, t_max: float, step: float,
                 tolerances: Tolerances = DEFAULT_TOLERANCES, progress: bool = False):
        if not (t_max > 0 and step > 0):
            raise OutOfDomain("time-dependent rates need t_max > 0 and step > 0")
        self.bath = bath
        self.energies = energy_keys(energies)
        n = int(math.ceil(t_max / step - 1e-9))
        self.step = step
        self.times = step * np.arange(n + 1)
        mid = step * (np.arange(n) + 0.5)
        c = np.array(
            [correlator(bath, tm, tolerances) for tm in tqdm(mid, desc="C(t) grid", disable=not progress)]
        )
        phase = np.exp(-1j * np.outer(mid, self.energies))
        w_cells = step * c[:, None] * phase
        v_cells = -1j * mid[:, None] * w_cells
        zeros = np.zeros((1, self.energies.size), dtype=np.complex128)
        self.w = np.concatenate([zeros, np.cumsum(w_cells, axis=0)]) + 1j * bath.counterterm_shift
        self.v = np.concatenate([zeros, np.cumsum(v_cells, axis=0)])

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    def at(self, t: float) -> RateTable:
        if t < 0 or t > self.t_max * (1 + 1e-12):
            raise OutOfDomain(f"t={t:.6g} outside the tabulated range [0, {self.t_max:.6g}]")
        pos = min(t / self.step, len(self.times) - 1.0)
        k = min(int(pos), len(self.times) - 2)
        frac = pos - k
        w = (1 - frac) * self.w[k] + frac * self.w[k + 1]
        v = (1 - frac) * self.v[k] + frac * self.v[k + 1]
        return RateTable(self.energies, w, v, self.bath.beta, horizon=t)
