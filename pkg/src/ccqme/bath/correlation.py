"""Real- and imaginary-time bath correlation functions.

All quadratures run over the positive frequency axis after folding the
two-sided spectrum S(w) onto w >= 0, so every integrand stays finite at w = 0.
"""
import logging
import math

import numpy as np

from ccqme.bath.quadrature import QuadSum
from ccqme.bath.spectral import BathSpec, LorentzDrude, bose_weight
from ccqme.errors import OutOfDomain, UnsupportedBathCombination
from ccqme.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


def frequency_breaks(bath: BathSpec) -> list[float]:
    """Node placement: the thermal scale and the cutoff, and a few multiples of each."""
    t, c = bath.temperature, bath.spectral.cutoff
    return [t, 4.0 * t, c, 4.0 * c]


def upper_frequency(bath: BathSpec) -> float:
    return 20.0 * bath.frequency_scale


def coth_density(bath: BathSpec):
    # J(w) coth(beta w / 2) = j(w) (2 g(w) - w), finite at w = 0
    def f(w):
        return bath.scale * bath.spectral.reduced(w) * (2.0 * bose_weight(w, bath.beta) - w)

    return f


def odd_density(bath: BathSpec):
    def f(w):
        return bath.scale * w * bath.spectral.reduced(w)

    return f


def correlator(bath: BathSpec, t: float, tolerances: Tolerances = DEFAULT_TOLERANCES) -> complex:
    """C(t) = scale * int_0^inf J(w)[coth(beta w/2) cos(wt) - i sin(wt)] dw."""
    tau = abs(float(t))
    top = upper_frequency(bath)
    breaks = frequency_breaks(bath)
    re_f, im_f = coth_density(bath), odd_density(bath)

    if tau == 0.0:
        re = QuadSum(tolerances, "Re C(0)").add_segments(re_f, 0.0, top, breaks).add(re_f, top, np.inf)
        return complex(re.result(), 0.0)

    re = QuadSum(tolerances, f"Re C({tau:.6g})")
    im = QuadSum(tolerances, f"Im C({tau:.6g})")
    for a, b in _finite_segments(top, breaks):
        re.add(re_f, a, b, weight="cos", wvar=tau)
        im.add(im_f, a, b, weight="sin", wvar=tau)
    re.add(re_f, top, np.inf, weight="cos", wvar=tau)
    im.add(im_f, top, np.inf, weight="sin", wvar=tau)

    value = complex(re.result(), -im.result())
    return value if t >= 0 else value.conjugate()


def _finite_segments(top: float, breaks) -> list[tuple[float, float]]:
    inner = sorted({b for b in breaks if 0.0 < b < top})
    edges = [0.0, *inner, top]
    return list(zip(edges[:-1], edges[1:]))


def correlator_grid(bath: BathSpec, times, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    return np.array([correlator(bath, t, tolerances) for t in np.asarray(times, dtype=float)])


def imag_time_correlator(bath: BathSpec, u: float, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """C(-iu) = int S(w) e^{-wu} dw for 0 <= u <= beta (counter-term delta excluded)."""
    beta = bath.beta
    u = float(u)
    if not 0.0 <= u <= beta:
        raise OutOfDomain(f"imaginary time u={u:.6g} outside [0, beta={beta:.6g}]")
    c = abs(0.5 * beta - u)

    def f(w):
        g = bose_weight(w, beta)
        return bath.scale * bath.spectral.reduced(w) * g * (
            np.exp(-w * (0.5 * beta - c)) + np.exp(-w * (0.5 * beta + c))
        )

    top = upper_frequency(bath)
    total = QuadSum(tolerances, f"C(-i{u:.6g})").add_segments(f, 0.0, top, frequency_breaks(bath))
    total.add(f, top, np.inf)
    return total.result()


def _phi(x, beta: float):
    """(1 - e^{-beta x}) / x, equal to beta at x = 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(beta * x) < 1e-8
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out = -np.expm1(-beta * x) / x
    return np.where(small, beta * (1.0 - 0.5 * beta * x), out)


def imag_time_laplace(bath: BathSpec, energy: float, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """L(E) = int_0^beta C(-iu) e^{-uE} du, counter-term delta included.

    The u-integral is done in closed form inside the frequency integral. The
    counter-term enters as a periodic delta of weight kappa(0)/2 at u = 0 and u = beta.
    """
    beta = bath.beta
    e = float(energy)
    boltz = math.exp(-beta * e)

    def f(w):
        g = bose_weight(w, beta)
        return bath.scale * bath.spectral.reduced(w) * g * (_phi(w + e, beta) + boltz * _phi(w - e, beta))

    top = upper_frequency(bath) + abs(e)
    total = QuadSum(tolerances, "imaginary-time Laplace transform", energy=e)
    total.add_segments(f, 0.0, top, [*frequency_breaks(bath), abs(e)])
    total.add(f, top, np.inf)
    return total.result() - bath.counterterm_shift * (1.0 + boltz)


# --- Matsubara cross-checks (Lorentz-Drude only) ------------------------------

def _require_drude(bath: BathSpec) -> LorentzDrude:
    if not isinstance(bath.spectral, LorentzDrude):
        raise UnsupportedBathCombination("Matsubara expansion is implemented for Lorentz-Drude baths only")
    return bath.spectral


def matsubara_correlator(bath: BathSpec, t: float, terms: int = 2000) -> complex:
    """Closed-form Lorentz-Drude C(t), t > 0, as a sum of decaying exponentials."""
    ld = _require_drude(bath)
    t = float(t)
    if t <= 0:
        raise OutOfDomain("the Matsubara series converges for t > 0 only")
    wd, amp, beta = ld.omega_d, ld.gamma * ld.omega_d**2, bath.beta
    nu = 2.0 * math.pi * np.arange(1, terms + 1) / beta
    if np.any(np.isclose(nu, wd, rtol=1e-12)):
        raise OutOfDomain("cutoff coincides with a Matsubara frequency")
    head = 0.5 * math.pi * amp * (1.0 / math.tan(0.5 * beta * wd) - 1j) * math.exp(-wd * t)
    tail = 2.0 * math.pi * amp / beta * np.sum(nu * np.exp(-nu * t) / (nu**2 - wd**2))
    return complex(bath.scale * (head + tail))


def matsubara_imag_time(bath: BathSpec, u: float, terms: int = 200_000) -> float:
    """Lorentz-Drude C(-iu) from its Fourier series on [0, beta]."""
    ld = _require_drude(bath)
    beta = bath.beta
    if not 0.0 < u < beta:
        raise OutOfDomain("the Fourier series is evaluated strictly inside (0, beta)")
    wd, amp = ld.omega_d, ld.gamma * ld.omega_d**2
    nu = 2.0 * math.pi * np.arange(1, terms + 1) / beta
    terms_ = np.cos(nu * u) / (wd + nu)
    partial = np.cumsum(terms_)
    # average the last two partial sums of the oscillating series
    s = 0.5 * (partial[-1] + partial[-2])
    return float(bath.scale * math.pi * amp / beta * (1.0 / wd + 2.0 * s))
