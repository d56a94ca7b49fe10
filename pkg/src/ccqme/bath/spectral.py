"""Ohmic spectral densities J(omega) and the thermal spectrum built from them."""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ccqme.errors import NegativeFrequency, NegativeTemperature, OutOfDomain

NORMALIZATIONS = {
    "coupling-sum": 1.0,
    "caldeira-leggett": 1.0 / math.pi,
}


class SpectralDensity(ABC):
    """J(omega) for omega >= 0, with J(0) = 0.

    Subclasses provide the reduced density j(x) = J(x)/x (even in x) and its
    derivative, which is all the thermal spectrum needs.
    """

    @property
    @abstractmethod
    def cutoff(self) -> float: ...

    @abstractmethod
    def reduced(self, omega: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def reduced_derivative(self, omega: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def static_integral(self) -> float:
        """Closed form of the integral of J(omega)/omega over [0, inf)."""

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        if np.any(w < 0):
            raise NegativeFrequency(f"J(omega) is defined for omega >= 0, got {np.min(w):.6g}")
        out = w * self.reduced(w)
        return float(out) if out.ndim == 0 else out

    def _check_positive(self, **params: float) -> None:
        for name, value in params.items():
            if not value > 0:
                raise OutOfDomain(f"{type(self).__name__}.{name} must be positive, got {value}")


@dataclass(frozen=True)
class LorentzDrude(SpectralDensity):
    """J(w) = gamma w / (1 + w^2/omega_d^2)."""

    gamma: float
    omega_d: float

    def __post_init__(self):
        self._check_positive(gamma=self.gamma, omega_d=self.omega_d)

    @property
    def cutoff(self) -> float:
        return self.omega_d

    def reduced(self, omega):
        w = np.asarray(omega, dtype=float)
        return self.gamma / (1.0 + (w / self.omega_d) ** 2)

    def reduced_derivative(self, omega):
        w = np.asarray(omega, dtype=float)
        r = 1.0 + (w / self.omega_d) ** 2
        return -2.0 * self.gamma * w / (self.omega_d**2 * r * r)

    def static_integral(self) -> float:
        return 0.5 * math.pi * self.gamma * self.omega_d


@dataclass(frozen=True)
class OhmicExp(SpectralDensity):
    """J(w) = lam (w/omega_c) exp(-w^2/omega_c^2), formula as printed for the spin-boson bath."""

    lam: float
    omega_c: float

    def __post_init__(self):
        self._check_positive(lam=self.lam, omega_c=self.omega_c)

    @property
    def cutoff(self) -> float:
        return self.omega_c

    def reduced(self, omega):
        w = np.asarray(omega, dtype=float)
        return (self.lam / self.omega_c) * np.exp(-((w / self.omega_c) ** 2))

    def reduced_derivative(self, omega):
        w = np.asarray(omega, dtype=float)
        return -2.0 * w * self.lam / self.omega_c**3 * np.exp(-((w / self.omega_c) ** 2))

    def static_integral(self) -> float:
        return 0.5 * math.sqrt(math.pi) * self.lam


def eval_J(spec: SpectralDensity, omega):
    return spec(omega)


@dataclass(frozen=True)
class BathSpec:
    spectral: SpectralDensity
    temperature: float
    counterterm: bool = False
    normalization: str = "coupling-sum"

    def __post_init__(self):
        if not self.temperature > 0:
            raise NegativeTemperature(f"temperature must be positive, got {self.temperature}")
        if self.normalization not in NORMALIZATIONS:
            raise OutOfDomain(
                f"unknown normalization {self.normalization!r}; expected one of {sorted(NORMALIZATIONS)}"
            )

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature

    @property
    def scale(self) -> float:
        return NORMALIZATIONS[self.normalization]

    @property
    def counterterm_shift(self) -> float:
        """kappa(0)/2: the constant the counter-term adds to W''."""
        if not self.counterterm:
            return 0.0
        return self.scale * self.spectral.static_integral()

    @property
    def frequency_scale(self) -> float:
        return max(self.spectral.cutoff, self.temperature)

    def spectrum(self, omega) -> np.ndarray:
        """Two-sided thermal spectrum S(w), with C(t) = int S(w) e^{-iwt} dw."""
        w = np.asarray(omega, dtype=float)
        return self.scale * self.spectral.reduced(np.abs(w)) * bose_weight(w, self.beta)

    def spectrum_derivative(self, omega) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        return self.scale * (
            self.spectral.reduced_derivative(w) * bose_weight(w, self.beta)
            + self.spectral.reduced(np.abs(w)) * bose_weight_derivative(w, self.beta)
        )

    def with_temperature(self, temperature: float) -> "BathSpec":
        return BathSpec(self.spectral, temperature, self.counterterm, self.normalization)


def bose_weight(omega, beta: float) -> np.ndarray:
    """w / (1 - e^{-beta w}), equal to 1/beta at w = 0."""
    w = np.asarray(omega, dtype=float)
    x = beta * w
    small = np.abs(x) < 1e-8
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out = w / -np.expm1(-x)
    return np.where(small, (1.0 + 0.5 * x) / beta, out)


def bose_weight_derivative(omega, beta: float) -> np.ndarray:
    """d/dw of w/(1 - e^{-beta w}); tends to 1/2 at w = 0."""
    w = np.asarray(omega, dtype=float)
    x = beta * w
    small = np.abs(x) < 1e-4
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        xp = np.where(x >= 0, x, 0.0)
        xn = np.where(x < 0, x, 0.0)
        ep = np.exp(-xp)
        pos = (1.0 - ep * (1.0 + xp)) / np.expm1(-xp) ** 2
        en = np.exp(xn)
        neg = (en * en - en * (1.0 + xn)) / np.expm1(xn) ** 2
    out = np.where(x >= 0, pos, neg)
    return np.where(small, 0.5 + x / 6.0, out)
