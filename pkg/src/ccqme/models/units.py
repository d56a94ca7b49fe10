"""Temperature conversion with hbar = k_B = 1."""
from scipy.constants import Boltzmann, hbar

from ccqme.errors import NegativeTemperature, OutOfDomain

# seconds per time unit
TIME_UNITS = {"s": 1.0, "ps": 1e-12, "fs": 1e-15}

# k_B / hbar in 1/(s K)
_KB_OVER_HBAR = Boltzmann / hbar


def _unit(time_unit: str) -> float:
    try:
        return TIME_UNITS[time_unit]
    except KeyError:
        raise OutOfDomain(f"unknown time unit {time_unit!r}; expected one of {sorted(TIME_UNITS)}") from None


def kelvin_to_energy(t_kelvin: float, time_unit: str = "ps") -> float:
    """Temperature in kelvin to an energy in inverse ``time_unit``."""
    if t_kelvin < 0:
        raise NegativeTemperature(f"temperature must be non-negative, got {t_kelvin} K")
    return t_kelvin * _KB_OVER_HBAR * _unit(time_unit)


def energy_to_kelvin(energy: float, time_unit: str = "ps") -> float:
    if energy < 0:
        raise NegativeTemperature(f"temperature must be non-negative, got {energy}")
    return energy / (_KB_OVER_HBAR * _unit(time_unit))
