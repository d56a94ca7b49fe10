from ccqme.bath.correlation import (
    correlator,
    correlator_grid,
    imag_time_correlator,
    imag_time_laplace,
    matsubara_correlator,
    matsubara_imag_time,
)
from ccqme.bath.rates import (
    RateTable,
    RateTableConfig,
    TimeDependentRates,
    build_rate_table,
    deriv_V,
    half_fourier_W,
)
from ccqme.bath.spectral import BathSpec, LorentzDrude, OhmicExp, SpectralDensity, eval_J

__all__ = [
    "BathSpec",
    "LorentzDrude",
    "OhmicExp",
    "RateTable",
    "RateTableConfig",
    "SpectralDensity",
    "TimeDependentRates",
    "build_rate_table",
    "correlator",
    "correlator_grid",
    "deriv_V",
    "eval_J",
    "half_fourier_W",
    "imag_time_correlator",
    "imag_time_laplace",
    "matsubara_correlator",
    "matsubara_imag_time",
]
