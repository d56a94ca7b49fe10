from ccqme.oracle.coefficients import (
    CoefficientSeries,
    ExactCoefficients,
    coefficient_series,
    damping_coefficients,
    exact_coefficients,
)
from ccqme.oracle.generator import (
    ExactHarmonicGenerator,
    asymptotic_oracle,
    check_truncation,
    exact_generator_apply,
)
from ccqme.oracle.green import GreenFunction, green_function, memory_kernel_solution
from ccqme.oracle.kernels import AsymptoticKernels, InfluenceKernels, asymptotic_kernels, influence_kernels

__all__ = [
    "AsymptoticKernels",
    "CoefficientSeries",
    "ExactCoefficients",
    "ExactHarmonicGenerator",
    "GreenFunction",
    "InfluenceKernels",
    "asymptotic_kernels",
    "asymptotic_oracle",
    "check_truncation",
    "coefficient_series",
    "damping_coefficients",
    "exact_coefficients",
    "exact_generator_apply",
    "green_function",
    "influence_kernels",
    "memory_kernel_solution",
]
