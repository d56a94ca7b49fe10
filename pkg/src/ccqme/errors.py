"""Exception hierarchy and warning categories shared by every ccqme module."""


class CcqmeError(Exception):
    """Root of all ccqme errors."""


class ConfigError(CcqmeError):
    """Experiment configuration failed to parse or validate."""


class NumericalError(CcqmeError):
    """A numerical routine could not produce a trustworthy result."""


class NonHermitianInput(NumericalError):
    pass


class NonUnitTrace(NumericalError):
    """A density matrix whose trace is not 1 within tolerance."""


class DimensionMismatch(NumericalError):
    pass


class NonUniqueSteadyState(NumericalError):
    def __init__(self, dimension: int, message: str | None = None):
        self.dimension = dimension
        super().__init__(message or f"steady state is not unique: null space has dimension {dimension}")


class NoConvergence(NumericalError):
    pass


class NegativeFrequency(NumericalError):
    pass


class NegativeTemperature(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    def __init__(self, message: str, error_estimate: float = float("nan"), energy: float | None = None):
        self.error_estimate = error_estimate
        self.energy = energy
        if energy is not None:
            message = f"{message} (at E={energy:.6g})"
        super().__init__(f"{message}; error estimate {error_estimate:.3g}")


class OutOfDomain(NumericalError):
    pass


class CoefficientSingularity(NumericalError):
    def __init__(self, time: float):
        self.time = time
        super().__init__(f"exact-coefficient denominator vanishes at t={time:.6g}")


class UnsupportedBathCombination(NumericalError):
    pass


class RepeatedRoots(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass


class TraceDrift(NumericalError):
    def __init__(self, time: float, drift: float):
        self.time = time
        self.drift = drift
        super().__init__(f"trace drifted by {drift:.3g} at t={time:.6g}")


class StepTooLarge(NumericalError):
    pass


class GridMismatch(NumericalError):
    pass


class NoOverlap(NumericalError):
    pass


class ChainTooLong(NumericalError):
    pass


# --- warnings ----------------------------------------------------------------

class CcqmeWarning(UserWarning):
    pass


class DegenerateSpectrum(CcqmeWarning):
    pass


class DegeneratePairSkipped(CcqmeWarning):
    pass


class DecoupledLevel(CcqmeWarning):
    pass


class TruncationWarning(CcqmeWarning):
    pass


class SecularityWarning(CcqmeWarning):
    pass


class RepeatedRootsWarning(CcqmeWarning):
    pass
