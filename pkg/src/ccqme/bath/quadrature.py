from typing import Callable, Iterable, List, Tuple

import numpy as np
from scipy.integrate import quad

from ccqme.errors import QuadratureFailure
from ccqme.settings import Tolerances

# accepted ratio between a reported error estimate and the requested tolerance
_SLACK = 100.0


class QuadSum:
    """Accumulates quad() pieces and checks the combined error estimate."""

    def __init__(self, tolerances: Tolerances, what: str, energy: float | None = None):
        self.tol = tolerances
        self.what = what
        self.energy = energy
        self.value = 0.0
        self.error = 0.0

    def add(self, f: Callable, a: float, b: float, **kwargs) -> "QuadSum":
        if a == b:
            return self
        limit = kwargs.pop("limit", self.tol.quad_limit)
        # full_output keeps quad from warning; the error estimate is judged in result()
        val, err = quad(
            f, a, b, epsabs=self.tol.quad_abs, epsrel=self.tol.quad_rel, limit=limit, full_output=1, **kwargs
        )[:2]
        if not np.isfinite(val):
            raise QuadratureFailure(f"{self.what}: non-finite integral on [{a}, {b}]", err, self.energy)
        self.value += val
        self.error += err
        return self

    def add_segments(self, f: Callable, lo: float, hi: float, breaks: Iterable[float]) -> "QuadSum":
        for a, b in segments(lo, hi, breaks):
            self.add(f, a, b)
        return self

    def result(self) -> float:
        allowed = _SLACK * max(self.tol.quad_abs, self.tol.quad_rel * abs(self.value))
        if not np.isfinite(self.error) or self.error > allowed:
            raise QuadratureFailure(self.what, self.error, self.energy)
        return self.value


def segments(lo: float, hi: float, breaks: Iterable[float]) -> List[Tuple[float, float]]:
    """Split [lo, hi] (either end may be infinite) at the breakpoints inside it."""
    inner = sorted({b for b in breaks if lo < b < hi})
    edges = [lo, *inner, hi]
    return list(zip(edges[:-1], edges[1:]))
