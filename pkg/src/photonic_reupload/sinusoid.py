"""Three-point reconstruction of ``p(phi) = a0 + a1 cos(phi) + a2 sin(phi)``.

Measurements are taken at ``phi = 0, +2pi/3, -2pi/3``. Coefficients may be
scalars or numpy arrays (one entry per data point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PHASES = (0.0, 2.0 * math.pi / 3.0, -2.0 * math.pi / 3.0)
_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class SinusoidCoeffs:
    a0: float | np.ndarray
    a1: float | np.ndarray
    a2: float | np.ndarray

    def as_tuple(self):
        return (self.a0, self.a1, self.a2)


def fit_three_phase(p_zero, p_plus, p_minus) -> SinusoidCoeffs:
    """Exact interpolant through ``(0, p_zero), (2pi/3, p_plus), (-2pi/3, p_minus)``."""
    p0, pp, pm = (np.asarray(v, dtype=float) for v in (p_zero, p_plus, p_minus))
    if not (np.all(np.isfinite(p0)) and np.all(np.isfinite(pp)) and np.all(np.isfinite(pm))):
        raise ValueError("sinusoid samples must be finite")
    a0 = (p0 + pp + pm) / 3.0
    a1 = (2.0 * p0 - pp - pm) / 3.0
    a2 = (pp - pm) / _SQRT3
    if a0.ndim == 0:
        return SinusoidCoeffs(float(a0), float(a1), float(a2))
    return SinusoidCoeffs(a0, a1, a2)


def eval_sinusoid(coeffs: SinusoidCoeffs, phi):
    return coeffs.a0 + coeffs.a1 * np.cos(phi) + coeffs.a2 * np.sin(phi)
