"""Linear optics for a single photon shared between two spatial modes.

Mode 0 (upper waveguide) carries the logical |0>, mode 1 (lower) carries |1>.
All matrices are plain ``numpy`` 2x2 complex arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_BS = _INV_SQRT2 * np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=complex)
_BS.setflags(write=False)


@dataclass(frozen=True)
class TwoModeState:
    amp0: complex
    amp1: complex

    @classmethod
    def zero(cls) -> "TwoModeState":
        return cls(1.0 + 0.0j, 0.0j)

    @classmethod
    def one(cls) -> "TwoModeState":
        return cls(0.0j, 1.0 + 0.0j)

    @classmethod
    def from_vector(cls, v) -> "TwoModeState":
        return cls(complex(v[0]), complex(v[1]))

    def as_vector(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.amp0) ** 2 + abs(self.amp1) ** 2)


def beam_splitter_matrix() -> np.ndarray:
    """Symmetric 50:50 coupler ``(1/sqrt2) [[1, i], [i, 1]]``."""
    return _BS.copy()


def phase_shifter_matrix(phi: float) -> np.ndarray:
    """``diag(1, exp(i phi))``: the phase sits on mode 1."""
    phi = float(phi)
    if not math.isfinite(phi):
        raise ValueError(f"phase must be finite, got {phi!r}")
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * phi)]], dtype=complex)


def apply(u: np.ndarray, state: TwoModeState) -> TwoModeState:
    return TwoModeState.from_vector(np.asarray(u) @ state.as_vector())


def detection_probability(state: TwoModeState, mode: int) -> float:
    if mode == 0:
        return abs(state.amp0) ** 2
    if mode == 1:
        return abs(state.amp1) ** 2
    raise ValueError(f"mode must be 0 or 1, got {mode!r}")


def evolve_batch(phases: np.ndarray) -> np.ndarray:
    """Propagate |0> through ``BS, PS(phases[:, 0]), BS, PS(phases[:, 1]), ..., BS``.

    ``phases`` has shape ``(n_points, n_shifters)``; every row is an
    independent circuit run. Returns the output amplitudes, shape
    ``(n_points, 2)``.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.ndim != 2:
        raise ValueError("phases must be a 2-D array (points x shifters)")
    amp0 = np.ones(phases.shape[0], dtype=complex)
    amp1 = np.zeros(phases.shape[0], dtype=complex)
    for s in range(phases.shape[1]):
        amp0, amp1 = _INV_SQRT2 * (amp0 + 1j * amp1), _INV_SQRT2 * (1j * amp0 + amp1)
        amp1 = amp1 * np.exp(1j * phases[:, s])
    amp0, amp1 = _INV_SQRT2 * (amp0 + 1j * amp1), _INV_SQRT2 * (1j * amp0 + amp1)
    return np.stack([amp0, amp1], axis=1)
