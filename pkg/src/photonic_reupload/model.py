"""Single-qubit data reuploading classifier built from the photonic primitives.

Circuit for ``L`` layers with the linear encoding::

    |0> -> BS -> PS(phi_1) -> BS -> PS(phi_2) -> ... -> BS -> PS(phi_L) -> BS -> detect mode 0

with ``phi_k = theta[2k-2] * x1 + theta[2k-1] * x2``. The affine-offset encoding
uses two shifters per layer, ``x1 + theta[2k-2]`` and ``x2 + theta[2k-1]``,
each preceded by a beam splitter.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .photonic import (
    TwoModeState,
    apply,
    beam_splitter_matrix,
    detection_probability,
    evolve_batch,
    phase_shifter_matrix,
)


class Encoding(str, enum.Enum):
    LINEAR = "linear"
    AFFINE = "affine"

    @property
    def shifters_per_layer(self) -> int:
        return 1 if self is Encoding.LINEAR else 2


class Label(str, enum.Enum):
    YES = "yes"
    NO = "no"

    @property
    def target(self) -> int:
        """Numeric regression target used by the cost: yes -> 1, no -> 0."""
        return 1 if self is Label.YES else 0


@dataclass(frozen=True)
class InputVector:
    x1: float
    x2: float

    def __iter__(self):
        yield self.x1
        yield self.x2


@dataclass(frozen=True)
class ModelParams:
    theta: tuple[float, ...]
    layers: int = 3
    encoding: Encoding = Encoding.LINEAR
    threshold: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        object.__setattr__(self, "encoding", Encoding(self.encoding))
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if len(self.theta) != 2 * self.layers:
            raise ValueError(
                f"theta must have 2*layers = {2 * self.layers} entries, got {len(self.theta)}"
            )
        if not all(math.isfinite(t) for t in self.theta):
            raise ValueError("theta entries must be finite")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie strictly inside (0, 1), got {self.threshold}")

    @classmethod
    def zeros(cls, layers: int = 3, encoding: Encoding = Encoding.LINEAR, **kw) -> "ModelParams":
        return cls(theta=(0.0,) * (2 * layers), layers=layers, encoding=encoding, **kw)

    @property
    def n_shifters(self) -> int:
        return self.layers * Encoding(self.encoding).shifters_per_layer

    def with_theta(self, theta: Sequence[float]) -> "ModelParams":
        return replace(self, theta=tuple(theta))

    def to_dict(self) -> dict:
        return {
            "layers": self.layers,
            "encoding": self.encoding.value,
            "threshold": self.threshold,
            "theta": list(self.theta),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        try:
            return cls(
                theta=tuple(d["theta"]),
                layers=int(d["layers"]),
                encoding=Encoding(d["encoding"]),
                threshold=float(d.get("threshold", 0.5)),
            )
        except KeyError as exc:
            raise ValueError(f"model document is missing field {exc.args[0]!r}") from None


def save_model(params: ModelParams, path) -> None:
    # json writes floats with repr(), which round-trips every double exactly
    Path(path).write_text(json.dumps(params.to_dict(), indent=2) + "\n")


def load_model(path) -> ModelParams:
    return ModelParams.from_dict(json.loads(Path(path).read_text()))


def _check_layer(params: ModelParams, k: int) -> None:
    if not 1 <= k <= params.layers:
        raise ValueError(f"layer index must be in 1..{params.layers}, got {k}")


def layer_phase(params: ModelParams, k: int, x) -> float | tuple[float, float]:
    """Data-dependent phase(s) of layer ``k`` (1-based).

    Linear encoding returns a single phase; the affine encoding returns the
    pair ``(x1 + theta_a, x2 + theta_b)`` for the layer's two shifters.
    """
    _check_layer(params, k)
    x1, x2 = x
    ta, tb = params.theta[2 * k - 2], params.theta[2 * k - 1]
    if params.encoding is Encoding.LINEAR:
        return ta * x1 + tb * x2
    return (x1 + ta, x2 + tb)


def shifter_index(params: ModelParams, k: int, shifter: int = 0) -> int:
    _check_layer(params, k)
    per = params.encoding.shifters_per_layer
    if not 0 <= shifter < per:
        raise ValueError(f"shifter must be in 0..{per - 1} for {params.encoding.value} encoding")
    return (k - 1) * per + shifter


def circuit_phases(params: ModelParams, X: np.ndarray) -> np.ndarray:
    """Phase of every shifter for every input row; shape ``(n_points, n_shifters)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    theta = np.asarray(params.theta).reshape(params.layers, 2)
    if params.encoding is Encoding.LINEAR:
        # elementwise, so each phase rounds exactly like layer_phase()
        return X[:, :1] * theta[:, 0] + X[:, 1:] * theta[:, 1]
    # affine: shifters alternate (x1 + ta, x2 + tb) layer by layer
    return (X[:, None, :] + theta[None, :, :]).reshape(X.shape[0], -1)


def forward_batch(params: ModelParams, X: np.ndarray, override: tuple[int, float] | None = None) -> np.ndarray:
    """Mode-0 detection probability for every row of ``X``.

    ``override=(slot, phi)`` pins shifter ``slot`` (0-based, see
    :func:`shifter_index`) to ``phi`` for all rows.
    """
    phases = circuit_phases(params, X)
    if override is not None:
        slot, phi = override
        phases[:, slot] = phi
    amps = evolve_batch(phases)
    return np.abs(amps[:, 0]) ** 2


def _run_circuit(phases: Sequence[float]) -> float:
    bs = beam_splitter_matrix()
    state = TwoModeState.zero()
    for phi in phases:
        state = apply(phase_shifter_matrix(phi), apply(bs, state))
    state = apply(bs, state)
    return detection_probability(state, 0)


def forward(params: ModelParams, x) -> float:
    return _run_circuit(circuit_phases(params, [tuple(x)])[0])


def forward_with_override(params: ModelParams, k: int, phi_override: float, x, shifter: int = 0) -> float:
    """Same as :func:`forward` with one shifter of layer ``k`` forced to ``phi_override``."""
    slot = shifter_index(params, k, shifter)
    phases = circuit_phases(params, [tuple(x)])[0]
    phases[slot] = phi_override
    return _run_circuit(phases)


def classify(params: ModelParams, p_estimate: float) -> Label:
    # ties go to "no"
    return Label.YES if p_estimate > params.threshold else Label.NO
