"""Photon-limited probability estimates.

A measurement setting with ideal detection probability ``p`` and mean photon
number ``M`` yields ``k ~ Poisson(p M)`` clicks; the estimate is ``k / M``.
Estimates are never clamped, so ``p_tilde > 1`` is possible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


class ShotMode(str, enum.Enum):
    POISSON = "poisson"
    EXACT = "exact"


@dataclass(frozen=True)
class ShotConfig:
    mean_samples: float = 1.0
    mode: ShotMode = ShotMode.POISSON

    def __post_init__(self):
        object.__setattr__(self, "mode", ShotMode(self.mode))
        if self.mode is ShotMode.POISSON and not (
            math.isfinite(self.mean_samples) and self.mean_samples > 0
        ):
            raise ValueError(f"mean_samples must be a positive finite number, got {self.mean_samples}")

    @classmethod
    def exact(cls) -> "ShotConfig":
        return cls(mean_samples=math.inf, mode=ShotMode.EXACT)

    @classmethod
    def poisson(cls, mean_samples: float) -> "ShotConfig":
        return cls(mean_samples=float(mean_samples), mode=ShotMode.POISSON)

    @property
    def is_exact(self) -> bool:
        return self.mode is ShotMode.EXACT

    def label(self) -> str:
        return "exact" if self.is_exact else repr(float(self.mean_samples))


class RandomSource:
    """Seeded Philox stream (counter based, platform independent).

    A source is owned by one consumer at a time. Independent lanes are
    obtained with :meth:`derive`.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = seed & _MASK64
        self.generator = np.random.Generator(np.random.Philox(key=self.seed))

    def derive(self, index: int) -> "RandomSource":
        """Substream ``seed XOR (index + 1) * 0x9E3779B97F4A7C15`` (mod 2**64)."""
        return RandomSource(self.seed ^ (((int(index) + 1) * _GOLDEN64) & _MASK64))

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def __repr__(self):
        return f"RandomSource(seed={self.seed:#x})"


def poisson_draw(lam, rng: RandomSource):
    """Poisson variate(s) with mean ``lam`` (scalar or array)."""
    lam_arr = np.asarray(lam, dtype=float)
    if not np.all(np.isfinite(lam_arr)) or np.any(lam_arr < 0):
        raise ValueError("Poisson mean must be finite and non-negative")
    draws = rng.generator.poisson(lam_arr)
    if lam_arr.ndim == 0:
        return int(draws)
    return draws


def sample_probability_estimate(p, cfg: ShotConfig, rng: RandomSource):
    """Shot-noise estimate ``k / M`` of ``p`` (scalar or array); identity in exact mode."""
    p_arr = np.asarray(p, dtype=float)
    # 1e-12 slack absorbs rounding in probabilities computed from amplitudes
    if not np.all(np.isfinite(p_arr)) or np.any(p_arr < -1e-12) or np.any(p_arr > 1 + 1e-12):
        raise ValueError("probability must lie in [0, 1]")
    if cfg.is_exact:
        return float(p_arr) if p_arr.ndim == 0 else p_arr.copy()
    lam = np.clip(p_arr, 0.0, 1.0) * cfg.mean_samples
    est = poisson_draw(lam, rng) / cfg.mean_samples
    return float(est) if p_arr.ndim == 0 else est
