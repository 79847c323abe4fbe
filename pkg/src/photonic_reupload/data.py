"""Circular-boundary classification task: generation, labelling, CSV I/O and scoring."""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import InputVector, Label, ModelParams, forward_batch
from .sampling import RandomSource, ShotConfig, sample_probability_estimate

CSV_HEADER = ["x1", "x2", "label"]


@dataclass(frozen=True)
class Boundary:
    center: tuple[float, float] = (0.2, 0.6)
    radius: float = 0.33

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not all(math.isfinite(c) for c in self.center):
            raise ValueError("boundary center must be finite")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"boundary radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class LabeledSample:
    x: InputVector
    y: Label


def label_point(b: Boundary, x) -> Label:
    """``yes`` strictly outside the circle, ``no`` inside or on it."""
    x1, x2 = x
    d2 = (x1 - b.center[0]) ** 2 + (x2 - b.center[1]) ** 2
    return Label.YES if d2 > b.radius**2 else Label.NO


def _label_array(b: Boundary, X: np.ndarray) -> np.ndarray:
    d2 = (X[:, 0] - b.center[0]) ** 2 + (X[:, 1] - b.center[1]) ** 2
    return (d2 > b.radius**2).astype(np.int8)


class Dataset(Sequence):
    """Array-backed sequence of :class:`LabeledSample`.

    ``X`` holds inputs with shape ``(n, 2)``; ``y`` holds targets (1 = yes, 0 = no).
    """

    def __init__(self, X, y):
        X = np.asarray(X, dtype=float).reshape(-1, 2)
        y = np.asarray(y, dtype=np.int8).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y lengths differ")
        if not np.all(np.isin(y, (0, 1))):
            raise ValueError("targets must be 0 or 1")
        self.X = X
        self.y = y
        self.X.setflags(write=False)
        self.y.setflags(write=False)

    @classmethod
    def from_samples(cls, samples) -> "Dataset":
        if isinstance(samples, Dataset):
            return samples
        samples = list(samples)
        X = np.array([[s.x.x1, s.x.x2] for s in samples], dtype=float).reshape(-1, 2)
        y = np.array([Label(s.y).target for s in samples], dtype=np.int8)
        return cls(X, y)

    def __len__(self):
        return self.X.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Dataset(self.X[i], self.y[i])
        x1, x2 = self.X[i]
        return LabeledSample(InputVector(float(x1), float(x2)), Label.YES if self.y[i] else Label.NO)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)

    def relabel(self, b: Boundary) -> "Dataset":
        return Dataset(self.X, _label_array(b, self.X))


def generate_dataset(n: int, b: Boundary, rng: RandomSource) -> Dataset:
    if n < 1:
        raise ValueError(f"dataset size must be >= 1, got {n}")
    X = rng.uniform(0.0, 1.0, size=(int(n), 2))
    return Dataset(X, _label_array(b, X))


def save_dataset(data: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for (x1, x2), t in zip(data.X.tolist(), data.y.tolist()):
            w.writerow([repr(x1), repr(x2), "yes" if t else "no"])


def load_dataset(path) -> Dataset:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != CSV_HEADER:
        raise ValueError(f"{path}: header must be {','.join(CSV_HEADER)}")
    X, y = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
        try:
            x1, x2 = float(row[0]), float(row[1])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: coordinates must be numbers") from None
        if not (0.0 <= x1 <= 1.0 and 0.0 <= x2 <= 1.0):
            raise ValueError(f"{path}:{lineno}: point ({x1}, {x2}) outside [0, 1]^2")
        label = row[2].strip()
        if label not in ("yes", "no"):
            raise ValueError(f"{path}:{lineno}: label must be yes or no, got {label!r}")
        X.append((x1, x2))
        y.append(1 if label == "yes" else 0)
    if not X:
        raise ValueError(f"{path}: no data rows")
    return Dataset(X, y)


def predict(params: ModelParams, X: np.ndarray, eval_cfg: ShotConfig, rng: RandomSource | None) -> np.ndarray:
    p = forward_batch(params, X)
    if not eval_cfg.is_exact:
        if rng is None:
            raise ValueError("a RandomSource is required for sampled evaluation")
        p = sample_probability_estimate(p, eval_cfg, rng)
    return p


def accuracy(params: ModelParams, test, eval_cfg: ShotConfig | None = None, rng: RandomSource | None = None) -> float:
    """Fraction of ``test`` whose predicted label matches the stored one."""
    test = Dataset.from_samples(test)
    if len(test) == 0:
        raise ValueError("test set is empty")
    p = predict(params, test.X, eval_cfg or ShotConfig.exact(), rng)
    yes = p > params.threshold  # vectorised form of classify()
    return float(np.mean(yes == (test.y == 1)))
