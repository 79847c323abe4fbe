"""Layer-wise sequential minimal optimisation (SMO) under shot noise.

Each layer update re-measures every training point at three override phases
of one shifter, rebuilds the per-point sinusoid, and minimises the resulting
closed-form surrogate of the mean-squared-error cost over that layer's
parameters. Other layers keep their data-dependent phases.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset
from .model import Encoding, ModelParams, forward_batch, shifter_index
from .sampling import RandomSource, ShotConfig, sample_probability_estimate
from .sinusoid import PHASES, SinusoidCoeffs, eval_sinusoid, fit_three_phase

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Init(str, enum.Enum):
    ZERO = "zero"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class TrainConfig:
    max_sweeps: int = 10
    cost_tolerance: float = 1e-4
    grid_size: int = 61
    refine_iters: int = 30
    init: Init = Init.UNIFORM
    seed: int = 0
    debias: bool = True

    def __post_init__(self):
        object.__setattr__(self, "init", Init(self.init))
        if self.max_sweeps < 0:
            raise ValueError("max_sweeps must be >= 0")
        if self.grid_size < 1 or self.grid_size % 2 == 0:
            raise ValueError(f"grid_size must be an odd positive integer, got {self.grid_size}")
        if self.refine_iters < 0:
            raise ValueError("refine_iters must be >= 0")
        if not math.isfinite(self.cost_tolerance):
            raise ValueError("cost_tolerance must be finite")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class TrainReport:
    cost_history: list[float] = field(default_factory=list)
    theta_history: list[list[float]] = field(default_factory=list)
    photon_budget: float = 0.0
    converged: bool = False
    initial_cost: float | None = None
    sweep_costs: list[float] = field(default_factory=list)
    layer_updates: int = 0

    @property
    def final_cost(self) -> float | None:
        return self.sweep_costs[-1] if self.sweep_costs else self.initial_cost

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def init_params(layers: int, encoding: Encoding, cfg: TrainConfig, threshold: float = 0.5) -> ModelParams:
    if cfg.init is Init.ZERO:
        return ModelParams.zeros(layers, encoding, threshold=threshold)
    rng = RandomSource(cfg.seed).derive(0)
    theta = rng.uniform(-math.pi, math.pi, size=2 * layers)
    return ModelParams(theta=tuple(theta), layers=layers, encoding=encoding, threshold=threshold)


def _as_dataset(data) -> Dataset:
    data = Dataset.from_samples(data)
    if len(data) == 0:
        raise ValueError("training data is empty")
    return data


def estimate_cost(params: ModelParams, data, cfg: ShotConfig, rng: RandomSource | None = None) -> float:
    """Mean squared error between (shot-sampled) mode-0 probabilities and 0/1 targets."""
    data = _as_dataset(data)
    p = forward_batch(params, data.X)
    p_tilde = sample_probability_estimate(p, cfg, rng) if not cfg.is_exact else p
    return float(np.mean((p_tilde - data.y) ** 2))


def estimate_cost_variance(params: ModelParams, data, cfg: ShotConfig, repeats: int, rng: RandomSource) -> float:
    """Unbiased sample variance of :func:`estimate_cost` over ``repeats`` substreams."""
    if repeats < 2:
        raise ValueError("repeats must be >= 2")
    data = _as_dataset(data)
    if cfg.is_exact:
        return 0.0
    p = forward_batch(params, data.X)
    costs = np.empty(repeats)
    for r in range(repeats):
        p_tilde = sample_probability_estimate(p, cfg, rng.derive(r))
        costs[r] = np.mean((p_tilde - data.y) ** 2)
    return float(np.var(costs, ddof=1))


@dataclass(frozen=True)
class LayerMeasurement:
    """Three-setting measurement of one shifter for every training point.

    ``samples`` are the estimates at ``PHASES``; ``mean_samples`` is ``None``
    for exact probabilities.
    """

    coeffs: SinusoidCoeffs
    samples: tuple[np.ndarray, np.ndarray, np.ndarray]
    mean_samples: float | None = None

    def noise_terms(self) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
        """Unbiased estimate of ``Var[fit(phi)]`` per point as ``d0 + Re(d1 e^{i phi} + d2 e^{2i phi})``.

        The fit at ``phi`` is ``sum_j w_j(phi) p_j`` with
        ``w_j = (1 + 2 cos(phi - phi_j)) / 3`` and ``Var[p_j] = p_j / M``,
        which ``p_tilde_j / M`` estimates without bias.
        """
        if self.mean_samples is None:
            return None
        scale = 1.0 / (9.0 * self.mean_samples)
        d0 = sum(3.0 * scale * p for p in self.samples)
        d1 = sum(4.0 * scale * p * np.exp(-1j * ph) for p, ph in zip(self.samples, PHASES))
        d2 = sum(2.0 * scale * p * np.exp(-2j * ph) for p, ph in zip(self.samples, PHASES))
        return d0, d1, d2


def measure_sinusoids(params: ModelParams, slot: int, data: Dataset, cfg: ShotConfig, rng: RandomSource | None) -> LayerMeasurement:
    """Per-point sinusoid of shifter ``slot`` from three (noisy) measurements."""
    samples = []
    for phi in PHASES:
        p = forward_batch(params, data.X, override=(slot, phi))
        samples.append(p if cfg.is_exact else sample_probability_estimate(p, cfg, rng))
    return LayerMeasurement(
        fit_three_phase(*samples),
        tuple(samples),
        None if cfg.is_exact else float(cfg.mean_samples),
    )


def _noise_at(noise, phi: np.ndarray) -> np.ndarray:
    d0, d1, d2 = noise
    z = np.exp(1j * phi)
    return d0 + np.real(d1 * z + d2 * z * z)


class LinearSurrogate:
    """Surrogate cost of a linear-encoding layer as a function of its two weights.

    With ``debias`` the estimated shot-noise variance of each fitted
    probability is subtracted, making the surrogate an unbiased estimate of
    the noise-free cost. It has no effect on exact measurements.
    """

    def __init__(self, measurement: LayerMeasurement, data: Dataset, debias: bool = True):
        self.coeffs = measurement.coeffs
        self.noise = measurement.noise_terms() if debias else None
        self.x1 = data.X[:, 0]
        self.x2 = data.X[:, 1]
        self.y = data.y.astype(float)

    def __call__(self, ta: float, tb: float) -> float:
        phi = ta * self.x1 + tb * self.x2
        r = eval_sinusoid(self.coeffs, phi) - self.y
        if self.noise is None:
            return float(np.mean(r * r))
        return float(np.mean(r * r - _noise_at(self.noise, phi)))

    def grid(self, axis: np.ndarray) -> np.ndarray:
        """Cost on ``axis x axis`` (rows: first weight, columns: second weight).

        Writing ``a1 cos + a2 sin = Re(w e^{i phi})`` with ``w = a1 - i a2`` and
        expanding the square leaves two separable sums, each a matrix product.
        """
        a0, a1, a2 = self.coeffs.as_tuple()
        n = self.y.size
        c = a0 - self.y
        w = a1 - 1j * a2
        const = np.mean(c * c + 0.5 * np.abs(w) ** 2)
        u1 = 2.0 * c * w
        u2 = 0.5 * w * w
        if self.noise is not None:
            d0, d1, d2 = self.noise
            const -= np.mean(d0)
            u1 = u1 - d1
            u2 = u2 - d2
        ea = np.exp(1j * np.outer(axis, self.x1))
        eb = np.exp(1j * np.outer(axis, self.x2))
        first = (ea * (u1 / n)) @ eb.T
        second = (ea * ea * (u2 / n)) @ (eb * eb).T
        return const + np.real(first + second)


def golden_section(f, lo: float, hi: float, iters: int) -> tuple[float, float]:
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def minimize_linear(surrogate: LinearSurrogate, incoming: tuple[float, float], cfg: TrainConfig) -> tuple[tuple[float, float], float]:
    axis = np.linspace(-math.pi, math.pi, cfg.grid_size)
    values = surrogate.grid(axis)
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    best = [float(axis[i]), float(axis[j])]
    best_cost = surrogate(*best)
    if cfg.refine_iters and cfg.grid_size > 1:
        step = axis[1] - axis[0]
        for ax in (0, 1):
            lo = max(-math.pi, best[ax] - step)
            hi = min(math.pi, best[ax] + step)

            def along(t, ax=ax):
                trial = list(best)
                trial[ax] = t
                return surrogate(*trial)

            t, ft = golden_section(along, lo, hi, cfg.refine_iters)
            if ft < best_cost:
                best[ax], best_cost = t, ft
    incoming_cost = surrogate(*incoming)
    if incoming_cost <= best_cost:
        return tuple(incoming), incoming_cost
    return (best[0], best[1]), best_cost


class OffsetSurrogate:
    """Surrogate cost of one affine-encoding shifter, phase ``x_col + t``.

    The cost is the trigonometric polynomial ``K0 + Re(a z + b z^2)`` with
    ``z = e^{it}``, so its stationary points are roots of a quartic.
    """

    def __init__(self, measurement: LayerMeasurement, data: Dataset, column: int, debias: bool = True):
        a0, a1, a2 = measurement.coeffs.as_tuple()
        xc = data.X[:, column]
        rot = np.exp(1j * xc)
        c = a0 - data.y.astype(float)
        q = (a1 - 1j * a2) * rot
        self.k0 = np.mean(c * c + 0.5 * np.abs(q) ** 2)
        self.a = np.mean(2.0 * c * q)
        self.b = np.mean(0.5 * q * q)
        noise = measurement.noise_terms() if debias else None
        if noise is not None:
            d0, d1, d2 = noise
            self.k0 -= np.mean(d0)
            self.a -= np.mean(d1 * rot)
            self.b -= np.mean(d2 * rot * rot)

    def __call__(self, t: float) -> float:
        z = complex(math.cos(t), math.sin(t))
        return float(self.k0 + (self.a * z + self.b * z * z).real)

    def stationary_points(self) -> np.ndarray:
        a, b = self.a, self.b
        # dC/dt = 0  <=>  2b z^4 + a z^3 - conj(a) z - 2 conj(b) = 0 on |z| = 1
        poly = np.array([2 * b, a, 0.0, -np.conj(a), -2 * np.conj(b)])
        if np.all(np.abs(poly) < 1e-15):
            return np.empty(0)
        return np.angle(np.roots(poly))


def minimize_offset(surrogate: OffsetSurrogate, incoming: float) -> tuple[float, float]:
    best, best_cost = float(incoming), surrogate(incoming)
    for t in surrogate.stationary_points():
        ct = surrogate(float(t))
        if ct < best_cost:
            best, best_cost = float(t), ct
    return best, best_cost


def smo_layer_update(
    params: ModelParams,
    k: int,
    data,
    shot_cfg: ShotConfig,
    train_cfg: TrainConfig,
    rng: RandomSource | None = None,
) -> tuple[ModelParams, float]:
    """Re-optimise layer ``k`` (1-based); returns the new params and the surrogate cost there."""
    data = _as_dataset(data)
    theta = list(params.theta)
    ia, ib = 2 * k - 2, 2 * k - 1
    if params.encoding is Encoding.LINEAR:
        meas = measure_sinusoids(params, shifter_index(params, k), data, shot_cfg, rng)
        surrogate = LinearSurrogate(meas, data, debias=train_cfg.debias)
        (ta, tb), cost = minimize_linear(surrogate, (theta[ia], theta[ib]), train_cfg)
        theta[ia], theta[ib] = ta, tb
        return params.with_theta(theta), cost
    cost = math.nan
    for shifter, idx in ((0, ia), (1, ib)):
        current = params.with_theta(theta)
        meas = measure_sinusoids(current, shifter_index(current, k, shifter), data, shot_cfg, rng)
        surrogate = OffsetSurrogate(meas, data, column=shifter, debias=train_cfg.debias)
        theta[idx], cost = minimize_offset(surrogate, theta[idx])
    return params.with_theta(theta), cost


def photon_budget(photons_per_setting: float, layer_updates: int, encoding: Encoding) -> float:
    """Expected photons spent: three settings per reconstructed sinusoid."""
    return 3.0 * photons_per_setting * (layer_updates * encoding.shifters_per_layer)


def train(params0: ModelParams, data, shot_cfg: ShotConfig, train_cfg: TrainConfig) -> tuple[ModelParams, TrainReport]:
    """Sweep layers ``1..L`` until the sweep cost stalls twice in a row or ``max_sweeps`` is hit."""
    data = _as_dataset(data)
    report = TrainReport()
    if train_cfg.max_sweeps == 0:
        return params0, report
    rng = RandomSource(train_cfg.seed)
    photons_per_setting = 0.0 if shot_cfg.is_exact else len(data) * shot_cfg.mean_samples
    params = params0
    prev = estimate_cost(params, data, shot_cfg, rng)
    report.initial_cost = prev
    stalled = 0
    for _ in range(train_cfg.max_sweeps):
        for k in range(1, params.layers + 1):
            params, cost = smo_layer_update(params, k, data, shot_cfg, train_cfg, rng)
            report.cost_history.append(cost)
            report.theta_history.append(list(params.theta))
            report.layer_updates += 1
            report.photon_budget = photon_budget(photons_per_setting, report.layer_updates, params.encoding)
        current = estimate_cost(params, data, shot_cfg, rng)
        report.sweep_costs.append(current)
        stalled = stalled + 1 if prev - current < train_cfg.cost_tolerance else 0
        prev = current
        if stalled >= 2:
            report.converged = True
            break
    return params, report
