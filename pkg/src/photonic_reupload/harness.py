"""Monte-Carlo experiment sweeps over training size, photon budget and boundary position.

Every trial draws its randomness from a source derived from
``(seed, cell, trial_index)``, so results do not depend on worker count or
execution order.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError

from . import __version__
from .data import Boundary, Dataset, accuracy, generate_dataset
from .model import Encoding, ModelParams
from .sampling import RandomSource, ShotConfig
from .trainer import Init, TrainConfig, estimate_cost, estimate_cost_variance, init_params, train

TOOL = "photonic-reupload"
SWEEP_COLUMNS = ("n", "m", "trials", "mean_accuracy", "accuracy_variance", "mean_final_cost")

ShotMean = Union[PositiveFloat, Literal["exact"]]


class ConfigError(ValueError):
    pass


class BoundaryConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    center: tuple[float, float] = (0.2, 0.6)
    radius: PositiveFloat = 0.33

    def build(self) -> Boundary:
        return Boundary(center=self.center, radius=self.radius)


class TrainSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_sweeps: int = Field(10, ge=0)
    cost_tolerance: float = 1e-4
    grid_size: PositiveInt = 61
    refine_iters: int = Field(30, ge=0)
    init: Init = Init.UNIFORM
    debias: bool = True

    def build(self, seed: int) -> TrainConfig:
        return TrainConfig(seed=seed, **self.model_dump())


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    boundary: BoundaryConfig = BoundaryConfig()
    train_sizes: list[PositiveInt] = Field(default_factory=lambda: [20, 100, 200, 300, 1000], min_length=1)
    shot_means: list[ShotMean] = Field(default_factory=lambda: [2.0, 20.0, 200.0, 2000.0], min_length=1)
    trials: PositiveInt = 100
    test_size: PositiveInt = 1000
    layers: PositiveInt = 3
    encoding: Encoding = Encoding.LINEAR
    threshold: float = Field(0.5, gt=0.0, lt=1.0)
    train: TrainSettings = TrainSettings()
    eval_mode: Literal["exact", "poisson"] = "exact"
    eval_shots: PositiveFloat = 1000.0
    fresh_test_sets: bool = True
    heatmap_train_size: PositiveInt = 200
    variance_point: Literal["random", "trained"] = "random"
    seed: int = Field(0, ge=0, lt=2**64)
    workers: PositiveInt = 1
    output_path: str | None = None

    def eval_config(self) -> ShotConfig:
        return ShotConfig.exact() if self.eval_mode == "exact" else ShotConfig.poisson(self.eval_shots)

    def config_hash(self) -> str:
        # workers and output_path do not change results, so they stay out of the hash
        blob = json.dumps(self.model_dump(mode="json", exclude={"workers", "output_path"}), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def shot_config(m: ShotMean | None) -> ShotConfig:
    if m is None or m == "exact":
        return ShotConfig.exact()
    return ShotConfig.poisson(float(m))


def _format_error(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def parse_config(doc: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as err:
        raise ConfigError(f"invalid config: {_format_error(err)}") from None


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: malformed JSON ({err})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(doc)


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.model_dump(mode="json"), indent=2) + "\n")


# ---------------------------------------------------------------- seeding

def _m_label(m: ShotMean | None) -> str:
    return shot_config(m).label()


def cell_source(seed: int, *key) -> RandomSource:
    """Independent stream for one experiment cell, keyed by its coordinates."""
    digest = hashlib.blake2b(repr((int(seed),) + key).encode(), digest_size=8).digest()
    return RandomSource(int.from_bytes(digest, "little"))


# ---------------------------------------------------------------- trials

@dataclass(frozen=True)
class TrialResult:
    accuracy: float
    final_cost: float


def _test_set(cfg: ExperimentConfig, boundary: Boundary, trial_rng: RandomSource) -> Dataset:
    if cfg.fresh_test_sets:
        return generate_dataset(cfg.test_size, boundary, trial_rng.derive(1))
    return generate_dataset(cfg.test_size, boundary, cell_source(cfg.seed, "test", boundary.center, boundary.radius))


def _train_and_score(cfg: ExperimentConfig, boundary: Boundary, n: int, shots: ShotConfig, trial_rng: RandomSource) -> TrialResult:
    train_data = generate_dataset(n, boundary, trial_rng.derive(0))
    test_data = _test_set(cfg, boundary, trial_rng)
    tcfg = cfg.train.build(seed=trial_rng.derive(2).seed)
    params0 = init_params(cfg.layers, cfg.encoding, tcfg, threshold=cfg.threshold)
    params, _ = train(params0, train_data, shots, tcfg)
    acc = accuracy(params, test_data, cfg.eval_config(), trial_rng.derive(3))
    # noise-free training MSE of the returned model
    return TrialResult(acc, estimate_cost(params, train_data, ShotConfig.exact()))


def run_trial(cfg: ExperimentConfig, n: int, m: ShotMean | None, trial_index: int) -> TrialResult:
    trial_rng = cell_source(cfg.seed, "sweep", n, _m_label(m)).derive(trial_index)
    return _train_and_score(cfg, cfg.boundary.build(), n, shot_config(m), trial_rng)


def _run_trial_args(args):
    return run_trial(*args)


def _heatmap_trial(args):
    cfg, center, trial_index = args
    boundary = Boundary(center=center, radius=cfg.boundary.radius)
    trial_rng = cell_source(cfg.seed, "heatmap", center).derive(trial_index)
    return _train_and_score(cfg, boundary, cfg.heatmap_train_size, ShotConfig.exact(), trial_rng)


def _map(fn: Callable, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# ---------------------------------------------------------------- tables

@dataclass(frozen=True)
class CellResult:
    n: int
    m: str
    trials: int
    mean_accuracy: float
    accuracy_variance: float
    mean_final_cost: float

    @property
    def standard_error(self) -> float:
        """Standard error of ``mean_accuracy`` (sample-variance based)."""
        if self.trials < 2:
            return 0.0
        return math.sqrt(self.accuracy_variance / (self.trials - 1))


@dataclass(frozen=True)
class HeatmapCell:
    x1: float
    x2: float
    trials: int
    mean_accuracy: float
    accuracy_variance: float


@dataclass(frozen=True)
class VarianceCell:
    n: int
    m: str
    repeats: int
    variance: float
    variance_stderr: float


@dataclass(frozen=True)
class VarianceScan:
    cells: list[VarianceCell]
    slope: float
    intercept: float


def _aggregate(results: list[TrialResult]) -> tuple[float, float, float]:
    acc = np.array([r.accuracy for r in results])
    cost = np.array([r.final_cost for r in results])
    return float(acc.mean()), float(acc.var()), float(cost.mean())


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def metadata(cfg: ExperimentConfig, command: str, **extra) -> dict:
    meta = {
        "tool": f"{TOOL} {__version__}",
        "command": command,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "test_sets": "fresh-per-trial" if cfg.fresh_test_sets else "fixed",
        "eval_mode": cfg.eval_config().label(),
    }
    meta.update(extra)
    meta["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return meta


def emit_results(rows: Iterable, path, meta: dict | None = None, columns: Iterable[str] | None = None) -> None:
    """Write dataclass rows as CSV preceded by ``# key: value`` metadata lines."""
    rows = list(rows)
    if columns is None:
        if not rows:
            raise ValueError("columns are required for an empty table")
        columns = [f.name for f in fields(rows[0])]
    lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt(v) for v in astuple(r)) for r in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def read_results(path) -> tuple[dict, list[dict]]:
    """Parse a file written by :func:`emit_results` into (metadata, rows of strings)."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            meta[key.strip()] = value.strip()
        elif line:
            body.append(line.split(","))
    header, *rows = body
    return meta, [dict(zip(header, r)) for r in rows]


def _sort_key_m(m: ShotMean) -> float:
    return math.inf if m == "exact" else float(m)


# ---------------------------------------------------------------- sweeps

def sweep_samples(
    cfg: ExperimentConfig,
    out=None,
    per_trial_path=None,
    progress: Callable[[CellResult], None] | None = None,
) -> list[CellResult]:
    """Accuracy over the ``train_sizes x shot_means`` grid; rows sorted by ``(n, m)``.

    With ``out`` set, the CSV is rewritten after every finished cell so a
    crash leaves the completed cells on disk.
    """
    cells = sorted({(n, m) for n in cfg.train_sizes for m in cfg.shot_means}, key=lambda c: (c[0], _sort_key_m(c[1])))
    meta = metadata(cfg, "sweep-m")
    table: list[CellResult] = []
    per_trial: list[tuple] = []
    for n, m in cells:
        jobs = [(cfg, n, m, t) for t in range(cfg.trials)]
        results = _map(_run_trial_args, jobs, cfg.workers)
        mean_acc, var_acc, mean_cost = _aggregate(results)
        row = CellResult(n, _m_label(m), cfg.trials, mean_acc, var_acc, mean_cost)
        table.append(row)
        per_trial.extend((n, row.m, t, r.accuracy, r.final_cost) for t, r in enumerate(results))
        if out is not None:
            emit_results(table, out, meta, SWEEP_COLUMNS)
        if per_trial_path is not None:
            _emit_per_trial(per_trial, per_trial_path, meta)
        if progress is not None:
            progress(row)
    return table


@dataclass(frozen=True)
class _PerTrialRow:
    n: int
    m: str
    trial: int
    accuracy: float
    final_cost: float


def _emit_per_trial(records: list[tuple], path, meta: dict) -> None:
    emit_results([_PerTrialRow(*r) for r in records], path, meta)


def heatmap_centers(grid_step: float) -> list[tuple[float, float]]:
    if not 0.0 < grid_step <= 0.5:
        raise ValueError(f"grid_step must be in (0, 0.5], got {grid_step}")
    count = int(math.floor(1.0 / grid_step + 1e-9)) + 1
    ticks = [round(i * grid_step, 12) for i in range(count)]
    return [(a, b) for a in ticks for b in ticks]


def heatmap_cell(cfg: ExperimentConfig, center: tuple[float, float]) -> HeatmapCell:
    jobs = [(cfg, center, t) for t in range(cfg.trials)]
    acc = np.array([r.accuracy for r in _map(_heatmap_trial, jobs, cfg.workers)])
    return HeatmapCell(center[0], center[1], cfg.trials, float(acc.mean()), float(acc.var()))


def center_heatmap(cfg: ExperimentConfig, grid_step: float = 0.1, out=None) -> list[HeatmapCell]:
    """Mean exact-mode accuracy for boundary centres on ``{0, step, ..., 1}^2``."""
    table = []
    meta = metadata(cfg, "heatmap", grid_step=grid_step)
    for center in heatmap_centers(grid_step):
        table.append(heatmap_cell(cfg, center))
        if out is not None:
            emit_results(table, out, meta)
    return table


def variance_point(cfg: ExperimentConfig) -> ModelParams:
    """Fixed parameter point at which the cost variance is measured."""
    tcfg = cfg.train.build(seed=cell_source(cfg.seed, "variance-point").seed)
    params0 = init_params(cfg.layers, cfg.encoding, tcfg, threshold=cfg.threshold)
    if cfg.variance_point == "random":
        return params0
    data = generate_dataset(cfg.heatmap_train_size, cfg.boundary.build(), cell_source(cfg.seed, "variance-train"))
    params, _ = train(params0, data, ShotConfig.exact(), tcfg)
    return params


def variance_scan(cfg: ExperimentConfig, repeats: int, out=None, params: ModelParams | None = None) -> VarianceScan:
    """Empirical cost variance over ``train_sizes x shot_means`` and its log-log slope in ``N*M``."""
    if repeats < 100:
        raise ValueError("repeats must be >= 100")
    params = params if params is not None else variance_point(cfg)
    boundary = cfg.boundary.build()
    cells = []
    xs, ys = [], []
    for n in sorted(set(cfg.train_sizes)):
        data = generate_dataset(n, boundary, cell_source(cfg.seed, "variance-data", n))
        for m in sorted(set(cfg.shot_means), key=_sort_key_m):
            shots = shot_config(m)
            rng = cell_source(cfg.seed, "variance", n, shots.label())
            var = estimate_cost_variance(params, data, shots, repeats, rng)
            cells.append(VarianceCell(n, shots.label(), repeats, var, var * math.sqrt(2.0 / (repeats - 1))))
            if var > 0 and not shots.is_exact:
                xs.append(math.log(n * shots.mean_samples))
                ys.append(math.log(var))
    if len(set(xs)) >= 2:
        slope, intercept = (float(v) for v in np.polyfit(xs, ys, 1))
    else:
        slope = intercept = math.nan
    scan = VarianceScan(cells, slope, intercept)
    if out is not None:
        emit_results(cells, out, metadata(cfg, "variance", repeats=repeats, slope=repr(slope), intercept=repr(intercept)))
    return scan
