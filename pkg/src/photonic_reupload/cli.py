"""Command line entry point: ``photonic-reupload <subcommand> ...``."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .data import Boundary, accuracy, generate_dataset, load_dataset, save_dataset
from .harness import (
    ConfigError,
    center_heatmap,
    load_config,
    parse_config,
    sweep_samples,
    variance_scan,
)
from .model import Encoding, load_model, save_model
from .sampling import RandomSource, ShotConfig
from .trainer import Init, TrainConfig, init_params, train


def _shots(text: str) -> ShotConfig:
    if text.lower() == "exact":
        return ShotConfig.exact()
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'exact', got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("shot mean must be positive")
    return ShotConfig.poisson(value)


def _center(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X1,X2, got {text!r}") from None
    return a, b


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _experiment_config(args):
    cfg = load_config(args.config)
    overrides = {k: v for k, v in (("trials", getattr(args, "trials", None)), ("workers", getattr(args, "workers", None))) if v is not None}
    if overrides:
        cfg = parse_config({**cfg.model_dump(mode="json"), **overrides})
    return cfg


def cmd_gen_data(args) -> int:
    data = generate_dataset(args.n, Boundary(center=args.center, radius=args.radius), RandomSource(args.seed))
    save_dataset(data, args.out)
    print(f"wrote {len(data)} points to {args.out}")
    return 0


def cmd_train(args) -> int:
    data = load_dataset(args.data)
    tcfg = TrainConfig(
        max_sweeps=args.max_sweeps,
        cost_tolerance=args.cost_tolerance,
        grid_size=args.grid_size,
        refine_iters=args.refine_iters,
        init=Init(args.init),
        seed=args.seed,
        debias=not args.plain_surrogate,
    )
    params0 = init_params(args.layers, Encoding(args.encoding), tcfg, threshold=args.threshold)
    params, report = train(params0, data, args.shots, tcfg)
    save_model(params, args.out)
    if args.report:
        report.save(args.report)
    print(
        f"trained {report.layer_updates} layer updates; final cost {report.final_cost!r}; "
        f"converged={report.converged}; photon budget {report.photon_budget!r}"
    )
    return 0


def cmd_eval(args) -> int:
    params = load_model(args.model)
    data = load_dataset(args.data)
    acc = accuracy(params, data, args.shots, RandomSource(args.seed))
    print(f"accuracy {acc!r}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _experiment_config(args)
    out = args.out or cfg.output_path
    if out is None:
        raise ConfigError("no output path: pass --out or set output_path in the config")

    def report(row):
        if not args.quiet:
            print(f"n={row.n} m={row.m}: accuracy {row.mean_accuracy:.4f} (var {row.accuracy_variance:.2e})", file=sys.stderr)

    sweep_samples(cfg, out=out, per_trial_path=args.per_trial, progress=report)
    return 0


def cmd_heatmap(args) -> int:
    cfg = _experiment_config(args)
    out = args.out or cfg.output_path
    if out is None:
        raise ConfigError("no output path: pass --out or set output_path in the config")
    center_heatmap(cfg, args.grid_step, out=out)
    return 0


def cmd_variance(args) -> int:
    cfg = load_config(args.config)
    out = args.out or cfg.output_path
    if out is None:
        raise ConfigError("no output path: pass --out or set output_path in the config")
    scan = variance_scan(cfg, args.repeats, out=out)
    print(f"log-log slope of cost variance vs N*M: {scan.slope:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photonic-reupload", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a labelled circle dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--center", type=_center, default=(0.2, 0.6))
    p.add_argument("--radius", type=float, default=0.33)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a classifier with layer-wise SMO")
    p.add_argument("--data", required=True)
    p.add_argument("--shots", type=_shots, default=ShotConfig.exact(), help="mean photons per setting, or 'exact'")
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--encoding", choices=[e.value for e in Encoding], default=Encoding.LINEAR.value)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--max-sweeps", type=int, default=10)
    p.add_argument("--cost-tolerance", type=float, default=1e-4)
    p.add_argument("--grid-size", type=int, default=61)
    p.add_argument("--refine-iters", type=int, default=30)
    p.add_argument("--init", choices=[i.value for i in Init], default=Init.UNIFORM.value)
    p.add_argument(
        "--plain-surrogate",
        action="store_true",
        help="minimise the raw squared-error surrogate without shot-noise correction",
    )
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a saved model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--shots", type=_shots, default=ShotConfig.exact())
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep-m", help="accuracy versus photon samples and training size")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--per-trial", metavar="FILE", help="also write one row per trial")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("heatmap", help="accuracy versus boundary centre (exact probabilities)")
    p.add_argument("--config", required=True)
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--out")
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("variance", help="cost-estimate variance versus N*M")
    p.add_argument("--config", required=True)
    p.add_argument("--repeats", type=int, default=10_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_variance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
