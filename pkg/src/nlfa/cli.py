"""Command-line front end: ingest, split, train, evaluate, report.

Subcommands
-----------
train          run fixed or adaptive training over cross-validation folds,
               writing per-iteration CSVs, per-fold model artifacts and a
               JSON summary
evaluate       re-score a saved model artifact on a dataset subset
split-preview  show fold sizes for a dataset and seed

Exit codes: 0 success, 2 unreadable input or configuration error,
3 numeric failure during training.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import metrics
from .admm import HyperParams, TerminationPolicy, init_state, train_fixed
from .data import parse_ratings, ten_fold_splits
from .errors import ConfigError, DomainError, NlfaError, NumericError, ParseError
from .model_io import load_model, save_model
from .seeds import INIT_STREAM, SPLIT_STREAM, SWARM_STREAM, seed_for
from .swarm import SwarmConfig, adaptive_train, init_swarm

SEP_NAMES = {"dcolon": "::", "tab": "\t", "comma": ",", "space": " "}
MODES = ("anlf", "a2nlf")
METRICS = ("rmse", "mae")


@dataclass
class RunConfig:
    """Fully resolved settings for one training run."""

    data: str | None = None
    sep: str = "dcolon"
    rank: int = 20
    mode: str = "a2nlf"
    lam: float = 0.5
    eta: float = 1.0
    swarm_size: int = 10
    inertia: float = 0.729
    accel1: float = 1.496
    accel2: float = 1.496
    lambda_bounds: tuple[float, float] = (2.0 ** -8, 4.0)
    eta_bounds: tuple[float, float] = (2.0 ** -8, 1.618)
    tol: float = 1e-5
    patience: int = 5
    max_iters: int = 1000
    metric: str = "rmse"
    folds: int = 10
    seed: int = 0
    out: str = "runs"
    clip_predictions: bool = False

    def validate(self) -> None:
        if not self.data:
            raise ConfigError("no dataset given (--data)")
        if self.sep not in SEP_NAMES:
            raise ConfigError(f"separator must be one of {sorted(SEP_NAMES)}, got {self.sep!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.rank < 1:
            raise ConfigError(f"rank must be >= 1, got {self.rank}")
        if not 1 <= self.folds <= 10:
            raise ConfigError(f"folds must lie in 1..10, got {self.folds}")
        # Constructing these surfaces range errors before any work starts.
        self.termination_policy()
        if self.mode == "anlf":
            self.fixed_hyperparams()
        else:
            self.swarm_config()

    def termination_policy(self) -> TerminationPolicy:
        return TerminationPolicy(tol=self.tol, patience=self.patience, max_iters=self.max_iters)

    def fixed_hyperparams(self) -> HyperParams:
        return HyperParams(lam=self.lam, eta=self.eta)

    def swarm_config(self) -> SwarmConfig:
        return SwarmConfig(
            size=self.swarm_size,
            inertia=self.inertia,
            accel_pbest=self.accel1,
            accel_gbest=self.accel2,
            lambda_bounds=self.lambda_bounds,
            eta_bounds=self.eta_bounds,
        )


_BOUNDS_FIELDS = ("lambda_bounds", "eta_bounds")
_KEY_ALIASES = {"lambda": "lam"}


def _parse_bounds(raw: str) -> tuple[float, float]:
    try:
        lo, hi = raw.split(":")
        return (float(lo), float(hi))
    except ValueError:
        raise ConfigError(f"bounds must look like lo:hi, got {raw!r}") from None


def _coerce(key: str, raw: str):
    hints = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    if key in _BOUNDS_FIELDS:
        return _parse_bounds(raw)
    hint = hints[key]
    if hint == "int":
        return int(raw)
    if hint == "float":
        return float(raw)
    if hint == "bool":
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot read {raw!r} as a boolean for {key}")
    return raw


def load_config_file(path) -> dict:
    """Read ``key = value`` lines; '#' starts a comment, blank lines skipped."""
    values = {}
    known = {f.name for f in dataclasses.fields(RunConfig)}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_number}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = _KEY_ALIASES.get(key, key.replace("-", "_"))
        if key not in known:
            raise ConfigError(f"{path}:{line_number}: unknown setting {key!r}")
        values[key] = _coerce(key, raw)
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    merged = dataclasses.asdict(RunConfig())
    if args.config:
        merged.update(load_config_file(args.config))
    field_names = set(merged)
    for key, value in vars(args).items():
        if key in field_names and value is not None:
            merged[key] = value
    config = RunConfig(**merged)
    config.validate()
    return config


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _write_metrics_csv(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,train_rmse,validation_m,lambda,eta,elapsed_ms\n")
        for t, rec in enumerate(records, start=1):
            validation = _fmt(rec.validation_m) if rec.validation_m is not None else ""
            fh.write(
                f"{t},{_fmt(rec.train_rmse)},{validation},"
                f"{_fmt(rec.lam)},{_fmt(rec.eta)},{_fmt(rec.elapsed_ms)}\n"
            )


def cmd_train(config: RunConfig) -> int:
    matrix = parse_ratings(config.data, SEP_NAMES[config.sep])
    splits = ten_fold_splits(matrix, seed_for(config.seed, SPLIT_STREAM))
    policy = config.termination_policy()
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    fold_summaries = []
    test_rmses = []
    test_maes = []
    for f in range(config.folds):
        split = splits[f]
        fold_start = time.perf_counter()
        state = init_state(
            matrix.num_rows, matrix.num_cols, config.rank, seed_for(config.seed, INIT_STREAM, f)
        )
        try:
            if config.mode == "anlf":
                state, report = train_fixed(
                    split.train,
                    state,
                    config.fixed_hyperparams(),
                    policy,
                    validation=split.validation,
                    metric=config.metric,
                )
            else:
                swarm = init_swarm(config.swarm_config(), seed_for(config.seed, SWARM_STREAM, f))
                state, report = adaptive_train(
                    split.train, split.validation, state, swarm, policy, metric=config.metric
                )
        except NumericError as exc:
            raise NumericError(f"fold {f}: {exc}") from exc

        clip = None
        if config.clip_predictions:
            clip = (float(split.train.vals.min()), float(split.train.vals.max()))
        test_rmse = metrics.rmse(state, split.test, clip=clip).value
        test_mae = metrics.mae(state, split.test, clip=clip).value
        test_rmses.append(test_rmse)
        test_maes.append(test_mae)

        _write_metrics_csv(out_dir / f"fold{f}_metrics.csv", report.records)
        save_model(
            out_dir / f"fold{f}_model.bin",
            state,
            meta={
                "format": "nlfa-model",
                "global_seed": config.seed,
                "fold": f,
                "mode": config.mode,
                "metric": config.metric,
                "separator": config.sep,
                "clip": list(clip) if clip else None,
                "row_labels": list(matrix.row_labels or []),
                "col_labels": list(matrix.col_labels or []),
            },
        )
        fold_summaries.append(
            {
                "fold": f,
                "iterations": report.iterations,
                "termination": report.reason.value,
                "test_rmse": test_rmse,
                "test_mae": test_mae,
                "final_train_rmse": report.records[-1].train_rmse,
                "cold_rows": int((split.train.row_deg == 0).sum()),
                "cold_cols": int((split.train.col_deg == 0).sum()),
                "elapsed_s": time.perf_counter() - fold_start,
            }
        )
        print(
            f"fold {f}: test_rmse={test_rmse:.6f} test_mae={test_mae:.6f} "
            f"iters={report.iterations} ({report.reason.value})"
        )

    summary = {
        "config": dataclasses.asdict(config),
        "dataset": {
            "num_rows": matrix.num_rows,
            "num_cols": matrix.num_cols,
            "nnz": matrix.nnz,
            "density": matrix.density(),
        },
        "folds": fold_summaries,
        "test_rmse": {"mean": float(np.mean(test_rmses)), "std": float(np.std(test_rmses))},
        "test_mae": {"mean": float(np.mean(test_maes)), "std": float(np.std(test_maes))},
    }
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(
        f"{config.folds} fold(s): mean test_rmse={summary['test_rmse']['mean']:.6f} "
        f"(std {summary['test_rmse']['std']:.2g}) -> {summary_path}"
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    state, meta = load_model(args.model)
    sep = args.sep or meta.get("separator", "dcolon")
    if sep not in SEP_NAMES:
        raise ConfigError(f"separator must be one of {sorted(SEP_NAMES)}, got {sep!r}")
    matrix = parse_ratings(args.data, SEP_NAMES[sep])
    if matrix.num_rows != meta["num_rows"] or matrix.num_cols != meta["num_cols"]:
        raise ConfigError(
            f"model was trained on a {meta['num_rows']}x{meta['num_cols']} matrix, "
            f"dataset parses to {matrix.num_rows}x{matrix.num_cols}"
        )
    splits = ten_fold_splits(matrix, seed_for(meta["global_seed"], SPLIT_STREAM))
    split = splits[meta["fold"]]
    target = getattr(split, args.subset)
    clip = tuple(meta["clip"]) if meta.get("clip") else None
    rmse = metrics.rmse(state, target, clip=clip)
    mae = metrics.mae(state, target, clip=clip)
    print(
        f"fold={meta['fold']} subset={args.subset} count={rmse.count} "
        f"rmse={_fmt(rmse.value)} mae={_fmt(mae.value)}"
    )
    return 0


def cmd_split_preview(args: argparse.Namespace) -> int:
    sep = args.sep or "dcolon"
    if sep not in SEP_NAMES:
        raise ConfigError(f"separator must be one of {sorted(SEP_NAMES)}, got {sep!r}")
    matrix = parse_ratings(args.data, SEP_NAMES[sep])
    splits = ten_fold_splits(matrix, seed_for(args.seed, SPLIT_STREAM))
    print(
        f"{matrix.num_rows} rows x {matrix.num_cols} cols, nnz={matrix.nnz}, "
        f"density={matrix.density():.6g}"
    )
    for f, split in enumerate(splits):
        print(
            f"fold {f}: train={split.train.nnz} validation={split.validation.nnz} "
            f"test={split.test.nnz}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlfa",
        description="Nonnegative latent factor training and evaluation for sparse rating matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train over cross-validation folds")
    train.add_argument("--config", help="key=value settings file; flags override it")
    train.add_argument("--data", help="rating file path")
    train.add_argument("--sep", choices=sorted(SEP_NAMES))
    train.add_argument("--rank", type=int)
    train.add_argument("--mode", choices=MODES)
    train.add_argument("--lambda", dest="lam", type=float, help="fixed penalty coefficient (anlf mode)")
    train.add_argument("--eta", type=float, help="fixed multiplier step (anlf mode)")
    train.add_argument("--swarm-size", dest="swarm_size", type=int)
    train.add_argument("--inertia", type=float)
    train.add_argument("--accel1", type=float)
    train.add_argument("--accel2", type=float)
    train.add_argument("--lambda-bounds", dest="lambda_bounds", type=_parse_bounds, metavar="LO:HI")
    train.add_argument("--eta-bounds", dest="eta_bounds", type=_parse_bounds, metavar="LO:HI")
    train.add_argument("--tol", type=float)
    train.add_argument("--patience", type=int)
    train.add_argument("--max-iters", dest="max_iters", type=int)
    train.add_argument("--metric", choices=METRICS)
    train.add_argument("--folds", type=int)
    train.add_argument("--seed", type=int)
    train.add_argument("--out", help="output directory")
    train.add_argument(
        "--clip-predictions",
        dest="clip_predictions",
        action="store_const",
        const=True,
        default=None,
        help="clamp predictions to the observed training rating range",
    )

    evaluate = sub.add_parser("evaluate", help="re-score a saved model artifact")
    evaluate.add_argument("--model", required=True, help="model artifact path")
    evaluate.add_argument("--data", required=True, help="rating file path")
    evaluate.add_argument("--sep", choices=sorted(SEP_NAMES), help="defaults to the separator stored in the artifact")
    evaluate.add_argument("--subset", choices=("train", "validation", "test"), default="test")

    preview = sub.add_parser("split-preview", help="show fold sizes for a dataset and seed")
    preview.add_argument("--data", required=True)
    preview.add_argument("--sep", choices=sorted(SEP_NAMES))
    preview.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return cmd_train(resolve_config(args))
        if args.command == "evaluate":
            return cmd_evaluate(args)
        return cmd_split_preview(args)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NlfaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
