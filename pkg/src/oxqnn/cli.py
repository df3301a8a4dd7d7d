"""Command-line entry point: ``oxqnn <subcommand> ...``.

Exit codes: 0 success, 1 usage or config error, 2 data or I/O error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .circuits import AnsatzSpec
from .data import generate_synthetic_dataset, load_dataset, write_dataset
from .errors import (ConfigError, DataError, DegenerateFeatureError, InvalidArgumentError, NumericalError,
                     OxqnnError, ResourceLimitError)
from .expressibility import (DEFAULT_BINS, DEFAULT_ENTROPY_SAMPLES, DEFAULT_FIDELITY_PAIRS,
                             expressibility_report)
from .features import TARGET_SCALE, feature_matrix, fit_scaler, scale_target
from .harness import (MlpConfig, QnnConfig, config_from_dict, config_to_dict, derive_seed, expand_grid,
                      iter_sweep, run_cross_validation)
from .mlp import TrainingConfig, train_mlp
from .qnn import predict_batch, train
from .reduction import check_reduction
from .reports import emit_report, write_config_echo

log = logging.getLogger("oxqnn")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3
DEFAULT_ANSATZ_FAMILY = "linear-CX,circular-CX,circular2-CX,circular4-CX,full-CX,linear-CZ"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which collides with the data-error code
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a flat JSON object")
    return data


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _ansatz_list(text: str) -> list[tuple[str, str]]:
    out = []
    for item in text.split(","):
        entangler, _, gate = item.strip().rpartition("-")
        if not entangler or gate not in ("CX", "CZ"):
            raise argparse.ArgumentTypeError(f"ansatz must look like 'linear-CX', got {item!r}")
        out.append((entangler, gate))
    return out


def cmd_synth_data(args) -> dict:
    dataset = generate_synthetic_dataset(args.n, args.noise, args.seed)
    write_dataset(dataset, args.out)
    echo = {"command": "synth-data", "n": args.n, "noise_std": args.noise, "seed": args.seed}
    write_config_echo(echo, f"{args.out}.config.json")
    print(f"wrote {len(dataset)} records to {args.out}")
    return echo


def cmd_train(args) -> dict:
    dataset = load_dataset(args.dataset)
    config = config_from_dict(_read_json(args.config))
    records = list(dataset.records)
    seed = derive_seed(config_to_dict(config), "full")
    scaler = fit_scaler(records)
    y = scale_target(dataset.targets)
    if isinstance(config, QnnConfig):
        result = train(replace(config.blank_model(), scaler=scaler, seed=seed), records,
                       config.optimizer(seed), restarts=config.restarts)
        pred = predict_batch(result.model, feature_matrix(records))
        payload = {"kind": "qnn", "model": result.model.to_dict(), "trace": result.trace}
    elif isinstance(config, MlpConfig):
        x = scaler.transform(feature_matrix(records))
        fitted = train_mlp(config.architecture, x, y,
                           TrainingConfig(config.learning_rate, config.epochs, config.l2_weight, seed))
        pred = fitted.predict(x)
        payload = {"kind": "mlp", "arch": config.arch, "weights": fitted.weights.tolist(),
                   "scaler": scaler.to_dict()}
    else:
        raise ConfigError(f"model kind {config.model!r} has nothing to train")
    rmse_c = float(np.sqrt(np.mean((pred - y) ** 2))) * TARGET_SCALE
    payload["train_rmse_c"] = rmse_c
    echo = {"command": "train", "dataset": str(args.dataset), "config": config_to_dict(config), "seed": seed}
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    write_config_echo(echo, f"{args.out}.config.json")
    print(f"{config.label}: train RMSE {rmse_c:.1f} C -> {args.out}")
    return echo


def _run_cv(args, config) -> dict:
    dataset = load_dataset(args.dataset)
    result = run_cross_validation(dataset, config, jobs=args.jobs)
    emit_report([result], args.out, args.format)
    echo = {"command": args.command, "dataset": str(args.dataset), "config": config_to_dict(config)}
    write_config_echo(echo, Path(args.out) / "config.json")
    print(f"{config.label}: train RMSE {result.mean_train_rmse_c:.1f} C, test RMSE {result.mean_test_rmse_c:.1f} C")
    if not all(f.trace_monotone for f in result.folds):
        raise NumericalError("training cost increased between sweeps")
    return echo


def cmd_cv(args) -> dict:
    return _run_cv(args, config_from_dict(_read_json(args.config)))


def cmd_baseline(args) -> dict:
    config = MlpConfig(arch=args.arch, learning_rate=args.lr, epochs=args.epochs, l2_weight=args.l2,
                       seed=args.seed, k=args.k, fold_seed=args.fold_seed)
    return _run_cv(args, config)


def cmd_sweep(args) -> dict:
    dataset = load_dataset(args.dataset)
    grid = _read_json(args.grid)
    cells = expand_grid(grid)
    out = Path(args.out)
    echo = {"command": "sweep", "dataset": str(args.dataset), "grid": grid}
    write_config_echo(echo, out / "config.json")
    results = []
    for result in iter_sweep(dataset, cells, jobs=args.jobs):
        results.append(result)
        # rewrite after every cell so partial sweeps leave usable tables
        emit_report(results, out, args.format)
        label = config_from_dict(result.config).label
        if result.ok:
            print(f"{label}: {result.n_parameters} params, test RMSE {result.mean_test_rmse_c:.1f} C", flush=True)
        else:
            print(f"{label}: FAILED ({result.error})", flush=True)
    return echo


def cmd_express(args) -> dict:
    reports = []
    for entangler, gate in args.ansatz:
        for depth in args.depths:
            spec = AnsatzSpec(args.width, depth, entangler, gate)
            rep = expressibility_report(spec, args.pairs, args.bins, args.entropy_samples, args.seed)
            reports.append(rep)
            print(f"{entangler}-{gate} d{depth}: KL {rep.kl_divergence:.4f}, "
                  f"entropy {rep.mean_entanglement_entropy:.4f}", flush=True)
    emit_report(reports, args.out, args.format)
    echo = {"command": "express", "ansatz": [f"{e}-{g}" for e, g in args.ansatz], "depths": args.depths,
            "width": args.width, "pairs": args.pairs, "bins": args.bins,
            "entropy_samples": args.entropy_samples, "seed": args.seed}
    write_config_echo(echo, Path(args.out) / "config.json")
    return echo


def cmd_reduce_check(args) -> dict:
    report = check_reduction(args.entangler, args.width, args.gate)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    echo = {"command": "reduce-check", "entangler": args.entangler, "width": args.width, "gate": args.gate}
    write_config_echo(echo, f"{args.out}.config.json")
    verdict = "confirmed" if report.confirmed else "not confirmed"
    orderings = ", ".join(report.satisfying_orderings) or "-"
    print(f"{args.entangler}({args.width}, {args.gate}) -> {report.claim}: {verdict} (orderings: {orderings})")
    return echo


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oxqnn", description="QNN and MLP regression of oxide melting points.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth-data", help="write a synthetic oxide dataset")
    p.add_argument("--n", type=int, default=70)
    p.add_argument("--noise", type=float, default=100.0, help="Gaussian noise std in C")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_data)

    p = sub.add_parser("train", help="train one model on the whole dataset")
    p.add_argument("dataset")
    p.add_argument("--config", required=True, help="flat JSON model config")
    p.add_argument("--out", required=True, help="model JSON file")
    p.set_defaults(func=cmd_train)

    def add_table_args(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--jobs", type=int, default=1, help="parallel fold workers")

    p = sub.add_parser("cv", help="k-fold cross-validation of one config")
    p.add_argument("dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    add_table_args(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("sweep", help="cross-validate every cell of a grid")
    p.add_argument("dataset")
    p.add_argument("--grid", required=True, help="JSON object; list values are swept")
    p.add_argument("--out", required=True, help="output directory")
    add_table_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("express", help="expressibility (KL) and entanglement of ansatz families")
    p.add_argument("--ansatz", type=_ansatz_list, default=_ansatz_list(DEFAULT_ANSATZ_FAMILY))
    p.add_argument("--depths", type=_int_list, default=[1])
    p.add_argument("--width", type=int, default=5)
    p.add_argument("--pairs", type=int, default=DEFAULT_FIDELITY_PAIRS)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--entropy-samples", type=int, default=DEFAULT_ENTROPY_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_express)

    p = sub.add_parser("reduce-check", help="check entangler reductions under alternative orderings")
    p.add_argument("--entangler", default="full")
    p.add_argument("--width", type=int, default=5)
    p.add_argument("--gate", default="CX")
    p.add_argument("--out", required=True, help="JSON report file")
    p.set_defaults(func=cmd_reduce_check)

    p = sub.add_parser("baseline", help="cross-validate a classical MLP")
    p.add_argument("dataset")
    p.add_argument("--arch", default="5-5-1")
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--lr", type=float, default=0.02)
    p.add_argument("--epochs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--fold-seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    add_table_args(p)
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConfigError, InvalidArgumentError, ResourceLimitError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DegenerateFeatureError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OxqnnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
