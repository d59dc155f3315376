"""Command line entry point: ``qnnmi {train,experiment,analyze,summarize}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .circuit import Circuit
from .errors import ConfigError, DataError, NumericalError, QnnmiError
from .infodyn import SubsystemPartition, mi_trace
from .runner import (
    AggregateTrace,
    RunConfig,
    config_from_dict,
    load_config,
    run_experiment,
    run_single,
    summarize,
    write_run,
)


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    try:
        if args.dataset is not None:
            raw = cfg.to_dict()
            raw["dataset"] = {"name": args.dataset}
            cfg = config_from_dict(raw)
        if args.epochs is not None:
            cfg = replace(cfg, training=replace(cfg.training, epochs=args.epochs))
        if getattr(args, "runs", None) is not None:
            cfg = replace(cfg, runs=args.runs)
        if args.seed is not None:
            cfg = replace(cfg, base_seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, out=args.out)
        if getattr(args, "workers", None) is not None:
            cfg = replace(cfg, workers=args.workers)
    except (ConfigError, DataError):
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def cmd_train(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_single(cfg, cfg.base_seed)
    write_run(result, out, cfg)
    first, last = result.rows[0], result.rows[-1]
    print(f"seed {result.seed}: loss {first[1]:.4f} -> {last[1]:.4f}, train accuracy {last[2]:.3f}, "
          f"eval accuracy {result.eval_accuracy:.3f}")
    print(f"wrote {out / f'run_{result.seed}.csv'}")
    return 0


def cmd_experiment(args) -> int:
    cfg = _config(args)
    agg = run_experiment(cfg)
    report = summarize(agg)
    print(json.dumps(report.to_dict(), indent=2))
    print(f"wrote {Path(cfg.out) / 'aggregate.csv'}", file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    path = Path(args.snapshot)
    try:
        snap = json.loads(path.read_text())
        circuit = Circuit.from_dict(snap["circuit"])
        theta = np.asarray(snap["theta"], dtype=float)
        measured = tuple(snap.get("measured", [0]))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"cannot read snapshot {path}: {exc}") from exc
    theta = np.atleast_2d(theta)
    if args.epoch is not None:
        if not 0 <= args.epoch < len(theta):
            raise ConfigError(f"epoch {args.epoch} not in snapshot (0..{len(theta) - 1})")
        theta = theta[args.epoch : args.epoch + 1]
        first = args.epoch
    else:
        first = 0
    partition = SubsystemPartition(circuit.num_qubits, measured)
    records = mi_trace(theta, circuit, partition)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["epoch", "I_Di_Mo", "I_Mi_Mo", *partition.discard_labels()])
    for rec in records:
        w.writerow([rec.epoch + first, *(repr(v) for v in (rec.I_Di_Mo, rec.I_Mi_Mo, *rec.per_qubit))])
    return 0


def cmd_summarize(args) -> int:
    try:
        agg = AggregateTrace.from_csv(args.aggregate)
    except (OSError, ValueError, StopIteration) as exc:
        raise DataError(f"cannot read aggregate {args.aggregate}: {exc}") from exc
    try:
        report = summarize(agg, threshold=args.threshold)
    except (KeyError, ValueError) as exc:
        raise DataError(f"{args.aggregate}: {exc}") from exc
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qnnmi", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p, multi: bool):
        p.add_argument("--config", help="TOML or JSON config file")
        p.add_argument("--dataset", choices=["iris2", "diabetes", "bcw"])
        p.add_argument("--epochs", type=int)
        p.add_argument("--seed", type=int, help="seed (base seed for experiment)")
        p.add_argument("--out", help="output directory")
        if multi:
            p.add_argument("--runs", type=int)
            p.add_argument("--workers", type=int)

    p = sub.add_parser("train", help="single seeded training run")
    run_flags(p, multi=False)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("experiment", help="multi-seed runs plus aggregate")
    run_flags(p, multi=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("analyze", help="MI diagnostics of a saved theta snapshot")
    p.add_argument("snapshot", help="run_<seed>_theta.json")
    p.add_argument("--epoch", type=int, help="only this epoch's parameters")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("summarize", help="trend report from aggregate.csv")
    p.add_argument("aggregate")
    p.add_argument("--threshold", type=float, default=0.02, help="two-phase drop threshold (bits)")
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, DataError, NumericalError, QnnmiError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
