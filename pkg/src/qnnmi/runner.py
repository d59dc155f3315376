"""Seeded multi-run experiments, aggregation and trend summaries.

One run = split, fit the angle scaler on the training rows, encode, train,
then evaluate the mutual-information diagnostics on every epoch's
parameters.  Runs are independent and deterministic given their seed, so
they can be farmed out to worker processes without affecting the output.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import platform
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.stats import spearmanr

from .circuit import AnsatzSpec, build_brickwall
from .datasets import Dataset, DatasetSpec, as_arrays, load_dataset, split
from .encoding import EncodingSpec, FeatureScaler, encode_batch
from .errors import ConfigError, DataError, QnnmiError
from .infodyn import SubsystemPartition, mi_trace
from .training import BinaryClassifier, TrainConfig, train

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

BASE_COLUMNS = ["epoch", "loss", "accuracy", "I_Di_Mo", "I_Mi_Mo"]
PARTIAL_MARKER = ".partial"


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSpec = field(default_factory=lambda: DatasetSpec("iris2"))
    ansatz: AnsatzSpec = field(default_factory=AnsatzSpec)
    training: TrainConfig = field(default_factory=TrainConfig)
    train_fraction: float = 0.8
    runs: int = 50
    base_seed: int = 0
    out: str = "results"
    workers: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.training.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.dataset.n != self.ansatz.n:
            raise ConfigError(f"dataset n={self.dataset.n} but ansatz n={self.ansatz.n}")
        try:
            EncodingSpec(self.dataset.encoding, self.ansatz.n).check_dimension(self.dataset.profile.d)
        except ValueError as exc:
            raise ConfigError(f"{self.dataset.name}: {exc}") from None

    @property
    def seeds(self) -> list[int]:
        return list(range(self.base_seed, self.base_seed + self.runs))

    @property
    def partition(self) -> SubsystemPartition:
        return SubsystemPartition(self.ansatz.n, (self.ansatz.measured_qubit,))

    @property
    def columns(self) -> list[str]:
        return BASE_COLUMNS + self.partition.discard_labels()

    def to_dict(self) -> dict:
        return {
            "dataset": {k: v for k, v in asdict(self.dataset).items() if v is not None},
            "ansatz": asdict(self.ansatz),
            "training": {k: v for k, v in asdict(self.training).items() if k != "seed"},
            "train_fraction": self.train_fraction,
            "runs": self.runs,
            "base_seed": self.base_seed,
            "out": self.out,
            "workers": self.workers,
        }


_TRAINING_KEYS = {
    "epochs": "epochs",
    "lr": "lr",
    "learning-rate": "lr",
    "learning_rate": "lr",
    "gradient": "gradient",
    "dtheta": "dtheta",
    "init": "init",
    "init_scale": "init_scale",
    "init-scale": "init_scale",
}


def config_from_dict(d: dict) -> RunConfig:
    """Build a :class:`RunConfig` from nested config keys (TOML/JSON layout)."""
    d = dict(d)
    try:
        ds = dict(d.pop("dataset", {}))
        if isinstance(ds, str):
            ds = {"name": ds}
        an = dict(d.pop("ansatz", {}))
        tr_raw = dict(d.pop("training", {}))
        encoding = d.pop("encoding", ds.pop("encoding", None))
        ansatz = AnsatzSpec(
            n=int(an.pop("n", 4)), l=int(an.pop("l", 4)), measured_qubit=int(an.pop("measured_qubit", 0))
        )
        if an:
            raise ConfigError(f"unknown ansatz keys: {sorted(an)}")
        dataset = DatasetSpec(
            name=ds.pop("name", "iris2"), path=ds.pop("path", None), encoding=encoding, n=ansatz.n
        )
        ds.pop("n", None)
        if ds:
            raise ConfigError(f"unknown dataset keys: {sorted(ds)}")
        tr = {}
        for k, v in tr_raw.items():
            if k not in _TRAINING_KEYS:
                raise ConfigError(f"unknown training key {k!r}")
            tr[_TRAINING_KEYS[k]] = v
        for k in list(d):
            if k in _TRAINING_KEYS:
                tr[_TRAINING_KEYS[k]] = d.pop(k)
        training = TrainConfig(**tr)
        seed = d.pop("seed", None)
        base_seed = int(d.pop("base_seed", seed if seed is not None else 0))
        cfg = RunConfig(
            dataset=dataset,
            ansatz=ansatz,
            training=training,
            train_fraction=float(d.pop("train_fraction", 0.8)),
            runs=int(d.pop("runs", 50)),
            base_seed=base_seed,
            out=str(d.pop("out", "results")),
            workers=int(d.pop("workers", 1)),
        )
    except (ConfigError, DataError):
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if d:
        raise ConfigError(f"unknown config keys: {sorted(d)}")
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return config_from_dict(data)


@dataclass
class RunResult:
    seed: int
    columns: list[str]
    rows: np.ndarray
    thetas: np.ndarray
    eval_loss: float
    eval_accuracy: float


def run_single(config: RunConfig, seed: int, dataset: Optional[Dataset] = None) -> RunResult:
    if dataset is None:
        dataset = load_dataset(config.dataset)
    train_s, eval_s = split(dataset.samples, config.train_fraction, seed)
    x_tr, y_tr = as_arrays(train_s)
    x_ev, y_ev = as_arrays(eval_s)
    enc = EncodingSpec(config.dataset.encoding, config.ansatz.n)
    if enc.method != "amplitude":
        scaler = FeatureScaler.fit(x_tr)
        x_tr, x_ev = scaler.transform(x_tr), scaler.transform(x_ev)
    circuit = build_brickwall(config.ansatz)
    mq = config.ansatz.measured_qubit
    model = BinaryClassifier(circuit, encode_batch(x_tr, enc), y_tr, mq)
    trace = train(model, replace(config.training, seed=seed))
    records = mi_trace(trace.thetas, circuit, config.partition)
    rows = np.array(
        [
            [r.epoch, r.mean_loss, r.train_accuracy, m.I_Di_Mo, m.I_Mi_Mo, *m.per_qubit]
            for r, m in zip(trace.records, records)
        ]
    )
    final = trace.records[-1].theta_snapshot
    evaluator = BinaryClassifier(circuit, encode_batch(x_ev, enc), y_ev, mq)
    return RunResult(
        seed, config.columns, rows, trace.thetas, evaluator.loss(final), evaluator.accuracy(final)
    )


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([str(int(row[0]))] + [repr(float(v)) for v in row[1:]])
    return buf.getvalue()


def write_run(result: RunResult, out: Path, config: RunConfig) -> None:
    (out / f"run_{result.seed}.csv").write_text(_csv_text(result.columns, result.rows))
    circuit = build_brickwall(config.ansatz)
    snapshot = {
        "seed": result.seed,
        "ansatz": asdict(config.ansatz),
        "measured": list(config.partition.measured),
        "circuit": circuit.to_dict(),
        "theta": result.thetas.tolist(),
    }
    (out / f"run_{result.seed}_theta.json").write_text(json.dumps(snapshot))


@dataclass
class AggregateTrace:
    columns: list[str]
    epochs: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    runs: int

    def column(self, name: str, stat: str = "mean") -> np.ndarray:
        j = self.columns.index(name)
        return (self.mean if stat == "mean" else self.std)[:, j]

    def to_csv(self) -> str:
        header = ["epoch"]
        for c in self.columns:
            header += [f"{c}_mean", f"{c}_std"]
        rows = []
        for e in range(len(self.epochs)):
            row = [self.epochs[e]]
            for j in range(len(self.columns)):
                row += [self.mean[e, j], self.std[e, j]]
            rows.append(row)
        return _csv_text(header, rows)

    @classmethod
    def from_csv(cls, path) -> AggregateTrace:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = np.array([[float(v) for v in row] for row in reader])
        names = [h[: -len("_mean")] for h in header[1::2]]
        return cls(names, data[:, 0].astype(int), data[:, 1::2], data[:, 2::2], runs=0)


def aggregate(results: list[RunResult]) -> AggregateTrace:
    results = sorted(results, key=lambda r: r.seed)
    lengths = {r.rows.shape for r in results}
    if len(lengths) != 1:
        raise QnnmiError(f"runs disagree on trace shape: {lengths}")
    stack = np.stack([r.rows[:, 1:] for r in results])
    # shifting by the first run keeps the mean of identical runs exact
    dev = stack - stack[0]
    return AggregateTrace(
        results[0].columns[1:],
        results[0].rows[:, 0].astype(int),
        stack[0] + dev.mean(axis=0),
        dev.std(axis=0),
        len(results),
    )


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def _worker(args):
    config, seed, dataset = args
    return run_single(config, seed, dataset)


class RunFailure(QnnmiError):
    def __init__(self, seed: int, cause: BaseException):
        super().__init__(f"run with seed {seed} failed: {cause}")
        self.seed = seed
        self.exit_code = getattr(cause, "exit_code", 1)


def run_experiment(config: RunConfig, seeds: Optional[list[int]] = None) -> AggregateTrace:
    """Run every seed, write per-run CSVs, ``aggregate.csv`` and ``manifest.json``."""
    seeds = config.seeds if seeds is None else list(seeds)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    dataset = load_dataset(config.dataset)
    marker = out / PARTIAL_MARKER
    marker.write_text("running\n")
    jobs = [(config, s, dataset) for s in seeds]
    results: list[RunResult] = []
    try:
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                futures = {s: pool.submit(_worker, job) for s, job in zip(seeds, jobs)}
                for s in seeds:
                    try:
                        results.append(futures[s].result())
                    except Exception as exc:
                        raise RunFailure(s, exc) from exc
                    write_run(results[-1], out, config)
        else:
            for s, job in zip(seeds, jobs):
                try:
                    results.append(_worker(job))
                except Exception as exc:
                    raise RunFailure(s, exc) from exc
                write_run(results[-1], out, config)
                log.info("seed %d done (final loss %.4f)", s, results[-1].rows[-1, 1])
    except RunFailure as exc:
        marker.write_text(f"failed seed {exc.seed}: {exc}\n")
        raise

    agg = aggregate(results)
    (out / "aggregate.csv").write_text(agg.to_csv())
    manifest = {
        "config": config.to_dict(),
        "seeds": seeds,
        "dataset": dataset.report(),
        "fixtures_git_describe": _git_describe(),
        "circuit": build_brickwall(config.ansatz).to_dict(),
        "eval": {str(r.seed): {"loss": r.eval_loss, "accuracy": r.eval_accuracy} for r in results},
        "started_at": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
        "wall_time_s": time.time() - started,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    marker.unlink()
    return agg


@dataclass(frozen=True)
class TrendReport:
    epochs: int
    delta_I_Di_Mo: float
    spearman_I_Di_Mo: float
    peak_epoch: int
    peak_I_Mi_Mo: float
    final_I_Mi_Mo: float
    drop_from_peak: float
    two_phase: bool
    delta_loss: float
    loss_monotone_smoothed: bool
    final_I_Di_Mo: float
    final_per_qubit_sum: float

    def to_dict(self) -> dict:
        return asdict(self)


def moving_average(x: np.ndarray, window: int = 5) -> np.ndarray:
    return np.convolve(x, np.ones(window) / window, mode="valid")


def summarize(agg: AggregateTrace, threshold: float = 0.02, window: int = 5) -> TrendReport:
    if len(agg.epochs) < 3:
        raise ValueError("trend summary needs at least 3 epochs")
    di = agg.column("I_Di_Mo")
    mi = agg.column("I_Mi_Mo")
    loss = agg.column("loss")
    peak = int(np.argmax(mi))
    drop = float(mi[peak] - mi[-1])
    rho = spearmanr(agg.epochs, di)[0] if np.ptp(di) > 0 else 0.0
    smooth = moving_average(loss, min(window, len(loss)))
    per_q = [c for c in agg.columns if c.startswith("I_Di") and c != "I_Di_Mo"]
    return TrendReport(
        epochs=int(agg.epochs[-1]),
        delta_I_Di_Mo=float(di[-1] - di[0]),
        spearman_I_Di_Mo=float(rho),
        peak_epoch=int(agg.epochs[peak]),
        peak_I_Mi_Mo=float(mi[peak]),
        final_I_Mi_Mo=float(mi[-1]),
        drop_from_peak=drop,
        two_phase=bool(0 < peak < len(mi) - 1 and drop > threshold),
        delta_loss=float(loss[-1] - loss[0]),
        loss_monotone_smoothed=bool(np.all(np.diff(smooth) <= 0)),
        final_I_Di_Mo=float(di[-1]),
        final_per_qubit_sum=float(sum(agg.column(c)[-1] for c in per_q)),
    )


def default_workers() -> int:
    return max(1, min(os.cpu_count() or 1, 8))
