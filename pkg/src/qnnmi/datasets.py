"""CSV loaders and stratified splits for the three benchmark datasets.

Vendored sources live in ``qnnmi/data`` (see ``PROVENANCE.md`` there).
Features are returned raw; angle scaling is fitted on the training split
by the caller (:class:`qnnmi.encoding.FeatureScaler`), so no evaluation
rows leak into it.
"""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .encoding import FeatureVector
from .errors import DataError

MISSING = "?"


@dataclass(frozen=True)
class Profile:
    filename: str
    d: int
    encoding: str
    header: bool
    feature_cols: slice
    label_col: int
    classes: dict


PROFILES = {
    # UCI iris.data: 4 features + class name, no header; setosa vs versicolor only
    "iris2": Profile(
        "iris.data", 4, "qubit", False, slice(0, 4), 4,
        {"Iris-setosa": 0, "setosa": 0, "Iris-versicolor": 1, "versicolor": 1},
    ),
    # Pima Indians diabetes: 8 features + Outcome (0/1), header row
    "diabetes": Profile(
        "pima-indians-diabetes.csv", 8, "interleaved", True, slice(0, 8), 8, {"0": 0, "1": 1}
    ),
    # UCI breast-cancer-wisconsin.data: id, 9 features, class 2 (benign) / 4 (malignant)
    "bcw": Profile(
        "breast-cancer-wisconsin.data", 9, "amplitude", False, slice(1, 10), 10, {"2": 0, "4": 1}
    ),
}
# iris rows of the third species are skipped, not rejected
_IGNORED_CLASSES = {"iris2": {"Iris-virginica", "virginica"}}


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    path: Optional[str] = None
    encoding: Optional[str] = None
    n: int = 4

    def __post_init__(self):
        if self.name not in PROFILES:
            raise DataError(f"unknown dataset {self.name!r}; choose from {sorted(PROFILES)}")
        expected = PROFILES[self.name].encoding
        if self.encoding is None:
            object.__setattr__(self, "encoding", expected)
        elif self.encoding != expected:
            raise DataError(f"dataset {self.name} uses {expected} encoding, not {self.encoding}")

    @property
    def profile(self) -> Profile:
        return PROFILES[self.name]

    def source(self) -> Path:
        if self.path is not None:
            return Path(self.path)
        return Path(str(resources.files("qnnmi") / "data" / self.profile.filename))


@dataclass(frozen=True)
class Sample:
    features: FeatureVector
    label: tuple[int, int]

    def __post_init__(self):
        if sorted(self.label) != [0, 1]:
            raise ValueError(f"label must be one-hot, got {self.label}")

    @property
    def cls(self) -> int:
        return self.label.index(1)


@dataclass
class Dataset:
    """Loaded samples plus the load report written to the run manifest."""

    name: str
    samples: list[Sample]
    path: str
    sha256: str
    rows_read: int
    dropped_missing: int = 0
    skipped_class: int = 0
    class_counts: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def report(self) -> dict:
        return {
            "name": self.name,
            "path": self.path,
            "sha256": self.sha256,
            "rows_read": self.rows_read,
            "samples": len(self.samples),
            "dropped_missing": self.dropped_missing,
            "skipped_class": self.skipped_class,
            "class_counts": {str(k): v for k, v in sorted(self.class_counts.items())},
        }

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return as_arrays(self.samples)


def as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    """``(X, y)`` with raw features and integer classes."""
    if not samples:
        return np.empty((0, 0)), np.empty(0, dtype=int)
    x = np.stack([s.features.values for s in samples])
    y = np.array([s.cls for s in samples], dtype=int)
    return x, y


def load_dataset(spec: DatasetSpec) -> Dataset:
    prof = spec.profile
    path = spec.source()
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read dataset file {path}: {exc}") from exc
    text = raw.decode("utf-8")
    ignored = _IGNORED_CLASSES.get(spec.name, set())
    samples, dropped, skipped, counts = [], 0, 0, {}
    rows = 0
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if prof.header and lineno == 1:
            continue
        rows += 1
        row = [c.strip() for c in row]
        if len(row) <= prof.label_col:
            raise DataError(f"{path}:{lineno}: expected {prof.label_col + 1} columns, got {len(row)}")
        label = row[prof.label_col]
        if label in ignored:
            skipped += 1
            continue
        if label not in prof.classes:
            raise DataError(f"{path}:{lineno}: unknown class label {label!r}")
        cells = row[prof.feature_cols]
        if MISSING in cells:
            dropped += 1
            continue
        try:
            values = [float(c) for c in cells]
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: malformed feature value ({exc})") from None
        cls = prof.classes[label]
        counts[cls] = counts.get(cls, 0) + 1
        onehot = (1, 0) if cls == 0 else (0, 1)
        samples.append(Sample(FeatureVector(np.array(values)), onehot))
    if not samples:
        raise DataError(f"{path}: no usable rows")
    return Dataset(
        spec.name, samples, str(path), hashlib.sha256(raw).hexdigest(), rows, dropped, skipped, counts
    )


def split(samples, train_fraction: float = 0.8, seed: int = 0):
    """Seeded stratified split into ``(train, eval)``.

    The overall train size is ``round(train_fraction * N)``; it is shared out
    across classes by largest remainder, so each class is within one sample
    of its exact proportion.
    """
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    samples = list(samples)
    rng = np.random.default_rng(seed)
    by_class: dict[int, list[int]] = {}
    for i, s in enumerate(samples):
        by_class.setdefault(s.cls, []).append(i)
    classes = sorted(by_class)
    total = int(np.floor(train_fraction * len(samples) + 0.5))
    quotas = {c: train_fraction * len(by_class[c]) for c in classes}
    take = {c: int(np.floor(quotas[c])) for c in classes}
    leftover = total - sum(take.values())
    for c in sorted(classes, key=lambda c: (-(quotas[c] - take[c]), c))[: max(leftover, 0)]:
        take[c] += 1
    train_idx, eval_idx = [], []
    for c in classes:
        idx = rng.permutation(by_class[c])
        train_idx.extend(idx[: take[c]].tolist())
        eval_idx.extend(idx[take[c] :].tolist())
    if not train_idx or not eval_idx:
        raise ValueError(f"split of {len(samples)} samples at {train_fraction} leaves one side empty")
    train_idx, eval_idx = sorted(train_idx), sorted(eval_idx)
    return [samples[i] for i in train_idx], [samples[i] for i in eval_idx]
