"""Classical features to quantum states: qubit, interleaved-qubit and amplitude encoding."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, cnot_brick, run_batch
from .qcore import StateVector

METHODS = ("qubit", "interleaved", "amplitude")


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    scaled: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        vals.flags.writeable = False
        if self.scaled and (np.any(vals < 0) or np.any(vals > np.pi)):
            raise ValueError("scaled features must lie in [0, pi]")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.scaled == other.scaled and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.values.tobytes(), self.scaled))


@dataclass(frozen=True)
class EncodingSpec:
    method: str
    n: int

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown encoding {self.method!r}; choose from {METHODS}")
        if self.n < 1:
            raise ValueError("encoding needs n >= 1")

    def check_dimension(self, d: int) -> None:
        if self.method == "qubit" and d != self.n:
            raise ValueError(f"qubit encoding needs d == n ({d} != {self.n})")
        if self.method == "interleaved" and d <= self.n:
            raise ValueError(f"interleaved encoding needs d > n ({d} <= {self.n}); use qubit encoding")
        if self.method == "amplitude" and d > 2**self.n:
            raise ValueError(f"amplitude encoding holds at most {2**self.n} features, got {d}")


def _values(x) -> np.ndarray:
    return x.values if isinstance(x, FeatureVector) else np.asarray(x, dtype=float)


@dataclass(frozen=True)
class FeatureScaler:
    """Per-feature affine map onto [0, pi], fitted on training rows."""

    mins: np.ndarray
    maxs: np.ndarray

    @classmethod
    def fit(cls, rows) -> FeatureScaler:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        return cls(rows.min(axis=0), rows.max(axis=0))

    def transform(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        span = self.maxs - self.mins
        const = span <= 0
        out = np.pi * (rows - self.mins) / np.where(const, 1.0, span)
        out = np.where(const, np.pi / 2, out)
        # rows outside the fitted range (eval split) are clipped to keep angles in [0, pi]
        return np.clip(out, 0.0, np.pi)


def scale_features(raw, per_feature_min_max) -> FeatureVector:
    """Map each feature affinely so min -> 0 and max -> pi; constant ranges give pi/2."""
    bounds = np.asarray(per_feature_min_max, dtype=float).reshape(-1, 2)
    scaler = FeatureScaler(bounds[:, 0], bounds[:, 1])
    return FeatureVector(scaler.transform(_values(raw)), scaled=True)


def _product_state(angles: np.ndarray) -> np.ndarray:
    """Amplitudes of RY(angles[q]) on each qubit q of |0...0>, rows of a batch."""
    angles = np.atleast_2d(angles)
    out = np.ones((angles.shape[0], 1))
    for q in range(angles.shape[1]):
        single = np.stack([np.cos(angles[:, q] / 2), np.sin(angles[:, q] / 2)], axis=1)
        # qubit q becomes the new high bit
        out = (single[:, :, None] * out[:, None, :]).reshape(angles.shape[0], -1)
    return out.astype(complex)


def qubit_encode(x, n: int) -> StateVector:
    vals = _values(x)
    EncodingSpec("qubit", n).check_dimension(vals.shape[0])
    return StateVector(n, _product_state(vals)[0])


def interleaved_circuit(d: int, n: int) -> Circuit:
    """RY columns over the features, column-major across qubits, CNOT brick between columns.

    Feature ``f`` drives the rotation in parameter slot ``f``; missing tail
    features are simply absent (angle 0).
    """
    columns = math.ceil(d / n)
    gates = []
    for c in range(columns):
        gates.extend(Gate("RY", (q,), param_slot=c * n + q) for q in range(n) if c * n + q < d)
        if c < columns - 1:
            gates.extend(cnot_brick(n, c))
    return Circuit(n, tuple(gates), d)


def interleaved_encode(x, n: int) -> StateVector:
    vals = _values(x)
    d = vals.shape[0]
    EncodingSpec("interleaved", n).check_dimension(d)
    zero = np.zeros((1, 2**n), dtype=complex)
    zero[0, 0] = 1.0
    return StateVector(n, run_batch(interleaved_circuit(d, n), vals, zero)[0])


def amplitude_encode(x, n: int) -> StateVector:
    vals = _values(x)
    EncodingSpec("amplitude", n).check_dimension(vals.shape[0])
    return StateVector(n, _amplitude_rows(vals[None, :], n)[0])


def _amplitude_rows(rows: np.ndarray, n: int) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0):
        raise ValueError("amplitude encoding of an all-zero feature vector is undefined")
    out = np.zeros((rows.shape[0], 2**n), dtype=complex)
    out[:, : rows.shape[1]] = rows / norms[:, None]
    return out


def encode(x, spec: EncodingSpec) -> StateVector:
    fn = {"qubit": qubit_encode, "interleaved": interleaved_encode, "amplitude": amplitude_encode}
    return fn[spec.method](x, spec.n)


def encode_batch(rows, spec: EncodingSpec) -> np.ndarray:
    """Encode every row of a ``(N, d)`` feature matrix; returns ``(N, 2**n)`` amplitudes."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    spec.check_dimension(rows.shape[1])
    if spec.method == "qubit":
        return _product_state(rows)
    if spec.method == "amplitude":
        return _amplitude_rows(rows, spec.n)
    circ = interleaved_circuit(rows.shape[1], spec.n)
    return np.stack([_interleaved_row(circ, r, spec.n) for r in rows])


def _interleaved_row(circ: Circuit, row: np.ndarray, n: int) -> np.ndarray:
    zero = np.zeros((1, 2**n), dtype=complex)
    zero[0, 0] = 1.0
    return run_batch(circ, row, zero)[0]
