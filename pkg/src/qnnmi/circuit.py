"""Gate/circuit model, brick-wall ansatz and statevector execution.

Two independent execution paths exist on purpose:

* :func:`run_statevector` / :func:`run_batch` contract each gate against the
  state tensor (the fast path used in training).
* :func:`circuit_unitary` embeds each gate as a full ``2**n x 2**n`` matrix
  via Kronecker products and multiplies them together.

Tests compare the two.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .qcore import StateVector, UnitaryMatrix

ROTATIONS = ("RX", "RY", "RZ")
FIXED_1Q = ("H",)
TWO_QUBIT = ("CNOT", "CZ")
GATE_KINDS = ROTATIONS + FIXED_1Q + TWO_QUBIT

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)  # rows/cols indexed by (control, target) with control as the high bit
_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]], dtype=complex)
    raise ValueError(f"{kind} is not a rotation gate")


@dataclass(frozen=True)
class Gate:
    """One gate.  Rotations carry either a ``param_slot`` into theta or a fixed ``angle``.

    For CNOT the targets are ``(control, target)``.
    """

    kind: str
    targets: tuple[int, ...]
    param_slot: Optional[int] = None
    angle: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if any(t < 0 for t in self.targets):
            raise ValueError(f"negative target in {self.targets}")
        if self.kind in TWO_QUBIT:
            if len(self.targets) != 2:
                raise ValueError(f"{self.kind} needs two targets, got {self.targets}")
            if self.targets[0] == self.targets[1]:
                raise ValueError(f"{self.kind} targets must be distinct, got {self.targets}")
        elif len(self.targets) != 1:
            raise ValueError(f"{self.kind} acts on one qubit, got targets {self.targets}")
        if self.kind in ROTATIONS:
            if (self.param_slot is None) == (self.angle is None):
                raise ValueError(f"{self.kind} needs exactly one of param_slot / angle")
        elif self.param_slot is not None or self.angle is not None:
            raise ValueError(f"{self.kind} takes no parameter")

    @property
    def parameterized(self) -> bool:
        return self.param_slot is not None

    def matrix(self, theta=None) -> np.ndarray:
        """2x2 or 4x4 matrix; two-qubit matrices index ``targets[0]`` as the high bit."""
        if self.kind in ROTATIONS:
            angle = self.angle if self.param_slot is None else theta[self.param_slot]
            return rotation_matrix(self.kind, float(angle))
        if self.kind == "H":
            return _H
        return _CNOT if self.kind == "CNOT" else _CZ

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "targets": list(self.targets)}
        if self.param_slot is not None:
            d["param_slot"] = self.param_slot
        if self.angle is not None:
            d["angle"] = self.angle
        return d


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    num_params: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        for g in self.gates:
            if max(g.targets) >= self.num_qubits:
                raise ValueError(f"gate {g} targets a qubit >= {self.num_qubits}")
            if g.param_slot is not None and not 0 <= g.param_slot < self.num_params:
                raise ValueError(f"gate {g} uses slot outside [0, {self.num_params})")

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "num_params": self.num_params,
            "gates": [g.to_dict() for g in self.gates],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Circuit:
        gates = [
            Gate(g["kind"], tuple(g["targets"]), g.get("param_slot"), g.get("angle"))
            for g in d["gates"]
        ]
        return cls(int(d["num_qubits"]), tuple(gates), int(d["num_params"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def draw(self) -> str:
        return draw(self)


@dataclass(frozen=True)
class AnsatzSpec:
    n: int = 4
    l: int = 4  # noqa: E741
    measured_qubit: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"ansatz needs n >= 2, got {self.n}")
        if self.l < 1:
            raise ValueError(f"ansatz needs l >= 1, got {self.l}")
        if not 0 <= self.measured_qubit < self.n:
            raise ValueError(f"measured_qubit {self.measured_qubit} outside 0..{self.n - 1}")


def cnot_brick(n: int, parity: int) -> list[Gate]:
    """CNOTs on (0,1),(2,3),... for even parity, (1,2),(3,4),... for odd."""
    return [Gate("CNOT", (q, q + 1)) for q in range(parity % 2, n - 1, 2)]


def build_brickwall(spec: AnsatzSpec) -> Circuit:
    """``l`` repetitions of [RY column, CNOT brick], then a closing RY column."""
    n = spec.n
    gates: list[Gate] = []
    slot = 0
    for rep in range(spec.l + 1):
        for q in range(n):
            gates.append(Gate("RY", (q,), param_slot=slot))
            slot += 1
        if rep < spec.l:
            gates.extend(cnot_brick(n, rep))
    return Circuit(n, tuple(gates), slot)


# -- tensor-contraction path ------------------------------------------------


def _apply(t: np.ndarray, mats: np.ndarray, targets: tuple[int, ...], n: int) -> np.ndarray:
    """Apply a gate to a ``(K, B, 2**n)`` amplitude stack.

    ``mats`` is one ``(2**k, 2**k)`` matrix shared by all K, or a ``(K, 2**k, 2**k)``
    stack of single-qubit matrices, one per K (a different theta per K).
    """
    k_dim, b_dim = t.shape[:2]
    k = len(targets)
    # axis 2+a holds qubit n-1-a; the gate matrix has targets[0] as its high bit
    axes = [2 + n - 1 - q for q in targets]
    tail = list(range(2 + n - k, 2 + n))
    x = np.moveaxis(t.reshape((k_dim, b_dim) + (2,) * n), axes, tail)
    x = x.reshape(k_dim, b_dim, 2 ** (n - k), 2**k)
    if mats.ndim == 2:
        x = x @ mats.T
    else:
        m = mats[:, None, None, :, :]
        x0, x1 = x[..., 0], x[..., 1]
        x = np.stack([m[..., 0, 0] * x0 + m[..., 0, 1] * x1, m[..., 1, 0] * x0 + m[..., 1, 1] * x1], -1)
    x = np.moveaxis(x.reshape((k_dim, b_dim) + (2,) * n), tail, axes)
    return x.reshape(k_dim, b_dim, 2**n)


def _gate_stack(gate: Gate, thetas: np.ndarray) -> np.ndarray:
    if not gate.parameterized:
        return gate.matrix()
    angles = thetas[:, gate.param_slot]
    c, s = np.cos(angles / 2), np.sin(angles / 2)
    if gate.kind == "RY":
        return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2).astype(complex)
    return np.stack([rotation_matrix(gate.kind, a) for a in angles])


def _evolve(circuit: Circuit, thetas: np.ndarray, t: np.ndarray) -> np.ndarray:
    for g in circuit.gates:
        t = _apply(t, _gate_stack(g, thetas), g.targets, circuit.num_qubits)
    return t


def _check_theta(circuit: Circuit, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.shape[0] != circuit.num_params:
        raise ValueError(f"circuit takes {circuit.num_params} parameters, got {theta.shape[0]}")
    return theta


def apply_gate(state: StateVector, gate: Gate, params=()) -> StateVector:
    if max(gate.targets) >= state.num_qubits:
        raise ValueError(f"gate {gate} out of range for {state.num_qubits} qubits")
    if gate.parameterized and gate.param_slot >= len(params):
        raise ValueError(f"gate {gate} needs parameter slot {gate.param_slot}")
    out = _apply(state.amplitudes[None, None, :], gate.matrix(params), gate.targets, state.num_qubits)
    return StateVector(state.num_qubits, out[0, 0])


def run_batch(circuit: Circuit, theta, states: np.ndarray) -> np.ndarray:
    """Run ``circuit`` on each row of ``states`` (shape ``(B, 2**n)``)."""
    theta = _check_theta(circuit, theta)
    states = np.asarray(states, dtype=complex)
    if states.ndim != 2 or states.shape[1] != 2**circuit.num_qubits:
        raise ValueError(f"states must have shape (B, {2**circuit.num_qubits})")
    return _evolve(circuit, theta[None, :], states[None])[0]


def unitary_stack(circuit: Circuit, thetas) -> np.ndarray:
    """``U(theta_k)`` for each row of ``thetas`` (shape ``(K, num_params)``), as ``(K, d, d)``.

    Evolves all basis states under all K parameter vectors in one pass.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if thetas.shape[1] != circuit.num_params:
        raise ValueError(f"circuit takes {circuit.num_params} parameters, got {thetas.shape[1]}")
    d = 2**circuit.num_qubits
    basis = np.broadcast_to(np.eye(d, dtype=complex), (thetas.shape[0], d, d))
    # row r of the result is U|r>, i.e. column r of U
    return np.swapaxes(_evolve(circuit, thetas, basis), 1, 2)


def run_statevector(circuit: Circuit, theta, state: StateVector) -> StateVector:
    if state.num_qubits != circuit.num_qubits:
        raise ValueError(f"circuit has {circuit.num_qubits} qubits, state has {state.num_qubits}")
    out = run_batch(circuit, theta, state.amplitudes[None, :])
    return StateVector(state.num_qubits, out[0])


# -- full-matrix path -------------------------------------------------------


@lru_cache(maxsize=None)
def _two_qubit_embedding(targets: tuple[int, int], n: int):
    """Index arrays mapping a 4x4 gate onto the full ``2**n`` space."""
    d = 2**n
    idx = np.arange(d)
    hi, lo = targets
    sub = ((idx >> hi) & 1) * 2 + ((idx >> lo) & 1)
    rest = idx & ~((1 << hi) | (1 << lo))
    same_rest = rest[:, None] == rest[None, :]
    return sub, same_rest


def embed_gate(gate: Gate, n: int, theta=None) -> np.ndarray:
    mat = gate.matrix(theta)
    if len(gate.targets) == 1:
        (q,) = gate.targets
        # qubit 0 is the least significant, i.e. the rightmost Kronecker factor
        return np.kron(np.kron(np.eye(2 ** (n - 1 - q)), mat), np.eye(2**q))
    sub, same_rest = _two_qubit_embedding(gate.targets, n)
    return np.where(same_rest, mat[sub[:, None], sub[None, :]], 0.0)


def circuit_unitary(circuit: Circuit, theta) -> UnitaryMatrix:
    theta = _check_theta(circuit, theta)
    n = circuit.num_qubits
    u = np.eye(2**n, dtype=complex)
    for g in circuit.gates:
        u = embed_gate(g, n, theta) @ u
    return UnitaryMatrix(n, u)


def measure_probs(state: StateVector, qubit: int) -> tuple[float, float]:
    """Z-basis outcome probabilities ``(p0, p1)`` of one qubit."""
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.num_qubits} qubits")
    p1 = float(probs_one(state.amplitudes[None, :], qubit)[0])
    return 1.0 - p1, p1


def probs_one(batch: np.ndarray, qubit: int) -> np.ndarray:
    """P(qubit = 1) for each row of a ``(B, 2**n)`` amplitude batch."""
    mask = (np.arange(batch.shape[1]) >> qubit) & 1
    return np.sum(np.abs(batch[:, mask == 1]) ** 2, axis=1)


def draw(circuit: Circuit) -> str:
    """Plain-text diagram, one row per qubit (qubit 0 on top), gates packed into moments."""
    n = circuit.num_qubits
    moments: list[list[str]] = []
    depth = [0] * n
    for g in circuit.gates:
        lo, hi = min(g.targets), max(g.targets)
        col = max(depth[lo : hi + 1])
        if col == len(moments):
            moments.append(["-"] * n)
        cells = moments[col]
        if g.kind in ("CNOT", "CZ"):
            a, b = g.targets
            cells[a], cells[b] = "@", ("X" if g.kind == "CNOT" else "@")
            for q in range(lo + 1, hi):
                cells[q] = "|"
        elif g.parameterized:
            cells[lo] = f"{g.kind}(t{g.param_slot})"
        elif g.angle is not None:
            cells[lo] = f"{g.kind}({g.angle:.3g})"
        else:
            cells[lo] = g.kind
        for q in range(lo, hi + 1):
            depth[q] = col + 1
    width = len(f"q{n - 1}: ")
    rows = [f"q{q}: ".ljust(width) for q in range(n)]
    for cells in moments:
        w = max(len(c) for c in cells)
        for q in range(n):
            rows[q] += "-" + cells[q].center(w, "-") + "-"
    return "\n".join(rows)
