"""Mutual information between input and output legs of an ansatz unitary.

The unitary is turned into a pure state on a doubled register by feeding
one half of ``n`` EPR pairs through it (its Choi state).  Qubits ``0..n-1``
hold the input legs and ``n..2n-1`` the output legs.  The ansatz qubits are
split into the measured subsystem M and the discarded rest D, giving four
leg groups Mi, Di, Mo, Do on the doubled register.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import Circuit, unitary_stack
from .qcore import (
    DensityMatrix,
    StateVector,
    UnitaryMatrix,
    entropy_from_spectrum,
    hermitian_eigenvalues,
    partial_trace,
    reduced_amplitudes,
    von_neumann_entropy,
)


@dataclass(frozen=True)
class SubsystemPartition:
    n: int
    measured: tuple[int, ...] = (0,)

    def __post_init__(self):
        measured = tuple(sorted(set(int(q) for q in self.measured)))
        if not measured or measured[0] < 0 or measured[-1] >= self.n:
            raise ValueError(f"measured qubits {self.measured} invalid for n={self.n}")
        if len(measured) == self.n:
            raise ValueError("discard subsystem would be empty")
        object.__setattr__(self, "measured", measured)

    @property
    def Mi(self) -> tuple[int, ...]:
        return self.measured

    @property
    def Di(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n) if q not in self.measured)

    @property
    def Mo(self) -> tuple[int, ...]:
        return tuple(q + self.n for q in self.Mi)

    @property
    def Do(self) -> tuple[int, ...]:
        return tuple(q + self.n for q in self.Di)

    def discard_labels(self) -> list[str]:
        """Column names for the single discard input qubits, Di1 = lowest index."""
        return [f"I_Di{k + 1}_Mo" for k in range(len(self.Di))]


def choi_state(u) -> StateVector:
    """``(1/sqrt(d)) sum_i |i>_in (U|i>)_out``; amplitude at (in=i, out=j) is ``U[j, i]/sqrt(d)``."""
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix.from_matrix(u)
    d = 2**u.num_qubits
    # basis index = in + d * out, so row-major flattening of U[out, in] is exactly it
    return StateVector(2 * u.num_qubits, u.entries.reshape(-1) / np.sqrt(d))


def _disjoint(a: Iterable[int], b: Iterable[int]):
    a, b = sorted(set(a)), sorted(set(b))
    if not a or not b:
        raise ValueError("subsystems must be nonempty")
    if set(a) & set(b):
        raise ValueError(f"subsystems overlap: {a} and {b}")
    return a, b


def subsystem_entropy(psi: StateVector, qubits: Sequence[int]) -> float:
    """Entropy (bits) of the reduced state of ``psi`` on ``qubits``.

    For a pure state S(A) = S(complement), so the smaller side is diagonalized.
    """
    qubits = sorted(qubits)
    rest = [q for q in range(psi.num_qubits) if q not in qubits]
    if rest and len(rest) < len(qubits):
        qubits = rest
    if not rest:
        return 0.0
    mat = reduced_amplitudes(psi.amplitudes, psi.num_qubits, qubits)
    return entropy_from_spectrum(hermitian_eigenvalues(mat @ mat.conj().T))


def mutual_information(psi: StateVector, a: Iterable[int], b: Iterable[int], clamp: bool = True) -> float:
    """``S(A) + S(B) - S(AB)`` in bits."""
    a, b = _disjoint(a, b)
    value = subsystem_entropy(psi, a) + subsystem_entropy(psi, b) - subsystem_entropy(psi, a + b)
    return max(value, 0.0) if clamp else value


def mutual_information_dm(rho: DensityMatrix, a: Iterable[int], b: Iterable[int]) -> float:
    """Same quantity from a full density matrix by explicit partial traces."""
    a, b = _disjoint(a, b)

    def s(keep):
        return von_neumann_entropy(partial_trace(rho, keep))

    return s(a) + s(b) - s(a + b)


@dataclass(frozen=True)
class MIRecord:
    epoch: int
    I_Di_Mo: float
    I_Mi_Mo: float
    per_qubit: tuple[float, ...]
    raw: tuple[float, float] = (0.0, 0.0)

    def as_row(self) -> dict[str, float]:
        row = {"I_Di_Mo": self.I_Di_Mo, "I_Mi_Mo": self.I_Mi_Mo}
        row.update({f"I_Di{k + 1}_Mo": v for k, v in enumerate(self.per_qubit)})
        return row


def mi_record(psi: StateVector, partition: SubsystemPartition, epoch: int = 0) -> MIRecord:
    p = partition
    cache: dict[tuple[int, ...], float] = {}

    def s(qubits) -> float:
        key = tuple(sorted(qubits))
        if key not in cache:
            cache[key] = subsystem_entropy(psi, key)
        return cache[key]

    def mi(a, b) -> float:
        return s(a) + s(b) - s(tuple(a) + tuple(b))

    raw_d = mi(p.Di, p.Mo)
    raw_m = mi(p.Mi, p.Mo)
    per_qubit = tuple(max(mi((q,), p.Mo), 0.0) for q in p.Di)
    return MIRecord(epoch, max(raw_d, 0.0), max(raw_m, 0.0), per_qubit, (raw_d, raw_m))


def mi_trace(theta_snapshots, circuit: Circuit, partition: SubsystemPartition) -> list[MIRecord]:
    """MI diagnostics for every parameter snapshot (row ``e`` is epoch ``e``)."""
    thetas = np.atleast_2d(np.asarray(theta_snapshots, dtype=float))
    if partition.n != circuit.num_qubits:
        raise ValueError(f"partition is for {partition.n} qubits, circuit has {circuit.num_qubits}")
    records = []
    for epoch, u in enumerate(unitary_stack(circuit, thetas)):
        records.append(mi_record(choi_state(UnitaryMatrix(circuit.num_qubits, u)), partition, epoch))
    return records
