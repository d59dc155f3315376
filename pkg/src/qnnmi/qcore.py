"""Dense quantum-state primitives.

Basis-index convention: qubit 0 is the least-significant bit of the basis
index, so on two qubits ``|q1 q0>`` has index ``2*q1 + q0``.  Every other
module relies on this.

Entropies are reported in bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericalError

NORM_TOL = 1e-9
HERMITIAN_TOL = 1e-9
UNITARY_TOL = 1e-8
EIG_CUTOFF = 1e-12
NEG_EIG_TOL = 1e-9

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def _num_qubits_for(dim: int) -> int:
    m = int(dim).bit_length() - 1
    if dim < 2 or 1 << m != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return m


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state on ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape[0] != 2**self.num_qubits or self.num_qubits < 1:
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got {amps.shape[0]}"
            )
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm:.12g})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> StateVector:
        amps = np.ravel(np.asarray(amplitudes, dtype=complex))
        return cls(_num_qubits_for(amps.shape[0]), amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int = 0) -> StateVector:
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.num_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace matrix on ``num_qubits`` qubits.

    Positivity is only checked when the spectrum is computed, since that
    needs an eigendecomposition.
    """

    num_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        rho = _frozen(self.entries)
        d = 2**self.num_qubits
        if rho.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace is {tr:.12g}, expected 1")
        object.__setattr__(self, "entries", rho)

    @classmethod
    def from_matrix(cls, entries) -> DensityMatrix:
        rho = np.asarray(entries, dtype=complex)
        return cls(_num_qubits_for(rho.shape[0]), rho)


@dataclass(frozen=True)
class UnitaryMatrix:
    num_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        u = _frozen(self.entries)
        d = 2**self.num_qubits
        if u.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {u.shape}")
        residual = np.max(np.abs(u.conj().T @ u - np.eye(d)))
        if residual > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {residual:.3g})")
        object.__setattr__(self, "entries", u)

    @classmethod
    def from_matrix(cls, entries) -> UnitaryMatrix:
        u = np.asarray(entries, dtype=complex)
        return cls(_num_qubits_for(u.shape[0]), u)


def _check_keep(keep: Iterable[int], num_qubits: int) -> list[int]:
    keep = sorted(int(q) for q in keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate qubit in keep set {keep}")
    if keep[0] < 0 or keep[-1] >= num_qubits:
        raise ValueError(f"keep set {keep} out of range for {num_qubits} qubits")
    return keep


def reduced_amplitudes(amplitudes: np.ndarray, num_qubits: int, keep: Sequence[int]) -> np.ndarray:
    """Reshape amplitudes to a ``(2**len(keep), rest)`` matrix.

    Row index follows the LSB convention restricted to ``keep`` (``keep[0]``
    is the low bit).  ``M @ M^dag`` is the reduced density matrix and the
    squared singular values of ``M`` are its spectrum.
    """
    m = num_qubits
    tensor = np.asarray(amplitudes).reshape((2,) * m)
    # numpy axis a holds qubit m-1-a
    kept_axes = [m - 1 - q for q in reversed(keep)]
    rest_axes = [a for a in range(m) if a not in kept_axes]
    return tensor.transpose(kept_axes + rest_axes).reshape(2 ** len(keep), -1)


def reduced_density(state: StateVector, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state of ``state`` on the qubits in ``keep``."""
    keep = _check_keep(keep, state.num_qubits)
    mat = reduced_amplitudes(state.amplitudes, state.num_qubits, keep)
    rho = mat @ mat.conj().T
    return DensityMatrix(len(keep), 0.5 * (rho + rho.conj().T))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every qubit not in ``keep`` from a (possibly mixed) state."""
    m = rho.num_qubits
    keep = _check_keep(keep, m)
    tensor = rho.entries.reshape((2,) * (2 * m))
    # row axis a and column axis m+a both hold qubit m-1-a; trace from the
    # highest axis down so lower axis numbers stay valid
    traced = [m - 1 - q for q in range(m) if q not in keep]
    width = m
    for a in sorted(traced, reverse=True):
        tensor = np.trace(tensor, axis1=a, axis2=a + width)
        width -= 1
    k = len(keep)
    return DensityMatrix(k, tensor.reshape(2**k, 2**k))


def _as_matrix(h) -> np.ndarray:
    if isinstance(h, DensityMatrix):
        return h.entries
    return np.asarray(h, dtype=complex)


@lru_cache(maxsize=None)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Pairings covering every (p, q) once per sweep, n // 2 disjoint pairs per step."""
    players = list(range(n + n % 2))
    m = len(players)
    steps = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if max(p, q) < n]
        steps.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(steps)


def hermitian_eigh(h, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues in descending
    order and eigenvectors as the matching columns.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies an ordinary real Jacobi rotation in the ``(p, q)`` plane.  Pivots
    are visited in round-robin order, so each step rotates ``n // 2``
    disjoint planes at once as a single unitary similarity transform.
    """
    a = np.array(_as_matrix(h), dtype=complex)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if n else 1.0
    if np.max(np.abs(a - a.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    threshold = tol * scale
    offdiag = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps):
        if np.linalg.norm(a[offdiag]) < threshold:
            break
        for p, q in _round_robin(n):
            apq = a[p, q]
            mag = np.abs(apq)
            phase = np.where(mag > 0, apq / np.where(mag > 0, mag, 1.0), 1.0)
            theta = 0.5 * np.arctan2(2.0 * mag, a[q, q].real - a[p, p].real)
            c, s = np.cos(theta), np.sin(theta)
            # per plane: diag(1, conj(phase)) @ [[c, s], [-s, c]]
            rot = np.eye(n, dtype=complex)
            rot[p, p] = c
            rot[p, q] = s
            rot[q, p] = -s * phase.conj()
            rot[q, q] = c * phase.conj()
            a = rot.conj().T @ a @ rot
            a[p, q] = a[q, p] = 0.0
            v = v @ rot
    else:
        off = np.linalg.norm(a[offdiag])
        if off >= threshold:
            raise NumericalError(
                f"Jacobi eigensolver did not converge in {max_sweeps} sweeps (off-norm {off:.3g})"
            )

    w = np.diag(a).real
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigenvalues(h) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, descending."""
    return hermitian_eigh(h)[0]


def entropy_from_spectrum(eigenvalues: np.ndarray) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size and lam.min() < -NEG_EIG_TOL:
        raise NumericalError(f"density matrix has negative eigenvalue {lam.min():.3g}")
    lam = lam[lam > EIG_CUTOFF]
    return float(max(-np.sum(lam * np.log2(lam)), 0.0))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -tr(rho log2 rho), in bits."""
    return entropy_from_spectrum(hermitian_eigenvalues(rho.entries))
