"""Forward pass, cross-entropy loss, gradients, Adam and the epoch loop.

The classifier reads the Z-basis outcome of one measured qubit: class 0 is
outcome 0, class 1 is outcome 1.  The loss is the usual negated cross
entropy, ``-ln h_y``, so that it decreases as predictions improve.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .circuit import ROTATIONS, Circuit, probs_one, run_batch, unitary_stack
from .qcore import StateVector

PROB_CLAMP = 1e-12
SHIFT = np.pi / 2
GRADIENT_METHODS = ("shift", "central-diff")
INIT_METHODS = ("uniform", "normal")


@dataclass(frozen=True)
class Hypothesis:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12) or abs(p.sum() - 1) > 1e-9:
            raise ValueError(f"invalid class probabilities {p}")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def label(self) -> int:
        return int(np.argmax(self.probs))


def forward(x: StateVector, circuit: Circuit, theta, measured_qubit: int = 0) -> Hypothesis:
    if x.num_qubits != circuit.num_qubits:
        raise ValueError(f"state has {x.num_qubits} qubits, circuit has {circuit.num_qubits}")
    out = run_batch(circuit, theta, x.amplitudes[None, :])
    p1 = float(probs_one(out, measured_qubit)[0])
    return Hypothesis(np.array([1.0 - p1, p1]))


def cross_entropy(h: Hypothesis, y) -> float:
    """``-sum_k y_k ln(max(h_k, 1e-12))``."""
    y = np.asarray(y, dtype=float)
    return float(-np.sum(y * np.log(np.maximum(h.probs, PROB_CLAMP))))


def grad_central_difference(loss_at: Callable, theta, dtheta: float = 1e-3, vectorized: bool = False):
    """Per-coordinate ``[L(theta + dtheta/2 e_j) - L(theta - dtheta/2 e_j)] / dtheta``.

    With ``vectorized=True`` ``loss_at`` receives all ``2P`` shifted parameter
    vectors as one ``(2P, P)`` array and must return ``2P`` losses.
    """
    if dtheta <= 0:
        raise ValueError("dtheta must be positive")
    theta = np.asarray(theta, dtype=float)
    shifts = np.eye(theta.shape[0]) * (dtheta / 2)
    if vectorized:
        losses = np.asarray(loss_at(np.concatenate([theta + shifts, theta - shifts])))
        plus, minus = np.split(losses, 2)
        return (plus - minus) / dtheta
    return np.array(
        [(loss_at(theta + s) - loss_at(theta - s)) / dtheta for s in shifts]
    )


def _check_shiftable(circuit: Circuit) -> None:
    for g in circuit.gates:
        if g.parameterized and g.kind not in ROTATIONS:
            raise ValueError(f"parameter shift needs a rotation gate in slot {g.param_slot}, got {g.kind}")


@dataclass
class BinaryClassifier:
    """A circuit, a measured qubit and an encoded data batch.

    ``states`` is ``(N, 2**n)`` encoded amplitudes and ``labels`` the integer
    classes (0/1).  All evaluations are batched over parameter vectors.
    """

    circuit: Circuit
    states: np.ndarray
    labels: np.ndarray
    measured_qubit: int = 0

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=complex)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.states.shape[0] != self.labels.shape[0]:
            raise ValueError("states and labels differ in length")
        if not 0 <= self.measured_qubit < self.circuit.num_qubits:
            raise ValueError(f"measured qubit {self.measured_qubit} out of range")
        mask = (np.arange(2**self.circuit.num_qubits) >> self.measured_qubit) & 1
        self._one = mask == 1

    def p1_many(self, thetas) -> np.ndarray:
        """P(class 1) with shape ``(K, N)`` for ``K`` parameter vectors."""
        us = unitary_stack(self.circuit, thetas)
        out = np.einsum("kij,nj->kni", us[:, self._one, :], self.states)
        return np.sum(out.real**2 + out.imag**2, axis=2)

    def correct_prob(self, p1: np.ndarray) -> np.ndarray:
        return np.where(self.labels == 1, p1, 1.0 - p1)

    def loss_many(self, thetas) -> np.ndarray:
        h = self.correct_prob(self.p1_many(thetas))
        return -np.mean(np.log(np.maximum(h, PROB_CLAMP)), axis=-1)

    def loss(self, theta) -> float:
        return float(self.loss_many(np.asarray(theta)[None, :])[0])

    def accuracy(self, theta) -> float:
        p1 = self.p1_many(np.asarray(theta)[None, :])[0]
        return float(np.mean((p1 > 0.5).astype(int) == self.labels))

    def grad_shift(self, theta, with_base: bool = False):
        """Exact gradient of the mean loss via the +-pi/2 parameter-shift rule.

        With ``with_base=True`` also returns ``p1`` at ``theta`` itself,
        computed in the same batched pass.
        """
        _check_shiftable(self.circuit)
        theta = np.asarray(theta, dtype=float)
        p = theta.shape[0]
        shifts = np.eye(p) * SHIFT
        p1 = self.p1_many(np.concatenate([theta[None, :], theta + shifts, theta - shifts]))
        base, plus, minus = p1[0], p1[1 : p + 1], p1[p + 1 :]
        dp1 = (plus - minus) / 2
        h = self.correct_prob(base)
        dh = np.where(self.labels == 1, dp1, -dp1)
        # the clamped loss is flat where h < clamp
        coeff = np.where(h > PROB_CLAMP, -1.0 / np.maximum(h, PROB_CLAMP), 0.0)
        grad = np.mean(dh * coeff, axis=1)
        return (grad, base) if with_base else grad

    def grad_central(self, theta, dtheta: float = 1e-3):
        return grad_central_difference(self.loss_many, theta, dtheta, vectorized=True)


def grad_parameter_shift(
    circuit: Circuit, theta, states, labels, measured_qubit: int = 0
) -> np.ndarray:
    """Gradient of the mean cross-entropy loss over ``(states, labels)``."""
    return BinaryClassifier(circuit, states, labels, measured_qubit).grad_shift(theta)


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, num_params: int, **hyper) -> AdamState:
        return cls(np.zeros(num_params), np.zeros(num_params), 0, **hyper)


def adam_step(theta, grad, state: AdamState):
    """One Adam update with bias correction; returns ``(theta', state')``."""
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if not theta.shape == grad.shape == state.m.shape:
        raise ValueError(f"length mismatch: theta {theta.shape}, grad {grad.shape}, state {state.m.shape}")
    t = state.t + 1
    m = state.beta1 * state.m + (1 - state.beta1) * grad
    v = state.beta2 * state.v + (1 - state.beta2) * grad * grad
    m_hat = m / (1 - state.beta1**t)
    v_hat = v / (1 - state.beta2**t)
    new_theta = theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_theta, replace(state, m=m, v=v, t=t)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    lr: float = 0.01
    gradient: str = "shift"
    dtheta: float = 1e-3
    seed: int = 0
    # small-angle start near the identity circuit; "uniform" with scale pi
    # samples the whole period instead
    init: str = "normal"
    init_scale: float = 0.1

    def __post_init__(self):
        if self.init not in INIT_METHODS:
            raise ValueError(f"init must be one of {INIT_METHODS}, got {self.init!r}")
        if self.init_scale < 0:
            raise ValueError("init_scale must be >= 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.gradient not in GRADIENT_METHODS:
            raise ValueError(f"gradient must be one of {GRADIENT_METHODS}, got {self.gradient!r}")
        if self.dtheta <= 0:
            raise ValueError("dtheta must be positive")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    mean_loss: float
    train_accuracy: float
    theta_snapshot: np.ndarray


@dataclass
class TrainingTrace:
    records: list[EpochRecord] = field(default_factory=list)

    @property
    def thetas(self) -> np.ndarray:
        return np.stack([r.theta_snapshot for r in self.records])

    @property
    def losses(self) -> np.ndarray:
        return np.array([r.mean_loss for r in self.records])

    @property
    def accuracies(self) -> np.ndarray:
        return np.array([r.train_accuracy for r in self.records])


def init_theta(num_params: int, seed: int, init: str = "normal", scale: float = 0.1) -> np.ndarray:
    """Uniform(-scale, scale) or Normal(0, scale) starting angles."""
    rng = np.random.default_rng(seed)
    if init == "uniform":
        return rng.uniform(-scale, scale, num_params)
    if init == "normal":
        return rng.normal(0.0, scale, num_params)
    raise ValueError(f"unknown init {init!r}")


def train(
    model: BinaryClassifier, config: TrainConfig, theta0: Optional[np.ndarray] = None
) -> TrainingTrace:
    """Full-batch training; record 0 is the untrained snapshot."""
    if model.states.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")
    if theta0 is None:
        theta = init_theta(model.circuit.num_params, config.seed, config.init, config.init_scale)
    else:
        theta = np.array(theta0, dtype=float)
    adam = AdamState.zeros(theta.shape[0], lr=config.lr)
    trace = TrainingTrace()
    for epoch in range(config.epochs + 1):
        if config.gradient == "shift":
            grad, p1 = model.grad_shift(theta, with_base=True)
        else:
            p1 = model.p1_many(theta[None, :])[0]
            grad = model.grad_central(theta, config.dtheta) if epoch < config.epochs else None
        h = model.correct_prob(p1)
        loss = float(-np.mean(np.log(np.maximum(h, PROB_CLAMP))))
        acc = float(np.mean((p1 > 0.5).astype(int) == model.labels))
        trace.records.append(EpochRecord(epoch, loss, acc, theta.copy()))
        if epoch < config.epochs:
            theta, adam = adam_step(theta, grad, adam)
    return trace
