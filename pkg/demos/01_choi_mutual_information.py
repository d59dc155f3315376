"""Mutual information between the legs of a few hand-picked unitaries.

Each unitary is turned into its Choi state (half of n EPR pairs pushed
through it), then we ask how much the measured output qubit Mo knows about
the measured input qubit Mi and about the discarded inputs Di.
"""
import numpy as np

from qnnmi.circuit import AnsatzSpec, Circuit, Gate, build_brickwall, circuit_unitary
from qnnmi.infodyn import SubsystemPartition, choi_state, mi_record

part = SubsystemPartition(4, measured=(0,))
print("Mi", part.Mi, "Di", part.Di, "Mo", part.Mo, "Do", part.Do)


def show(name, u):
    rec = mi_record(choi_state(u), part)
    per_q = " ".join(f"{v:.3f}" for v in rec.per_qubit)
    print(f"{name:28s} I(Mi:Mo)={rec.I_Mi_Mo:.3f}  I(Di:Mo)={rec.I_Di_Mo:.3f}  per-qubit [{per_q}]")


# identity: Mo is a perfect copy of Mi, 2 bits, nothing from Di
show("identity", np.eye(16))

# swap qubits 0 and 1: Mo now carries input qubit 1 instead
swap = Circuit(4, (Gate("CNOT", (0, 1)), Gate("CNOT", (1, 0)), Gate("CNOT", (0, 1))), 0)
show("swap(0,1)", circuit_unitary(swap, []).entries)

# the ansatz at theta = 0 is just its CNOT bricks; qubit 0 is only ever a control,
# so it keeps its Z value but gets dephased -> exactly 1 bit
brick = build_brickwall(AnsatzSpec(4, 4))
show("brickwall, theta = 0", circuit_unitary(brick, np.zeros(20)).entries)

# random angles of growing size; small ones stay close to the theta = 0 value
rng = np.random.default_rng(0)
for scale in (0.1, 0.5, np.pi):
    theta = rng.normal(0, scale, 20) if scale < np.pi else rng.uniform(-np.pi, np.pi, 20)
    show(f"brickwall, random ({scale:.2g})", circuit_unitary(brick, theta).entries)

print(brick.draw())
