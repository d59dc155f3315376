"""One training run on setosa vs versicolor, with MI read off every 10 epochs."""
import numpy as np

from qnnmi.circuit import AnsatzSpec, build_brickwall
from qnnmi.datasets import DatasetSpec, as_arrays, load_dataset, split
from qnnmi.encoding import EncodingSpec, FeatureScaler, encode_batch
from qnnmi.infodyn import SubsystemPartition, mi_trace
from qnnmi.training import BinaryClassifier, TrainConfig, train

ds = load_dataset(DatasetSpec("iris2"))
print(ds.report())

train_s, eval_s = split(ds.samples, 0.8, seed=0)
x_tr, y_tr = as_arrays(train_s)
x_ev, y_ev = as_arrays(eval_s)

# angles in [0, pi], fitted on the training rows only
scaler = FeatureScaler.fit(x_tr)
enc = EncodingSpec("qubit", 4)
circuit = build_brickwall(AnsatzSpec(4, 4))
model = BinaryClassifier(circuit, encode_batch(scaler.transform(x_tr), enc), y_tr)

trace = train(model, TrainConfig(epochs=100, seed=0))
mi = mi_trace(trace.thetas, circuit, SubsystemPartition(4, (0,)))

print("epoch   loss    acc   I(Di:Mo) I(Mi:Mo)")
for rec, m in zip(trace.records, mi):
    if rec.epoch % 10 == 0:
        print(f"{rec.epoch:5d} {rec.mean_loss:7.4f} {rec.train_accuracy:6.3f} {m.I_Di_Mo:8.4f} {m.I_Mi_Mo:8.4f}")

held_out = BinaryClassifier(circuit, encode_batch(scaler.transform(x_ev), enc), y_ev)
print("held-out accuracy:", held_out.accuracy(trace.thetas[-1]))
print("largest |theta| after training:", np.abs(trace.thetas[-1]).max().round(3))
