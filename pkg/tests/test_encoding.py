import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qnnmi.circuit import Circuit, cnot_brick, run_batch
from qnnmi.encoding import (
    EncodingSpec,
    FeatureScaler,
    FeatureVector,
    amplitude_encode,
    encode,
    encode_batch,
    interleaved_circuit,
    interleaved_encode,
    qubit_encode,
    scale_features,
)
from qnnmi.qcore import StateVector, reduced_density, von_neumann_entropy


def same_up_to_phase(a, b, atol=1e-12):
    return abs(abs(np.vdot(a, b)) - 1) < atol


def test_scale_midpoint_and_endpoints():
    assert scale_features([5.0], [(0, 10)]).values[0] == pytest.approx(np.pi / 2)
    v = scale_features([0.0, 10.0], [(0, 10), (0, 10)]).values
    np.testing.assert_allclose(v, [0, np.pi])


def test_constant_column_maps_to_half_pi():
    rows = np.array([[1.0, 3.0], [2.0, 3.0], [5.0, 3.0]])
    out = FeatureScaler.fit(rows).transform(rows)
    np.testing.assert_allclose(out[:, 1], np.pi / 2)


def test_scaler_clips_unseen_rows():
    sc = FeatureScaler.fit(np.array([[0.0], [1.0]]))
    np.testing.assert_allclose(sc.transform(np.array([[-1.0], [2.0]])), [[0.0], [np.pi]])


def test_scaled_feature_range_enforced():
    with pytest.raises(ValueError):
        FeatureVector(np.array([4.0]), scaled=True)


def test_qubit_encoding_examples():
    np.testing.assert_allclose(qubit_encode([0, 0, 0, 0], 4).amplitudes, StateVector.basis(4).amplitudes)
    assert same_up_to_phase(qubit_encode([np.pi] * 4, 4).amplitudes, StateVector.basis(4, 15).amplitudes)
    expect = np.zeros(16)
    expect[[0, 1]] = 2**-0.5
    np.testing.assert_allclose(qubit_encode([np.pi / 2, 0, 0, 0], 4).amplitudes, expect, atol=1e-15)


def test_qubit_encoding_dimension():
    with pytest.raises(ValueError):
        qubit_encode([0.1, 0.2, 0.3], 4)


def test_interleaved_layout_for_eight_features():
    c = interleaved_circuit(8, 4)
    kinds = [(g.kind, g.targets) for g in c.gates]
    assert kinds[:4] == [("RY", (q,)) for q in range(4)]
    assert kinds[4:6] == [("CNOT", (0, 1)), ("CNOT", (2, 3))]
    assert kinds[6:] == [("RY", (q,)) for q in range(4)]
    assert [g.param_slot for g in c.gates if g.kind == "RY"] == list(range(8))


def test_interleaved_zero_features():
    np.testing.assert_allclose(interleaved_encode(np.zeros(8), 4).amplitudes, StateVector.basis(4).amplitudes)


def test_interleaved_single_feature_matches_qubit_then_brick():
    x = np.zeros(8)
    x[0] = 1.1
    first = qubit_encode([1.1, 0, 0, 0], 4).amplitudes[None, :]
    ref = run_batch(Circuit(4, tuple(cnot_brick(4, 0)), 0), [], first)[0]
    np.testing.assert_allclose(interleaved_encode(x, 4).amplitudes, ref, atol=1e-14)


def test_interleaved_needs_more_features_than_qubits():
    with pytest.raises(ValueError):
        interleaved_encode(np.zeros(4), 4)


def test_interleaved_ragged_tail():
    s = interleaved_encode(np.full(6, 0.4), 4)
    assert len(interleaved_circuit(6, 4).gates) == 4 + 2 + 2
    assert np.linalg.norm(s.amplitudes) == pytest.approx(1.0)


def test_amplitude_examples():
    np.testing.assert_allclose(amplitude_encode([3, 4], 1).amplitudes, [0.6, 0.8])
    s = amplitude_encode(np.arange(1, 10), 4).amplitudes
    assert s.shape == (16,)
    assert np.all(s[9:] == 0) and np.all(s[:9] != 0)
    e = np.zeros(9)
    e[5] = 7.0
    np.testing.assert_allclose(amplitude_encode(e, 4).amplitudes, StateVector.basis(4, 5).amplitudes)


def test_amplitude_rejects_zero_and_oversize():
    with pytest.raises(ValueError):
        amplitude_encode(np.zeros(3), 2)
    with pytest.raises(ValueError):
        amplitude_encode(np.ones(5), 2)


def test_unknown_method():
    with pytest.raises(ValueError):
        EncodingSpec("angle", 4)


@pytest.mark.parametrize("method,d", [("qubit", 4), ("interleaved", 8), ("amplitude", 9)])
def test_batch_matches_single(method, d):
    rng = np.random.default_rng(0)
    rows = rng.uniform(0.01, np.pi, size=(7, d))
    spec = EncodingSpec(method, 4)
    batch = encode_batch(rows, spec)
    for i, r in enumerate(rows):
        np.testing.assert_allclose(batch[i], encode(r, spec).amplitudes, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, np.pi), min_size=4, max_size=4))
def test_qubit_encoding_marginals(x):
    # RY(x)|0> gives p1 = sin^2(x/2) on each qubit independently
    amps = qubit_encode(x, 4).amplitudes
    probs = np.abs(amps) ** 2
    for q in range(4):
        p1 = probs[(np.arange(16) >> q) & 1 == 1].sum()
        assert p1 == pytest.approx(np.sin(x[q] / 2) ** 2, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["qubit", "interleaved", "amplitude"]), st.integers(0, 2**32 - 1))
def test_encodings_normalized(method, seed):
    d = {"qubit": 4, "interleaved": 8, "amplitude": 9}[method]
    x = np.random.default_rng(seed).uniform(0.01, np.pi, d)
    assert np.linalg.norm(encode(x, EncodingSpec(method, 4)).amplitudes) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3), min_size=1, max_size=10))
def test_fitted_scaler_stays_in_range(rows):
    rows = np.array(rows)
    out = FeatureScaler.fit(rows).transform(rows)
    assert np.all(out >= 0) and np.all(out <= np.pi)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=16), st.floats(1e-3, 1e3))
def test_amplitude_scale_invariant(x, c):
    a = amplitude_encode(x, 4).amplitudes
    b = amplitude_encode(np.array(x) * c, 4).amplitudes
    np.testing.assert_allclose(a, b, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, np.pi), min_size=4, max_size=4))
def test_qubit_encoding_is_product(x):
    s = qubit_encode(x, 4)
    for q in range(4):
        assert von_neumann_entropy(reduced_density(s, [q])) == pytest.approx(0.0, abs=1e-9)
