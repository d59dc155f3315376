from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qnnmi.datasets import DatasetSpec, Sample, load_dataset, split
from qnnmi.encoding import FeatureVector
from qnnmi.errors import DataError


def samples(counts):
    out = []
    for cls, k in enumerate(counts):
        for i in range(k):
            out.append(Sample(FeatureVector(np.array([float(i), float(cls)])), (1, 0) if cls == 0 else (0, 1)))
    return out


def test_iris2_counts():
    ds = load_dataset(DatasetSpec("iris2"))
    assert len(ds) == 100
    assert ds.class_counts == {0: 50, 1: 50}
    assert ds.skipped_class == 50
    assert all(len(s.features) == 4 for s in ds)


def test_diabetes_shape():
    ds = load_dataset(DatasetSpec("diabetes"))
    assert len(ds) == 768
    assert all(len(s.features) == 8 for s in ds)
    assert ds.class_counts == {0: 500, 1: 268}


def test_bcw_drops_missing_rows():
    ds = load_dataset(DatasetSpec("bcw"))
    assert ds.rows_read == 699
    assert ds.dropped_missing == 16
    assert len(ds) == 683
    assert ds.class_counts == {0: 444, 1: 239}
    x, _ = ds.arrays()
    assert x.shape == (683, 9) and x.min() >= 1


def test_vendored_checksums():
    assert load_dataset(DatasetSpec("iris2")).sha256.startswith("d64296e8")
    assert load_dataset(DatasetSpec("diabetes")).sha256.startswith("bf81d06e")
    assert load_dataset(DatasetSpec("bcw")).sha256.startswith("402c5853")


def test_reload_is_identical():
    a = load_dataset(DatasetSpec("bcw"))
    b = load_dataset(DatasetSpec("bcw"))
    np.testing.assert_array_equal(a.arrays()[0], b.arrays()[0])
    assert [s.label for s in a] == [s.label for s in b]


def test_encoding_fixed_by_dataset():
    assert DatasetSpec("diabetes").encoding == "interleaved"
    with pytest.raises(DataError):
        DatasetSpec("iris2", encoding="amplitude")
    with pytest.raises(DataError):
        DatasetSpec("mnist")


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_dataset(DatasetSpec("iris2", path=str(tmp_path / "nope.data")))


def test_malformed_row_reports_line(tmp_path):
    p = tmp_path / "iris.data"
    p.write_text("5.1,3.5,1.4,0.2,Iris-setosa\n5.0,abc,1.4,0.2,Iris-versicolor\n")
    with pytest.raises(DataError, match=r"iris.data:2"):
        load_dataset(DatasetSpec("iris2", path=str(p)))


def test_short_row(tmp_path):
    p = tmp_path / "iris.data"
    p.write_text("5.1,3.5,1.4,Iris-setosa\n")
    with pytest.raises(DataError, match=":1"):
        load_dataset(DatasetSpec("iris2", path=str(p)))


def test_unknown_label(tmp_path):
    p = tmp_path / "bcw.data"
    p.write_text("1,5,1,1,1,2,1,3,1,1,3\n")
    with pytest.raises(DataError, match="unknown class"):
        load_dataset(DatasetSpec("bcw", path=str(p)))


def test_sample_label_must_be_one_hot():
    with pytest.raises(ValueError):
        Sample(FeatureVector(np.zeros(2)), (1, 1))


def test_split_100():
    for seed in range(5):
        tr, ev = split(samples([50, 50]), 0.8, seed)
        assert Counter(s.cls for s in tr) == {0: 40, 1: 40}
        assert Counter(s.cls for s in ev) == {0: 10, 1: 10}


def test_split_deterministic():
    data = samples([30, 20])
    assert split(data, 0.8, 3) == split(data, 0.8, 3)
    assert split(data, 0.8, 3) != split(data, 0.8, 4)


def test_split_two_samples():
    tr, ev = split(samples([1, 1]), 0.5, 0)
    assert len(tr) == len(ev) == 1


def test_split_errors():
    with pytest.raises(ValueError):
        split(samples([5, 5]), 1.0, 0)
    with pytest.raises(ValueError):
        split(samples([1]), 0.5, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60), st.floats(0.1, 0.9), st.integers(0, 1000))
def test_split_stratified(n0, n1, frac, seed):
    data = samples([n0, n1])
    try:
        tr, ev = split(data, frac, seed)
    except ValueError:
        return
    assert len(tr) + len(ev) == n0 + n1
    assert len(tr) == int(np.floor(frac * (n0 + n1) + 0.5))
    got = Counter(s.cls for s in tr)
    for c, k in ((0, n0), (1, n1)):
        assert abs(got[c] - frac * k) <= 1
    assert set(map(id, tr)).isdisjoint(map(id, ev))
