import json

import numpy as np
import pytest

from qnnmi.errors import ConfigError, DataError
from qnnmi.runner import (
    PARTIAL_MARKER,
    AggregateTrace,
    RunConfig,
    RunFailure,
    aggregate,
    config_from_dict,
    load_config,
    run_experiment,
    run_single,
    summarize,
)

COLUMNS = ["loss", "accuracy", "I_Di_Mo", "I_Mi_Mo", "I_Di1_Mo", "I_Di2_Mo", "I_Di3_Mo"]


def small(tmp_path, **kw):
    base = {"dataset": {"name": "iris2"}, "training": {"epochs": 3}, "runs": 2, "out": str(tmp_path / "out")}
    base.update(kw)
    return config_from_dict(base)


def synthetic(mi, di=None):
    mi = np.asarray(mi, dtype=float)
    e = len(mi)
    mean = np.zeros((e, len(COLUMNS)))
    mean[:, 0] = np.linspace(1, 0.5, e)
    mean[:, 2] = np.linspace(0, 0.3, e) if di is None else di
    mean[:, 3] = mi
    return AggregateTrace(COLUMNS, np.arange(e), mean, np.zeros_like(mean), 1)


def test_config_defaults():
    cfg = RunConfig()
    assert cfg.runs == 50 and cfg.training.epochs == 100 and cfg.ansatz.l == 4
    assert cfg.columns == ["epoch"] + COLUMNS


def test_config_from_toml(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text(
        'runs = 3\nbase_seed = 7\n[dataset]\nname = "bcw"\n'
        '[ansatz]\nn = 4\nl = 2\n[training]\nepochs = 10\nlearning-rate = 0.05\ngradient = "central-diff"\n'
    )
    cfg = load_config(p)
    assert cfg.dataset.name == "bcw" and cfg.dataset.encoding == "amplitude"
    assert cfg.ansatz.l == 2 and cfg.training.lr == 0.05 and cfg.training.gradient == "central-diff"
    assert cfg.seeds == [7, 8, 9]


def test_config_from_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"dataset": {"name": "diabetes"}, "epochs": 5, "seed": 2}))
    cfg = load_config(p)
    assert cfg.training.epochs == 5 and cfg.base_seed == 2


def test_config_round_trip(tmp_path):
    cfg = small(tmp_path)
    assert config_from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize(
    "bad",
    [
        {"runs": 0},
        {"training": {"epochs": 0}},
        {"training": {"momentum": 0.9}},
        {"colour": "red"},
        {"ansatz": {"n": 4, "l": 0}},
        {"ansatz": {"n": 3}},
        {"training": {"gradient": "adjoint"}},
    ],
)
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        config_from_dict(bad)


def test_config_unparseable(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("runs = = 2")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")


def test_unknown_dataset_is_data_error():
    with pytest.raises(DataError):
        config_from_dict({"dataset": {"name": "mnist"}})


def test_run_single_shape(tmp_path):
    res = run_single(small(tmp_path), seed=0)
    assert res.rows.shape == (4, 8)
    np.testing.assert_array_equal(res.rows[:, 0], [0, 1, 2, 3])
    assert res.thetas.shape == (4, 20)
    assert 0 <= res.eval_accuracy <= 1


def test_experiment_outputs(tmp_path):
    cfg = small(tmp_path)
    agg = run_experiment(cfg)
    out = tmp_path / "out"
    assert sorted(p.name for p in out.iterdir()) == [
        "aggregate.csv", "manifest.json", "run_0.csv", "run_0_theta.json", "run_1.csv", "run_1_theta.json",
    ]
    header = (out / "run_0.csv").read_text().splitlines()[0]
    assert header == "epoch,loss,accuracy,I_Di_Mo,I_Mi_Mo,I_Di1_Mo,I_Di2_Mo,I_Di3_Mo"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seeds"] == [0, 1]
    assert manifest["dataset"]["samples"] == 100
    assert manifest["config"]["training"]["epochs"] == 3
    assert "wall_time_s" in manifest and "fixtures_git_describe" in manifest
    assert np.all(agg.std >= 0)
    back = AggregateTrace.from_csv(out / "aggregate.csv")
    np.testing.assert_array_equal(back.mean, agg.mean)
    np.testing.assert_array_equal(back.std, agg.std)
    assert back.columns == COLUMNS


def test_single_run_aggregate_equals_run(tmp_path):
    cfg = small(tmp_path, runs=1)
    agg = run_experiment(cfg)
    res = run_single(cfg, 0)
    np.testing.assert_array_equal(agg.mean, res.rows[:, 1:])
    assert np.all(agg.std == 0)


def test_identical_seeds_have_zero_std(tmp_path):
    cfg = small(tmp_path)
    agg = run_experiment(cfg, seeds=[4, 4, 4])
    assert np.all(agg.std == 0)
    np.testing.assert_array_equal(agg.mean, run_single(cfg, 4).rows[:, 1:])


def test_aggregate_rejects_ragged(tmp_path):
    a = run_single(small(tmp_path), 0)
    b = run_single(small(tmp_path, training={"epochs": 2}), 1)
    with pytest.raises(Exception):
        aggregate([a, b])


def test_failure_leaves_partial_marker(tmp_path, monkeypatch):
    import qnnmi.runner as runner

    real = runner.run_single

    def flaky(config, seed, dataset=None):
        if seed == 1:
            raise FloatingPointError("boom")
        return real(config, seed, dataset)

    monkeypatch.setattr(runner, "run_single", flaky)
    with pytest.raises(RunFailure) as info:
        run_experiment(small(tmp_path, runs=3))
    assert info.value.seed == 1
    out = tmp_path / "out"
    assert "seed 1" in (out / PARTIAL_MARKER).read_text()
    assert (out / "run_0.csv").exists()
    assert not (out / "aggregate.csv").exists()


def test_worker_pool_matches_serial(tmp_path):
    a = run_experiment(small(tmp_path / "a", runs=3, workers=1))
    b = run_experiment(small(tmp_path / "b", runs=3, workers=2))
    assert a.to_csv() == b.to_csv()


def test_summarize_increasing_series():
    rep = summarize(synthetic(np.linspace(0, 1, 20)))
    assert rep.peak_epoch == 19
    assert not rep.two_phase
    assert rep.delta_I_Di_Mo == pytest.approx(0.3)
    assert rep.spearman_I_Di_Mo == pytest.approx(1.0)
    assert rep.delta_loss == pytest.approx(-0.5)
    assert rep.loss_monotone_smoothed


def test_summarize_tent_series():
    mi = np.concatenate([np.linspace(0.5, 1.0, 11), np.linspace(0.95, 0.6, 20)])
    rep = summarize(synthetic(mi))
    assert rep.peak_epoch == 10
    assert rep.drop_from_peak == pytest.approx(0.4)
    assert rep.two_phase


def test_summarize_small_drop_is_not_two_phase():
    mi = np.concatenate([np.linspace(0.5, 1.0, 11), np.full(10, 0.99)])
    assert not summarize(synthetic(mi)).two_phase


def test_summarize_needs_three_epochs():
    with pytest.raises(ValueError):
        summarize(synthetic([0.1, 0.2]))


def test_summarize_detects_loss_rise():
    agg = synthetic(np.zeros(20))
    agg.mean[10:, 0] += 1.0
    assert not summarize(agg).loss_monotone_smoothed
