"""Runner: config resolution, seeding, pipeline wiring against a
hand-built oracle, determinism, and failure context."""

import json
import os

import numpy as np
import pytest

from qamm.backtest import StrategySpec, metrics, simulate
from qamm.data import PlantedSignal, generate_gbm
from qamm.errors import ConfigError, InsufficientHistory, RunError
from qamm.features import WARM_UP, build_matrix, feature_set
from qamm.labeling import make_labels
from qamm.models import LogisticModel, Standardizer, build_windows
from qamm.runner import (
    MODEL_REGISTRY,
    config_hash,
    derive_seed,
    load_config,
    resolve_config,
    run_and_emit,
    run_experiment,
)


def tiny_config(tmp_path, **overrides):
    doc = {
        "out_dir": str(tmp_path / "out"),
        "seeds": [1, 2],
        "models": {"logistic_regression": {},
                   "gradient_boosting": {"n_estimators": 10, "max_depth": 3}},
        "assets": {"syn": {"synthetic": True, "bars": 200, "seed": 11}},
    }
    doc.update(overrides)
    return resolve_config(doc)


# ---------------------------------------------------------------------------
# Config


def test_resolve_defaults():
    cfg = resolve_config({})
    assert sorted(cfg["models"]) == sorted(MODEL_REGISTRY)
    assert cfg["seeds"] == [1, 2, 3, 4, 5]
    assert cfg["task"] == {"name": "quantum_enhanced", "predict_ahead": 1}
    assert cfg["strategy"]["initial_capital"] == 10_000.0
    assert cfg["assets"]["synthetic"]["bars"] == 252


@pytest.mark.parametrize("doc", [
    {"bogus": 1},
    {"models": {"nonexistent_model": {}}},
    {"task": {"name": "unknown_task"}},
    {"task": {"predict_ahead": -1}},
    {"seeds": []},
    {"assets": {"a": {}}},
    {"strategy": {"leverage": 2.0}},
    {"strategy": {"base_weight": 0.9, "quote_weight": 0.9}},
    {"features": {"random_forest": "quantum6"}},
    {"features": {"qsvm": "hybrid12"}},
])
def test_resolve_rejections(doc):
    with pytest.raises(ConfigError):
        resolve_config(doc)


def test_feature_override_allowed():
    cfg = resolve_config({"features": {"qsvm": "quantum8"}})
    assert cfg["features"]["qsvm"] == "quantum8"


def test_config_hash_ignores_key_order():
    a = resolve_config({"seeds": [3, 1], "models": {"qnn": {}, "vqe_classifier": {}}})
    b = resolve_config({"models": {"vqe_classifier": {}, "qnn": {}}, "seeds": [3, 1]})
    assert config_hash(a) == config_hash(b)
    c = resolve_config({"seeds": [1, 3], "models": {"qnn": {}, "vqe_classifier": {}}})
    assert config_hash(a) != config_hash(c)


def test_derive_seed_isolates_cells():
    s = derive_seed(1, "qnn", "btc", 0)
    assert s == derive_seed(1, "qnn", "btc", 0)
    others = {derive_seed(1, "qnn", "btc", 1), derive_seed(1, "qnn", "eth", 0),
              derive_seed(1, "qsvm", "btc", 0), derive_seed(2, "qnn", "btc", 0)}
    assert s not in others
    assert len(others) == 4


def test_load_config_toml_and_manifest(tmp_path):
    toml = tmp_path / "exp.toml"
    toml.write_text('seeds = [4]\n[models.qnn]\nepochs = 5\n')
    doc = load_config(str(toml))
    assert doc["seeds"] == [4] and doc["models"]["qnn"]["epochs"] == 5
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"config": {"seeds": [9]}, "files": {}}))
    assert load_config(str(manifest))["seeds"] == [9]
    bad = tmp_path / "broken.toml"
    bad.write_text("seeds = [")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.toml"))


# ---------------------------------------------------------------------------
# Pipeline wiring


def test_windowed_split_arithmetic():
    n, head = 100, 9
    n_train, n_val = 70, 15
    W = build_windows(np.zeros((n, 3)))
    assert W.shape[0] == n - head
    assert W[: n_train - head].shape[0] == n_train - head
    assert W[n_train - head: n_train + n_val - head].shape[0] == n_val
    assert W[n_train + n_val - head:].shape[0] == n - n_train - n_val


def test_logistic_run_matches_hand_built_pipeline(tmp_path):
    cfg = tiny_config(tmp_path, models={"logistic_regression": {}}, seeds=[1])
    bundle = run_experiment(cfg)
    got = bundle.results[0].reports[0]

    series = generate_gbm(seed=11, n=200, s0=100.0, mu=0.05, sigma=0.2,
                          planted=PlantedSignal())
    fm = build_matrix(series)
    labels = make_labels(series, "quantum_enhanced", 1)
    X = fm.values[WARM_UP: WARM_UP + len(labels)]
    scaler = Standardizer().fit(X[labels.train])
    X = scaler.transform(X)
    seed = derive_seed(1, "logistic_regression", "syn", 0)
    model = LogisticModel().fit(X[labels.train], labels.y[labels.train], seed=seed)
    proba = model.predict_proba(X[labels.test])
    signals = (proba >= 0.5).astype(np.int8)
    start = WARM_UP + labels.n_train + labels.n_val
    curve = simulate(series.slice(start, WARM_UP + len(labels)), signals,
                     StrategySpec())
    expect = metrics(curve, signals, labels.y[labels.test], proba)

    assert got.total_return == expect.total_return
    assert got.sharpe == expect.sharpe
    assert got.auc == expect.auc
    assert got.rebalance_count == expect.rebalance_count


def test_single_seed_single_model(tmp_path):
    cfg = tiny_config(tmp_path, models={"logistic_regression": {}}, seeds=[3])
    bundle = run_and_emit(cfg)
    assert len(bundle.results) == 1
    assert bundle.results[0].summary.runs == 1
    assert bundle.results[0].summary.std["total_return"] is None
    out = cfg["out_dir"]
    assert os.path.exists(os.path.join(out, "manifest.json"))
    text = open(os.path.join(out, "uncertainty.txt")).read()
    assert "n/a" in text


def test_quantum6_features_are_six_columns():
    assert len(feature_set("quantum6")) == 6
    assert len(feature_set("quantum8")) == 8
    assert len(feature_set("hybrid12")) == 12


def test_windowed_model_through_runner(tmp_path):
    cfg = tiny_config(tmp_path, models={"transformer": {"epochs": 3}}, seeds=[1])
    bundle = run_experiment(cfg)
    labels = make_labels(
        generate_gbm(seed=11, n=200, s0=100.0, mu=0.05, sigma=0.2,
                     planted=PlantedSignal()),
        "quantum_enhanced", 1)
    curve = bundle.curves[("transformer", "syn", 0)]
    assert len(curve) == labels.n_test
    rep = bundle.results[0].reports[0]
    assert np.isfinite(rep.total_return)
    assert 0.0 <= rep.accuracy <= 1.0


# ---------------------------------------------------------------------------
# Determinism and failure handling


def _read_all(out_dir):
    found = {}
    for root, _dirs, names in os.walk(out_dir):
        for name in names:
            path = os.path.join(root, name)
            rel = os.path.relpath(path, out_dir)
            with open(path, "rb") as fh:
                found[rel] = fh.read()
    return found


def test_rerun_is_byte_identical(tmp_path):
    cfg = tiny_config(tmp_path)
    a_dir, b_dir = str(tmp_path / "a"), str(tmp_path / "b")
    run_and_emit(cfg, out_dir=a_dir)
    run_and_emit(cfg, out_dir=b_dir)
    a, b = _read_all(a_dir), _read_all(b_dir)
    assert sorted(a) == sorted(b)
    for rel in a:
        if rel == "manifest.json":
            continue  # timings differ by design
        assert a[rel] == b[rel], rel
    ma = json.loads(a["manifest.json"])
    mb = json.loads(b["manifest.json"])
    assert ma["files"] == mb["files"]
    assert ma["config_hash"] == mb["config_hash"]


def test_rerun_from_manifest(tmp_path):
    cfg = tiny_config(tmp_path)
    first = str(tmp_path / "first")
    run_and_emit(cfg, out_dir=first)
    doc = load_config(os.path.join(first, "manifest.json"))
    cfg2 = resolve_config(doc)
    assert config_hash(cfg2) == config_hash(cfg)
    second = str(tmp_path / "second")
    run_and_emit(cfg2, out_dir=second)
    with open(os.path.join(first, "report.json"), "rb") as fh:
        ra = fh.read()
    with open(os.path.join(second, "report.json"), "rb") as fh:
        rb = fh.read()
    assert ra == rb


def test_jobs_pool_matches_serial(tmp_path):
    cfg = tiny_config(tmp_path)
    serial = run_experiment(cfg, jobs=1)
    pooled = run_experiment(cfg, jobs=2)
    for rs, rp in zip(serial.results, pooled.results):
        assert rs.model_id == rp.model_id
        for a, b in zip(rs.reports, rp.reports):
            assert a.to_dict() == b.to_dict()


def test_run_failure_carries_context(tmp_path):
    cfg = tiny_config(tmp_path, models={"random_forest": {"bogus_knob": 1}})
    with pytest.raises(RunError) as info:
        run_experiment(cfg)
    assert info.value.model_id == "random_forest"
    assert info.value.asset == "syn"
    assert info.value.run_index in (0, 1)


def test_short_series_is_a_data_error(tmp_path):
    cfg = tiny_config(tmp_path, assets={"syn": {"synthetic": True, "bars": 60}})
    with pytest.raises(InsufficientHistory):
        run_experiment(cfg)
