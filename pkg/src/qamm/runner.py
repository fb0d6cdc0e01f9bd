"""Experiment orchestration.

Turns a TOML config (or a previous run's manifest) into the full
models x assets x seeds matrix: load or synthesize data, build
features and labels once per asset, fit and backtest every run, then
aggregate, test significance, and write the report files plus a
manifest that pins everything needed to reproduce the numbers.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from . import __version__
from .backtest import (
    METRIC_FIELDS,
    EquityCurve,
    MultiRunSummary,
    StrategySpec,
    aggregate_runs,
    metrics,
    simulate,
)
from .data import CandleSeries, PlantedSignal, generate_gbm, load_csv
from .errors import ConfigError, RunError
from .features import ALL_NAMES, WARM_UP, build_matrix, feature_set
from .labeling import TASKS, LabelSet, make_labels
from .models import (
    GradientBoostingModel,
    LogisticModel,
    QasaHybridModel,
    QasaSequenceModel,
    QnnModel,
    QsvmModel,
    QuantumRwkvModel,
    RandomForestModel,
    Standardizer,
    TransformerModel,
    VqeModel,
    build_windows,
)
from .models.hybrid import WINDOW
from .report import (
    MODEL_TYPES,
    ModelResult,
    curve_csv,
    line_svg,
    ranking_table,
    results_json,
    significance_table,
    type_table,
    uncertainty_table,
)

# torch models mutate global RNG state while training, so their runs
# hold this lock; numpy models carry their own generators and run free
_TORCH_LOCK = threading.Lock()


@dataclass(frozen=True)
class ModelSpec:
    factory: type
    feature_set: str
    standardize: bool
    windowed: bool
    needs_lock: bool
    defaults: tuple = ()


MODEL_REGISTRY: dict = {
    "logistic_regression": ModelSpec(LogisticModel, "full", True, False, False),
    "random_forest": ModelSpec(RandomForestModel, "full", False, False, False),
    "gradient_boosting": ModelSpec(GradientBoostingModel, "full", False, False, False),
    "vqe_classifier": ModelSpec(VqeModel, "quantum6", False, False, False),
    "qnn": ModelSpec(QnnModel, "quantum6", False, False, False),
    "qsvm": ModelSpec(QsvmModel, "quantum6", False, False, False),
    "qasa_hybrid": ModelSpec(QasaHybridModel, "hybrid12", True, False, True,
                             (("epochs", 150), ("patience", 20))),
    "qasa_sequence": ModelSpec(QasaSequenceModel, "hybrid12", True, True, True,
                               (("epochs", 150), ("patience", 20))),
    "quantum_rwkv": ModelSpec(QuantumRwkvModel, "hybrid12", True, True, True,
                              (("epochs", 80), ("patience", 15))),
    "transformer": ModelSpec(TransformerModel, "full", True, True, True,
                             (("epochs", 200), ("patience", 25))),
}

# Table-consistent feature sets per model family
_ALLOWED_FEATURES = {
    "classical": ("full",),
    "pure_quantum": ("quantum6", "quantum8"),
    "hybrid_quantum": ("hybrid12",),
    "transformer": ("full",),
}

DEFAULT_SEEDS = [1, 2, 3, 4, 5]


# ---------------------------------------------------------------------------
# Config


def load_config(path: str) -> dict:
    """Read a TOML config or a manifest JSON (rerun path)."""
    try:
        with open(path, "rb") as fh:
            if path.endswith(".json"):
                doc = json.load(fh)
                if "config" in doc:
                    return doc["config"]
                return doc
            return tomllib.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot parse config: {err}") from err


def resolve_config(doc: dict) -> dict:
    """Fill defaults and validate; the result fully determines a run."""
    known = {"out_dir", "seeds", "task", "strategy", "assets", "models", "features"}
    for key in doc:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")

    task = dict(doc.get("task", {}))
    name = task.pop("name", "quantum_enhanced")
    predict_ahead = int(task.pop("predict_ahead", 1))
    if task:
        raise ConfigError(f"unknown task keys {sorted(task)}")
    if name not in TASKS:
        raise ConfigError(f"unknown task {name!r}")
    if predict_ahead < 0:
        raise ConfigError("predict_ahead must be >= 0")

    strategy = {"base_weight": 0.5, "quote_weight": 0.5, "fee_bps": 0.0,
                "initial_capital": 10_000.0}
    extra = set(doc.get("strategy", {})) - set(strategy)
    if extra:
        raise ConfigError(f"unknown strategy keys {sorted(extra)}")
    strategy.update({k: float(v) for k, v in doc.get("strategy", {}).items()})
    StrategySpec(**strategy)  # raises ConfigError on bad values

    assets = {}
    for asset, spec in doc.get("assets", {"synthetic": {"synthetic": True}}).items():
        spec = dict(spec)
        if spec.get("synthetic"):
            assets[asset] = {
                "synthetic": True,
                "bars": int(spec.get("bars", 252)),
                "seed": int(spec.get("seed", 7)),
                "s0": float(spec.get("s0", 100.0)),
                "mu": float(spec.get("mu", 0.05)),
                "sigma": float(spec.get("sigma", 0.2)),
                "planted": bool(spec.get("planted", True)),
            }
        elif "csv" in spec:
            assets[asset] = {"synthetic": False, "csv": str(spec["csv"])}
        else:
            raise ConfigError(f"asset {asset!r} needs synthetic=true or csv=...")
    if not assets:
        raise ConfigError("no assets configured")

    models = doc.get("models") or {mid: {} for mid in MODEL_REGISTRY}
    resolved_models = {}
    for mid in sorted(models):
        if mid not in MODEL_REGISTRY:
            raise ConfigError(f"unknown model {mid!r}")
        resolved_models[mid] = dict(models[mid])
    if not resolved_models:
        raise ConfigError("no models configured")

    features = dict(doc.get("features", {}))
    for mid, fs in features.items():
        if mid not in MODEL_REGISTRY:
            raise ConfigError(f"feature override for unknown model {mid!r}")
        allowed = _ALLOWED_FEATURES[MODEL_TYPES[mid]]
        if fs not in allowed:
            raise ConfigError(
                f"feature set {fs!r} not allowed for {mid} (one of {allowed})")

    seeds = [int(s) for s in doc.get("seeds", DEFAULT_SEEDS)]
    if not seeds:
        raise ConfigError("seeds list is empty")

    return {
        "out_dir": str(doc.get("out_dir", "runs/experiment")),
        "seeds": seeds,
        "task": {"name": name, "predict_ahead": predict_ahead},
        "strategy": strategy,
        "assets": assets,
        "models": resolved_models,
        "features": features,
    }


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def derive_seed(base_seed: int, model_id: str, asset: str, run_index: int) -> int:
    """Per-run seed isolating every (model, asset, run) cell."""
    key = f"{base_seed}:{model_id}:{asset}:{run_index}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:4], "big")


# ---------------------------------------------------------------------------
# Pipeline pieces


def _load_asset(name: str, spec: dict) -> CandleSeries:
    if spec["synthetic"]:
        planted = PlantedSignal() if spec["planted"] else None
        return generate_gbm(seed=spec["seed"], n=spec["bars"], s0=spec["s0"],
                            mu=spec["mu"], sigma=spec["sigma"], planted=planted)
    series = load_csv(spec["csv"])
    series.validate()
    return series


def _model_features(model_id: str, cfg: dict) -> list:
    fs = cfg["features"].get(model_id, MODEL_REGISTRY[model_id].feature_set)
    return list(ALL_NAMES) if fs == "full" else feature_set(fs)


def _build_model(model_id: str, cfg: dict):
    spec = MODEL_REGISTRY[model_id]
    kwargs = dict(spec.defaults)
    kwargs.update(cfg["models"][model_id])
    return spec.factory(**kwargs)


@dataclass
class _AssetData:
    series: CandleSeries
    matrix: np.ndarray      # usable rows x 122, aligned with labels
    names: list
    labels: LabelSet


def _prepare_asset(series: CandleSeries, cfg: dict) -> _AssetData:
    fm = build_matrix(series)
    labels = make_labels(series, cfg["task"]["name"], cfg["task"]["predict_ahead"])
    usable = fm.values[WARM_UP: WARM_UP + len(labels)]
    return _AssetData(series=series, matrix=usable, names=fm.names, labels=labels)


def _one_run(model_id: str, asset: str, data: _AssetData, cfg: dict,
             run_index: int) -> tuple:
    spec = MODEL_REGISTRY[model_id]
    seed = derive_seed(cfg["seeds"][run_index], model_id, asset, run_index)
    labels = data.labels
    names = _model_features(model_id, cfg)
    idx = [data.names.index(n) for n in names]
    X = data.matrix[:, idx]
    y = labels.y

    if spec.standardize:
        scaler = Standardizer().fit(X[labels.train])
        X = scaler.transform(X)

    n_train = labels.n_train
    n_val = labels.n_val
    if spec.windowed:
        W = build_windows(X)
        head = WINDOW - 1  # window k ends at row k+head and takes its label
        X_tr, y_tr = W[: n_train - head], y[head:n_train]
        X_va, y_va = W[n_train - head: n_train + n_val - head], y[n_train: n_train + n_val]
        X_te = W[n_train + n_val - head:]
    else:
        X_tr, y_tr = X[labels.train], y[labels.train]
        X_va, y_va = X[labels.val], y[labels.val]
        X_te = X[labels.test]
    y_te = y[labels.test]

    model = _build_model(model_id, cfg)
    if spec.needs_lock:
        with _TORCH_LOCK:
            model.fit(X_tr, y_tr, seed=seed, X_val=X_va, y_val=y_va)
            proba = model.predict_proba(X_te)
    else:
        model.fit(X_tr, y_tr, seed=seed)
        proba = model.predict_proba(X_te)
    signals = (proba >= 0.5).astype(np.int8)

    start = WARM_UP + n_train + n_val
    test_series = data.series.slice(start, WARM_UP + len(labels))
    curve = simulate(test_series, signals, StrategySpec(**cfg["strategy"]))
    report = metrics(curve, signals, y_te, proba)
    return report, curve, seed


# ---------------------------------------------------------------------------
# Orchestration


def _summarize(reports: list) -> MultiRunSummary:
    if len(reports) >= 2:
        return aggregate_runs(reports)
    # a single run still gets a table row; stds are simply undefined
    only = reports[0]
    mean = {name: getattr(only, name) for name in METRIC_FIELDS}
    return MultiRunSummary(runs=1, mean=mean, std={n: None for n in METRIC_FIELDS})


@dataclass
class RunBundle:
    config: dict
    config_hash: str
    results: list          # ModelResult, one per model, runs pooled
    curves: dict           # (model, asset, run_index) -> EquityCurve
    run_seeds: dict        # "model|asset|run" -> derived seed
    timings: dict


def run_experiment(cfg: dict, jobs: int = 1) -> RunBundle:
    """Execute the full matrix and aggregate."""
    timings: dict = {}
    t0 = time.perf_counter()
    prepared = {}
    for asset in sorted(cfg["assets"]):
        series = _load_asset(asset, cfg["assets"][asset])
        prepared[asset] = _prepare_asset(series, cfg)
    timings["data_and_features"] = time.perf_counter() - t0

    cells = [(mid, asset, k)
             for mid in sorted(cfg["models"])
             for asset in sorted(cfg["assets"])
             for k in range(len(cfg["seeds"]))]

    outputs: dict = {}
    run_seeds: dict = {}
    cell_times: dict = {}

    def _execute(cell):
        mid, asset, k = cell
        t = time.perf_counter()
        try:
            report, curve, seed = _one_run(mid, asset, prepared[asset], cfg, k)
        except Exception as err:
            raise RunError(mid, asset, k, err) from err
        return cell, report, curve, seed, time.perf_counter() - t

    t0 = time.perf_counter()
    if jobs <= 1:
        finished = [_execute(cell) for cell in cells]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            finished = list(pool.map(_execute, cells))
    for cell, report, curve, seed, dt in finished:
        mid, asset, k = cell
        outputs[cell] = (report, curve)
        run_seeds[f"{mid}|{asset}|{k}"] = seed
        cell_times[f"{mid}|{asset}|{k}"] = dt
    timings["runs"] = cell_times
    timings["runs_total"] = time.perf_counter() - t0

    results = []
    for mid in sorted(cfg["models"]):
        reports = [outputs[(mid, asset, k)][0]
                   for asset in sorted(cfg["assets"])
                   for k in range(len(cfg["seeds"]))]
        results.append(ModelResult(mid, MODEL_TYPES[mid], reports,
                                   _summarize(reports)))
    curves = {cell: curve for cell, (report, curve) in outputs.items()}
    return RunBundle(config=cfg, config_hash=config_hash(cfg), results=results,
                     curves=curves, run_seeds=run_seeds, timings=timings)


def _mean_curves(bundle: RunBundle) -> dict:
    """Per-model equity averaged over runs, for the plots."""
    out: dict = {}
    for mid in sorted(bundle.config["models"]):
        stacks = [c.values for (m, a, k), c in sorted(bundle.curves.items())
                  if m == mid]
        out[mid] = np.mean(np.stack(stacks), axis=0)
    return out


def emit_report(bundle: RunBundle, out_dir: str) -> dict:
    """Write every artifact; returns {relative path: sha256}."""
    os.makedirs(os.path.join(out_dir, "curves"), exist_ok=True)
    meta = {"config_hash": bundle.config_hash, "version": __version__}
    files = {
        "report.json": results_json(bundle.results, meta=meta),
        "ranking.txt": ranking_table(bundle.results),
        "uncertainty.txt": uncertainty_table(bundle.results),
        "types.txt": type_table(bundle.results),
        "significance.txt": significance_table(bundle.results),
    }
    for (mid, asset, k), curve in sorted(bundle.curves.items()):
        files[f"curves/{mid}__{asset}__run{k}.csv"] = curve_csv(curve)
    means = _mean_curves(bundle)
    files["equity.svg"] = line_svg(means, title="mean equity")
    drawdowns = {}
    for mid, values in means.items():
        peak = np.maximum.accumulate(values)
        drawdowns[mid] = (peak - values) / peak
    files["drawdown.svg"] = line_svg(drawdowns, title="mean drawdown")

    inventory = {}
    for rel, text in files.items():
        path = os.path.join(out_dir, rel)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        inventory[rel] = hashlib.sha256(text.encode()).hexdigest()
    return inventory


def write_manifest(bundle: RunBundle, out_dir: str, inventory: dict) -> str:
    manifest = {
        "config": bundle.config,
        "config_hash": bundle.config_hash,
        "version": __version__,
        "run_seeds": bundle.run_seeds,
        "timings": bundle.timings,
        "files": inventory,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def run_and_emit(cfg: dict, jobs: int = 1, out_dir: str | None = None) -> RunBundle:
    bundle = run_experiment(cfg, jobs=jobs)
    target = out_dir or cfg["out_dir"]
    inventory = emit_report(bundle, target)
    write_manifest(bundle, target, inventory)
    return bundle
