"""Command line interface.

Verbs: ingest (validate and normalize a raw OHLCV CSV), synth
(generate a synthetic series), features (emit the feature matrix),
run (execute an experiment config), report (rebuild report files from
a finished run directory).  Exit codes: 0 ok, 2 config error, 3 data
error, 4 run failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .backtest import BacktestReport, aggregate_runs
from .data import PlantedSignal, generate_gbm, load_csv, write_csv
from .errors import (
    ConfigError,
    DegenerateLabels,
    InsufficientHistory,
    InvariantViolation,
    IrregularSpacing,
    MalformedRow,
    NonMonotonicTime,
    QammError,
)
from .features import build_matrix, feature_set, write_features_csv, \
    write_schema_json
from .report import (
    ModelResult,
    ranking_table,
    significance_table,
    type_table,
    uncertainty_table,
)
from .runner import load_config, resolve_config, run_and_emit

_DATA_ERRORS = (MalformedRow, InvariantViolation, NonMonotonicTime,
                IrregularSpacing, InsufficientHistory, DegenerateLabels)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUN = 4


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="qamm", description=__doc__)
    sub = top.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("ingest", help="validate and normalize an OHLCV CSV")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--fill", choices=("strict", "ffill"), default="strict")

    p = sub.add_parser("synth", help="generate a synthetic OHLCV series")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--bars", type=int, default=252)
    p.add_argument("--s0", type=float, default=100.0)
    p.add_argument("--mu", type=float, default=0.05)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--planted", action="store_true",
                   help="plant the mean-reversion signal")

    p = sub.add_parser("features", help="compute feature columns from a CSV")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--set", default="full",
                   choices=("full", "hybrid12", "quantum6", "quantum8"))

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True,
                   help="TOML config, or a manifest.json to reproduce a run")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="override the configured output directory")
    p.add_argument("--seed", type=int,
                   help="replace the seeds list with this single seed")
    p.add_argument("--predict-ahead", type=int, dest="predict_ahead")
    p.add_argument("--no-causal-mask", action="store_true",
                   help="drop the causal attention mask in qasa_sequence")

    p = sub.add_parser("report", help="rebuild tables from a run directory")
    p.add_argument("run_dir")
    return top


def _cmd_ingest(args) -> int:
    series = load_csv(args.input, fill=args.fill)
    series.validate()
    write_csv(series, args.out)
    print(f"{len(series)} bars -> {args.out}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    planted = PlantedSignal() if args.planted else None
    series = generate_gbm(seed=args.seed, n=args.bars, s0=args.s0,
                          mu=args.mu, sigma=args.sigma, planted=planted)
    write_csv(series, args.out)
    kind = "planted" if args.planted else "gbm"
    print(f"{len(series)} {kind} bars -> {args.out}")
    return EXIT_OK


def _cmd_features(args) -> int:
    series = load_csv(args.input)
    series.validate()
    names = None if args.set == "full" else feature_set(args.set)
    fm = build_matrix(series, names=names)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "features.csv")
    schema_path = os.path.join(args.out, "schema.json")
    write_features_csv(fm, csv_path)
    write_schema_json(fm, schema_path)
    print(f"{len(fm.names)} columns, {fm.values.shape[0]} rows -> {csv_path}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = resolve_config(load_config(args.config))
    if args.seed is not None:
        cfg["seeds"] = [args.seed]
    if args.predict_ahead is not None:
        cfg["task"]["predict_ahead"] = args.predict_ahead
    if args.no_causal_mask:
        cfg["models"].setdefault("qasa_sequence", {})["causal_mask"] = False
    out_dir = args.out or cfg["out_dir"]
    bundle = run_and_emit(cfg, jobs=args.jobs, out_dir=out_dir)
    n_runs = len(bundle.curves)
    print(f"{n_runs} runs -> {out_dir}")
    print(ranking_table(bundle.results), end="")
    return EXIT_OK


def _cmd_report(args) -> int:
    path = os.path.join(args.run_dir, "report.json")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"cannot parse {path}: {err}") from err
    results = []
    for mid in sorted(doc["models"]):
        entry = doc["models"][mid]
        reports = [BacktestReport(**run) for run in entry["runs"]]
        results.append(ModelResult(mid, entry["type"], reports,
                                   aggregate_runs(reports)))
    for name, text in (("ranking.txt", ranking_table(results)),
                       ("uncertainty.txt", uncertainty_table(results)),
                       ("types.txt", type_table(results)),
                       ("significance.txt", significance_table(results))):
        with open(os.path.join(args.run_dir, name), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write(text)
    print(ranking_table(results), end="")
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "features": _cmd_features,
    "run": _cmd_run,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (*_DATA_ERRORS, OSError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except QammError as err:
        print(f"run failure: {err}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
