"""Result tables and static plots.

Pure builders: every function returns a string (text table, JSON, CSV,
SVG) and the runner decides where files land.  Tables mirror the usual
performance-report layout: a per-model ranking sorted by Sharpe, a
model-type aggregate, an uncertainty table (mean +/- std across runs),
and a pairwise significance matrix on per-run returns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .backtest import BacktestReport, MultiRunSummary, welch_t_test
from .errors import ZeroVariancePair

MODEL_TYPES = {
    "logistic_regression": "classical",
    "random_forest": "classical",
    "gradient_boosting": "classical",
    "vqe_classifier": "pure_quantum",
    "qnn": "pure_quantum",
    "qsvm": "pure_quantum",
    "qasa_hybrid": "hybrid_quantum",
    "qasa_sequence": "hybrid_quantum",
    "quantum_rwkv": "hybrid_quantum",
    "transformer": "transformer",
}

TYPE_ORDER = ("classical", "pure_quantum", "hybrid_quantum", "transformer")


@dataclass
class ModelResult:
    """All runs of one model on one asset, plus their aggregate."""

    model_id: str
    model_type: str
    reports: list
    summary: MultiRunSummary


# ---------------------------------------------------------------------------
# Cell formatting


def _pct(x) -> str:
    return "n/a" if x is None else f"{x:.2f}%"


def _frac_pct(x, sign: float = 1.0) -> str:
    return "n/a" if x is None else f"{sign * 100.0 * x:.2f}%"


def _num(x) -> str:
    return "n/a" if x is None else f"{x:.2f}"


def _pm(mean_s: str, std_s: str) -> str:
    return f"{mean_s} +/- {std_s}"


def format_table(header: list, rows: list) -> str:
    """Aligned columns; textual columns left, numbers right."""
    table = [list(header)] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    left = {i for i, name in enumerate(header) if name in ("Model", "Type", "Model Type")}
    lines = []
    for r, row in enumerate(table):
        cells = [c.ljust(widths[i]) if i in left else c.rjust(widths[i])
                 for i, c in enumerate(row)]
        lines.append("  ".join(cells).rstrip())
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Tables


def _sharpe_key(res: ModelResult) -> tuple:
    s = res.summary.mean.get("sharpe")
    # None sorts below every real Sharpe; ties broken by id for determinism
    return (1, 0.0, res.model_id) if s is None else (0, -s, res.model_id)


def ranking_rows(results: list) -> list:
    ordered = sorted(results, key=_sharpe_key)
    rows = []
    for res in ordered:
        m = res.summary.mean
        rows.append([
            res.model_id, res.model_type, _pct(m["total_return"]),
            _num(m["sharpe"]), _frac_pct(m["volatility"]),
            _frac_pct(m["max_drawdown"], sign=-1.0), _num(m["calmar"]),
        ])
    return rows


RANKING_HEADER = ["Model", "Type", "Return", "Sharpe", "Volatility", "Max DD", "Calmar"]


def ranking_table(results: list) -> str:
    return format_table(RANKING_HEADER, ranking_rows(results))


UNCERTAINTY_HEADER = ["Model", "Return", "Sharpe", "Volatility", "Max DD",
                      "Calmar", "Stability Rank"]


def stability_ranks(results: list) -> dict:
    """Rank 1 = smallest return std; ties broken by model id."""
    keyed = sorted(
        results,
        key=lambda r: (r.summary.std.get("total_return") is None,
                       r.summary.std.get("total_return") or 0.0, r.model_id))
    return {res.model_id: rank + 1 for rank, res in enumerate(keyed)}


def uncertainty_table(results: list) -> str:
    ranks = stability_ranks(results)
    rows = []
    for res in sorted(results, key=_sharpe_key):
        m, s = res.summary.mean, res.summary.std
        rows.append([
            res.model_id,
            _pm(_pct(m["total_return"]), _pct(s["total_return"])),
            _pm(_num(m["sharpe"]), _num(s["sharpe"])),
            _pm(_frac_pct(m["volatility"]), _frac_pct(s["volatility"])),
            _pm(_frac_pct(m["max_drawdown"], sign=-1.0), _frac_pct(s["max_drawdown"])),
            _pm(_num(m["calmar"]), _num(s["calmar"])),
            str(ranks[res.model_id]),
        ])
    return format_table(UNCERTAINTY_HEADER, rows)


TYPE_HEADER = ["Model Type", "Avg Return", "Avg Sharpe", "Avg Volatility",
               "Avg Max DD", "Best Return"]


def type_aggregates(results: list) -> dict:
    """Group means over member-model mean metrics, plus best return."""
    groups: dict = {}
    for res in results:
        groups.setdefault(res.model_type, []).append(res)
    out = {}
    for gtype, members in groups.items():
        agg = {}
        for name in ("total_return", "sharpe", "volatility", "max_drawdown"):
            vals = [m.summary.mean[name] for m in members
                    if m.summary.mean[name] is not None]
            agg[name] = float(np.mean(vals)) if vals else None
        rets = [m.summary.mean["total_return"] for m in members
                if m.summary.mean["total_return"] is not None]
        agg["best_return"] = max(rets) if rets else None
        out[gtype] = agg
    return out


def type_table(results: list) -> str:
    aggs = type_aggregates(results)
    rows = []
    for gtype in TYPE_ORDER:
        if gtype not in aggs:
            continue
        a = aggs[gtype]
        rows.append([gtype, _pct(a["total_return"]), _num(a["sharpe"]),
                     _frac_pct(a["volatility"]),
                     _frac_pct(a["max_drawdown"], sign=-1.0),
                     _pct(a["best_return"])])
    return format_table(TYPE_HEADER, rows)


def significance_matrix(results: list, metric: str = "total_return") -> tuple:
    """Pairwise two-sided Welch p-values on per-run metric values.

    Constant unequal pairs have no finite statistic; their p is shown
    as 0.0 (separation is exact).  Diagonal is 1 by definition.
    """
    ids = [res.model_id for res in results]
    n = len(ids)
    p = np.ones((n, n))
    for i in range(n):
        a = [getattr(r, metric) for r in results[i].reports]
        for j in range(i + 1, n):
            b = [getattr(r, metric) for r in results[j].reports]
            try:
                _, pij = welch_t_test(a, b)
            except ZeroVariancePair:
                pij = 0.0
            p[i, j] = p[j, i] = pij
    return ids, p


def significance_table(results: list, metric: str = "total_return") -> str:
    ids, p = significance_matrix(results, metric)
    header = ["Model"] + ids
    rows = [[ids[i]] + [f"{p[i, j]:.4f}" for j in range(len(ids))]
            for i in range(len(ids))]
    return format_table(header, rows)


# ---------------------------------------------------------------------------
# Machine formats


def results_json(results: list, meta: dict | None = None) -> str:
    """Whole bundle as deterministic JSON (sorted keys, repr floats)."""
    payload = {
        "meta": meta or {},
        "models": {
            res.model_id: {
                "type": res.model_type,
                "runs": [rep.to_dict() for rep in res.reports],
                "mean": res.summary.mean,
                "std": res.summary.std,
            }
            for res in results
        },
        "types": type_aggregates(results),
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def curve_csv(curve) -> str:
    lines = ["timestamp,value,rebalanced"]
    for i in range(len(curve.values)):
        lines.append(f"{int(curve.timestamps[i])},{repr(float(curve.values[i]))},"
                     f"{int(bool(curve.rebalanced[i]))}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG


PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def line_svg(series: dict, title: str = "equity", width: int = 800,
             height: int = 400) -> str:
    """One polyline per named series plus a legend entry each.

    Deterministic: series drawn in sorted-name order, coordinates
    rounded to 1e-2 pixels.
    """
    pad = 40.0
    names = sorted(series)
    all_vals = np.concatenate([np.asarray(series[k], dtype=np.float64) for k in names])
    lo, hi = float(all_vals.min()), float(all_vals.max())
    if hi == lo:
        hi = lo + 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{pad}" y="20" class="title">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
        f'y2="{height - pad}" stroke="#333"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="#333"/>',
    ]
    for k, name in enumerate(names):
        vals = np.asarray(series[name], dtype=np.float64)
        n = vals.shape[0]
        xs = pad + (width - 2 * pad) * (np.arange(n) / max(n - 1, 1))
        ys = height - pad - (height - 2 * pad) * (vals - lo) / (hi - lo)
        points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        color = PALETTE[k % len(PALETTE)]
        parts.append(f'<polyline class="curve" fill="none" stroke="{color}" '
                     f'points="{points}"/>')
        ly = pad + 16.0 * k
        parts.append(f'<rect x="{width - pad - 150:.0f}" y="{ly - 9:.0f}" '
                     f'width="10" height="10" fill="{color}"/>')
        parts.append(f'<text class="legend" x="{width - pad - 135:.0f}" '
                     f'y="{ly:.0f}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
