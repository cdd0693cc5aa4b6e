"""Report rendering: JSON, fixed-width text tables, and matplotlib figures.

The evaluate/spread commands write a machine-readable JSON report, a text
table (one row per run set, mean ± std over runs), and PNG figures next to
them.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import EvalReport

REPORT_VERSION = 1


def _agg(values: list[float]) -> dict:
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    if arr.size == 0:
        return {"mean": None, "std": None}
    return {"mean": float(arr.mean()), "std": float(arr.std())}


def aggregate_reports(reports: list[EvalReport]) -> dict:
    """Mean ± std of each metric over runs; spread buckets averaged per bucket."""
    agg = {
        "meteor_mean": _agg([r.meteor_mean for r in reports]),
        "perplexity": _agg([r.perplexity for r in reports]),
        "spearman": _agg([r.spearman for r in reports]),
    }
    if any(r.comet_mean is not None for r in reports):
        agg["comet_mean"] = _agg([r.comet_mean for r in reports])
    buckets = []
    for b in range(len(reports[0].spread_buckets)):
        interval = reports[0].spread_buckets[b]["interval"]
        stds = [r.spread_buckets[b]["mean_std"] for r in reports
                if r.spread_buckets[b]["mean_std"] is not None]
        buckets.append({
            "interval": interval,
            "mean_std": float(np.mean(stds)) if stds else None,
        })
    agg["spread_buckets"] = buckets
    return agg


def report_json(label: str, reports: list[EvalReport]) -> dict:
    return {
        "v": REPORT_VERSION,
        "label": label,
        "runs": [r.to_dict() for r in reports],
        "aggregate": aggregate_reports(reports),
    }


def _fmt(stat: dict, digits: int = 2) -> str:
    if stat["mean"] is None:
        return "n/a"
    return f"{stat['mean']:.{digits}f} ± {stat['std']:.{digits}f}"


def report_table(label: str, reports: list[EvalReport]) -> str:
    """Fixed-width metrics table, one row per labeled run set."""
    agg = aggregate_reports(reports)
    has_comet = "comet_mean" in agg
    headers = ["Method", "METEOR"] + (["COMET"] if has_comet else []) \
        + ["Perplexity", "Correlation"]
    row = [label, _fmt(agg["meteor_mean"])]
    if has_comet:
        row.append(_fmt(agg["comet_mean"]))
    row += [_fmt(agg["perplexity"]), _fmt(agg["spearman"])]
    widths = [max(len(h), len(v)) for h, v in zip(headers, row)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join(v.ljust(w) for v, w in zip(row, widths)),
    ]
    return "\n".join(lines)


def spread_table(buckets: list[dict]) -> str:
    """Five-row table: input-toxicity interval vs mean interpretation-set std."""
    lines = ["Toxicity Interval    Mean Std of Interpretations"]
    for b in buckets:
        lo, hi = b["interval"]
        value = "absent" if b["mean_std"] is None else f"{b['mean_std']:.3f}"
        count = b.get("count")
        suffix = f"  (n={count})" if count is not None else ""
        lines.append(f"({lo:.1f} - {hi:.1f})          {value}{suffix}")
    return "\n".join(lines)


def spread_figure(buckets: list[dict], path) -> None:
    """Bar chart of mean interpretation-set std per input-toxicity interval."""
    labels = [f"{lo:.1f}-{hi:.1f}" for lo, hi in (b["interval"] for b in buckets)]
    values = [b["mean_std"] if b["mean_std"] is not None else 0.0 for b in buckets]
    present = [b["mean_std"] is not None for b in buckets]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    colors = ["#4878a8" if ok else "#cccccc" for ok in present]
    ax.bar(labels, values, color=colors)
    ax.set_xlabel("input sentence toxicity interval")
    ax.set_ylabel("mean std of interpretation toxicity")
    ax.set_title("Toxicity spread per input-toxicity interval")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def metrics_figure(label: str, reports: list[EvalReport], path) -> None:
    """Bar chart of the aggregate metrics with std error bars."""
    agg = aggregate_reports(reports)
    names, means, stds = [], [], []
    for key, title in (("meteor_mean", "METEOR"), ("comet_mean", "COMET"),
                       ("perplexity", "Perplexity"), ("spearman", "Spearman")):
        stat = agg.get(key)
        if stat and stat["mean"] is not None:
            names.append(title)
            means.append(stat["mean"])
            stds.append(stat["std"])
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.bar(names, means, yerr=stds, capsize=4, color="#4878a8")
    ax.set_title(f"Evaluation metrics: {label}")
    ax.set_ylabel("value")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(label: str, reports: list[EvalReport], out_path) -> list[Path]:
    """Write report.json, report.txt and figures next to ``out_path``.

    ``out_path`` names the JSON file; siblings take its stem. Returns the
    paths written.
    """
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    stem = out_path.with_suffix("")
    written = []

    payload = report_json(label, reports)
    out_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    written.append(out_path)

    text = report_table(label, reports) + "\n\n" \
        + spread_table(payload["aggregate"]["spread_buckets"]) + "\n"
    txt_path = stem.with_suffix(".txt")
    txt_path.write_text(text, encoding="utf-8")
    written.append(txt_path)

    spread_png = Path(f"{stem}_spread.png")
    spread_figure(payload["aggregate"]["spread_buckets"], spread_png)
    written.append(spread_png)

    metrics_png = Path(f"{stem}_metrics.png")
    metrics_figure(label, reports, metrics_png)
    written.append(metrics_png)
    return written
