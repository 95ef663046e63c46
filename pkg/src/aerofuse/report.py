"""Evaluation report writers: JSON, delimited CSV, and a rendered figure.

The JSON document is the authoritative machine-readable record (metric name,
aggregate, per-source values, parameterization).  The CSV flattens the same
numbers for spreadsheet use, and the figure gives a quick visual comparison,
including the alpha-blend baseline when one was computed.  All three writers
are deterministic: same report, same bytes.
"""

from __future__ import annotations

import csv
import json

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .metrics import MetricsReport

_METRIC_LABELS = (("mutual_information", "mi"), ("vif", "vif"), ("psnr", "psnr"))


def build_report(
    report: MetricsReport,
    baseline: MetricsReport | None = None,
    job: dict | None = None,
) -> dict:
    """Assemble the full report document."""
    doc = report.to_dict()
    if baseline is not None:
        doc["baseline"] = {"method": "alpha_blend", "metrics": baseline.to_dict()["metrics"]}
    if job is not None:
        doc["job"] = job
    return doc


def write_report_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _rows(report: MetricsReport, label: str) -> list[tuple[str, str, str, float]]:
    rows = []
    for metric_name, attr in _METRIC_LABELS:
        rows.append((label, metric_name, "aggregate", getattr(report, attr)))
        for src in report.per_source:
            rows.append((label, metric_name, src.name, getattr(src, attr)))
    return rows


def write_report_csv(
    path: str, report: MetricsReport, baseline: MetricsReport | None = None
) -> None:
    """Flat delimited table: result,metric,scope,value."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["result", "metric", "scope", "value"])
        for row in _rows(report, "fused"):
            writer.writerow(row)
        if baseline is not None:
            for row in _rows(baseline, "alpha_blend"):
                writer.writerow(row)


def render_report_figure(
    path: str,
    report: MetricsReport,
    baseline: MetricsReport | None = None,
    title: str = "Fusion quality metrics",
) -> None:
    """Render one bar panel per metric (per-source bars plus the aggregate),
    overlaying the baseline when present, and save as PNG."""
    fig = Figure(figsize=(10.0, 3.6), dpi=100)
    FigureCanvasAgg(fig)
    axes = fig.subplots(1, len(_METRIC_LABELS))
    names = [s.name for s in report.per_source] + ["aggregate"]
    positions = list(range(len(names)))
    for ax, (metric_name, attr) in zip(axes, _METRIC_LABELS):
        fused_vals = [getattr(s, attr) for s in report.per_source] + [getattr(report, attr)]
        if baseline is not None:
            base_vals = [getattr(s, attr) for s in baseline.per_source] + [getattr(baseline, attr)]
            ax.bar([p - 0.2 for p in positions], fused_vals, width=0.38,
                   color="#2b6cb0", label="fused")
            ax.bar([p + 0.2 for p in positions], base_vals, width=0.38,
                   color="#b7791f", label="alpha blend")
        else:
            ax.bar(positions, fused_vals, width=0.6, color="#2b6cb0", label="fused")
        ax.set_title(metric_name)
        ax.set_xticks(positions)
        ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
        ax.tick_params(axis="y", labelsize=8)
        ax.grid(axis="y", linewidth=0.3, alpha=0.5)
    axes[0].legend(fontsize=8)
    fig.suptitle(title)
    fig.tight_layout()
    # pinned metadata keeps the PNG byte-stable across runs
    fig.savefig(path, format="png", metadata={"Software": "aerofuse report"})
