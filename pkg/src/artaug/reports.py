"""Report rendering: JSON, CSV and markdown views of metric outputs."""

from __future__ import annotations

import csv
import io
import json
from typing import Mapping, Sequence

from .capmetrics import METRIC_COLUMNS, MetricReport
from .retrieval import RecallReport

FORMATS = ("json", "csv", "markdown")


def _cell(scores: Mapping[str, float], name: str) -> str:
    value = scores.get(name)
    return f"{value:.4f}" if value is not None else "-"


def caption_report_json(report: MetricReport, config: Mapping | None = None) -> str:
    payload = {
        "config": dict(config) if config else {},
        "per_item": report.per_item,
        "corpus": report.corpus,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def caption_report_markdown(report: MetricReport) -> str:
    header = "| " + " | ".join(METRIC_COLUMNS) + " |"
    rule = "|" + "|".join(" --- " for _ in METRIC_COLUMNS) + "|"
    row = "| " + " | ".join(_cell(report.corpus, m) for m in METRIC_COLUMNS) + " |"
    return "\n".join([header, rule, row]) + "\n"


def caption_report_csv(report: MetricReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["id", *METRIC_COLUMNS])
    for item_id in report.per_item:
        scores = report.per_item[item_id]
        writer.writerow([item_id, *(_cell(scores, m) for m in METRIC_COLUMNS)])
    writer.writerow(["corpus", *(_cell(report.corpus, m) for m in METRIC_COLUMNS)])
    return out.getvalue()


def render_caption_report(
    report: MetricReport, fmt: str, config: Mapping | None = None
) -> str:
    if fmt == "json":
        return caption_report_json(report, config)
    if fmt == "markdown":
        return caption_report_markdown(report)
    if fmt == "csv":
        return caption_report_csv(report)
    raise ValueError(f"unknown format {fmt!r} (choose from {FORMATS})")


def retrieval_report_json(
    reports: Sequence[RecallReport], config: Mapping | None = None
) -> str:
    payload = {
        "config": dict(config) if config else {},
        "results": [
            {
                "direction": r.direction,
                "recalls": {f"R@{k}": r.recalls[k] for k in r.ks},
                "pool_size": r.pool_size,
                "trials": r.trials,
            }
            for r in reports
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def retrieval_report_markdown(reports: Sequence[RecallReport]) -> str:
    ks = reports[0].ks
    columns = ["direction", *(f"R@{k}" for k in ks)]
    lines = [
        "| " + " | ".join(columns) + " |",
        "|" + "|".join(" --- " for _ in columns) + "|",
    ]
    for r in reports:
        lines.append(
            "| "
            + " | ".join([r.direction, *(f"{r.recalls[k]:.4f}" for k in ks)])
            + " |"
        )
    return "\n".join(lines) + "\n"


def retrieval_report_csv(reports: Sequence[RecallReport]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    ks = reports[0].ks
    writer.writerow(["direction", *(f"R@{k}" for k in ks)])
    for r in reports:
        writer.writerow([r.direction, *(f"{r.recalls[k]:.4f}" for k in ks)])
    return out.getvalue()


def render_retrieval_report(
    reports: Sequence[RecallReport], fmt: str, config: Mapping | None = None
) -> str:
    if fmt == "json":
        return retrieval_report_json(reports, config)
    if fmt == "markdown":
        return retrieval_report_markdown(reports)
    if fmt == "csv":
        return retrieval_report_csv(reports)
    raise ValueError(f"unknown format {fmt!r} (choose from {FORMATS})")
