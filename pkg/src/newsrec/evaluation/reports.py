"""Report serialization: per-hour CSV, tidy plot data, and a JSON aggregate."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

from .runner import MetricsReport


def write_hourly_csv(report: MetricsReport, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hour", "recommender", "n_samples", "hr", "mrr", "coverage", "esi_r"])
        for row in report.per_hour:
            writer.writerow(
                [
                    row.hour,
                    row.recommender,
                    row.n_samples,
                    f"{row.hr:.6f}",
                    f"{row.mrr:.6f}",
                    "" if row.coverage is None else f"{row.coverage:.6f}",
                    f"{row.esi_r:.6f}",
                ]
            )


def write_plot_data(report: MetricsReport, path: str | Path) -> None:
    """Tidy (hour, recommender, metric, value) rows for external plotting."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hour", "recommender", "metric", "value"])
        for row in report.per_hour:
            for metric, value in (
                ("hr", row.hr),
                ("mrr", row.mrr),
                ("coverage", row.coverage),
                ("esi_r", row.esi_r),
            ):
                if value is not None:
                    writer.writerow([row.hour, row.recommender, metric, f"{value:.6f}"])


def report_to_dict(report: MetricsReport) -> dict:
    return {
        "aggregate": report.aggregate,
        "n_samples": report.n_samples,
        "n_skipped_empty_pool": report.n_skipped_empty_pool,
        "n_short_pool": report.n_short_pool,
        "significance": [asdict(s) for s in report.significance],
        "manifest": report.manifest,
    }


def write_json_aggregate(report: MetricsReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def format_aggregate_table(aggregate: dict[str, dict[str, float]], top_n: int = 10) -> str:
    """Human-readable summary table, one row per recommender."""
    header = f"{'recommender':<18} {'HR@%d' % top_n:>8} {'MRR@%d' % top_n:>8} {'COV@%d' % top_n:>8} {'ESI-R@%d' % top_n:>9}"
    lines = [header, "-" * len(header)]
    for name in sorted(aggregate):
        row = aggregate[name]
        lines.append(
            f"{name:<18} {row['hr']:>8.4f} {row['mrr']:>8.4f} "
            f"{row['coverage']:>8.4f} {row['esi_r']:>9.4f}"
        )
    return "\n".join(lines)
