"""Deterministic report rendering: CSV and aligned-text tables.

Correlation values render as 100 * rho with one decimal (the scale the
result tables conventionally use); accuracies are already percentages.
Identical inputs always produce byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Sequence

from videval.harness import BenchmarkResult, LeaderboardRow
from videval.model import ASPECTS

_UNDEF = "undef"


def _fmt(value: float | None, scale: float = 1.0) -> str:
    if value is None:
        return _UNDEF
    return f"{value * scale:.1f}"


def _result_columns(results: Sequence[BenchmarkResult]) -> list[str]:
    columns: list[str] = []
    for result in results:
        for key in result.values:
            if key not in columns:
                columns.append(key)
    # keep the canonical aspect order up front
    ordered = [a for a in ASPECTS if a in columns]
    ordered += [c for c in columns if c not in ordered]
    return ordered


def _result_rows(results: Sequence[BenchmarkResult]) -> tuple[list[str], list[list[str]]]:
    columns = _result_columns(results)
    header = ["benchmark", "method", *columns, "average", "evaluated", "parse_failures", "skipped"]
    rows = []
    for r in results:
        scale = 100.0 if r.kind == "correlation" else 1.0
        row = [r.benchmark, r.method]
        row += [_fmt(r.values.get(c), scale) if c in r.values else "" for c in columns]
        row.append(_fmt(r.average(), scale))
        row += [str(r.counts[k]) for k in ("evaluated", "parse_failures", "skipped")]
        rows.append(row)
    return header, rows


def _leaderboard_rows(rows: Sequence[LeaderboardRow]) -> tuple[list[str], list[list[str]]]:
    header = ["model", "avg", *ASPECTS]
    body = [
        [r.model, f"{r.average:.2f}", *[f"{r.per_aspect[a]:.2f}" for a in ASPECTS]]
        for r in rows
    ]
    return header, body


def _render_csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _render_aligned(header: list[str], rows: list[list[str]]) -> str:
    table = [header, *rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for row in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def render_table(header: list[str], rows: list[list[str]], format: str = "aligned_text") -> str:
    """Render an arbitrary pre-formatted table in either report format."""
    if format == "csv":
        return _render_csv(header, rows)
    if format == "aligned_text":
        return _render_aligned(header, rows)
    raise ValueError(f"unknown report format {format!r}")


def run_report(results: Sequence[BenchmarkResult], format: str = "aligned_text") -> str:
    """Render benchmark results as one table; header-only when empty."""
    header, rows = _result_rows(list(results))
    if format == "csv":
        return _render_csv(header, rows)
    if format == "aligned_text":
        return _render_aligned(header, rows)
    raise ValueError(f"unknown report format {format!r}")


def leaderboard_report(rows: Sequence[LeaderboardRow], format: str = "aligned_text") -> str:
    """Render a ranked leaderboard table."""
    header, body = _leaderboard_rows(list(rows))
    if format == "csv":
        return _render_csv(header, body)
    if format == "aligned_text":
        return _render_aligned(header, body)
    raise ValueError(f"unknown report format {format!r}")


def result_document(results: Sequence[BenchmarkResult], fingerprint: dict) -> str:
    """Machine-readable result document with the config fingerprint embedded."""
    doc = {
        "fingerprint": fingerprint,
        "results": [r.to_json_obj() for r in results],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
