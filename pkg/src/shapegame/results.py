"""Results tables: per-run accuracy breakdowns as CSV, with optional
aggregate rows carrying the mean and sample deviation of raw phase scores.

The leading comment line records that the three out-of-distribution columns
are disjoint categories (a doubly novel question counts only under `both`).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .engine import AccuracyBreakdown, CategoryScore, aggregate

COMMENT = "# ood_categories=disjoint"
COLUMNS = [
    "kind", "label",
    "overall_accuracy", "overall_correct", "overall_total",
    "ood_symbol_accuracy", "ood_symbol_correct", "ood_symbol_total",
    "ood_number_accuracy", "ood_number_correct", "ood_number_total",
    "ood_both_accuracy", "ood_both_correct", "ood_both_total",
    "score_mean", "score_stdev",
]


@dataclass(frozen=True)
class RunRow:
    label: str
    breakdown: AccuracyBreakdown


@dataclass(frozen=True)
class AggregateRow:
    label: str
    mean: float
    stdev: float


@dataclass(frozen=True)
class ResultsTable:
    runs: tuple[RunRow, ...]
    aggregates: tuple[AggregateRow, ...] = ()


def build_table(
    runs: Sequence[tuple[str, AccuracyBreakdown]],
    pair_scores: Sequence[tuple[str, Sequence[float]]] = (),
    points_per_phase: int | None = None,
) -> ResultsTable:
    aggregates = tuple(
        AggregateRow(label, *aggregate(scores, points_per_phase))
        for label, scores in pair_scores
    )
    return ResultsTable(tuple(RunRow(l, b) for l, b in runs), aggregates)


def _accuracy_cell(score: CategoryScore) -> str:
    if score.total == 0:
        return "n/a (0/0)"
    return f"{score.correct / score.total:.6f}"


def render_results(table: ResultsTable) -> str:
    out = io.StringIO()
    out.write(COMMENT + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for run in table.runs:
        b = run.breakdown
        row = ["run", run.label]
        for score in (b.overall, b.ood_symbol, b.ood_number, b.ood_both):
            row += [_accuracy_cell(score), str(score.correct), str(score.total)]
        row += ["", ""]
        writer.writerow(row)
    for agg in table.aggregates:
        row = ["aggregate", agg.label] + [""] * 12
        row += [f"{agg.mean:.6f}", f"{agg.stdev:.6f}"]
        writer.writerow(row)
    return out.getvalue()


def write_results(table: ResultsTable, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(render_results(table), encoding="utf-8")
    return path


def _parse_score(acc: str, correct: str, total: str) -> CategoryScore:
    score = CategoryScore(int(correct), int(total))
    if score.total == 0 and acc != "n/a (0/0)":
        raise ValueError(f"empty bucket printed as {acc!r}")
    return score


def read_results(path: str | Path) -> ResultsTable:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != COMMENT:
        raise ValueError("missing results header comment")
    reader = csv.reader(lines[1:])
    header = next(reader)
    if header != COLUMNS:
        raise ValueError("unexpected results columns")
    runs = []
    aggregates = []
    for row in reader:
        kind, label = row[0], row[1]
        if kind == "run":
            cells = row[2:14]
            scores = [
                _parse_score(*cells[i : i + 3]) for i in range(0, 12, 3)
            ]
            runs.append(RunRow(label, AccuracyBreakdown(*scores)))
        elif kind == "aggregate":
            aggregates.append(AggregateRow(label, float(row[14]), float(row[15])))
        else:
            raise ValueError(f"unknown row kind {kind!r}")
    return ResultsTable(tuple(runs), tuple(aggregates))
