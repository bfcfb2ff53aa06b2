"""Retrieval-quality harness: per-category correct/false retrieval rates.

CRR for one query is the percentage of retrieved images whose ground-truth
label matches the query's label (0 when nothing is retrieved); FRR is its
complement to 100. Rows are averaged per category, and the overall line is
the unweighted mean of the category averages.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .engine import Engine
from .errors import EmptyShape, MissingLabels
from .retrieval import QueryParams


@dataclass(frozen=True)
class EvalRow:
    category: str
    trials: int
    avg_crr: float
    avg_frr: float


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]
    overall_crr: float
    overall_frr: float

    def to_dicts(self) -> list[dict]:
        out = [
            {
                "category": row.category,
                "trials": row.trials,
                "avg_crr": row.avg_crr,
                "avg_frr": row.avg_frr,
            }
            for row in self.rows
        ]
        out.append(
            {
                "category": "overall",
                "trials": sum(r.trials for r in self.rows),
                "avg_crr": self.overall_crr,
                "avg_frr": self.overall_frr,
            }
        )
        return out


def load_labels(labels_path: str | Path) -> list[tuple[Path, str]]:
    """Read (path, category_name) rows; relative paths resolve against the
    CSV's directory."""
    labels_path = Path(labels_path)
    if not labels_path.exists():
        raise MissingLabels(f"labels file {labels_path} does not exist")
    base = labels_path.parent
    out = []
    with open(labels_path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if len(row) < 2:
                raise MissingLabels(f"malformed labels row: {row!r}")
            path = Path(row[0])
            if not path.is_absolute():
                path = base / path
            out.append((path, row[1].strip()))
    if not out:
        raise MissingLabels(f"labels file {labels_path} is empty")
    return out


def truth_from_metadata(engine: Engine) -> dict[int, str]:
    """Ground-truth labels recorded at enrollment under the 'truth' key."""
    truth = {}
    for image_id in engine.store.image_ids():
        label = engine.store.get_record(image_id).metadata.get("truth")
        if label is not None:
            truth[image_id] = label
    return truth


def run_eval(
    engine: Engine,
    labeled_queries,
    top_k: int = 10,
    threshold: float = 0.0,
    gated: bool = True,
    truth_by_id: dict[int, str] | None = None,
) -> EvalReport:
    """Query every (payload, label) pair and average CRR/FRR per category.

    Retrieved images are judged against `truth_by_id`; by default that map
    comes from the 'truth' metadata recorded when enrolling with labels.
    Queries whose shape cannot be extracted count as failed trials (CRR 0).
    """
    params = QueryParams(top_k=top_k, threshold=threshold, gated=gated)
    labels_by_id = truth_from_metadata(engine) if truth_by_id is None else truth_by_id
    if not labels_by_id:
        raise MissingLabels("no enrolled record carries a ground-truth label")
    per_category: dict[str, list[float]] = {}
    any_labels = False
    for payload, label in labeled_queries:
        any_labels = True
        try:
            outcome = engine.query(payload, params)
        except EmptyShape:
            per_category.setdefault(label, []).append(0.0)
            continue
        retrieved = outcome.results
        if not retrieved:
            crr = 0.0
        else:
            correct = sum(
                1 for r in retrieved if labels_by_id.get(r.image_id) == label
            )
            crr = 100.0 * correct / len(retrieved)
        per_category.setdefault(label, []).append(crr)
    if not any_labels:
        raise MissingLabels("no labeled queries supplied")
    rows = []
    for category in sorted(per_category):
        scores = per_category[category]
        avg = sum(scores) / len(scores)
        rows.append(
            EvalRow(
                category=category,
                trials=len(scores),
                avg_crr=avg,
                avg_frr=100.0 - avg,
            )
        )
    overall = sum(r.avg_crr for r in rows) / len(rows)
    return EvalReport(
        rows=tuple(rows), overall_crr=overall, overall_frr=100.0 - overall
    )


def format_report(report: EvalReport) -> str:
    """Aligned text table: one row per category plus the overall averages."""
    header = f"{'Exp. ID':>7}  {'Category':<14}{'Trials':>7}  {'Avg CRR':>8}  {'Avg FRR':>8}"
    lines = [header, "-" * len(header)]
    for i, row in enumerate(report.rows, start=1):
        lines.append(
            f"{i:>7}  {row.category:<14}{row.trials:>7}  {row.avg_crr:>8.2f}  {row.avg_frr:>8.2f}"
        )
    lines.append("-" * len(header))
    lines.append(
        f"{'':>7}  {'Average':<14}{'':>7}  {report.overall_crr:>8.2f}  {report.overall_frr:>8.2f}"
    )
    return "\n".join(lines)
