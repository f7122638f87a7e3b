"""Retrieval-quality evaluation over labeled groups.

Every image of a labeled collection is used once as a query against the
index; the query itself is excluded from both the retrieved and the
relevant sets.  With a = retrieved-and-relevant, b = retrieved-but-not,
c = relevant-but-missed, precision is a/(a+b) and recall a/(a+c).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .index import Index, rank_signature
from .matching import DistanceParams

GroundTruth = dict[str, str]  # image_id -> group label


@dataclass(frozen=True)
class QueryEval:
    """Retrieval counts and scores for a single query image."""

    image_id: str
    group: str
    relevant_retrieved: int  # a
    irrelevant_retrieved: int  # b
    relevant_missed: int  # c
    precision: float
    recall: float


@dataclass
class EvalReport:
    per_query: list[QueryEval]
    avg_precision: float
    avg_recall: float


def precision(a: int, b: int) -> float:
    """Share of retrieved images that are relevant: a / (a + b)."""
    if a < 0 or b < 0:
        raise ValueError("counts must be nonnegative")
    if a + b == 0:
        raise ValueError("precision undefined: no images retrieved")
    return a / (a + b)


def recall(a: int, c: int) -> float:
    """Share of relevant images that were retrieved: a / (a + c)."""
    if a < 0 or c < 0:
        raise ValueError("counts must be nonnegative")
    if a + c == 0:
        raise ValueError("recall undefined: no relevant images exist")
    return a / (a + c)


def load_ground_truth(path: str | Path) -> GroundTruth:
    """Read the two-column ``id,group`` CSV (header line included)."""
    gt: GroundTruth = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "group"]:
            raise ValueError(f"{path}: expected header 'id,group', got {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 2 or not row[0]:
                raise ValueError(f"{path}: malformed ground-truth row {row}")
            gt[row[0]] = row[1]
    return gt


def save_ground_truth(gt: GroundTruth, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "group"])
        for image_id in sorted(gt):
            writer.writerow([image_id, gt[image_id]])


def evaluate(
    index: Index,
    gt: GroundTruth,
    dparams: DistanceParams = DistanceParams(),
    top_k: int = 15,
) -> EvalReport:
    """Query the index with each labeled image and score the rankings.

    Images whose group has no other member (pure distractors) stay in the
    index as noise but are not queried themselves: with an empty relevant
    set their recall would be undefined.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    by_id = {rec.image_id: rec for rec in index.records}
    missing = sorted(set(gt) - set(by_id))
    if missing:
        raise ValueError(f"ground-truth ids missing from index: {', '.join(missing)}")

    group_sizes: dict[str, int] = {}
    for group in gt.values():
        group_sizes[group] = group_sizes.get(group, 0) + 1

    rows: list[QueryEval] = []
    for image_id in sorted(gt):
        group = gt[image_id]
        if group_sizes[group] < 2:
            continue
        ranked = rank_signature(index, by_id[image_id], dparams)
        hits = [rid for rid, _ in ranked if rid != image_id][:top_k]
        a = sum(1 for rid in hits if gt.get(rid) == group)
        b = len(hits) - a
        c = (group_sizes[group] - 1) - a
        rows.append(
            QueryEval(
                image_id=image_id,
                group=group,
                relevant_retrieved=a,
                irrelevant_retrieved=b,
                relevant_missed=c,
                precision=precision(a, b),
                recall=recall(a, c),
            )
        )
    if not rows:
        raise ValueError("no queries: every ground-truth group is a singleton")
    avg_p = sum(r.precision for r in rows) / len(rows)
    avg_r = sum(r.recall for r in rows) / len(rows)
    return EvalReport(per_query=rows, avg_precision=avg_p, avg_recall=avg_r)


def report_lines(report: EvalReport) -> list[str]:
    """Machine-readable rows: id, a, b, c, precision, recall; then averages."""
    lines = [
        "\t".join(
            [
                r.image_id,
                str(r.relevant_retrieved),
                str(r.irrelevant_retrieved),
                str(r.relevant_missed),
                f"{r.precision:.9g}",
                f"{r.recall:.9g}",
            ]
        )
        for r in report.per_query
    ]
    lines.append(
        f"average\t{report.avg_precision:.9g}\t{report.avg_recall:.9g}"
    )
    return lines


def report_table(report: EvalReport) -> str:
    """Aligned text table with two-decimal precision/recall columns."""
    headers = ["image_id", "group", "a", "b", "c", "precision", "recall"]
    rows = [
        [
            r.image_id,
            r.group,
            str(r.relevant_retrieved),
            str(r.irrelevant_retrieved),
            str(r.relevant_missed),
            f"{r.precision:.2f}",
            f"{r.recall:.2f}",
        ]
        for r in report.per_query
    ]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in rows)) for i in range(len(headers))
    ]
    out = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    out.extend("  ".join(row[i].ljust(widths[i]) for i in range(len(row))) for row in rows)
    out.append("")
    out.append(
        f"average precision {report.avg_precision:.2f} ({report.avg_precision:.9g})  "
        f"recall {report.avg_recall:.2f} ({report.avg_recall:.9g})  "
        f"over {len(report.per_query)} queries"
    )
    return "\n".join(out)
