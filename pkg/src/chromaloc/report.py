"""Evaluation report files: delimited output plus rendered figures."""

from __future__ import annotations

from pathlib import Path

from .evaluation import EvalReport, report_lines, report_table


def write_report_files(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Write the text table, the TSV rows and the figures into ``out_dir``.

    Returns the paths written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table_path = out / "report.txt"
    table_path.write_text(report_table(report) + "\n", encoding="utf-8")
    tsv_path = out / "report.tsv"
    tsv_path.write_text("\n".join(report_lines(report)) + "\n", encoding="utf-8")
    figure_paths = save_report_figures(report, out)
    return [table_path, tsv_path, *figure_paths]


def save_report_figures(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Render per-query and per-group precision/recall charts to PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    rows = report.per_query
    xs = range(len(rows))

    fig, ax = plt.subplots(figsize=(max(6.0, len(rows) * 0.12), 4.0))
    ax.plot(xs, [r.precision for r in rows], "o", ms=4, label="precision")
    ax.plot(xs, [r.recall for r in rows], "s", ms=4, label="recall")
    ax.axhline(report.avg_precision, color="C0", lw=1, ls="--", alpha=0.6)
    ax.axhline(report.avg_recall, color="C1", lw=1, ls="--", alpha=0.6)
    ax.set_xlabel("query (sorted by image id)")
    ax.set_ylabel("score")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="lower left")
    ax.set_title(
        f"per-query retrieval quality (avg P={report.avg_precision:.2f}, "
        f"R={report.avg_recall:.2f})"
    )
    fig.tight_layout()
    path = out / "per_query.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)

    groups: dict[str, list[float]] = {}
    recalls: dict[str, list[float]] = {}
    for r in rows:
        groups.setdefault(r.group, []).append(r.precision)
        recalls.setdefault(r.group, []).append(r.recall)
    labels = sorted(groups)
    fig, ax = plt.subplots(figsize=(max(6.0, len(labels) * 0.8), 4.0))
    pos = range(len(labels))
    width = 0.4
    ax.bar(
        [p - width / 2 for p in pos],
        [sum(groups[g]) / len(groups[g]) for g in labels],
        width,
        label="precision",
    )
    ax.bar(
        [p + width / 2 for p in pos],
        [sum(recalls[g]) / len(recalls[g]) for g in labels],
        width,
        label="recall",
    )
    ax.set_xticks(list(pos))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("group mean")
    ax.legend(loc="lower right")
    ax.set_title("retrieval quality by group")
    fig.tight_layout()
    path = out / "group_means.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)

    return written
