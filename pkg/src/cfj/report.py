"""Structured soundness-run reports: a delimited record file plus summary
figures rendered alongside it."""

from __future__ import annotations

import csv
from pathlib import Path


def write_report(report_dir, records, summaries) -> list:
    """Write report.csv (one row per candidate or program) and PNG charts
    into report_dir.  Returns the paths written."""
    out_dir = Path(report_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out_dir / "report.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "verdict", "steps", "failing_step", "detail"])
        for rec in records:
            writer.writerow([rec.candidate_id, rec.verdict, rec.steps,
                             "" if rec.failing_step is None else rec.failing_step,
                             rec.detail])
    written.append(csv_path)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    counts = {"accepted": 0, "rejected": 0, "violation": 0}
    step_counts = []
    for rec in records:
        counts[rec.verdict] = counts.get(rec.verdict, 0) + 1
        if rec.verdict == "accepted":
            step_counts.append(rec.steps)

    fig, ax = plt.subplots(figsize=(5, 3.2))
    names = list(counts)
    values = [counts[n] for n in names]
    ax.bar(names, values, color=["#4c9f70", "#888888", "#c0392b"])
    ax.set_ylabel("candidates")
    ax.set_title("verdicts")
    for i, v in enumerate(values):
        ax.text(i, v, str(v), ha="center", va="bottom", fontsize=9)
    fig.tight_layout()
    verdict_path = out_dir / "verdicts.png"
    fig.savefig(verdict_path, dpi=120)
    plt.close(fig)
    written.append(verdict_path)

    if step_counts:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.hist(step_counts, bins=min(30, max(5, len(set(step_counts)))),
                color="#4c72b0")
        ax.set_xlabel("steps to normal form")
        ax.set_ylabel("accepted candidates")
        ax.set_title("trace lengths")
        fig.tight_layout()
        hist_path = out_dir / "trace_lengths.png"
        fig.savefig(hist_path, dpi=120)
        plt.close(fig)
        written.append(hist_path)

    summary_path = out_dir / "summary.txt"
    summary_path.write_text("\n".join(summaries) + "\n", encoding="utf-8")
    written.append(summary_path)
    return written
