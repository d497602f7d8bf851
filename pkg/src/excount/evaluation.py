"""Workload evaluation: matching predicted completions to ground truth and
computing precision/recall/F1 with the fake/missing decomposition.

A fake workload is a counted completion with no matching truth record; a
missing workload is a truth record no completion matched.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True)
class WorkloadRecord:
    completion_time: float
    source: str = "fsm"  # ground_truth | fsm | heuristic


@dataclass(frozen=True)
class MatchConfig:
    """tolerance_seconds bounds |predicted - truth| for a temporal match.
    mode "count" skips timing entirely and scores TP = min(counted, truth),
    for comparisons where only per-video totals are available."""

    tolerance_seconds: float = 30.0
    mode: str = "temporal"

    def __post_init__(self) -> None:
        if self.tolerance_seconds <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance_seconds}")
        if self.mode not in ("temporal", "count"):
            raise ValueError(f"unknown match mode {self.mode!r}")


def _require_sorted(records: Sequence[WorkloadRecord], label: str) -> None:
    times = [r.completion_time for r in records]
    if any(a > b for a, b in zip(times, times[1:])):
        raise ValueError(f"{label} completion times are not sorted")


def match_workloads(
    pred: Sequence[WorkloadRecord],
    truth: Sequence[WorkloadRecord],
    cfg: MatchConfig = MatchConfig(),
) -> tuple[int, int, int]:
    """Greedy chronological one-to-one matching: each prediction takes the
    earliest unmatched truth within the tolerance window. Returns
    (true positives, fakes, missing). Inputs must be time-sorted."""
    _require_sorted(pred, "prediction")
    _require_sorted(truth, "ground truth")

    if cfg.mode == "count":
        tp = min(len(pred), len(truth))
        return tp, len(pred) - tp, len(truth) - tp

    window = cfg.tolerance_seconds
    tp = fake = 0
    i = 0
    for p in pred:
        # truths that fell behind every remaining prediction stay unmatched
        while i < len(truth) and truth[i].completion_time < p.completion_time - window:
            i += 1
        if i < len(truth) and truth[i].completion_time <= p.completion_time + window:
            tp += 1
            i += 1
        else:
            fake += 1
    return tp, fake, len(truth) - tp


@dataclass(frozen=True)
class EvalReport:
    """Per-video counting scorecard. Construction enforces the accounting
    identities counted = tp + fake and truth = tp + missing."""

    truth_count: int
    counted: int
    true_positives: int
    fake: int
    missing: int
    precision: float
    recall: float
    f1: float

    def __post_init__(self) -> None:
        if min(self.true_positives, self.fake, self.missing) < 0:
            raise ValueError("negative counts")
        if self.counted != self.true_positives + self.fake:
            raise ValueError(
                f"counted {self.counted} != tp {self.true_positives} + fake {self.fake}"
            )
        if self.truth_count != self.true_positives + self.missing:
            raise ValueError(
                f"truth {self.truth_count} != tp {self.true_positives} + missing {self.missing}"
            )
        for name in ("precision", "recall", "f1"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} out of range: {value}")


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean, 0 when both sides are 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def compute_metrics(tp: int, fake: int, missing: int) -> EvalReport:
    """Metrics from match counts. An empty prediction list is perfectly
    precise; an empty truth list is perfectly recalled."""
    if min(tp, fake, missing) < 0:
        raise ValueError("counts must be nonnegative")
    counted = tp + fake
    truth = tp + missing
    precision = 1.0 if counted == 0 else tp / counted
    recall = 1.0 if truth == 0 else tp / truth
    return EvalReport(
        truth_count=truth,
        counted=counted,
        true_positives=tp,
        fake=fake,
        missing=missing,
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
    )


def evaluate(
    pred: Sequence[WorkloadRecord],
    truth: Sequence[WorkloadRecord],
    cfg: MatchConfig = MatchConfig(),
) -> EvalReport:
    tp, fake, missing = match_workloads(pred, truth, cfg)
    return compute_metrics(tp, fake, missing)


@dataclass(frozen=True)
class AggregateReport:
    """Micro-average over pooled counts plus arithmetic means of the
    per-video metrics (the two standard readings of an AVG row)."""

    micro: EvalReport
    videos: int
    mean_truth: float
    mean_counted: float
    mean_precision: float
    mean_recall: float
    mean_f1: float


def aggregate_reports(reports: Sequence[EvalReport]) -> AggregateReport:
    if not reports:
        raise ValueError("nothing to aggregate")
    n = len(reports)
    micro = compute_metrics(
        sum(r.true_positives for r in reports),
        sum(r.fake for r in reports),
        sum(r.missing for r in reports),
    )
    return AggregateReport(
        micro=micro,
        videos=n,
        mean_truth=sum(r.truth_count for r in reports) / n,
        mean_counted=sum(r.counted for r in reports) / n,
        mean_precision=sum(r.precision for r in reports) / n,
        mean_recall=sum(r.recall for r in reports) / n,
        mean_f1=sum(r.f1 for r in reports) / n,
    )


# --- ground-truth wire format -------------------------------------------------

def load_truth(lines: Iterable[str]) -> dict[str, list[WorkloadRecord]]:
    """Parse line-delimited {"video": ..., "t": ...} records, grouped by
    video and time-sorted within each. A leading {"header": ...} line is
    metadata and is skipped, mirroring the detection wire format."""
    by_video: dict[str, list[WorkloadRecord]] = {}
    first_seen = False
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"truth line {line_number}: invalid JSON ({exc.msg})") from exc
        if not first_seen:
            first_seen = True
            if isinstance(raw, dict) and "header" in raw:
                continue
        video = raw.get("video")
        t = raw.get("t")
        if not isinstance(video, str) or not video:
            raise ValueError(f"truth line {line_number}: bad video id {video!r}")
        if not isinstance(t, (int, float)) or isinstance(t, bool):
            raise ValueError(f"truth line {line_number}: bad time {t!r}")
        by_video.setdefault(video, []).append(
            WorkloadRecord(float(t), source="ground_truth")
        )
    for records in by_video.values():
        records.sort(key=lambda r: r.completion_time)
    return by_video


def serialize_truth(by_video: Mapping[str, Sequence[WorkloadRecord]]) -> list[str]:
    lines = []
    for video in by_video:
        for record in by_video[video]:
            lines.append(json.dumps({"video": video, "t": record.completion_time}))
    return lines


# --- rendering ----------------------------------------------------------------

def render_comparison_table(
    rows: Sequence[tuple[str, Mapping[str, EvalReport]]],
    methods: Sequence[str],
    match_label: str = "",
) -> str:
    """Aligned text table: one row per video with truth count, then counted
    total / precision / recall / F1 per method, and an AVG row of per-video
    arithmetic means. Metrics round to two decimals here; the CSV renderers
    keep full precision."""
    header = ["NO.", "Tr"]
    for method in methods:
        header += [f"{method} CT", "P", "R", "F1"]
    table = [header]
    for video, per_method in rows:
        first = per_method[methods[0]]
        row = [video, str(first.truth_count)]
        for method in methods:
            r = per_method[method]
            row += [str(r.counted), f"{r.precision:.2f}", f"{r.recall:.2f}", f"{r.f1:.2f}"]
        table.append(row)
    if rows:
        avg_row = ["AVG", f"{sum(r[1][methods[0]].truth_count for r in rows) / len(rows):.1f}"]
        for method in methods:
            agg = aggregate_reports([per_method[method] for _, per_method in rows])
            avg_row += [
                f"{agg.mean_counted:.1f}",
                f"{agg.mean_precision:.2f}",
                f"{agg.mean_recall:.2f}",
                f"{agg.mean_f1:.2f}",
            ]
        table.append(avg_row)

    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for index, row in enumerate(table):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        if index == 0 or index == len(table) - 2:
            lines.append("-" * len(lines[-1]))
    if match_label:
        lines.append(f"matching: {match_label}")
    return "\n".join(lines)


def comparison_csv(
    rows: Sequence[tuple[str, Mapping[str, EvalReport]]], methods: Sequence[str]
) -> str:
    """Full-precision per-video metrics, one (video, method) pair per line."""
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(
        ["video", "method", "truth", "counted", "tp", "fake", "missing",
         "precision", "recall", "f1"]
    )
    for video, per_method in rows:
        for method in methods:
            r = per_method[method]
            writer.writerow(
                [video, method, r.truth_count, r.counted, r.true_positives,
                 r.fake, r.missing, repr(r.precision), repr(r.recall), repr(r.f1)]
            )
    return out.getvalue()


def totals_csv(totals: Mapping[str, tuple[int, int]]) -> str:
    """Fake/missing totals per method, ready for bar plotting."""
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["method", "fake", "missing"])
    for method in totals:
        fake, missing = totals[method]
        writer.writerow([method, fake, missing])
    return out.getvalue()
