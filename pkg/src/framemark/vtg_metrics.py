"""Temporal grounding metrics: span IoU, recall@m, mIoU, AP/mAP, HIT@1.

Moment retrieval scores one predicted span per query against ground truth;
highlight detection ranks fixed-length clips per query by predicted
saliency. Missing or unusable predictions count as misses (IoU 0, AP 0)
rather than being dropped, so refusals cannot inflate the averages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence


class TimeUnit(str, Enum):
    SECONDS = "seconds"
    FRAMES = "frames"


@dataclass(frozen=True)
class TemporalSpan:
    """Closed interval [start, end] in seconds or frames."""

    start: float
    end: float
    unit: TimeUnit = TimeUnit.SECONDS

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValueError(f"span start must be >= 0, got {self.start}")
        if self.end < self.start:
            raise ValueError(f"span end must be >= start, got ({self.start}, {self.end})")

    @property
    def length(self) -> float:
        return self.end - self.start

    def to_seconds(self, fps: float) -> "TemporalSpan":
        if self.unit is TimeUnit.SECONDS:
            return self
        if fps <= 0:
            raise ValueError(f"fps must be > 0, got {fps}")
        return TemporalSpan(self.start / fps, self.end / fps, TimeUnit.SECONDS)


@dataclass
class MomentRecord:
    id: str
    query: str
    gt: TemporalSpan
    pred: Optional[TemporalSpan] = None
    validity: str = "valid"


@dataclass(frozen=True)
class Clip:
    clip_start: float
    gt_saliency: float
    pred_saliency: Optional[float] = None


@dataclass
class HighlightRecord:
    id: str
    query: str
    clips: list[Clip] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.clips:
            raise ValueError(f"record {self.id!r} has no clips")


def iou(a: TemporalSpan, b: TemporalSpan) -> float:
    """Intersection over union of two spans in the same unit.

    Identical zero-length spans overlap fully (1.0); a zero-length union
    otherwise scores 0.
    """
    if a.unit is not b.unit:
        raise ValueError(f"unit mismatch: {a.unit.value} vs {b.unit.value}")
    inter = min(a.end, b.end) - max(a.start, b.start)
    inter = max(inter, 0.0)
    union = a.length + b.length - inter
    if union <= 0.0:
        return 1.0 if (a.start, a.end) == (b.start, b.end) else 0.0
    return inter / union


def record_iou(record: MomentRecord) -> float:
    if record.pred is None:
        return 0.0
    return iou(record.pred, record.gt)


def recall_at(records: Sequence[MomentRecord], m: float) -> float:
    """Fraction of records whose prediction reaches IoU >= m."""
    if not records:
        raise ValueError("recall_at needs at least one record")
    if not 0.0 < m <= 1.0:
        raise ValueError(f"threshold m must be in (0, 1], got {m}")
    hits = sum(1 for r in records if record_iou(r) >= m)
    return hits / len(records)


def mean_iou(records: Sequence[MomentRecord]) -> float:
    if not records:
        raise ValueError("mean_iou needs at least one record")
    return sum(record_iou(r) for r in records) / len(records)


def average_precision(ranked_relevance: Sequence[bool]) -> float:
    """AP of an already-ranked relevance list: mean precision at each hit."""
    if not ranked_relevance:
        raise ValueError("average_precision needs a nonempty ranking")
    hits = 0
    precisions = []
    for k, rel in enumerate(ranked_relevance, start=1):
        if rel:
            hits += 1
            precisions.append(hits / k)
    if not precisions:
        return 0.0
    return sum(precisions) / len(precisions)


def rank_clips(clips: Sequence[Clip]) -> list[Clip]:
    """Descending predicted saliency; ties by earlier clip_start; clips
    without a prediction rank last, ordered by clip_start."""
    return sorted(
        clips,
        key=lambda c: (
            1 if c.pred_saliency is None else 0,
            0.0 if c.pred_saliency is None else -c.pred_saliency,
            c.clip_start,
        ),
    )


def _relevance(clips: Sequence[Clip], threshold: float) -> list[bool]:
    return [c.gt_saliency >= threshold for c in clips]


def map_highlight(records: Sequence[HighlightRecord], relevance_threshold: float = 3.0) -> float:
    """Mean per-query AP; a query with no predicted clip at all scores 0."""
    if not records:
        raise ValueError("map_highlight needs at least one record")
    aps = []
    for rec in records:
        if all(c.pred_saliency is None for c in rec.clips):
            aps.append(0.0)
            continue
        ranked = rank_clips(rec.clips)
        aps.append(average_precision(_relevance(ranked, relevance_threshold)))
    return sum(aps) / len(aps)


def hit_at_1(records: Sequence[HighlightRecord], relevance_threshold: float = 3.0) -> float:
    """Fraction of queries whose top-ranked clip is relevant."""
    if not records:
        raise ValueError("hit_at_1 needs at least one record")
    hits = 0
    for rec in records:
        if all(c.pred_saliency is None for c in rec.clips):
            continue
        top = rank_clips(rec.clips)[0]
        if top.gt_saliency >= relevance_threshold:
            hits += 1
    return hits / len(records)


DEFAULT_RECALL_THRESHOLDS = (0.3, 0.5, 0.7)


def moment_report(
    records: Sequence[MomentRecord],
    thresholds: Sequence[float] = DEFAULT_RECALL_THRESHOLDS,
    n_parse_failures: int = 0,
) -> dict:
    report: dict = {}
    for m in thresholds:
        report[f"R@{m:g}"] = recall_at(records, m)
    report["mIoU"] = mean_iou(records)
    report["n_records"] = len(records)
    report["n_parse_failures"] = n_parse_failures
    return report


def highlight_report(
    records: Sequence[HighlightRecord],
    relevance_threshold: float = 3.0,
    n_parse_failures: int = 0,
) -> dict:
    return {
        "mAP": map_highlight(records, relevance_threshold),
        "HIT@1": hit_at_1(records, relevance_threshold),
        "n_records": len(records),
        "n_parse_failures": n_parse_failures,
    }


def format_report_table(report: dict) -> str:
    """Two-column human-readable rendering of a metric report."""
    width = max(len(k) for k in report)
    lines = []
    for key, value in report.items():
        if isinstance(value, float):
            lines.append(f"{key:<{width}}  {value:.4f}")
        else:
            lines.append(f"{key:<{width}}  {value}")
    return "\n".join(lines)
