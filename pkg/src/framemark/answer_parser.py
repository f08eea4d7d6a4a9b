"""Parse free-text model answers into temporal spans and saliency scores.

Every input string maps to exactly one validity class; parsing never
raises on content. The grammar looks for the first "from X to Y"-shaped
pair (case-insensitive, tolerating "frame"/"frames" words, '#' markers,
zero padding, decimal fractions, and dash separators), falling back to a
bare "X to Y" / "X-Y" pair when no "from" form exists.

Inverted pairs are swapped and endpoints sticking past the last frame are
pulled back, both marked Clamped; a pair lying entirely outside the video
is OutOfRange and yields no scorable span, since clamping a fully
hallucinated answer would grant unearned overlap.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .vtg_metrics import TemporalSpan, TimeUnit


class Validity(str, Enum):
    VALID = "valid"
    CLAMPED = "clamped"
    OUT_OF_RANGE = "out_of_range"
    MALFORMED = "malformed"


_NUM = r"(\d+)(?:\.\d+)?"  # integer part captured; fraction tolerated and dropped
_FRAME_WORD = r"(?:frames?\s*)?#?\s*"
_SEP = r"(?:to|[-–—])"

_FROM_PAIR = re.compile(
    rf"\bfrom\s*{_FRAME_WORD}{_NUM}\s*{_SEP}\s*{_FRAME_WORD}{_NUM}",
    re.IGNORECASE,
)
_BARE_PAIR = re.compile(
    rf"\b{_NUM}\s*{_SEP}\s*{_FRAME_WORD}{_NUM}",
    re.IGNORECASE,
)

_SALIENCY_PAIR = re.compile(
    rf"\bfrom\s*{_FRAME_WORD}{_NUM}\s*{_SEP}\s*{_FRAME_WORD}{_NUM}"
    rf"[^\n.0-9]{{0,40}}?(?:saliency|score)\s*(?:of|is|:|=)?\s*(\d+(?:\.\d+)?)",
    re.IGNORECASE,
)

MIN_SALIENCY = 1.0
MAX_SALIENCY = 5.0


@dataclass(frozen=True)
class ParseOutcome:
    """Result of parsing one moment answer.

    ``span`` is the scorable frame span (present only for Valid/Clamped);
    ``raw_pair`` is the extracted integer pair after endpoint swapping but
    before clamping, kept so hallucinated intervals can still be tallied.
    """

    span: Optional[TemporalSpan]
    raw_pair: Optional[tuple[int, int]]
    validity: Validity
    raw: str

    def to_dict(self) -> dict:
        return {
            "validity": self.validity.value,
            "start": None if self.span is None else self.span.start,
            "end": None if self.span is None else self.span.end,
            "raw_start": None if self.raw_pair is None else self.raw_pair[0],
            "raw_end": None if self.raw_pair is None else self.raw_pair[1],
            "raw_text": self.raw,
        }


def _extract_pair(text: str) -> Optional[tuple[int, int]]:
    match = _FROM_PAIR.search(text) or _BARE_PAIR.search(text)
    if match is None:
        return None
    return int(match.group(1)), int(match.group(2))


def parse_moment(text: str, n_frames: int, fps: float = 1.0) -> ParseOutcome:
    """Classify one answer against a video of ``n_frames`` frames."""
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    if fps <= 0:
        raise ValueError(f"fps must be > 0, got {fps}")
    pair = _extract_pair(text)
    if pair is None:
        return ParseOutcome(None, None, Validity.MALFORMED, text)
    a, b = pair
    clamped = a > b
    if a > b:
        a, b = b, a
    raw_pair = (a, b)
    last = n_frames - 1
    if a > last:  # a <= b, so both endpoints are beyond the video
        return ParseOutcome(None, raw_pair, Validity.OUT_OF_RANGE, text)
    if b > last:
        b = last
        clamped = True
    validity = Validity.CLAMPED if clamped else Validity.VALID
    span = TemporalSpan(float(a), float(b), TimeUnit.FRAMES)
    return ParseOutcome(span, raw_pair, validity, text)


def frames_to_seconds(span: TemporalSpan, fps: float) -> TemporalSpan:
    """Convert a frame-unit span to seconds by dividing endpoints by fps."""
    if span.unit is not TimeUnit.FRAMES:
        raise ValueError(f"expected a frame-unit span, got {span.unit.value}")
    return span.to_seconds(fps)


@dataclass(frozen=True)
class SaliencySpan:
    start: int  # clip index, inclusive
    end: int
    score: float


@dataclass(frozen=True)
class SaliencyParse:
    spans: tuple[SaliencySpan, ...]
    validity: Validity
    raw: str


def parse_saliency(text: str, clip_count: int) -> SaliencyParse:
    """Extract (clip range, score) claims like "From 4 to 10, saliency 4".

    Scores clamp into [1, 5]; ranges clamp into [0, clip_count - 1]. A range
    entirely outside the video is dropped. Any adjustment marks the parse
    Clamped; no usable claim at all is Malformed.
    """
    if clip_count < 1:
        raise ValueError(f"clip_count must be >= 1, got {clip_count}")
    last = clip_count - 1
    spans: list[SaliencySpan] = []
    clamped = False
    for match in _SALIENCY_PAIR.finditer(text):
        a, b = int(match.group(1)), int(match.group(2))
        score = float(match.group(3))
        if a > b:
            a, b = b, a
            clamped = True
        if a > last:
            clamped = True
            continue
        if b > last:
            b = last
            clamped = True
        if not MIN_SALIENCY <= score <= MAX_SALIENCY:
            score = min(max(score, MIN_SALIENCY), MAX_SALIENCY)
            clamped = True
        spans.append(SaliencySpan(a, b, score))
    if not spans:
        return SaliencyParse((), Validity.MALFORMED, text)
    validity = Validity.CLAMPED if clamped else Validity.VALID
    return SaliencyParse(tuple(spans), validity, text)


def saliency_to_clip_scores(parsed: SaliencyParse, clip_count: int) -> list[Optional[float]]:
    """Per-clip predicted saliency; overlapping claims keep the highest score."""
    scores: list[Optional[float]] = [None] * clip_count
    for sp in parsed.spans:
        for idx in range(sp.start, min(sp.end, clip_count - 1) + 1):
            if scores[idx] is None or sp.score > scores[idx]:
                scores[idx] = sp.score
    return scores


@dataclass(frozen=True)
class IntervalHistogram:
    """Counts of predicted (start, end) pairs; Malformed answers carry no
    pair and are excluded from the bins but still count toward the total."""

    bins: dict[tuple[int, int], int]
    total: int

    def top(self, k: int) -> list[tuple[tuple[int, int], int, float]]:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        ordered = sorted(self.bins.items(), key=lambda item: (-item[1], item[0]))
        return [(pair, count, count / self.total) for pair, count in ordered[:k]]


def build_histogram(outcomes: Sequence[ParseOutcome]) -> IntervalHistogram:
    if not outcomes:
        raise ValueError("cannot build a histogram from zero outcomes")
    counts: Counter[tuple[int, int]] = Counter(
        o.raw_pair for o in outcomes if o.raw_pair is not None
    )
    return IntervalHistogram(dict(counts), len(outcomes))


def interval_distribution(
    outcomes: Sequence[ParseOutcome], k: int
) -> list[tuple[tuple[int, int], int, float]]:
    """Top-k most common predicted intervals with their frequency shares."""
    return build_histogram(outcomes).top(k)
