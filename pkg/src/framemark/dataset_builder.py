"""Build instruction datasets of (frames, question, answer) triples.

Questions and answers follow fixed templates so a downstream parser can
round-trip every answer:

    question: "During which frames can we see {query}?"
    answer:   "From {x} to {y}"

Annotated frame trees are produced with the overlay module; videos with
missing or unreadable frames are excluded and logged, never silently
dropped. Output is deterministic: records are ordered by video id and
annotation order, so re-running on unchanged inputs reproduces the
manifest byte for byte.
"""

from __future__ import annotations

import json
import logging
import math
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

from . import overlay
from .io_utils import SchemaError, read_jsonl, write_jsonl
from .overlay import FrameImage, OverlayConfig, SamplingMode, SamplingPlan

logger = logging.getLogger(__name__)

QUESTION_TEMPLATE = "During which frames can we see {query}?"
ANSWER_TEMPLATE = "From {start} to {end}"


class DatasetBuildError(Exception):
    """Raised for unusable inputs (unreadable roots, empty annotation files)."""


def build_qa(query: str, start_frame: int, end_frame: int) -> tuple[str, str]:
    """The templated question/answer pair for one annotation."""
    if not query:
        raise ValueError("query must be nonempty")
    if start_frame < 0 or end_frame < start_frame:
        raise ValueError(f"invalid frame span ({start_frame}, {end_frame})")
    question = QUESTION_TEMPLATE.format(query=query)
    answer = ANSWER_TEMPLATE.format(start=start_frame, end=end_frame)
    return question, answer


def seconds_to_frames(start_s: float, end_s: float, fps: float, n_frames: int) -> tuple[int, int]:
    """Map a second-unit annotation onto frame indices.

    Endpoints floor onto the frame grid and the end is capped at the last
    frame, keeping answers inside the annotated interval.
    """
    if fps <= 0:
        raise ValueError(f"fps must be > 0, got {fps}")
    if start_s < 0 or end_s < start_s:
        raise ValueError(f"invalid second span ({start_s}, {end_s})")
    start_f = math.floor(start_s * fps)
    end_f = min(math.floor(end_s * fps), n_frames - 1)
    if start_f > n_frames - 1:
        raise ValueError(f"span starts after the last frame ({start_f} >= {n_frames})")
    return start_f, max(end_f, start_f)


@dataclass(frozen=True)
class Annotation:
    video_id: str
    query: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class InstructionRecord:
    id: str
    video_id: str
    fps: float
    question: str
    answer: str
    frame_paths: tuple[str, ...]
    span_frames: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "video_id": self.video_id,
            "fps": self.fps,
            "question": self.question,
            "answer": self.answer,
            "frame_paths": list(self.frame_paths),
            "span_frames": list(self.span_frames),
        }


# Ingestion: the neutral schema is one JSON object per line with the fields
# below; dataset-specific layouts plug in as adapters.
AnnotationLoader = Callable[[Path], list[Annotation]]

_ADAPTERS: dict[str, AnnotationLoader] = {}


def register_adapter(name: str, loader: AnnotationLoader) -> None:
    _ADAPTERS[name] = loader


def _load_neutral(path: Path) -> list[Annotation]:
    rows: list[Annotation] = []
    for lineno, rec in read_jsonl(path):
        missing = [f for f in ("video_id", "query", "start_s", "end_s") if f not in rec]
        if missing:
            raise SchemaError(f"{path}:{lineno}: missing field(s) {missing}")
        rows.append(
            Annotation(
                video_id=str(rec["video_id"]),
                query=str(rec["query"]),
                start_s=float(rec["start_s"]),
                end_s=float(rec["end_s"]),
            )
        )
    return rows


register_adapter("neutral", _load_neutral)


def load_annotations(path: Path | str, fmt: str = "neutral") -> list[Annotation]:
    path = Path(path)
    if not path.is_file():
        raise DatasetBuildError(f"annotation file not found: {path}")
    try:
        loader = _ADAPTERS[fmt]
    except KeyError:
        raise DatasetBuildError(f"unknown annotation format {fmt!r}; known: {sorted(_ADAPTERS)}")
    return loader(path)


@dataclass
class BuildResult:
    records: list[InstructionRecord]
    exclusions: list[tuple[str, str]]  # (video_id or row ref, reason)
    n_annotations: int

    @property
    def n_records(self) -> int:
        return len(self.records)


def build_dataset(
    annotations: Iterable[Annotation],
    frames_root: Path | str,
    out_dir: Path | str,
    config: Optional[OverlayConfig] = None,
    fps: float = 0.5,
    canvas_size: int = overlay.DEFAULT_CANVAS,
) -> BuildResult:
    """Annotate frames and emit one instruction record per valid annotation.

    Writes ``frames/<video_id>/`` trees, ``manifest.jsonl`` and
    ``exclusions.log`` under ``out_dir``.
    """
    frames_root = Path(frames_root)
    out_dir = Path(out_dir)
    if not frames_root.is_dir():
        raise DatasetBuildError(f"frames root is not a directory: {frames_root}")
    if fps <= 0:
        raise DatasetBuildError(f"fps must be > 0, got {fps}")
    config = config or OverlayConfig()

    by_video: dict[str, list[Annotation]] = {}
    n_annotations = 0
    for ann in annotations:
        n_annotations += 1
        by_video.setdefault(ann.video_id, []).append(ann)

    plan = SamplingPlan(mode=SamplingMode.ALL)
    records: list[InstructionRecord] = []
    exclusions: list[tuple[str, str]] = []

    for video_id in sorted(by_video):
        anns = by_video[video_id]
        video_dir = frames_root / video_id
        try:
            frame_files = overlay.list_frame_files(video_dir)
        except overlay.InvalidImageError:
            frame_files = []
        if not frame_files:
            exclusions.append((video_id, "no frames found"))
            continue
        try:
            frames = [
                overlay.normalize_frame(overlay.load_frame(p), canvas_size) for p in frame_files
            ]
            annotated, _ = overlay.annotate_sequence(frames, plan, config, fps=fps)
        except (OSError, overlay.OverlayError) as exc:
            exclusions.append((video_id, f"unreadable or unrenderable frames: {exc}"))
            continue

        rel_paths = []
        for src, frame in zip(frame_files, annotated):
            dest = out_dir / "frames" / video_id / src.name
            overlay.save_frame(frame, dest)
            rel_paths.append(dest.relative_to(out_dir).as_posix())

        n = len(frame_files)
        for k, ann in enumerate(anns):
            rec_id = f"{video_id}:{k}"
            try:
                start_f, end_f = seconds_to_frames(ann.start_s, ann.end_s, fps, n)
            except ValueError as exc:
                exclusions.append((rec_id, str(exc)))
                continue
            question, answer = build_qa(ann.query, start_f, end_f)
            records.append(
                InstructionRecord(
                    id=rec_id,
                    video_id=video_id,
                    fps=fps,
                    question=question,
                    answer=answer,
                    frame_paths=tuple(rel_paths),
                    span_frames=(start_f, end_f),
                )
            )

    write_jsonl(out_dir / "manifest.jsonl", (r.to_dict() for r in records))
    log_path = out_dir / "exclusions.log"
    log_path.parent.mkdir(parents=True, exist_ok=True)
    with log_path.open("w", encoding="utf-8") as fh:
        for ref, reason in exclusions:
            fh.write(f"{ref}\t{reason}\n")
    for ref, reason in exclusions:
        logger.info("excluded %s: %s", ref, reason)

    return BuildResult(records=records, exclusions=exclusions, n_annotations=n_annotations)


def copy_tree_entry(src: Path, dest: Path) -> None:
    dest.parent.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(src, dest)


def load_manifest(path: Path | str) -> list[InstructionRecord]:
    records = []
    for lineno, rec in read_jsonl(path):
        try:
            records.append(
                InstructionRecord(
                    id=str(rec["id"]),
                    video_id=str(rec["video_id"]),
                    fps=float(rec["fps"]),
                    question=str(rec["question"]),
                    answer=str(rec["answer"]),
                    frame_paths=tuple(rec["frame_paths"]),
                    span_frames=tuple(rec["span_frames"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}:{lineno}: bad manifest row ({exc})") from exc
    return records


def manifest_answers_round_trip(records: Iterable[InstructionRecord]) -> bool:
    """Sanity check: every answer reparses to its record's span."""
    from .answer_parser import Validity, parse_moment

    for rec in records:
        n_frames = len(rec.frame_paths)
        outcome = parse_moment(rec.answer, n_frames=n_frames, fps=rec.fps)
        if outcome.validity is not Validity.VALID:
            return False
        assert outcome.span is not None
        if (int(outcome.span.start), int(outcome.span.end)) != rec.span_frames:
            return False
    return True


def dumps_annotation(ann: Annotation) -> str:
    return json.dumps(
        {
            "video_id": ann.video_id,
            "query": ann.query,
            "start_s": ann.start_s,
            "end_s": ann.end_s,
        },
        ensure_ascii=False,
        sort_keys=True,
    )
