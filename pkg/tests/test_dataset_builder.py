from __future__ import annotations

import json
import re
from pathlib import Path

import pytest

from framemark import overlay
from framemark.answer_parser import Validity, parse_moment
from framemark.dataset_builder import (
    Annotation,
    DatasetBuildError,
    build_dataset,
    build_qa,
    load_annotations,
    load_manifest,
    manifest_answers_round_trip,
    seconds_to_frames,
)
from framemark.io_utils import SchemaError

from .conftest import gradient_frame

QUESTION_RE = re.compile(r"^During which frames can we see .+\?$")
ANSWER_RE = re.compile(r"^From \d+ to \d+$")


class TestBuildQA:
    def test_templates_verbatim(self):
        q, a = build_qa("a woman eats food", 4, 11)
        assert q == "During which frames can we see a woman eats food?"
        assert a == "From 4 to 11"

    def test_degenerate_span(self):
        _, a = build_qa("x", 0, 0)
        assert a == "From 0 to 0"

    def test_inverted_span_rejected(self):
        with pytest.raises(ValueError):
            build_qa("x", 5, 2)
        with pytest.raises(ValueError):
            build_qa("", 0, 1)

    def test_seconds_conversion_matches_annotation(self):
        # 8.0s..22.0s at 0.5 fps -> frames 4..11
        start_f, end_f = seconds_to_frames(8.0, 22.0, fps=0.5, n_frames=100)
        assert (start_f, end_f) == (4, 11)
        q, a = build_qa("a woman eats food", start_f, end_f)
        assert a == "From 4 to 11"

    def test_seconds_conversion_clamps_end(self):
        assert seconds_to_frames(0.0, 99.0, fps=1.0, n_frames=10) == (0, 9)

    def test_seconds_conversion_rejects_outside_video(self):
        with pytest.raises(ValueError):
            seconds_to_frames(50.0, 60.0, fps=1.0, n_frames=10)


def write_video(root: Path, video_id: str, n_frames: int, size: int = 64) -> None:
    for i in range(n_frames):
        overlay.save_frame(gradient_frame(size), root / video_id / f"frame_{i:06d}.png")


def write_annotations(path: Path, rows: list[dict]) -> None:
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


@pytest.fixture
def small_config() -> overlay.OverlayConfig:
    return overlay.OverlayConfig(font_size_px=12, margin_px=4)


class TestBuildDataset:
    def test_missing_video_is_excluded_and_logged(self, tmp_path, small_config):
        frames_root = tmp_path / "frames"
        write_video(frames_root, "vidA", 6)
        write_video(frames_root, "vidB", 6)
        anns = [
            Annotation("vidA", "a cat jumps", 0.0, 3.0),
            Annotation("vidB", "a dog barks", 1.0, 4.0),
            Annotation("vidC", "a bird sings", 0.0, 2.0),  # no frames on disk
        ]
        out = tmp_path / "out"
        result = build_dataset(anns, frames_root, out, small_config, fps=1.0, canvas_size=64)
        assert result.n_records == 2
        assert result.exclusions == [("vidC", "no frames found")]
        log_lines = (out / "exclusions.log").read_text().splitlines()
        assert log_lines == ["vidC\tno frames found"]
        manifest = load_manifest(out / "manifest.jsonl")
        assert [r.video_id for r in manifest] == ["vidA", "vidB"]

    def test_manifest_is_deterministic(self, tmp_path, small_config):
        frames_root = tmp_path / "frames"
        write_video(frames_root, "vid1", 4)
        write_video(frames_root, "vid2", 4)
        anns = [
            Annotation("vid2", "second video event", 0.0, 2.0),
            Annotation("vid1", "first video event", 1.0, 3.0),
            Annotation("vid1", "another event", 0.0, 1.0),
        ]
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        build_dataset(anns, frames_root, out1, small_config, fps=1.0, canvas_size=64)
        build_dataset(anns, frames_root, out2, small_config, fps=1.0, canvas_size=64)
        assert (out1 / "manifest.jsonl").read_bytes() == (out2 / "manifest.jsonl").read_bytes()

    def test_template_exactness_and_round_trip(self, tmp_path, small_config):
        frames_root = tmp_path / "frames"
        write_video(frames_root, "vid1", 8)
        anns = [
            Annotation("vid1", "a chef stirs in the spices", 0.0, 5.0),
            Annotation("vid1", "someone waves", 2.5, 7.5),
        ]
        out = tmp_path / "out"
        result = build_dataset(anns, frames_root, out, small_config, fps=1.0, canvas_size=64)
        manifest = load_manifest(out / "manifest.jsonl")
        assert len(manifest) == 2
        for rec in manifest:
            assert QUESTION_RE.match(rec.question), rec.question
            assert ANSWER_RE.match(rec.answer), rec.answer
            outcome = parse_moment(rec.answer, n_frames=len(rec.frame_paths), fps=rec.fps)
            assert outcome.validity is Validity.VALID
            assert (int(outcome.span.start), int(outcome.span.end)) == rec.span_frames
        assert manifest_answers_round_trip(manifest)
        assert manifest_answers_round_trip(result.records)

    def test_referential_integrity(self, tmp_path, small_config):
        frames_root = tmp_path / "frames"
        write_video(frames_root, "vid1", 5)
        anns = [Annotation("vid1", "an event", 0.0, 4.0)]
        out = tmp_path / "out"
        build_dataset(anns, frames_root, out, small_config, fps=1.0, canvas_size=64)
        for rec in load_manifest(out / "manifest.jsonl"):
            assert rec.frame_paths
            for rel in rec.frame_paths:
                assert (out / rel).is_file(), rel
            assert rec.span_frames[1] < len(rec.frame_paths)

    def test_span_outside_video_excluded(self, tmp_path, small_config):
        frames_root = tmp_path / "frames"
        write_video(frames_root, "vid1", 4)
        anns = [
            Annotation("vid1", "fits", 0.0, 2.0),
            Annotation("vid1", "starts too late", 50.0, 60.0),
        ]
        out = tmp_path / "out"
        result = build_dataset(anns, frames_root, out, small_config, fps=1.0, canvas_size=64)
        assert result.n_records == 1
        assert len(result.exclusions) == 1
        assert result.exclusions[0][0] == "vid1:1"

    def test_frames_are_annotated(self, tmp_path, small_config):
        frames_root = tmp_path / "frames"
        write_video(frames_root, "vid1", 3)
        out = tmp_path / "out"
        build_dataset(
            [Annotation("vid1", "x happens", 0.0, 2.0)],
            frames_root,
            out,
            small_config,
            fps=1.0,
            canvas_size=64,
        )
        import numpy as np

        plain = gradient_frame(64)
        for i in range(3):
            written = overlay.load_frame(out / "frames" / "vid1" / f"frame_{i:06d}.png")
            assert not np.array_equal(written.pixels, plain.pixels)

    def test_unreadable_root_raises(self, tmp_path, small_config):
        with pytest.raises(DatasetBuildError):
            build_dataset([], tmp_path / "nope", tmp_path / "out", small_config, fps=1.0)


class TestLoadAnnotations:
    def test_neutral_schema(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        write_annotations(
            path, [{"video_id": "v", "query": "q", "start_s": 0.0, "end_s": 2.0}]
        )
        anns = load_annotations(path)
        assert anns == [Annotation("v", "q", 0.0, 2.0)]

    def test_missing_field_names_line(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        write_annotations(path, [{"video_id": "v", "query": "q", "start_s": 0.0}])
        with pytest.raises(SchemaError, match=r":1:"):
            load_annotations(path)

    def test_unknown_format(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        write_annotations(path, [])
        with pytest.raises(DatasetBuildError, match="unknown annotation format"):
            load_annotations(path, fmt="exotic")
