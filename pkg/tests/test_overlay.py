from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from framemark import overlay
from framemark.overlay import (
    FrameImage,
    InvalidImageError,
    LayoutError,
    NumberingMode,
    OverlayConfig,
    Position,
    SamplingMode,
    SamplingPlan,
    annotate_sequence,
    format_value,
    glyph_box,
    normalize_frame,
    plan_indices,
    render_number,
)

from .conftest import GOLDEN_DIR, gradient_frame, random_frame


def ref_bilinear_pixel(src: np.ndarray, oy: int, ox: int, out_h: int, out_w: int) -> list[int]:
    """Scalar reference of the declared bilinear kernel."""
    in_h, in_w = src.shape[:2]
    sy = (oy + 0.5) * in_h / out_h - 0.5
    sx = (ox + 0.5) * in_w / out_w - 0.5
    sy = min(max(sy, 0.0), in_h - 1.0)
    sx = min(max(sx, 0.0), in_w - 1.0)
    y0, x0 = int(math.floor(sy)), int(math.floor(sx))
    y1, x1 = min(y0 + 1, in_h - 1), min(x0 + 1, in_w - 1)
    fy, fx = sy - y0, sx - x0
    out = []
    for c in range(3):
        p00, p01 = float(src[y0, x0, c]), float(src[y0, x1, c])
        p10, p11 = float(src[y1, x0, c]), float(src[y1, x1, c])
        top = p00 * (1.0 - fx) + p01 * fx
        bot = p10 * (1.0 - fx) + p11 * fx
        out.append(int(math.floor(top * (1.0 - fy) + bot * fy + 0.5)))
    return out


class TestNormalize:
    def test_downscale_672_to_336(self):
        rng = np.random.default_rng(0)
        frame = random_frame(rng, 672, 672)
        out = normalize_frame(frame, 336)
        assert (out.width, out.height) == (336, 336)

    def test_idempotent_at_canvas_size(self, canvas_frame):
        out = normalize_frame(canvas_frame, 336)
        assert np.array_equal(out.pixels, canvas_frame.pixels)
        assert out.pixels is not canvas_frame.pixels  # still a fresh buffer

    def test_matches_scalar_reference(self):
        rng = np.random.default_rng(7)
        frame = random_frame(rng, 480, 640)
        out = normalize_frame(frame, 336).pixels
        points = [(0, 0), (0, 335), (335, 0), (335, 335)]
        points += [(y, x) for y in range(3, 336, 37) for x in range(5, 336, 41)]
        for oy, ox in points:
            ref = ref_bilinear_pixel(frame.pixels, oy, ox, 336, 336)
            got = out[oy, ox].astype(int)
            assert max(abs(int(g) - r) for g, r in zip(got, ref)) <= 1

    def test_upscale(self):
        rng = np.random.default_rng(3)
        frame = random_frame(rng, 100, 50)
        out = normalize_frame(frame, 336)
        assert (out.width, out.height) == (336, 336)

    def test_zero_dimension_rejected(self):
        with pytest.raises(InvalidImageError):
            FrameImage(np.zeros((0, 4, 3), dtype=np.uint8))
        with pytest.raises(InvalidImageError):
            normalize_frame(gradient_frame(16), 0)


class TestRenderNumber:
    def test_golden_value7_default_design(self, canvas_frame):
        golden = overlay.load_frame(GOLDEN_DIR / "value7_size40_red_bottomright.png")
        rendered = render_number(canvas_frame, 7, OverlayConfig())
        assert np.array_equal(rendered.pixels, golden.pixels)

    def test_golden_timestamp_0110(self, canvas_frame):
        golden = overlay.load_frame(GOLDEN_DIR / "mmss0110_size40_red_bottomright.png")
        config = OverlayConfig(numbering_mode=NumberingMode.TIMESTAMP_MMSS)
        rendered = render_number(canvas_frame, 70, config)
        assert np.array_equal(rendered.pixels, golden.pixels)

    def test_deterministic(self, canvas_frame):
        config = OverlayConfig(font_size_px=60, color=(0, 0, 255), position=Position.TOP_LEFT)
        a = render_number(canvas_frame, 42, config)
        b = render_number(canvas_frame, 42, config)
        assert np.array_equal(a.pixels, b.pixels)

    def test_input_frame_untouched(self, canvas_frame):
        before = canvas_frame.pixels.copy()
        render_number(canvas_frame, 5, OverlayConfig())
        assert np.array_equal(canvas_frame.pixels, before)

    @pytest.mark.parametrize("position", list(Position))
    def test_changed_pixels_inside_glyph_box(self, canvas_frame, position):
        config = OverlayConfig(position=position)
        rendered = render_number(canvas_frame, 87, config)
        x, y, w, h = glyph_box(87, config, 336)
        diff = np.argwhere((rendered.pixels != canvas_frame.pixels).any(axis=2))
        assert diff.size > 0
        assert diff[:, 0].min() >= y and diff[:, 0].max() < y + h
        assert diff[:, 1].min() >= x and diff[:, 1].max() < x + w

    def test_value_zero_renders_something(self, canvas_frame):
        for position in Position:
            out = render_number(canvas_frame, 0, OverlayConfig(position=position))
            assert not np.array_equal(out.pixels, canvas_frame.pixels)

    def test_value_99_center_overlaps_image_center(self, canvas_frame):
        config = OverlayConfig(position=Position.CENTER)
        x, y, w, h = glyph_box(99, config, 336)
        assert x <= 168 <= x + w and y <= 168 <= y + h
        rendered = render_number(canvas_frame, 99, config)
        central = (
            rendered.pixels[y : y + h, x : x + w] != canvas_frame.pixels[y : y + h, x : x + w]
        )
        assert central.any()

    def test_bottom_right_margin_anchoring(self):
        config = OverlayConfig(font_size_px=40, margin_px=10)
        x, y, w, h = glyph_box(7, config, 336)
        assert (x + w, y + h) == (336 - 10, 336 - 10)
        assert h == 40

    def test_timestamp_format(self):
        assert format_value(70, NumberingMode.TIMESTAMP_MMSS) == "01:10"
        assert format_value(0, NumberingMode.TIMESTAMP_MMSS) == "00:00"
        assert format_value(3599, NumberingMode.TIMESTAMP_MMSS) == "59:59"
        assert format_value(6000, NumberingMode.TIMESTAMP_MMSS) == "100:00"
        assert format_value(70, NumberingMode.FRAME_INDEX) == "70"

    def test_layout_error_when_box_cannot_fit(self, canvas_frame):
        config = OverlayConfig(font_size_px=160)
        with pytest.raises(LayoutError):
            render_number(canvas_frame, 9_999_999 - 1, config)

    def test_value_bounds(self, canvas_frame):
        with pytest.raises(ValueError):
            render_number(canvas_frame, -1, OverlayConfig())
        with pytest.raises(ValueError):
            render_number(canvas_frame, 10**7, OverlayConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OverlayConfig(font_size_px=4)
        with pytest.raises(ValueError):
            OverlayConfig(font_size_px=200)
        with pytest.raises(ValueError):
            OverlayConfig(margin_px=-1)
        with pytest.raises(ValueError):
            OverlayConfig(color=(300, 0, 0))


class TestPlanIndices:
    def test_uniform_example(self):
        plan = SamplingPlan(SamplingMode.UNIFORM, ratio=0.2)
        assert plan_indices(10, plan) == [0, 5]

    def test_all_selects_everything(self):
        assert plan_indices(10, SamplingPlan(SamplingMode.ALL)) == list(range(10))

    def test_random_reproducible(self):
        plan = SamplingPlan(SamplingMode.RANDOM, ratio=0.5, seed=42)
        assert plan_indices(10, plan) == plan_indices(10, plan)

    def test_random_seed_changes_selection(self):
        a = plan_indices(1000, SamplingPlan(SamplingMode.RANDOM, ratio=0.5, seed=1))
        b = plan_indices(1000, SamplingPlan(SamplingMode.RANDOM, ratio=0.5, seed=2))
        assert a != b

    @given(
        n=st.integers(min_value=1, max_value=1000),
        tenths=st.integers(min_value=1, max_value=10),
        mode=st.sampled_from([SamplingMode.UNIFORM, SamplingMode.RANDOM]),
    )
    @settings(max_examples=200, deadline=None)
    def test_cardinality_and_monotonicity(self, n, tenths, mode):
        from fractions import Fraction

        plan = SamplingPlan(mode, ratio=tenths / 10, seed=123)
        got = plan_indices(n, plan)
        expected_m = math.ceil(Fraction(tenths, 10) * n)
        assert len(got) == expected_m
        assert all(0 <= i < n for i in got)
        assert all(a < b for a, b in zip(got, got[1:]))
        if mode is SamplingMode.UNIFORM:
            assert got == [k * n // expected_m for k in range(expected_m)]

    def test_ratio_validation(self):
        with pytest.raises(ValueError):
            SamplingPlan(SamplingMode.UNIFORM, ratio=0.0)
        with pytest.raises(ValueError):
            SamplingPlan(SamplingMode.UNIFORM, ratio=1.5)
        with pytest.raises(ValueError):
            plan_indices(0, SamplingPlan(SamplingMode.ALL))


class TestAnnotateSequence:
    def test_nineteen_frames_all_annotated(self):
        frames = [gradient_frame(128) for _ in range(19)]
        config = OverlayConfig(font_size_px=16, margin_px=4)
        out, rendered = annotate_sequence(frames, SamplingPlan(SamplingMode.ALL), config)
        assert len(out) == 19
        assert rendered == {i: str(i) for i in range(19)}
        for i, (before, after) in enumerate(zip(frames, out)):
            assert not np.array_equal(before.pixels, after.pixels), f"frame {i} unchanged"

    def test_sampled_frames_keep_original_indices(self):
        frames = [gradient_frame(128) for _ in range(10)]
        config = OverlayConfig(font_size_px=16, margin_px=4)
        plan = SamplingPlan(SamplingMode.UNIFORM, ratio=0.2)
        out, rendered = annotate_sequence(frames, plan, config)
        assert rendered == {0: "0", 5: "5"}  # original indices, not ranks 0/1
        for i in range(10):
            changed = not np.array_equal(frames[i].pixels, out[i].pixels)
            assert changed == (i in (0, 5))

    def test_timestamp_mode_index70_renders_0110(self):
        frames = [gradient_frame(128) for _ in range(71)]
        config = OverlayConfig(
            font_size_px=16, margin_px=4, numbering_mode=NumberingMode.TIMESTAMP_MMSS
        )
        plan = SamplingPlan(SamplingMode.RANDOM, ratio=0.05, seed=9)
        selected = plan_indices(71, plan)
        _, rendered = annotate_sequence(frames, plan, config, fps=1.0)
        assert set(rendered) == set(selected)
        _, rendered_full = annotate_sequence(frames, SamplingPlan(SamplingMode.ALL), config, fps=1.0)
        assert rendered_full[70] == "01:10"

    def test_timestamp_mode_half_fps(self):
        frames = [gradient_frame(128) for _ in range(5)]
        config = OverlayConfig(
            font_size_px=16, margin_px=4, numbering_mode=NumberingMode.TIMESTAMP_MMSS
        )
        _, rendered = annotate_sequence(frames, SamplingPlan(SamplingMode.ALL), config, fps=0.5)
        assert rendered[4] == "00:08"  # index / fps seconds

    def test_fps_validation(self):
        with pytest.raises(ValueError):
            annotate_sequence([gradient_frame(64)], SamplingPlan(), OverlayConfig(), fps=0)

    def test_error_names_offending_frame(self):
        frames = [gradient_frame(64) for _ in range(12)]
        config = OverlayConfig(font_size_px=60)  # "10" cannot fit on 64px canvas
        with pytest.raises(LayoutError, match=r"frame \d+"):
            annotate_sequence(frames, SamplingPlan(SamplingMode.ALL), config)


class TestFrameFiles:
    def test_round_trip_and_ordering(self, tmp_path):
        frames = [gradient_frame(32) for _ in range(3)]
        for i, f in enumerate(frames):
            overlay.save_frame(f, tmp_path / f"frame_{i:06d}.png")
        (tmp_path / "notes.txt").write_text("ignore me")
        files = overlay.list_frame_files(tmp_path)
        assert [p.name for p in files] == [f"frame_{i:06d}.png" for i in range(3)]
        loaded = overlay.load_frame(files[1])
        assert np.array_equal(loaded.pixels, frames[1].pixels)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(InvalidImageError):
            overlay.list_frame_files(tmp_path / "missing")
