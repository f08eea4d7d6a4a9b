"""Deterministic frame-number overlays.

Renders numeric prompts onto video frames with a fixed, embedded glyph set
and fully specified arithmetic so output is byte-identical across runs and
platforms:

- resize: non-aspect-preserving bilinear to a square canvas; source
  coordinates use the half-pixel convention sx = (x + 0.5) * in/out - 0.5,
  blended in float64 and rounded half-up to uint8;
- glyphs: embedded bitmap masks scaled with the same bilinear kernel
  (this is the anti-aliasing; no platform text stack is involved);
- compositing: integer alpha blend out = (a * ink + (255 - a) * src + 127) // 255
  per channel, so pixels with zero alpha are untouched.

All operations are pure functions of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image

from .glyphs import BASE_HEIGHT, GLYPH_MASKS

DEFAULT_CANVAS = 336

MIN_FONT_SIZE = 8
MAX_FONT_SIZE = 160
MAX_RENDER_VALUE = 10**7  # layout sanity bound

# Named colors accepted by the CLI and the design-search sweep axes.
NAMED_COLORS: dict[str, tuple[int, int, int]] = {
    "red": (255, 0, 0),
    "blue": (0, 0, 255),
    "black": (0, 0, 0),
    "green": (0, 255, 0),
    "white": (255, 255, 255),
    "yellow": (255, 255, 0),
}


class OverlayError(Exception):
    """Base class for overlay failures."""


class InvalidImageError(OverlayError):
    """Raised for degenerate or malformed image buffers."""


class LayoutError(OverlayError):
    """Raised when a glyph box cannot be placed inside the canvas."""


class Position(str, Enum):
    TOP_LEFT = "top_left"
    TOP_RIGHT = "top_right"
    BOTTOM_LEFT = "bottom_left"
    BOTTOM_RIGHT = "bottom_right"
    CENTER = "center"


class NumberingMode(str, Enum):
    FRAME_INDEX = "frame_index"
    TIMESTAMP_MMSS = "timestamp_mmss"


class SamplingMode(str, Enum):
    ALL = "all"
    UNIFORM = "uniform"
    RANDOM = "random"


@dataclass(frozen=True)
class OverlayConfig:
    """Design of the rendered number: size, color, placement."""

    font_size_px: int = 40
    color: tuple[int, int, int] = (255, 0, 0)
    position: Position = Position.BOTTOM_RIGHT
    margin_px: int = 10
    numbering_mode: NumberingMode = NumberingMode.FRAME_INDEX

    def __post_init__(self) -> None:
        if not MIN_FONT_SIZE <= self.font_size_px <= MAX_FONT_SIZE:
            raise ValueError(
                f"font_size_px must be in [{MIN_FONT_SIZE}, {MAX_FONT_SIZE}], got {self.font_size_px}"
            )
        if self.margin_px < 0:
            raise ValueError(f"margin_px must be >= 0, got {self.margin_px}")
        if len(self.color) != 3 or any(not 0 <= c <= 255 for c in self.color):
            raise ValueError(f"color must be an RGB triple of 0..255, got {self.color!r}")


@dataclass(frozen=True)
class SamplingPlan:
    """Which frame indices receive an overlay."""

    mode: SamplingMode = SamplingMode.ALL
    ratio: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.ratio <= 1.0:
            raise ValueError(f"ratio must be in (0, 1], got {self.ratio}")


@dataclass(frozen=True)
class FrameImage:
    """A raster frame: (height, width, 3) uint8 RGB, row-major."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        px = self.pixels
        if not isinstance(px, np.ndarray) or px.dtype != np.uint8 or px.ndim != 3 or px.shape[2] != 3:
            raise InvalidImageError("pixels must be a (height, width, 3) uint8 array")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidImageError(f"image dimensions must be >= 1, got {px.shape[0]}x{px.shape[1]}")

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    def copy(self) -> "FrameImage":
        return FrameImage(self.pixels.copy())


def _bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize a (H, W) or (H, W, C) uint8 array with plain bilinear sampling.

    Half-pixel source mapping, float64 blend, round half-up. No area
    averaging on downscale; the kernel is the same at every scale so a
    scalar re-implementation reproduces it exactly.
    """
    squeeze = src.ndim == 2
    if squeeze:
        src = src[:, :, None]
    in_h, in_w = src.shape[:2]

    sy = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    sx = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    sy = np.clip(sy, 0.0, in_h - 1.0)
    sx = np.clip(sx, 0.0, in_w - 1.0)

    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    fy = (sy - y0)[:, None, None]
    fx = (sx - x0)[None, :, None]

    p00 = src[np.ix_(y0, x0)].astype(np.float64)
    p01 = src[np.ix_(y0, x1)].astype(np.float64)
    p10 = src[np.ix_(y1, x0)].astype(np.float64)
    p11 = src[np.ix_(y1, x1)].astype(np.float64)

    top = p00 * (1.0 - fx) + p01 * fx
    bot = p10 * (1.0 - fx) + p11 * fx
    out = top * (1.0 - fy) + bot * fy
    out = np.floor(out + 0.5)
    out = np.clip(out, 0.0, 255.0).astype(np.uint8)
    return out[:, :, 0] if squeeze else out


def normalize_frame(image: FrameImage, canvas_size: int = DEFAULT_CANVAS) -> FrameImage:
    """Scale to a square canvas (no letterboxing). Idempotent at target size."""
    if canvas_size < 1:
        raise InvalidImageError(f"canvas_size must be >= 1, got {canvas_size}")
    if image.width == canvas_size and image.height == canvas_size:
        return image.copy()
    return FrameImage(_bilinear_resize(image.pixels, canvas_size, canvas_size))


def format_value(value: int, mode: NumberingMode) -> str:
    """Text rendered for a value: decimal frame index, or seconds as MM:SS."""
    if value < 0:
        raise ValueError(f"value must be >= 0, got {value}")
    if mode is NumberingMode.TIMESTAMP_MMSS:
        return f"{value // 60:02d}:{value % 60:02d}"
    return str(value)


def _glyph_spacing(font_size_px: int) -> int:
    return max(1, round(font_size_px * 0.1))


def _scaled_glyph(char: str, font_size_px: int) -> np.ndarray:
    base = GLYPH_MASKS[char]
    w = max(1, round(base.shape[1] * font_size_px / BASE_HEIGHT))
    return _bilinear_resize(base, font_size_px, w)


def _text_mask(text: str, font_size_px: int) -> np.ndarray:
    """Alpha mask (font_size_px tall) of the glyph run, with inter-glyph gaps."""
    unsupported = set(text) - set(GLYPH_MASKS)
    if unsupported:
        raise LayoutError(f"unsupported overlay characters: {sorted(unsupported)!r}")
    glyphs = [_scaled_glyph(ch, font_size_px) for ch in text]
    spacing = _glyph_spacing(font_size_px)
    width = sum(g.shape[1] for g in glyphs) + spacing * (len(glyphs) - 1)
    mask = np.zeros((font_size_px, width), dtype=np.uint8)
    x = 0
    for g in glyphs:
        mask[:, x : x + g.shape[1]] = g
        x += g.shape[1] + spacing
    return mask


def _anchor_origin(
    box_w: int, box_h: int, position: Position, margin: int, canvas_w: int, canvas_h: int
) -> tuple[int, int]:
    if position is Position.TOP_LEFT:
        x, y = margin, margin
    elif position is Position.TOP_RIGHT:
        x, y = canvas_w - margin - box_w, margin
    elif position is Position.BOTTOM_LEFT:
        x, y = margin, canvas_h - margin - box_h
    elif position is Position.BOTTOM_RIGHT:
        x, y = canvas_w - margin - box_w, canvas_h - margin - box_h
    else:  # CENTER: box center on canvas center
        x, y = (canvas_w - box_w) // 2, (canvas_h - box_h) // 2
    return x, y


def glyph_box(
    value: int,
    config: OverlayConfig,
    canvas_w: int = DEFAULT_CANVAS,
    canvas_h: int | None = None,
) -> tuple[int, int, int, int]:
    """(x, y, w, h) of the pixels a render may touch, after margin clamping.

    The margin is measured from the box to the nearest canvas edges; if the
    box cannot fit inside the canvas at all, placement fails.
    """
    if canvas_h is None:
        canvas_h = canvas_w
    text = format_value(value, config.numbering_mode)
    mask = _text_mask(text, config.font_size_px)
    box_h, box_w = mask.shape
    if box_w > canvas_w or box_h > canvas_h:
        raise LayoutError(
            f"glyph box {box_w}x{box_h} for {text!r} exceeds canvas {canvas_w}x{canvas_h}"
        )
    x, y = _anchor_origin(box_w, box_h, config.position, config.margin_px, canvas_w, canvas_h)
    x = min(max(x, 0), canvas_w - box_w)
    y = min(max(y, 0), canvas_h - box_h)
    return x, y, box_w, box_h


def render_number(frame: FrameImage, value: int, config: OverlayConfig) -> FrameImage:
    """Overlay one number (or MM:SS timestamp) onto a copy of the frame."""
    if not 0 <= value < MAX_RENDER_VALUE:
        raise ValueError(f"value must be in [0, {MAX_RENDER_VALUE}), got {value}")
    text = format_value(value, config.numbering_mode)
    mask = _text_mask(text, config.font_size_px)
    x, y, w, h = glyph_box(value, config, frame.width, frame.height)

    out = frame.pixels.copy()
    region = out[y : y + h, x : x + w].astype(np.uint16)
    alpha = mask.astype(np.uint16)[:, :, None]
    ink = np.array(config.color, dtype=np.uint16)[None, None, :]
    blended = (alpha * ink + (255 - alpha) * region + 127) // 255
    out[y : y + h, x : x + w] = blended.astype(np.uint8)
    return FrameImage(out)


def plan_indices(n_frames: int, plan: SamplingPlan) -> list[int]:
    """Strictly increasing frame indices selected by the sampling plan.

    Selection size is ceil(ratio * n); the product is rounded to 9 decimals
    first so binary float noise cannot bump the ceiling.
    """
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    if plan.mode is SamplingMode.ALL:
        return list(range(n_frames))
    m = math.ceil(round(plan.ratio * n_frames, 9))
    m = min(max(m, 1), n_frames)
    if plan.mode is SamplingMode.UNIFORM:
        return [k * n_frames // m for k in range(m)]
    rng = np.random.default_rng(plan.seed)
    picked = rng.permutation(n_frames)[:m]
    return sorted(int(i) for i in picked)


def annotate_sequence(
    frames: list[FrameImage],
    plan: SamplingPlan,
    config: OverlayConfig,
    fps: float = 1.0,
) -> tuple[list[FrameImage], dict[int, str]]:
    """Render numbers onto the planned subset of frames.

    Annotated frames show their original index (or index/fps as MM:SS);
    unspanned frames pass through untouched. Returns the output frames in
    input order plus the map of frame index -> rendered text.
    """
    if fps <= 0:
        raise ValueError(f"fps must be > 0, got {fps}")
    if not frames:
        return [], {}
    selected = set(plan_indices(len(frames), plan))
    out: list[FrameImage] = []
    rendered: dict[int, str] = {}
    for idx, frame in enumerate(frames):
        if idx not in selected:
            out.append(frame)
            continue
        if config.numbering_mode is NumberingMode.TIMESTAMP_MMSS:
            value = int(idx / fps + 0.5)  # nearest whole second, half-up
        else:
            value = idx
        try:
            out.append(render_number(frame, value, config))
        except OverlayError as exc:
            raise LayoutError(f"frame {idx}: {exc}") from exc
        rendered[idx] = format_value(value, config.numbering_mode)
    return out, rendered


# --- file I/O: directories of frame_%06d.png/jpg ---

FRAME_EXTENSIONS = (".png", ".jpg", ".jpeg")


def load_frame(path: Path | str) -> FrameImage:
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        return FrameImage(np.asarray(rgb, dtype=np.uint8).copy())


def save_frame(frame: FrameImage, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    im = Image.fromarray(frame.pixels, mode="RGB")
    if path.suffix.lower() in (".jpg", ".jpeg"):
        im.save(path, quality=95)
    else:
        im.save(path)


def list_frame_files(directory: Path | str) -> list[Path]:
    """Frame files named frame_%06d.<ext>, ordered by frame index."""
    directory = Path(directory)
    if not directory.is_dir():
        raise InvalidImageError(f"not a directory: {directory}")
    found: list[tuple[int, Path]] = []
    for p in directory.iterdir():
        if p.suffix.lower() not in FRAME_EXTENSIONS:
            continue
        stem = p.stem
        if not stem.startswith("frame_"):
            continue
        try:
            idx = int(stem[len("frame_") :])
        except ValueError:
            continue
        found.append((idx, p))
    found.sort()
    return [p for _, p in found]
