from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from framemark.overlay import FrameImage

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = DATA_DIR / "golden"


def gradient_frame(size: int = 336) -> FrameImage:
    """The deterministic test canvas the golden images were rendered on."""
    yy, xx = np.mgrid[0:size, 0:size]
    px = np.stack([(yy * 3) % 256, (xx * 5) % 256, (xx + yy) % 256], axis=-1)
    return FrameImage(px.astype(np.uint8))


def random_frame(rng: np.random.Generator, h: int, w: int) -> FrameImage:
    return FrameImage(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


@pytest.fixture
def canvas_frame() -> FrameImage:
    return gradient_frame()
