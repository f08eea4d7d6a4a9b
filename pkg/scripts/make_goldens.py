#!/usr/bin/env python3
"""Generate the pinned golden overlay images under tests/data/golden/.

Run once per renderer release and commit the PNGs; the tests re-render the
same inputs and require pixel-for-pixel equality.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from framemark import overlay

GOLDEN_DIR = Path(__file__).resolve().parents[1] / "tests" / "data" / "golden"


def gradient_frame(size: int = 336) -> overlay.FrameImage:
    yy, xx = np.mgrid[0:size, 0:size]
    px = np.stack([(yy * 3) % 256, (xx * 5) % 256, (xx + yy) % 256], axis=-1)
    return overlay.FrameImage(px.astype(np.uint8))


def main() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    frame = gradient_frame()

    default = overlay.OverlayConfig()  # size 40, red, bottom-right, margin 10
    overlay.save_frame(
        overlay.render_number(frame, 7, default),
        GOLDEN_DIR / "value7_size40_red_bottomright.png",
    )

    mmss = overlay.OverlayConfig(numbering_mode=overlay.NumberingMode.TIMESTAMP_MMSS)
    overlay.save_frame(
        overlay.render_number(frame, 70, mmss),  # renders "01:10"
        GOLDEN_DIR / "mmss0110_size40_red_bottomright.png",
    )
    print(f"wrote goldens -> {GOLDEN_DIR}")


if __name__ == "__main__":
    main()
