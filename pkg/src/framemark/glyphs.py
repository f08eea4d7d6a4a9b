"""Embedded digit glyphs for the overlay renderer.

A small fixed glyph set (digits 0-9 plus ':') authored as bitmaps on a
20-row grid. Shapes are frozen so rendered output is bit-stable across
platforms and releases; scaling and compositing happen in overlay.py.
"""

from __future__ import annotations

import numpy as np

# Digits are 12x20, the colon is 6x20. '#' is ink, '.' is background.
_ART = {
    "0": [
        "...######...",
        "..########..",
        ".###....###.",
        ".##......##.",
        "###......###",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "###......###",
        ".##......##.",
        ".###....###.",
        "..########..",
        "...######...",
    ],
    "1": [
        ".....##.....",
        "....###.....",
        "...####.....",
        "..##.##.....",
        ".##..##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        ".....##.....",
        "..##########",
        "..##########",
    ],
    "2": [
        "..########..",
        ".##########.",
        "###......###",
        "##........##",
        "..........##",
        "..........##",
        ".........###",
        "........###.",
        ".......###..",
        "......###...",
        ".....###....",
        "....###.....",
        "...###......",
        "..###.......",
        ".###........",
        "###.........",
        "##..........",
        "##..........",
        "############",
        "############",
    ],
    "3": [
        "..########..",
        ".##########.",
        "###......###",
        "..........##",
        "..........##",
        "..........##",
        ".........###",
        "....######..",
        "....#######.",
        ".........###",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "###......###",
        ".##......##.",
        ".###....###.",
        ".##########.",
        "..########..",
    ],
    "4": [
        "........##..",
        ".......###..",
        ".......###..",
        "......####..",
        ".....##.##..",
        ".....##.##..",
        "....##..##..",
        "...##...##..",
        "...##...##..",
        "..##....##..",
        ".##.....##..",
        ".##.....##..",
        "##......##..",
        "############",
        "############",
        "........##..",
        "........##..",
        "........##..",
        "........##..",
        "........##..",
    ],
    "5": [
        ".##########.",
        ".##########.",
        ".##.........",
        ".##.........",
        ".##.........",
        ".##.........",
        ".########...",
        ".##########.",
        ".###.....###",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "###......###",
        ".##......##.",
        ".###....###.",
        ".##########.",
        "..########..",
    ],
    "6": [
        "....#######.",
        "..########..",
        ".###........",
        ".##.........",
        "##..........",
        "##..........",
        "##.######...",
        "##########..",
        "###.....###.",
        "##.......##.",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "###......###",
        ".##......##.",
        ".###....###.",
        "..########..",
        "...######...",
    ],
    "7": [
        "############",
        "############",
        "..........##",
        ".........##.",
        ".........##.",
        "........##..",
        "........##..",
        ".......##...",
        ".......##...",
        "......##....",
        "......##....",
        ".....##.....",
        ".....##.....",
        "....##......",
        "....##......",
        "...##.......",
        "...##.......",
        "..##........",
        "..##........",
        "..##........",
    ],
    "8": [
        "...######...",
        "..########..",
        ".###....###.",
        ".##......##.",
        ".##......##.",
        ".##......##.",
        ".###....###.",
        "..########..",
        "..########..",
        ".###....###.",
        ".##......##.",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "###......###",
        ".##......##.",
        ".###....###.",
        "..########..",
        "...######...",
    ],
    ":": [
        "......",
        "......",
        "......",
        "......",
        "......",
        "......",
        "..##..",
        ".####.",
        ".####.",
        "..##..",
        "......",
        "......",
        "......",
        "..##..",
        ".####.",
        ".####.",
        "..##..",
        "......",
        "......",
        "......",
    ],
}

BASE_HEIGHT = 20


def _mask(rows: list[str]) -> np.ndarray:
    h = len(rows)
    w = len(rows[0])
    if h != BASE_HEIGHT or any(len(r) != w for r in rows):
        raise ValueError("inconsistent glyph art")
    out = np.zeros((h, w), dtype=np.uint8)
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch == "#":
                out[y, x] = 255
    return out


def _build() -> dict[str, np.ndarray]:
    glyphs = {ch: _mask(rows) for ch, rows in _ART.items()}
    # '9' is the '6' rotated half a turn, as in geometric sans designs.
    glyphs["9"] = np.rot90(glyphs["6"], 2).copy()
    return glyphs


# char -> (BASE_HEIGHT, w) uint8 alpha mask, values in {0, 255}
GLYPH_MASKS: dict[str, np.ndarray] = _build()

SUPPORTED_CHARS = frozenset(GLYPH_MASKS)
