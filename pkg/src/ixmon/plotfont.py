"""5x7 monochrome bitmap font for traffic plots.

These bitmaps are the normative glyph shapes for everything the plot
renderer writes (y-axis tick labels, the Current/Average/Max footer) and the
digitizer reads back by exact template match. Glyphs are 5 columns x 7 rows,
advance 6 px, no anti-aliasing. '#' marks an inked pixel.
"""

from __future__ import annotations

import numpy as np

GLYPH_W = 5
GLYPH_H = 7
ADVANCE = 6

_GLYPHS: dict[str, tuple[str, ...]] = {
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "2": (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    "3": ("#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
    ".": (".....", ".....", ".....", ".....", ".....", ".##..", ".##.."),
    ":": (".....", ".##..", ".##..", ".....", ".##..", ".##..", "....."),
    "A": (".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "C": (".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."),
    "G": (".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"),
    "K": ("#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"),
    "M": ("#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"),
    "T": ("#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."),
    "a": (".....", ".....", ".###.", "....#", ".####", "#...#", ".####"),
    "b": ("#....", "#....", "####.", "#...#", "#...#", "#...#", "####."),
    "e": (".....", ".....", ".###.", "#...#", "#####", "#....", ".###."),
    "g": (".....", ".....", ".####", "#...#", ".####", "....#", ".###."),
    "n": (".....", ".....", "####.", "#...#", "#...#", "#...#", "#...#"),
    "p": (".....", ".....", "####.", "#...#", "####.", "#....", "#...."),
    "r": (".....", ".....", "#.##.", "##..#", "#....", "#....", "#...."),
    "s": (".....", ".....", ".####", "#....", ".###.", "....#", "####."),
    "t": (".#...", ".#...", "####.", ".#...", ".#...", ".#..#", "..##."),
    "u": (".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#"),
    "v": (".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#.."),
    "x": (".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#"),
    " ": (".....", ".....", ".....", ".....", ".....", ".....", "....."),
}


def glyph_mask(ch: str) -> np.ndarray:
    """Boolean GLYPH_H x GLYPH_W array for one glyph."""
    rows = _GLYPHS[ch]
    return np.array([[c == "#" for c in row] for row in rows], dtype=bool)

_MASKS = {ch: glyph_mask(ch) for ch in _GLYPHS}
_BY_BYTES = {m.tobytes(): ch for ch, m in _MASKS.items()}
assert len(_BY_BYTES) == len(_GLYPHS), "glyph bitmaps must be pairwise distinct"


def text_width(text: str) -> int:
    return ADVANCE * len(text) - 1 if text else 0


def draw_text(canvas: np.ndarray, x: int, y: int, text: str, rgb=(0, 0, 0)) -> None:
    """Render text onto an HxWx3 uint8 canvas with glyph tops at row ``y``."""
    color = np.array(rgb, dtype=np.uint8)
    for i, ch in enumerate(text):
        mask = _MASKS[ch]
        gx = x + i * ADVANCE
        canvas[y : y + GLYPH_H, gx : gx + GLYPH_W][mask] = color


def read_text(ink: np.ndarray, x: int, y: int, max_glyphs: int = 80) -> str:
    """Decode glyphs from a boolean ink mask, anchored at (x, y).

    Reads fixed-advance cells; an unmatched cell or three consecutive blank
    cells end the run (the footer uses double-space section gaps). Trailing
    whitespace is stripped.
    """
    h, w = ink.shape
    out: list[str] = []
    blanks = 0
    for i in range(max_glyphs):
        gx = x + i * ADVANCE
        if gx + GLYPH_W > w or y + GLYPH_H > h:
            break
        cell = np.ascontiguousarray(ink[y : y + GLYPH_H, gx : gx + GLYPH_W])
        ch = _BY_BYTES.get(cell.tobytes())
        if ch is None:
            break
        if ch == " ":
            blanks += 1
            if blanks >= 3:
                break
        else:
            blanks = 0
        out.append(ch)
    return "".join(out).rstrip()
