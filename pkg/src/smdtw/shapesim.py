"""Digital strokes and a 0-100 stroke shape similarity.

A stroke is rasterised into an 8-connected chain of grid cells with the
Bresenham line algorithm and summarised by a tangent profile: the directions
of ``L`` equal-length chords along the cell polyline.

Two profiles are compared after aligning them spatially: ``b`` is read either
in its own order or back to front, whichever agrees better with ``a`` when
direction is ignored (doubled angles).  The similarity is then the mean
cosine of the directed tangent differences mapped to [0, 100], so identical
strokes score 100 and the same stroke traversed backwards scores 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PROFILE_LENGTH = 32


class DegenerateStrokeError(ValueError):
    pass


def bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Cells of the digital segment from (x0, y0) to (x1, y1), endpoints included.

    Always traced from the lexicographically smaller endpoint, so a segment and
    its reverse cover the same cells."""
    if (x1, y1) < (x0, y0):
        return bresenham(x1, y1, x0, y0)[::-1]
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    cells = [(x, y)]
    while (x, y) != (x1, y1):
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
        cells.append((x, y))
    return cells


def _round(v: float) -> int:
    return int(math.floor(v + 0.5))


def tangent_profile(cells: np.ndarray, length: int = PROFILE_LENGTH) -> np.ndarray:
    """Directions of *length* equal arc-length chords along the cell polyline."""
    c = np.asarray(cells, dtype=float)
    seg = np.hypot(*np.diff(c, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if c.shape[0] < 2 or s[-1] == 0:
        raise DegenerateStrokeError("degenerate stroke")
    u = np.linspace(0.0, s[-1], length + 1)
    px = np.interp(u, s, c[:, 0])
    py = np.interp(u, s, c[:, 1])
    return np.arctan2(np.diff(py), np.diff(px))


@dataclass(frozen=True)
class DigitalStroke:
    cells: np.ndarray
    tangent_profile: np.ndarray

    @classmethod
    def from_cells(cls, cells, length: int = PROFILE_LENGTH) -> "DigitalStroke":
        c = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
        c.setflags(write=False)
        prof = tangent_profile(c, length)
        prof.setflags(write=False)
        return cls(c, prof)

    @property
    def profile_length(self) -> int:
        return self.tangent_profile.size

    def __len__(self) -> int:
        return self.cells.shape[0]


def rasterize(points, length: int = PROFILE_LENGTH) -> DigitalStroke:
    """Digitise a stroke given as SamplePoints or an ``(n, 2)`` array."""
    if len(points) and hasattr(points[0], "x"):
        xy = [(p.x, p.y) for p in points]
    else:
        xy = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(xy) < 2:
        raise ValueError("need at least 2 points to rasterise")
    grid = [(_round(x), _round(y)) for x, y in xy]
    cells = [grid[0]]
    for a, b in zip(grid, grid[1:]):
        if a != b:
            cells.extend(bresenham(*a, *b)[1:])
    if len(cells) < 2:
        raise DegenerateStrokeError("degenerate stroke")
    return DigitalStroke.from_cells(cells, length)


def reverse(stroke: DigitalStroke) -> DigitalStroke:
    return DigitalStroke.from_cells(stroke.cells[::-1], stroke.profile_length)


def _profiles(strokes) -> np.ndarray:
    rows = [s.tangent_profile if s is not None else None for s in strokes]
    length = next((r.size for r in rows if r is not None), PROFILE_LENGTH)
    out = np.full((len(rows), length), np.nan)
    for i, r in enumerate(rows):
        if r is not None:
            if r.size != length:
                raise ValueError("all strokes must share one profile length")
            out[i] = r
    return out


def similarity_matrix(a_strokes, b_strokes) -> np.ndarray:
    """``len(a) x len(b)`` similarities; ``None`` entries (degenerate strokes) score 0."""
    pa = _profiles(a_strokes)[:, None, :]
    pb = _profiles(b_strokes)[None, :, :]
    if pa.shape[2] != pb.shape[2]:
        raise ValueError("profile lengths differ")
    pb_rev = pb[:, :, ::-1]
    forward = np.cos(2.0 * (pa - pb)).mean(axis=2)
    backward = np.cos(2.0 * (pa - pb_rev)).mean(axis=2)
    use_rev = (backward > forward)[:, :, None]
    aligned = np.where(use_rev, pb_rev, pb)
    sim = 50.0 * (1.0 + np.cos(pa - aligned).mean(axis=2))
    sim = np.clip(sim, 0.0, 100.0)
    return np.nan_to_num(sim, nan=0.0)


def stroke_similarity(a: DigitalStroke, b: DigitalStroke) -> float:
    return float(similarity_matrix([a], [b])[0, 0])
