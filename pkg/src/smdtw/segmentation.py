"""Stroke segmentation at salient curvature changes and pen lifts.

The trajectory of every pen-down piece is resampled at a constant arc-length
step (the median inter-sample distance of the signature, which keeps the
result independent of the drawing scale).  Turning angles between successive
chords are detrended with a short running median, so constant-curvature arcs
do not register, and then summed under Gaussian windows of several widths.
A boundary is a point whose turning response exceeds the angle threshold and
persists across two neighbouring scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .sigmodel import SamplePoint, Signature

SCALES = (2.0, 4.0, 8.0, 16.0)
ANGLE_THRESHOLD_DEG = 15.0
PERSISTENCE = 3
NMS_WINDOW = 5
DETREND_WINDOW = 11
MIN_STROKE_SAMPLES = 3


@dataclass(frozen=True)
class Segmentation:
    boundaries: tuple[int, ...]

    def __post_init__(self) -> None:
        b = tuple(int(i) for i in self.boundaries)
        if len(b) < 2 or b[0] != 0 or any(b[i + 1] <= b[i] for i in range(len(b) - 1)):
            raise ValueError(f"invalid boundaries {b}")
        object.__setattr__(self, "boundaries", b)

    @property
    def strokes(self) -> list[tuple[int, int]]:
        """Inclusive ``(first, last)`` sample ranges."""
        b = self.boundaries
        return [(b[k], b[k + 1]) for k in range(len(b) - 1)]

    @property
    def n_points(self) -> int:
        return self.boundaries[-1] + 1

    def __len__(self) -> int:
        return len(self.boundaries) - 1

    def point_strokes(self) -> np.ndarray:
        """Stroke index of every sample; a shared boundary goes to the earlier stroke."""
        labels = np.zeros(self.n_points, dtype=np.int64)
        for k, (a, b) in enumerate(self.strokes):
            labels[a + 1:b + 1] = k
        return labels


def _wrap(a: np.ndarray) -> np.ndarray:
    """Map angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - a, 2.0 * np.pi)


def _local_peaks(strength: np.ndarray, threshold: float, window: int) -> list[int]:
    """Indices above *threshold* that dominate a centred window.

    Earlier indices win ties, so an equal value to the left suppresses."""
    half = window // 2
    n = strength.size
    peaks = []
    for i in np.flatnonzero(strength > threshold):
        v = strength[i]
        left = strength[max(0, i - half):i]
        right = strength[i + 1:min(n, i + half + 1)]
        if (left < v).all() and (right <= v).all():
            peaks.append(int(i))
    return peaks


def _suppress(cands: list[tuple[int, float, float]], window: int) -> list[int]:
    """Scale-ordered non-maximum suppression of ``(index, strength, sigma)``.

    Within one scale the strongest candidate wins a ``window`` neighbourhood.
    A candidate first seen at scale sigma also yields to any kept finer-scale
    candidate within sigma points: nearby corners merge at coarse scales into
    a peak between them that is not a corner itself."""
    half = window // 2
    kept: list[tuple[int, float]] = []
    for sigma in sorted({c[2] for c in cands}):
        here = [c for c in cands if c[2] == sigma]
        for idx, _, _ in sorted(here, key=lambda c: (-c[1], c[0])):
            if all(abs(idx - k) > (half if ks == sigma else max(half, sigma)) for k, ks in kept):
                kept.append((idx, sigma))
    return sorted(k for k, _ in kept)


def turning_response(theta: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian-weighted sum of detrended turning angles (unit peak kernel)."""
    half = DETREND_WINDOW // 2
    if theta.size > 1:
        padded = np.pad(theta, half, mode="reflect" if theta.size > half else "edge")
        trend = np.median(sliding_window_view(padded, DETREND_WINDOW), axis=1)
    else:
        trend = np.zeros_like(theta)
    r = int(math.ceil(3 * sigma))
    k = np.arange(-r, r + 1)
    g = np.exp(-(k * k) / (2.0 * sigma * sigma))
    full = np.convolve(theta - trend, g)
    return full[r:r + theta.size]


def _curvature_points(xy: np.ndarray, step: float, scales, threshold: float) -> list[int]:
    """Local sample indices (into *xy*) of salient curvature changes."""
    if xy.shape[0] < 3 or not step > 0:
        return []
    seg = np.hypot(*np.diff(xy, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    m = int(math.floor(total / step + 1e-9)) + 1
    if m < 4:
        return []
    keep = np.concatenate([[True], seg > 0])
    sr = step * np.arange(m)
    rx = np.interp(sr, s[keep], xy[keep, 0])
    ry = np.interp(sr, s[keep], xy[keep, 1])
    phi = np.arctan2(np.diff(ry), np.diff(rx))
    theta = _wrap(np.diff(phi))            # theta[i] sits at resampled point i + 1

    per_scale = []
    for sigma in scales:
        strength = np.abs(turning_response(theta, sigma))
        per_scale.append((strength, _local_peaks(strength, threshold, NMS_WINDOW)))

    accepted: list[tuple[int, float, float]] = []
    for sigma, (strength, peaks), (_, coarser) in zip(scales, per_scale, per_scale[1:]):
        for i in peaks:
            if any(abs(i - j) <= PERSISTENCE for j in coarser):
                accepted.append((i, float(strength[i]), float(sigma)))
    # snap each candidate to the sharpest original vertex within one step
    d = np.diff(xy, axis=0)
    vertex_turn = np.zeros(xy.shape[0])
    vertex_turn[1:-1] = np.abs(np.arctan2(d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0],
                                          (d[:-1] * d[1:]).sum(axis=1)))
    out = []
    for i in _suppress(accepted, NMS_WINDOW):
        pos = sr[i + 1]
        lo = int(np.searchsorted(s, pos - step, side="left"))
        hi = int(np.searchsorted(s, pos + step, side="right"))
        lo, hi = max(lo, 1), min(hi, xy.shape[0] - 1)
        if lo >= hi:
            j = int(np.argmin(np.abs(s - pos)))
        else:
            j = lo + int(np.argmax(vertex_turn[lo:hi]))
        out.append(j)
    return out


def _merge_short(boundaries: list[int]) -> list[int]:
    b = list(boundaries)
    k = 0
    while len(b) > 2 and k < len(b) - 1:
        if b[k + 1] - b[k] + 1 < MIN_STROKE_SAMPLES:
            # fold into the preceding stroke, or the following one for the first
            del b[k if k > 0 else k + 1]
            k = max(k - 1, 0)
        else:
            k += 1
    return b


def _pen_boundaries(p: np.ndarray) -> list[int]:
    """Boundaries bracketing every maximal pen-up run."""
    n = p.size
    up = p == 0
    if up.all() or not up.any():
        return []
    out = []
    edges = np.flatnonzero(np.diff(up.astype(np.int8)))
    for e in edges:
        # e is the last index before a pen state change
        if up[e + 1]:
            out.append(int(e))          # last pen-down sample before the lift
        else:
            out.append(int(e + 1))      # first pen-down sample after the lift
    return [i for i in out if 0 < i < n - 1]


def segment(sig: Signature, *, scales=SCALES,
            threshold_deg: float = ANGLE_THRESHOLD_DEG) -> Segmentation:
    """Split *sig* into strokes; deterministic, never fewer than one stroke."""
    xy = sig.xy
    p = sig.p
    n = xy.shape[0]
    ignore_pen = bool((p == 0).all())
    down = np.ones(n, dtype=bool) if ignore_pen else p > 0

    seg = np.hypot(*np.diff(xy, axis=0).T)
    down_seg = seg[down[:-1] & down[1:]]
    positive = down_seg[down_seg > 0]
    step = float(np.median(positive)) if positive.size else 0.0

    forced = [0] + _pen_boundaries(p) + [n - 1]
    forced = sorted(set(forced))
    threshold = math.radians(threshold_deg)
    bounds = set(forced)
    for a, b in zip(forced, forced[1:]):
        if b - a < 2 or not down[a + 1]:
            continue                      # pen-up piece or too short
        for j in _curvature_points(xy[a:b + 1], step, scales, threshold):
            if 0 < j < b - a:
                bounds.add(a + j)
    return Segmentation(tuple(_merge_short(sorted(bounds))))


def stroke_points(sig: Signature, seg: Segmentation, k: int) -> tuple[SamplePoint, ...]:
    if not 0 <= k < len(seg):
        raise IndexError(f"stroke index {k} out of range for {len(seg)} strokes")
    a, b = seg.strokes[k]
    return sig.samples[a:b + 1]


def stroke_arrays(sig: Signature, seg: Segmentation) -> list[np.ndarray]:
    """``(len, 2)`` position arrays, one per stroke."""
    xy = sig.xy
    return [xy[a:b + 1] for a, b in seg.strokes]


def format_boundaries(seg: Segmentation) -> str:
    return "\n".join(str(b) for b in seg.boundaries) + "\n"
