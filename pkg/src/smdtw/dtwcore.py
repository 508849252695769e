"""Classical DTW and stability-modulated DTW on feature matrices.

Both variants share one recursion over a local cost matrix ``C`` whose rows
index the reference and whose columns index the questioned signature::

    psi[k, j] = C[k, j] + min(psi[k-1, j-1], psi[k-1, j], psi[k, j-1])

Ties go to the diagonal, then to ``(k-1, j)``, then to ``(k, j-1)``.  Path
indices are zero-based.  For SM-DTW the local cost is the Euclidean distance
times a sigmoid weight whose offset and slope depend on the relevance of the
questioned point's stroke.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np

from .features import FeatureMatrix
from .segmentation import Segmentation


@dataclass(frozen=True)
class WeightParams:
    b0: float = 9.0
    b_min: float = 4.0
    b_max: float = 6.0
    c0: float = -2.0
    c_min: float = 1.5
    c_max: float = 2.0


@dataclass(frozen=True)
class WarpPath:
    pairs: np.ndarray        # (|p|, 2) rows of (reference index, questioned index)

    def __len__(self) -> int:
        return self.pairs.shape[0]


@dataclass(frozen=True)
class AlignmentResult:
    distance: float
    path: WarpPath
    cost_matrix: np.ndarray | None = None
    weights: np.ndarray | None = None

    @property
    def path_length(self) -> int:
        return len(self.path)


# ---------------------------------------------------------------------------
# kernels

@numba.njit(cache=True)
def _euclidean_matrix(r, q):
    m, n, f = r.shape[0], q.shape[0], r.shape[1]
    out = np.empty((m, n))
    for k in range(m):
        for j in range(n):
            s = 0.0
            for d in range(f):
                diff = r[k, d] - q[j, d]
                s += diff * diff
            out[k, j] = math.sqrt(s)
    return out


@numba.njit(cache=True)
def _sigmoid_weights(dist, b, c):
    m, n = dist.shape
    out = np.empty((m, n))
    for k in range(m):
        for j in range(n):
            out[k, j] = 1.0 + 1.0 / (1.0 + math.exp(-c[j] * (dist[k, j] - b[j])))
    return out


@numba.njit(cache=True)
def _accumulate(cost):
    m, n = cost.shape
    acc = np.empty((m, n))
    acc[0, 0] = cost[0, 0]
    for j in range(1, n):
        acc[0, j] = cost[0, j] + acc[0, j - 1]
    for k in range(1, m):
        acc[k, 0] = cost[k, 0] + acc[k - 1, 0]
        for j in range(1, n):
            best = acc[k - 1, j - 1]
            if acc[k - 1, j] < best:
                best = acc[k - 1, j]
            if acc[k, j - 1] < best:
                best = acc[k, j - 1]
            acc[k, j] = cost[k, j] + best
    return acc


@numba.njit(cache=True)
def _traceback(acc):
    m, n = acc.shape
    k, j = m - 1, n - 1
    buf = np.empty((m + n - 1, 2), dtype=np.int64)
    size = 0
    buf[size, 0] = k
    buf[size, 1] = j
    size += 1
    while k > 0 or j > 0:
        if k == 0:
            j -= 1
        elif j == 0:
            k -= 1
        else:
            diag, up, left = acc[k - 1, j - 1], acc[k - 1, j], acc[k, j - 1]
            if diag <= up and diag <= left:
                k -= 1
                j -= 1
            elif up <= left:
                k -= 1
            else:
                j -= 1
        buf[size, 0] = k
        buf[size, 1] = j
        size += 1
    return buf[:size][::-1].copy()


# ---------------------------------------------------------------------------
# public API

def point_distance(a, b) -> float:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    s = 0.0
    for x, y in zip(a, b):
        diff = float(x) - float(y)
        s += diff * diff
    return math.sqrt(s)


def _rows(x) -> np.ndarray:
    a = x.rows if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[0] == 0:
        raise ValueError("empty feature matrix")
    return np.ascontiguousarray(a, dtype=float)


def _check_pair(q, r) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(q, FeatureMatrix) and isinstance(r, FeatureMatrix) \
            and q.feature_set != r.feature_set:
        raise ValueError(f"feature-set mismatch: {q.feature_set.value} vs {r.feature_set.value}")
    qa, ra = _rows(q), _rows(r)
    if qa.shape[1] != ra.shape[1]:
        raise ValueError("feature dimension mismatch")
    return qa, ra


def distance_matrix(q, r) -> np.ndarray:
    """Euclidean distances, reference points on rows."""
    qa, ra = _check_pair(q, r)
    return _euclidean_matrix(ra, qa)


def align(cost: np.ndarray, *, keep: bool = False, weights=None) -> AlignmentResult:
    """Run the recursion on a precomputed local cost matrix."""
    cost = np.ascontiguousarray(cost, dtype=float)
    acc = _accumulate(cost)
    path = WarpPath(_traceback(acc))
    return AlignmentResult(float(acc[-1, -1]), path,
                           cost if keep else None, weights if keep else None)


def dtw(q, r, *, keep: bool = False) -> AlignmentResult:
    return align(distance_matrix(q, r), keep=keep)


def sigmoid_params(relevance: int, n_refs: int, params: WeightParams = WeightParams(),
                   *, allow_single: bool = False) -> tuple[float, float]:
    """Offset ``b`` and slope ``c`` for a stroke of the given relevance.

    With ``allow_single`` a pool of one reference maps relevance 1 straight to
    ``(b_min, c_max)``; otherwise a positive relevance needs ``n_refs >= 2``."""
    if relevance == 0:
        return params.b0, params.c0
    if relevance < 0 or relevance > n_refs:
        raise ValueError(f"relevance {relevance} outside 0..{n_refs}")
    if n_refs < 2:
        if allow_single and n_refs == 1:
            return params.b_min, params.c_max
        raise ValueError("a positive relevance needs at least 2 references")
    b = params.b_max + (params.b_min - params.b_max) * (relevance - 1) / (n_refs - 1)
    c = params.c_min + (params.c_max - params.c_min) * (relevance - 1) / (n_refs - 1)
    return b, c


def sigmoid(d: float, b: float, c: float) -> float:
    try:
        return 1.0 + 1.0 / (1.0 + math.exp(-c * (d - b)))
    except OverflowError:
        return 1.0


def weight(d: float, relevance: int, n_refs: int,
           params: WeightParams = WeightParams(), *, allow_single: bool = False) -> float:
    b, c = sigmoid_params(relevance, n_refs, params, allow_single=allow_single)
    return sigmoid(d, b, c)


WeightFn = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def substitute_zero_distances(dist: np.ndarray, point_relevance: np.ndarray) -> np.ndarray:
    """Raise exact zeros at relevance-0 questioned points to the smallest positive distance."""
    mask = (dist == 0) & (np.asarray(point_relevance)[None, :] == 0)
    if not mask.any():
        return dist
    positive = dist[dist > 0]
    if positive.size == 0:
        return dist
    return np.where(mask, positive.min(), dist)


def smdtw(q, r, rel, q_seg: Segmentation, params: WeightParams = WeightParams(), *,
          weight_fn: WeightFn | None = None, allow_single: bool = False,
          keep: bool = False) -> AlignmentResult:
    """SM-DTW distance between questioned *q* and reference *r*.

    ``rel`` is the questioned signature's RelevanceProfile and ``q_seg`` its
    segmentation.  ``weight_fn(dist, b, c)`` replaces the sigmoid weighting
    (``b`` and ``c`` are per questioned point); it exists for testing."""
    qa, ra = _check_pair(q, r)
    if len(rel) != len(q_seg):
        raise ValueError(f"relevance profile has {len(rel)} strokes, "
                         f"segmentation has {len(q_seg)}")
    if q_seg.n_points != qa.shape[0]:
        raise ValueError("segmentation does not describe the questioned signature")
    per_stroke = [sigmoid_params(int(v), rel.n_refs, params, allow_single=allow_single)
                  for v in rel.counts]
    labels = q_seg.point_strokes()
    b = np.array([per_stroke[s][0] for s in labels], dtype=float)
    c = np.array([per_stroke[s][1] for s in labels], dtype=float)

    dist = substitute_zero_distances(_euclidean_matrix(ra, qa), rel.counts[labels])
    if weight_fn is None:
        w = _sigmoid_weights(dist, b, c)
    else:
        w = np.broadcast_to(np.asarray(weight_fn(dist, b, c), dtype=float), dist.shape)
    return align(w * dist, keep=keep, weights=w)


def format_matrix(m: np.ndarray, fmt: str = "{:.4f}") -> str:
    return "\n".join(" ".join(fmt.format(v) for v in row) for row in np.asarray(m)) + "\n"


def format_path(path: WarpPath) -> str:
    return "\n".join(f"{k} {j}" for k, j in path.pairs) + "\n"
