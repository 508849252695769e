"""Stability regions between a reference and a questioned signature.

Pipeline for one pair: segment both signatures, compare every stroke pair
(``SD1``), average along diagonals at every run length ``h`` (the similarity
pyramid), zero everything under ``th_lcs``, take the elementwise maximum over
scales (the saliency map), pull out the maximal positive diagonal runs and
keep the ones that are long enough and whose shape/target-point agreement
is high enough.  Repeating this against every reference and counting, per
questioned stroke, how many references produced a region over it gives the
relevance profile used to weight SM-DTW.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .segmentation import Segmentation, segment, stroke_arrays
from .shapesim import DegenerateStrokeError, DigitalStroke, rasterize, similarity_matrix
from .sigmodel import Signature

TH_LCS = 75.0
TH_LEN = 3
TH_GS = 90.0


@dataclass(frozen=True)
class Thresholds:
    th_lcs: float = TH_LCS
    th_len: int = TH_LEN
    th_gs: float = TH_GS


@dataclass(frozen=True)
class SimilarityPyramid:
    raw: np.ndarray          # (H, c, z) windowed means before thresholding
    matrices: np.ndarray     # same, entries below th_lcs zeroed
    th_lcs: float

    @property
    def H(self) -> int:
        return self.matrices.shape[0]

    @property
    def sd1(self) -> np.ndarray:
        return self.raw[0]


@dataclass(frozen=True)
class SaliencyMap:
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class MatchSequence:
    r_start: int
    q_start: int
    ns: int
    gs: float = math.nan

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(self.r_start + k, self.q_start + k) for k in range(self.ns)]

    @property
    def q_strokes(self) -> range:
        return range(self.q_start, self.q_start + self.ns)


@dataclass(frozen=True)
class RelevanceProfile:
    counts: np.ndarray
    n_refs: int

    def __post_init__(self) -> None:
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 1 or (c < 0).any() or (c > self.n_refs).any():
            raise ValueError("relevance counters must lie in 0..N")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    def __len__(self) -> int:
        return self.counts.size

    def point_relevance(self, seg: Segmentation) -> np.ndarray:
        """Expand stroke counters to one value per sample of the questioned signature."""
        if len(seg) != self.counts.size:
            raise ValueError(f"profile has {self.counts.size} strokes, "
                             f"segmentation has {len(seg)}")
        return self.counts[seg.point_strokes()]


@dataclass(frozen=True)
class StrokeSet:
    """A signature together with its strokes, cached for repeated comparisons."""
    signature: Signature
    segmentation: Segmentation
    points: tuple[np.ndarray, ...] = field(repr=False)
    digital: tuple[DigitalStroke | None, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.segmentation)


def prepare(sig: "Signature | StrokeSet", segmentation: Segmentation | None = None) -> StrokeSet:
    if isinstance(sig, StrokeSet):
        return sig
    seg = segment(sig) if segmentation is None else segmentation
    points = tuple(stroke_arrays(sig, seg))
    digital = []
    for pts in points:
        try:
            digital.append(rasterize(pts))
        except DegenerateStrokeError:
            digital.append(None)
    return StrokeSet(sig, seg, points, tuple(digital))


def similarity_pyramid(ref_strokes: Sequence[DigitalStroke | None],
                       q_strokes: Sequence[DigitalStroke | None],
                       th_lcs: float = TH_LCS) -> SimilarityPyramid:
    if not len(ref_strokes) or not len(q_strokes):
        raise ValueError("stroke lists must be non-empty")
    return pyramid_from_sd1(similarity_matrix(ref_strokes, q_strokes), th_lcs)


def pyramid_from_sd1(sd1: np.ndarray, th_lcs: float = TH_LCS) -> SimilarityPyramid:
    """Windowed diagonal means of a stroke similarity matrix at every scale."""
    sd1 = np.asarray(sd1, dtype=float)
    c, z = sd1.shape
    H = min(c, z)
    raw = np.zeros((H, c, z))
    acc = np.zeros((c, z))
    for h in range(1, H + 1):
        vc, vz = c - h + 1, z - h + 1
        acc[:vc, :vz] += sd1[h - 1:, h - 1:]
        raw[h - 1, :vc, :vz] = acc[:vc, :vz] / h
    thresholded = np.where(raw < th_lcs, 0.0, raw)
    return SimilarityPyramid(raw, thresholded, float(th_lcs))


def saliency_map(pyr: SimilarityPyramid) -> SaliencyMap:
    return SaliencyMap(pyr.matrices.max(axis=0))


def extract_lsss(sam: SaliencyMap | np.ndarray) -> list[MatchSequence]:
    """Maximal runs of positive entries along every diagonal."""
    v = sam.values if isinstance(sam, SaliencyMap) else np.asarray(sam)
    c, z = v.shape
    runs = []
    for offset in range(-(c - 1), z):
        y0, l0 = max(0, -offset), max(0, offset)
        diag = np.diagonal(v, offset) > 0
        k = 0
        while k < diag.size:
            if diag[k]:
                start = k
                while k < diag.size and diag[k]:
                    k += 1
                runs.append(MatchSequence(y0 + start, l0 + start, k - start))
            else:
                k += 1
    runs.sort(key=lambda m: (m.r_start, m.q_start))
    return runs


def _chords(strokes) -> np.ndarray:
    out = []
    for s in strokes:
        if len(s) and hasattr(s[0], "x"):
            first, last = (s[0].x, s[0].y), (s[-1].x, s[-1].y)
        else:
            a = np.asarray(s, dtype=float)
            first, last = a[0], a[-1]
        out.append((last[0] - first[0], last[1] - first[1]))
    return np.asarray(out, dtype=float).reshape(-1, 2)


def chord_angles(strokes) -> np.ndarray:
    """Signed angles in (-pi, pi] between successive first-to-last chords."""
    c = _chords(strokes)
    cross = c[:-1, 0] * c[1:, 1] - c[:-1, 1] * c[1:, 0]
    dot = (c[:-1] * c[1:]).sum(axis=1)
    ang = np.arctan2(cross, dot)
    return np.where(ang <= -np.pi, np.pi, ang)


def target_similarity(ref_strokes, q_strokes) -> np.ndarray:
    """Agreement of relative target-point positions, one entry per stroke pair."""
    if len(ref_strokes) != len(q_strokes):
        raise ValueError("stroke sequences must have the same length")
    ns = len(ref_strokes)
    if ns < 2:
        return np.ones(max(ns, 1))
    dgamma = chord_angles(ref_strokes) - chord_angles(q_strokes)
    return np.append(np.cos(2.0 * dgamma), 1.0)


def global_similarity(sam: SaliencyMap | np.ndarray, seq: MatchSequence, t) -> float:
    """Mean of saliency times target agreement along the sequence."""
    v = sam.values if isinstance(sam, SaliencyMap) else np.asarray(sam)
    t = np.asarray(t, dtype=float)
    if t.size != seq.ns:
        raise ValueError(f"target vector has {t.size} entries, sequence has {seq.ns}")
    s = np.array([v[y, l] for y, l in seq.pairs])
    return float((s * t).sum() / seq.ns)


def candidate_regions(ref: "Signature | StrokeSet", q: "Signature | StrokeSet",
                      th_lcs: float = TH_LCS) -> tuple[SaliencyMap, list[MatchSequence]]:
    """All LSSS of a pair with their global similarity filled in."""
    r, qq = prepare(ref), prepare(q)
    sam = saliency_map(similarity_pyramid(r.digital, qq.digital, th_lcs))
    out = []
    for seq in extract_lsss(sam):
        t = target_similarity(r.points[seq.r_start:seq.r_start + seq.ns],
                              qq.points[seq.q_start:seq.q_start + seq.ns])
        out.append(MatchSequence(seq.r_start, seq.q_start, seq.ns,
                                 global_similarity(sam, seq, t)))
    return sam, out


def stability_regions(ref: "Signature | StrokeSet", q: "Signature | StrokeSet",
                      th_lcs: float = TH_LCS, th_len: int = TH_LEN,
                      th_gs: float = TH_GS) -> list[MatchSequence]:
    _, seqs = candidate_regions(ref, q, th_lcs)
    return [s for s in seqs if s.ns > th_len and s.gs > th_gs]


def relevance_profile(q: "Signature | StrokeSet", refs: Sequence["Signature | StrokeSet"],
                      thresholds: Thresholds = Thresholds(), *,
                      regions_out: list | None = None) -> RelevanceProfile:
    """Per questioned stroke, the number of references with a region over it.

    If *regions_out* is given, ``(reference, regions)`` tuples are appended to it.
    """
    if not len(refs):
        raise ValueError("reference set is empty")
    qq = prepare(q)
    counts = np.zeros(len(qq), dtype=np.int64)
    for ref in refs:
        regions = stability_regions(ref, qq, thresholds.th_lcs, thresholds.th_len,
                                    thresholds.th_gs)
        hit = np.zeros(len(qq), dtype=bool)
        for reg in regions:
            hit[reg.q_start:reg.q_start + reg.ns] = True
        counts += hit
        if regions_out is not None:
            regions_out.append((ref, regions))
    return RelevanceProfile(counts, len(refs))


def format_regions(found, profile: RelevanceProfile | None = None) -> str:
    """Text dump: ``ref=<id> r_start q_start ns gs`` per region, then the counters."""
    lines = []
    for ref, regions in found:
        sig = ref.signature if isinstance(ref, StrokeSet) else ref
        for reg in regions:
            lines.append(f"ref={sig.specimen_id} {reg.r_start} {reg.q_start} "
                         f"{reg.ns} {reg.gs:.4f}")
    if profile is not None:
        lines.append("relevance " + " ".join(str(int(c)) for c in profile.counts))
    return "\n".join(lines) + "\n"
