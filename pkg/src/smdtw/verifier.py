"""Reference enrolment and normalised questioned-signature scores.

Scores are dissimilarities: smaller means more likely genuine.

* ``s1``: the smallest distance to any reference divided by the length of
  that alignment's warping path, minus the same ratio for the closest pair
  of references.
* ``s2``: the mean over references of distance / reference length, minus the
  mean of that quantity over all ordered reference pairs.

For SM-DTW between two references the questioned-side relevance comes from
the other ``N - 1`` references (leave one out).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import METHODS, Config
from .dtwcore import AlignmentResult, WeightFn, dtw, smdtw
from .features import FeatureMatrix, build_features
from .sigmodel import Signature, parse_canonical, serialize_canonical
from .stability import RelevanceProfile, StrokeSet, prepare, relevance_profile


@dataclass(frozen=True)
class Enrolled:
    strokes: StrokeSet
    features: FeatureMatrix

    @property
    def signature(self) -> Signature:
        return self.strokes.signature

    def __len__(self) -> int:
        return len(self.signature)


def _prepare(sig: Signature, config: Config) -> Enrolled:
    return Enrolled(prepare(sig), build_features(sig, config.features))


@dataclass(frozen=True)
class IntraStats:
    """Ordered-pair distances between references (row = questioned role)."""
    distances: np.ndarray
    path_lengths: np.ndarray
    s_min: float
    mu: float


@dataclass(frozen=True)
class ReferenceSet:
    writer_id: str
    references: tuple[Enrolled, ...]
    config: Config
    stats: dict[str, IntraStats]
    weight_fn: WeightFn | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.references)

    @property
    def signatures(self) -> list[Signature]:
        return [r.signature for r in self.references]

    @property
    def s_min_bl(self) -> float:
        return self.stats["dtw"].s_min

    @property
    def s_min_sm(self) -> float:
        return self.stats["smdtw"].s_min

    @property
    def mu_bl(self) -> float:
        return self.stats["dtw"].mu

    @property
    def mu_sm(self) -> float:
        return self.stats["smdtw"].mu

    def reconfigured(self, config: Config) -> "ReferenceSet":
        """Same references under *config*; statistics are recomputed if they depend on it."""
        if config.enrollment_key() == self.config.enrollment_key():
            return ReferenceSet(self.writer_id, self.references, config, self.stats,
                                self.weight_fn)
        return enroll(self.signatures, config, weight_fn=self.weight_fn)

    # -- persistence ---------------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "format": "smdtw-referenceset/1",
            "writer": self.writer_id,
            "config": self.config.to_dict(),
            "references": [serialize_canonical(s) for s in self.signatures],
            "stats": {m: {"distances": st.distances.tolist(),
                          "path_lengths": st.path_lengths.tolist(),
                          "s_min": st.s_min, "mu": st.mu}
                      for m, st in self.stats.items()},
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ReferenceSet":
        payload = json.loads(text)
        if payload.get("format") != "smdtw-referenceset/1":
            raise ValueError("not a serialised reference set")
        config = Config(**payload["config"])
        sigs = [parse_canonical(t) for t in payload["references"]]
        refs = tuple(_prepare(s, config) for s in sigs)
        stats = {m: IntraStats(np.array(v["distances"], dtype=float),
                               np.array(v["path_lengths"], dtype=np.int64),
                               float(v["s_min"]), float(v["mu"]))
                 for m, v in payload["stats"].items()}
        return cls(payload["writer"], refs, config, stats)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ReferenceSet":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _intra(dist: np.ndarray, plen: np.ndarray, lengths: np.ndarray) -> IntraStats:
    n = dist.shape[0]
    off = ~np.eye(n, dtype=bool)
    masked = np.where(off, dist, np.inf)
    i, j = np.unravel_index(int(np.argmin(masked)), masked.shape)
    s_min = float(dist[i, j] / plen[i, j])
    mu = float((dist / lengths[None, :])[off].sum() / (n * (n - 1)))
    return IntraStats(dist, plen, s_min, mu)


def enroll(refs: Sequence[Signature], config: Config = Config(), *,
           weight_fn: WeightFn | None = None) -> ReferenceSet:
    refs = list(refs)
    if len(refs) < 2:
        raise ValueError(f"need at least 2 references, got {len(refs)}")
    writers = {s.writer_id for s in refs}
    if len(writers) != 1:
        raise ValueError(f"references come from several writers: {sorted(writers)}")
    enrolled = tuple(_prepare(s, config) for s in refs)
    n = len(enrolled)
    lengths = np.array([len(e) for e in enrolled], dtype=float)

    stats = {}
    for method in METHODS:
        dist = np.zeros((n, n))
        plen = np.zeros((n, n), dtype=np.int64)
        for i, qi in enumerate(enrolled):
            others = [e for k, e in enumerate(enrolled) if k != i]
            rel = None
            if method == "smdtw":
                rel = relevance_profile(qi.strokes, [o.strokes for o in others],
                                        config.thresholds)
            for j, rj in enumerate(enrolled):
                if i == j:
                    continue
                res = _align(qi, rj, method, rel, config, weight_fn, allow_single=True)
                dist[i, j] = res.distance
                plen[i, j] = res.path_length
        stats[method] = _intra(dist, plen, lengths)
    return ReferenceSet(refs[0].writer_id, enrolled, config, stats, weight_fn)


def _align(q: Enrolled, r: Enrolled, method: str, rel: RelevanceProfile | None,
           config: Config, weight_fn, allow_single: bool = False,
           keep: bool = False) -> AlignmentResult:
    if method == "dtw":
        return dtw(q.features, r.features, keep=keep)
    return smdtw(q.features, r.features, rel, q.strokes.segmentation, config.weight_params,
                 weight_fn=weight_fn, allow_single=allow_single, keep=keep)


@dataclass(frozen=True)
class Comparison:
    """Raw alignments of one questioned signature against a reference set."""
    specimen_id: str
    writer_id: str
    method: str
    distances: tuple[float, ...]
    path_lengths: tuple[int, ...]
    ref_lengths: tuple[int, ...]
    relevance: RelevanceProfile | None = None


@dataclass(frozen=True)
class ScoreReport:
    specimen_id: str
    writer_id: str
    method: str
    normalization: str
    score: float
    distances: tuple[float, ...]
    decision: str | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ValueError("score must be finite")

    def csv_row(self) -> str:
        return (f"{self.writer_id},{self.specimen_id},{self.method},{self.normalization},"
                f"{self.score!r},{self.decision or ''}")


CSV_HEADER = "writer,specimen,method,normalization,score,decision"


def compare(q: "Signature | Enrolled", rs: ReferenceSet, method: str) -> Comparison:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    qe = q if isinstance(q, Enrolled) else _prepare(q, rs.config)
    rel = None
    if method == "smdtw":
        rel = relevance_profile(qe.strokes, [r.strokes for r in rs.references],
                                rs.config.thresholds)
    results = [_align(qe, r, method, rel, rs.config, rs.weight_fn) for r in rs.references]
    return Comparison(qe.signature.specimen_id, rs.writer_id, method,
                      tuple(r.distance for r in results),
                      tuple(r.path_length for r in results),
                      tuple(len(r) for r in rs.references), rel)


def s1_from(cmp: Comparison, rs: ReferenceSet) -> ScoreReport:
    i = int(np.argmin(cmp.distances))
    score = cmp.distances[i] / cmp.path_lengths[i] - rs.stats[cmp.method].s_min
    return ScoreReport(cmp.specimen_id, cmp.writer_id, cmp.method, "s1", float(score),
                       cmp.distances)


def s2_from(cmp: Comparison, rs: ReferenceSet) -> ScoreReport:
    ratios = np.array(cmp.distances) / np.array(cmp.ref_lengths, dtype=float)
    score = ratios.mean() - rs.stats[cmp.method].mu
    return ScoreReport(cmp.specimen_id, cmp.writer_id, cmp.method, "s2", float(score),
                       cmp.distances)


def score_s1(q: Signature, rs: ReferenceSet, method: str = "smdtw") -> ScoreReport:
    return s1_from(compare(q, rs, method), rs)


def score_s2(q: Signature, rs: ReferenceSet, method: str = "smdtw") -> ScoreReport:
    return s2_from(compare(q, rs, method), rs)


def score(q: Signature, rs: ReferenceSet, method: str, normalization: str) -> ScoreReport:
    if normalization == "s1":
        return score_s1(q, rs, method)
    if normalization == "s2":
        return score_s2(q, rs, method)
    raise ValueError(f"unknown normalization {normalization!r}")


def decide(report: ScoreReport, threshold: float) -> str:
    return "accept" if report.score <= threshold else "reject"


def with_decision(report: ScoreReport, threshold: float) -> ScoreReport:
    return ScoreReport(report.specimen_id, report.writer_id, report.method,
                       report.normalization, report.score, report.distances,
                       decide(report, threshold))
