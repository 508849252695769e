"""Random/skilled forgery protocol, EER, DET points and result tables.

Per writer the first ``n_references`` genuine specimens (by specimen id) are
enrolled; the remaining genuine specimens give genuine scores.  Impostor
scores come from the writer's skilled forgeries (SF) or from the first
genuine specimen of every other writer (RF).
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import METHODS, NORMALIZATIONS, Config
from .sigmodel import Signature, group_by_writer
from .verifier import compare, enroll, s1_from, s2_from

log = logging.getLogger(__name__)


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    protocol: str = "sf"
    n_references: int = 5
    config: Config = Config()

    def __post_init__(self) -> None:
        if self.protocol not in ("rf", "sf"):
            raise ValueError(f"protocol must be 'rf' or 'sf', got {self.protocol!r}")
        if self.n_references < 2:
            raise ValueError("n_references must be >= 2")

    @classmethod
    def from_config(cls, config: Config) -> "ExperimentSpec":
        return cls(config.protocol, config.n_references, config)


@dataclass(frozen=True)
class ScoreRecord:
    writer: str
    specimen: str
    label: str
    score: float


@dataclass
class ScorePool:
    genuine: list[ScoreRecord] = field(default_factory=list)
    impostor: list[ScoreRecord] = field(default_factory=list)

    @property
    def genuine_scores(self) -> np.ndarray:
        return np.array([r.score for r in self.genuine], dtype=float)

    @property
    def impostor_scores(self) -> np.ndarray:
        return np.array([r.score for r in self.impostor], dtype=float)

    @classmethod
    def from_scores(cls, genuine: Iterable[float], impostor: Iterable[float]) -> "ScorePool":
        return cls([ScoreRecord("", "", "genuine", float(s)) for s in genuine],
                   [ScoreRecord("", "", "impostor", float(s)) for s in impostor])

    def to_csv(self) -> str:
        lines = ["writer,specimen,label,score"]
        for r in self.genuine + self.impostor:
            lines.append(f"{r.writer},{r.specimen},{r.label},{r.score!r}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# protocol

def _split(dataset: Sequence[Signature], spec: ExperimentSpec):
    groups = group_by_writer(dataset)
    genuines = {w: [s for s in sigs if s.label == "genuine"] for w, sigs in groups.items()}
    for w, g in genuines.items():
        if len(g) < spec.n_references:
            raise ProtocolError(f"writer {w} has {len(g)} genuine signatures, "
                                f"needs at least {spec.n_references}")
    if spec.protocol == "sf":
        forgeries = {w: [s for s in sigs if s.label == "skilled_forgery"]
                     for w, sigs in groups.items()}
        if not any(forgeries.values()):
            raise ProtocolError("SF protocol needs skilled_forgery specimens; none found")
        for w, f in forgeries.items():
            if not f:
                log.warning("writer %s has no skilled forgeries", w)
    else:
        firsts = {w: g[0] for w, g in genuines.items()}
        forgeries = {w: [firsts[o] for o in genuines if o != w] for w in genuines}
    units = []
    for w, g in genuines.items():
        units.append((w, g[:spec.n_references], g[spec.n_references:], forgeries[w]))
    return units


PairKey = tuple[str, str]       # (method, normalization)


def _writer_scores(unit, config: Config, methods, normalizations):
    writer, refs, genuine, impostor = unit
    rs = enroll(refs, config)
    out = {(m, n): ScorePool() for m in methods for n in normalizations}
    for bucket, sigs in (("genuine", genuine), ("impostor", impostor)):
        for sig in sigs:
            for m in methods:
                cmp = compare(sig, rs, m)
                for n in normalizations:
                    rep = s1_from(cmp, rs) if n == "s1" else s2_from(cmp, rs)
                    rec = ScoreRecord(writer, f"{sig.writer_id}/{sig.specimen_id}",
                                      sig.label, rep.score)
                    getattr(out[(m, n)], bucket).append(rec)
    return out


def run_experiments(dataset: Sequence[Signature], spec: ExperimentSpec,
                    methods: Sequence[str] = METHODS,
                    normalizations: Sequence[str] = NORMALIZATIONS,
                    workers: int = 1) -> dict[PairKey, ScorePool]:
    """Score pools for every (method, normalization) from one pass of alignments."""
    units = _split(dataset, spec)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_writer_scores, units, [spec.config] * len(units),
                                [tuple(methods)] * len(units),
                                [tuple(normalizations)] * len(units)))
    else:
        parts = [_writer_scores(u, spec.config, methods, normalizations) for u in units]
    pools = {(m, n): ScorePool() for m in methods for n in normalizations}
    for part in parts:                    # writer order, independent of scheduling
        for key, pool in part.items():
            pools[key].genuine.extend(pool.genuine)
            pools[key].impostor.extend(pool.impostor)
    return pools


def run_experiment(dataset: Sequence[Signature], spec: ExperimentSpec,
                   workers: int = 1) -> ScorePool:
    key = (spec.config.method, spec.config.normalization)
    return run_experiments(dataset, spec, [key[0]], [key[1]], workers)[key]


# ---------------------------------------------------------------------------
# error rates

def _rates(genuine: np.ndarray, impostor: np.ndarray, thresholds: np.ndarray):
    g = np.sort(genuine)
    i = np.sort(impostor)
    far = np.searchsorted(i, thresholds, side="right") / i.size
    frr = 1.0 - np.searchsorted(g, thresholds, side="right") / g.size
    return far, frr


def _pool_arrays(pool) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(pool, ScorePool):
        g, i = pool.genuine_scores, pool.impostor_scores
    else:
        g, i = (np.asarray(x, dtype=float) for x in pool)
    if g.size == 0 or i.size == 0:
        raise ValueError("both genuine and impostor scores are required")
    return g, i


def eer(pool) -> float:
    """Equal error rate; accepts a ScorePool or a ``(genuine, impostor)`` pair.

    FAR counts impostor scores ``<= t``, FRR genuine scores ``> t``.  The
    sweep starts below every score (FAR 0, FRR 1) and the crossing is
    linearly interpolated between the two thresholds that bracket it."""
    g, i = _pool_arrays(pool)
    thresholds = np.unique(np.concatenate([g, i]))
    far, frr = _rates(g, i, thresholds)
    far = np.concatenate([[0.0], far])
    frr = np.concatenate([[1.0], frr])
    diff = far - frr
    k = int(np.argmax(diff >= 0))          # diff ends at 1 > 0, so a crossing exists
    if diff[k] == 0:
        return float(far[k])
    t = -diff[k - 1] / (diff[k] - diff[k - 1])
    return float(far[k - 1] + t * (far[k] - far[k - 1]))


def det_points(pool, *, with_thresholds: bool = False):
    """``(FAR, FRR)`` at every distinct score, thresholds increasing."""
    g, i = _pool_arrays(pool)
    thresholds = np.unique(np.concatenate([g, i]))
    far, frr = _rates(g, i, thresholds)
    if with_thresholds:
        return [(float(t), float(a), float(r)) for t, a, r in zip(thresholds, far, frr)]
    return [(float(a), float(r)) for a, r in zip(far, frr)]


def det_csv(pool) -> str:
    rows = ["threshold,far,frr"]
    rows += [f"{t!r},{a!r},{r!r}" for t, a, r in det_points(pool, with_thresholds=True)]
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# result tables

def improvement(baseline: float, sm: float) -> float | None:
    """Relative EER reduction in percent, ``None`` when the baseline is zero."""
    if baseline == 0:
        return None
    return 100.0 * (baseline - sm) / baseline


def _fmt_eer(v: float | None) -> str:
    return "-" if v is None else f"{100.0 * v:.2f}"


def _fmt_delta(baseline: float | None, sm: float | None) -> str:
    if baseline is None or sm is None:
        return "-"
    d = improvement(baseline, sm)
    return "n/a" if d is None else f"{d:.2f}%"


TABLE_COLUMNS = [f"{n}:{part}" for n in NORMALIZATIONS
                 for part in ("DTW-RF", "DTW-SF", "SM-RF", "SM-SF", "dRF", "dSF")]


def report_table(results: Mapping[str, Mapping[tuple[str, str, str], float]],
                 sep: str = "\t") -> str:
    """Table rows F1..F15 (only those present); EERs given as fractions.

    ``results[fs][(method, normalization, protocol)] = eer``.  EERs are
    printed in percent; improvements are relative to the DTW baseline."""
    from .features import FeatureSet

    lines = [sep.join(["features"] + TABLE_COLUMNS)]
    for fs in FeatureSet:
        row = results.get(fs.value)
        if row is None:
            continue
        cells = [fs.value]
        for n in NORMALIZATIONS:
            get = lambda m, p: row.get((m, n, p))  # noqa: E731
            cells += [_fmt_eer(get("dtw", "rf")), _fmt_eer(get("dtw", "sf")),
                      _fmt_eer(get("smdtw", "rf")), _fmt_eer(get("smdtw", "sf")),
                      _fmt_delta(get("dtw", "rf"), get("smdtw", "rf")),
                      _fmt_delta(get("dtw", "sf"), get("smdtw", "sf"))]
        lines.append(sep.join(cells))
    return "\n".join(lines) + "\n"
