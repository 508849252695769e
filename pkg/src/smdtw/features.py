"""Per-point kinematic features and the fifteen feature-set selections."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .sigmodel import Signature

# base feature columns, in the order they are stacked
BASE_FEATURES = ("x", "y", "vx", "vy", "ax", "ay", "p", "vp")


class FeatureSet(str, Enum):
    F1 = "F1"
    F2 = "F2"
    F3 = "F3"
    F4 = "F4"
    F5 = "F5"
    F6 = "F6"
    F7 = "F7"
    F8 = "F8"
    F9 = "F9"
    F10 = "F10"
    F11 = "F11"
    F12 = "F12"
    F13 = "F13"
    F14 = "F14"
    F15 = "F15"

    @property
    def columns(self) -> tuple[str, ...]:
        return FEATURE_SETS[self]

    @classmethod
    def parse(cls, name: "str | FeatureSet") -> "FeatureSet":
        try:
            return cls(str(getattr(name, "value", name)).upper())
        except ValueError:
            raise ValueError(f"unknown feature set {name!r} (expected F1..F15)") from None


FEATURE_SETS: dict[FeatureSet, tuple[str, ...]] = {
    FeatureSet.F1: ("x", "y", "vx", "vy", "ax", "ay", "p", "vp"),
    FeatureSet.F2: ("x", "y", "ax", "ay", "p", "vp"),
    FeatureSet.F3: ("x", "y", "vx", "vy", "p", "vp"),
    FeatureSet.F4: ("x", "y", "vx", "vy", "ax", "ay"),
    FeatureSet.F5: ("vx", "vy", "ax", "ay", "p", "vp"),
    FeatureSet.F6: ("x", "y", "p", "vp"),
    FeatureSet.F7: ("x", "y", "ax", "ay"),
    FeatureSet.F8: ("x", "y", "vx", "vy"),
    FeatureSet.F9: ("ax", "ay", "p", "vp"),
    FeatureSet.F10: ("vx", "vy", "ax", "ay"),
    FeatureSet.F11: ("vx", "vy", "p", "vp"),
    FeatureSet.F12: ("x", "y"),
    FeatureSet.F13: ("p", "vp"),
    FeatureSet.F14: ("ax", "ay"),
    FeatureSet.F15: ("vx", "vy"),
}


@dataclass(frozen=True)
class FeatureMatrix:
    rows: np.ndarray
    feature_set: FeatureSet

    def __post_init__(self) -> None:
        rows = np.ascontiguousarray(self.rows, dtype=float)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def point_count(self) -> int:
        return self.rows.shape[0]

    @property
    def columns(self) -> tuple[str, ...]:
        return self.feature_set.columns

    def __len__(self) -> int:
        return self.rows.shape[0]


def derivative(values, timestamps) -> np.ndarray:
    """Central differences on a non-uniform time grid, one-sided at the ends."""
    v = np.asarray(values, dtype=float)
    t = np.asarray(timestamps, dtype=float)
    if v.shape != t.shape or v.ndim != 1:
        raise ValueError("values and timestamps must be 1-D and of equal length")
    if v.size < 2:
        raise ValueError("need at least 2 samples to differentiate")
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (t[2:] - t[:-2])
    out[0] = (v[1] - v[0]) / (t[1] - t[0])
    out[-1] = (v[-1] - v[-2]) / (t[-1] - t[-2])
    return out


def zscore(columns: np.ndarray) -> np.ndarray:
    """Column-wise z-score over all points; constant columns become zeros."""
    a = np.asarray(columns, dtype=float)
    out = np.zeros_like(a)
    for j in range(a.shape[1]):
        col = a[:, j]
        sd = col.std()
        if np.ptp(col) == 0 or sd == 0:     # sd can underflow for subnormal spreads
            continue
        out[:, j] = (col - col.mean()) / sd
    return out


def raw_features(sig: Signature) -> dict[str, np.ndarray]:
    """All eight un-normalised base features of *sig*."""
    t = sig.t
    vx = derivative(sig.x, t)
    vy = derivative(sig.y, t)
    return {
        "x": np.array(sig.x), "y": np.array(sig.y),
        "vx": vx, "vy": vy,
        "ax": derivative(vx, t), "ay": derivative(vy, t),
        "p": np.array(sig.p), "vp": derivative(sig.p, t),
    }


def build_features(sig: Signature, fs: "FeatureSet | str") -> FeatureMatrix:
    fs = FeatureSet.parse(fs)
    raw = raw_features(sig)
    stacked = np.column_stack([raw[name] for name in fs.columns])
    return FeatureMatrix(zscore(stacked), fs)
