"""Run configuration and its ``key = value`` file format."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .dtwcore import WeightParams
from .features import FeatureSet
from .stability import Thresholds

METHODS = ("dtw", "smdtw")
NORMALIZATIONS = ("s1", "s2")
PROTOCOLS = ("rf", "sf")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    feature_set: str = "F5"
    th_lcs: float = 75.0
    th_len: int = 3
    th_gs: float = 90.0
    b0: float = 9.0
    b_min: float = 4.0
    b_max: float = 6.0
    c0: float = -2.0
    c_min: float = 1.5
    c_max: float = 2.0
    n_references: int = 5
    normalization: str = "s2"
    method: str = "smdtw"
    protocol: str = "sf"
    threshold: float = 0.0

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "feature_set", FeatureSet.parse(self.feature_set).value)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}")
        if self.n_references < 2:
            raise ConfigError("n_references must be >= 2")
        if self.th_len < 0:
            raise ConfigError("th_len must be >= 0")
        if not 0 <= self.th_lcs <= 100:
            raise ConfigError("th_lcs must lie in [0, 100]")

    @property
    def features(self) -> FeatureSet:
        return FeatureSet(self.feature_set)

    @property
    def thresholds(self) -> Thresholds:
        return Thresholds(self.th_lcs, self.th_len, self.th_gs)

    @property
    def weight_params(self) -> WeightParams:
        return WeightParams(self.b0, self.b_min, self.b_max, self.c0, self.c_min, self.c_max)

    def enrollment_key(self) -> tuple:
        """The fields the cached reference statistics depend on."""
        return (self.feature_set, self.thresholds, self.weight_params)

    def updated(self, **overrides) -> "Config":
        overrides = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        return replace(self, **_coerce(overrides))

    def to_dict(self) -> dict:
        return asdict(self)

    def header_lines(self, prefix: str = "# ") -> list[str]:
        return [f"{prefix}{k} = {v}" for k, v in self.to_dict().items()]


def _coerce(values: dict) -> dict:
    types = {f.name: f.type for f in fields(Config)}
    out = {}
    for key, value in values.items():
        kind = types[key]
        try:
            if kind == "int":
                out[key] = int(value)
            elif kind == "float":
                out[key] = float(value)
            else:
                out[key] = str(value)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {value!r}") from None
    return out


def parse_config(text: str, base: Config | None = None) -> Config:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    try:
        return (base or Config()).updated(**values)
    except ConfigError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path, base: Config | None = None) -> Config:
    return parse_config(Path(path).read_text(encoding="utf-8"), base)
