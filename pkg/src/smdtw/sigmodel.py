"""Signature data model, file readers and synthetic fixtures.

Two on-disk layouts are understood:

* the canonical line format written by :func:`serialize_canonical`::

      writer=w01 specimen=g003 label=genuine count=2
      0.0 10.0 10.0 512.0
      10.0 11.0 10.0 530.0

  An optional ``rate=<hz>`` header field drops the time column; samples
  are then read as ``x y p`` and stamped ``1000 * i / rate`` ms.

* the SVC2004 layout: a point count followed by ``x y t pen-status``
  lines (extra columns are ignored).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

LABELS = ("genuine", "skilled_forgery", "random_forgery", "unknown")


class SignatureFormatError(ValueError):
    """Raised for malformed input; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class SamplePoint:
    t: float
    x: float
    y: float
    p: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.t):
            raise ValueError(f"timestamp must be finite, got {self.t}")
        if not (self.p >= 0):
            raise ValueError(f"pressure must be >= 0, got {self.p}")


@dataclass(frozen=True)
class Signature:
    writer_id: str
    specimen_id: str
    label: str
    samples: tuple[SamplePoint, ...] = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if len(self.samples) < 2:
            raise ValueError("a signature needs at least 2 samples")
        for i in range(1, len(self.samples)):
            if not self.samples[i].t > self.samples[i - 1].t:
                raise ValueError(f"timestamps not strictly increasing at sample {i}")

    def __len__(self) -> int:
        return len(self.samples)

    @cached_property
    def array(self) -> np.ndarray:
        """``(n, 4)`` float array with columns t, x, y, p (read-only)."""
        a = np.array([(s.t, s.x, s.y, s.p) for s in self.samples], dtype=float)
        a.setflags(write=False)
        return a

    @property
    def t(self) -> np.ndarray:
        return self.array[:, 0]

    @property
    def x(self) -> np.ndarray:
        return self.array[:, 1]

    @property
    def y(self) -> np.ndarray:
        return self.array[:, 2]

    @property
    def p(self) -> np.ndarray:
        return self.array[:, 3]

    @property
    def xy(self) -> np.ndarray:
        return self.array[:, 1:3]

    @classmethod
    def from_arrays(cls, t, x, y, p, *, writer_id="", specimen_id="",
                    label="unknown") -> "Signature":
        samples = tuple(SamplePoint(float(a), float(b), float(c), float(d))
                        for a, b, c, d in zip(t, x, y, p))
        return cls(writer_id, specimen_id, label, samples)

    def replace_samples(self, t=None, x=None, y=None, p=None) -> "Signature":
        """Copy with some columns swapped out (handy for transformed fixtures)."""
        return Signature.from_arrays(
            self.t if t is None else t, self.x if x is None else x,
            self.y if y is None else y, self.p if p is None else p,
            writer_id=self.writer_id, specimen_id=self.specimen_id, label=self.label)


# ---------------------------------------------------------------------------
# canonical format

def _parse_header(line: str) -> dict[str, str]:
    fields = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep or not value:
            raise SignatureFormatError(f"malformed header token {token!r}", 1)
        if key in fields:
            raise SignatureFormatError(f"duplicate header key {key!r}", 1)
        fields[key] = value
    missing = {"writer", "specimen", "label", "count"} - fields.keys()
    if missing:
        raise SignatureFormatError(f"header missing {', '.join(sorted(missing))}", 1)
    unknown = fields.keys() - {"writer", "specimen", "label", "count", "rate"}
    if unknown:
        raise SignatureFormatError(f"unknown header key(s) {', '.join(sorted(unknown))}", 1)
    if fields["label"] not in LABELS:
        raise SignatureFormatError(f"invalid label {fields['label']!r}", 1)
    return fields


def _floats(parts: Sequence[str], lineno: int) -> list[float]:
    try:
        values = [float(v) for v in parts]
    except ValueError:
        raise SignatureFormatError(f"non-numeric field in {' '.join(parts)!r}", lineno) from None
    if not all(math.isfinite(v) for v in values):
        raise SignatureFormatError("non-finite value", lineno)
    return values


def _build(writer: str, specimen: str, label: str,
           rows: list[tuple[int, float, float, float, float]]) -> Signature:
    """Assemble a Signature, mapping invariant violations to line numbers."""
    if len(rows) < 2:
        raise SignatureFormatError("a signature needs at least 2 samples")
    samples = []
    for k, (lineno, t, x, y, p) in enumerate(rows):
        if p < 0:
            raise SignatureFormatError(f"negative pressure {p}", lineno)
        if k and not t > rows[k - 1][1]:
            raise SignatureFormatError("timestamps not strictly increasing", lineno)
        samples.append(SamplePoint(t, x, y, p))
    return Signature(writer, specimen, label, tuple(samples))


def parse_canonical(text: str) -> Signature:
    """Parse the canonical signature text format."""
    lines = [ln for ln in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise SignatureFormatError("empty input", 1)
    header = _parse_header(lines[0])
    try:
        count = int(header["count"])
    except ValueError:
        raise SignatureFormatError(f"count is not an integer: {header['count']!r}", 1) from None
    rate = None
    if "rate" in header:
        try:
            rate = float(header["rate"])
        except ValueError:
            raise SignatureFormatError(f"rate is not a number: {header['rate']!r}", 1) from None
        if not (rate > 0 and math.isfinite(rate)):
            raise SignatureFormatError("rate must be positive", 1)

    body = lines[1:]
    if len(body) != count:
        raise SignatureFormatError(
            f"sample count mismatch: header declares {count}, found {len(body)}")
    ncols = 3 if rate is not None else 4
    rows = []
    for i, line in enumerate(body):
        lineno = i + 2
        parts = line.split()
        if len(parts) != ncols:
            raise SignatureFormatError(f"expected {ncols} fields, got {len(parts)}", lineno)
        vals = _floats(parts, lineno)
        if rate is not None:
            rows.append((lineno, 1000.0 * i / rate, *vals))
        else:
            rows.append((lineno, *vals))
    return _build(header["writer"], header["specimen"], header["label"], rows)


def serialize_canonical(sig: Signature) -> str:
    """Inverse of :func:`parse_canonical` (always writes explicit timestamps)."""
    out = [f"writer={sig.writer_id} specimen={sig.specimen_id} "
           f"label={sig.label} count={len(sig.samples)}"]
    for s in sig.samples:
        out.append(f"{s.t!r} {s.x!r} {s.y!r} {s.p!r}")
    return "\n".join(out) + "\n"


def parse_svc2004(text: str, writer_id: str = "", specimen_id: str = "",
                  label: str = "unknown") -> Signature:
    """Parse an SVC2004 task file (``x y t pen-status`` after a count line)."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise SignatureFormatError("empty input", 1)
    try:
        count = int(lines[0].split()[0])
    except (ValueError, IndexError):
        raise SignatureFormatError("first line must hold the point count", 1) from None
    body = lines[1:]
    if len(body) != count:
        raise SignatureFormatError(
            f"sample count mismatch: header declares {count}, found {len(body)}")
    rows = []
    for i, line in enumerate(body):
        lineno = i + 2
        parts = line.split()
        if len(parts) < 4:
            raise SignatureFormatError(f"expected at least 4 fields, got {len(parts)}", lineno)
        x, y, t, status = _floats(parts[:4], lineno)
        if status not in (0.0, 1.0):
            raise SignatureFormatError(f"invalid pen status {parts[3]!r}", lineno)
        rows.append((lineno, t, x, y, status))
    return _build(writer_id, specimen_id, label, rows)


def read_signature(path: str | Path) -> Signature:
    return parse_canonical(Path(path).read_text(encoding="utf-8"))


def write_signature(sig: Signature, path: str | Path) -> None:
    Path(path).write_text(serialize_canonical(sig), encoding="utf-8")


def load_directory(directory: str | Path, pattern: str = "*.txt") -> list[Signature]:
    """Read every canonical file in *directory* (sorted by file name)."""
    sigs = []
    for path in sorted(Path(directory).glob(pattern)):
        try:
            sigs.append(read_signature(path))
        except SignatureFormatError as exc:
            raise SignatureFormatError(f"{path.name}: {exc}") from exc
    return sigs


# ---------------------------------------------------------------------------
# synthetic fixtures

SAMPLE_PERIOD_MS = 10.0


def _stroke_positions(start, heading, length, turn, u):
    """Points at arc-length fractions *u* along a line (turn = 0) or circular arc."""
    x0, y0 = start
    if turn == 0.0:
        return x0 + length * u * math.cos(heading), y0 + length * u * math.sin(heading)
    r = length / turn
    h = heading + turn * u
    return x0 + r * (np.sin(h) - math.sin(heading)), y0 - r * (np.cos(h) - math.cos(heading))


def synth_signature(seed: int, n_strokes: int, jitter: float, *, variant: int = 0,
                    writer_id: str | None = None, specimen_id: str | None = None,
                    label: str = "unknown") -> Signature:
    """Deterministic synthetic signature built from alternating arcs and lines.

    The template (stroke lengths, turns, pressure and speed profile) depends on
    *seed* only.  *jitter* is the standard deviation of isotropic Gaussian
    noise added to every position; the noise realisation is selected by
    ``(seed, variant)`` so that several genuine specimens of one template can
    be drawn by varying *variant*.
    """
    if n_strokes < 1:
        raise ValueError("n_strokes must be >= 1")
    if jitter < 0:
        raise ValueError("jitter must be non-negative")
    rng = np.random.default_rng([seed, 0])
    heading = rng.uniform(-math.pi, math.pi)
    pos = (rng.uniform(400.0, 600.0), rng.uniform(400.0, 600.0))

    xs, ys, ps = [], [], []
    for k in range(n_strokes):
        if k:
            heading += rng.choice([-1.0, 1.0]) * math.radians(rng.uniform(50.0, 140.0))
        length = rng.uniform(150.0, 350.0)
        turn = 0.0
        if k % 2 == 0:
            turn = rng.choice([-1.0, 1.0]) * math.radians(rng.uniform(60.0, 150.0))
        n = int(rng.integers(18, 33))
        tau = np.arange(0 if k == 0 else 1, n + 1) / n
        # bell-shaped speed that never fully stops
        u = (0.35 * tau + (1.0 - np.cos(math.pi * tau)) / math.pi) / (0.35 + 2.0 / math.pi)
        x, y = _stroke_positions(pos, heading, length, turn, u)
        base, amp = rng.uniform(300.0, 600.0), rng.uniform(50.0, 200.0)
        xs.append(np.asarray(x, dtype=float))
        ys.append(np.asarray(y, dtype=float))
        ps.append(base + amp * np.sin(math.pi * tau))
        pos = (float(xs[-1][-1]), float(ys[-1][-1]))
        heading += turn

    x = np.concatenate(xs)
    y = np.concatenate(ys)
    p = np.round(np.concatenate(ps))
    noise = np.random.default_rng([seed, 1, variant]).standard_normal((2, x.size))
    x = x + jitter * noise[0]
    y = y + jitter * noise[1]
    t = SAMPLE_PERIOD_MS * np.arange(x.size)
    return Signature.from_arrays(
        t, x, y, p,
        writer_id=f"w{seed}" if writer_id is None else writer_id,
        specimen_id=f"s{variant:03d}" if specimen_id is None else specimen_id,
        label=label)


def synth_corpus(n_writers: int, n_genuine: int, n_forgeries: int, *,
                 n_strokes: int = 8, genuine_jitter: float = 0.1,
                 forgery_jitter: float = 2.0, base_seed: int = 1000) -> list[Signature]:
    """A labelled corpus: per writer, *n_genuine* low-noise and *n_forgeries*
    high-noise renditions of one template."""
    sigs: list[Signature] = []
    for w in range(n_writers):
        seed = base_seed + w
        wid = f"w{w:03d}"
        for g in range(n_genuine):
            sigs.append(synth_signature(seed, n_strokes, genuine_jitter, variant=g,
                                        writer_id=wid, specimen_id=f"g{g:03d}",
                                        label="genuine"))
        for f in range(n_forgeries):
            sigs.append(synth_signature(seed, n_strokes, forgery_jitter, variant=1000 + f,
                                        writer_id=wid, specimen_id=f"f{f:03d}",
                                        label="skilled_forgery"))
    return sigs


def group_by_writer(sigs: Iterable[Signature]) -> dict[str, list[Signature]]:
    """Writers in sorted order, each with specimens sorted by specimen id."""
    groups: dict[str, list[Signature]] = {}
    for s in sigs:
        groups.setdefault(s.writer_id, []).append(s)
    return {w: sorted(groups[w], key=lambda s: s.specimen_id) for w in sorted(groups)}
