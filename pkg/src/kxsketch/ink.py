"""Ink data model, canonical line-delimited format and geometric helpers.

A sketch is a sequence of strokes; a stroke holds its samples as parallel
numpy arrays (``xy``, ``t`` and an optional ``pressure``). Arrays are made
read-only on construction so strokes can be shared freely.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np


class InkError(ValueError):
    """Base class for invalid ink input."""


class MalformedDocument(InkError):
    pass


class EmptyInk(InkError):
    pass


class NonMonotoneTime(InkError):
    pass


class DegenerateStroke(InkError):
    """Stroke with zero total arc length (all samples coincident)."""


class SamplePoint(NamedTuple):
    x: float
    y: float
    t: float
    pressure: Optional[float] = None


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Stroke:
    xy: np.ndarray
    t: np.ndarray
    index: int = 0
    pressure: Optional[np.ndarray] = None

    def __post_init__(self):
        xy = _frozen(self.xy).reshape(-1, 2)
        t = _frozen(self.t).reshape(-1)
        if len(xy) != len(t):
            raise MalformedDocument("xy and t lengths differ")
        if len(xy) < 2:
            raise EmptyInk(f"stroke {self.index} has {len(xy)} point(s), need at least 2")
        if not (np.all(np.isfinite(xy)) and np.all(np.isfinite(t))):
            raise MalformedDocument(f"stroke {self.index} has non-finite values")
        if np.any(np.diff(t) < 0):
            raise NonMonotoneTime(f"stroke {self.index} timestamps decrease")
        if self.pressure is not None:
            p = _frozen(self.pressure).reshape(-1)
            if len(p) != len(t):
                raise MalformedDocument("pressure length differs from point count")
            known = p[~np.isnan(p)]
            if np.any((known < 0) | (known > 1)):
                raise MalformedDocument(f"stroke {self.index} pressure outside [0, 1]")
            object.__setattr__(self, "pressure", p if len(known) else None)
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "t", t)
        if self.length() <= 0.0:
            raise DegenerateStroke(f"stroke {self.index} has zero arc length")

    def __len__(self) -> int:
        return len(self.t)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Stroke):
            return NotImplemented
        if self.index != other.index or len(self) != len(other):
            return False
        if (self.pressure is None) != (other.pressure is None):
            return False
        same_p = self.pressure is None or np.array_equal(self.pressure, other.pressure, equal_nan=True)
        return bool(np.array_equal(self.xy, other.xy) and np.array_equal(self.t, other.t) and same_p)

    @property
    def points(self) -> list[SamplePoint]:
        p = self.pressure
        return [
            SamplePoint(float(x), float(y), float(t),
                        None if p is None or math.isnan(p[i]) else float(p[i]))
            for i, ((x, y), t) in enumerate(zip(self.xy, self.t))
        ]

    def cumulative_length(self) -> np.ndarray:
        seg = np.hypot(*np.diff(self.xy, axis=0).T)
        return np.concatenate(([0.0], np.cumsum(seg)))

    def length(self) -> float:
        return float(np.sum(np.hypot(*np.diff(self.xy, axis=0).T)))


@dataclass(frozen=True)
class Sketch:
    strokes: tuple[Stroke, ...]
    label: Optional[str] = None
    user_id: Optional[str] = None

    def __post_init__(self):
        strokes = tuple(self.strokes)
        if not strokes:
            raise EmptyInk("sketch has no strokes")
        for k, s in enumerate(strokes):
            if s.index != k:
                raise MalformedDocument(f"stroke indices must be 0..n-1, got {s.index} at position {k}")
        object.__setattr__(self, "strokes", strokes)

    @classmethod
    def from_polylines(cls, polylines: Sequence[Sequence[Sequence[float]]], label=None, user_id=None,
                       speed: float = 1.0, gap: float = 100.0) -> "Sketch":
        """Build a sketch from xy polylines drawn one after another at constant speed."""
        strokes = []
        t0 = 0.0
        for k, poly in enumerate(polylines):
            xy = np.asarray(poly, dtype=float)
            s = np.concatenate(([0.0], np.cumsum(np.hypot(*np.diff(xy, axis=0).T))))
            strokes.append(Stroke(xy, t0 + s / speed, index=k))
            t0 += s[-1] / speed + gap
        return cls(tuple(strokes), label=label, user_id=user_id)

    def all_xy(self) -> np.ndarray:
        return np.concatenate([s.xy for s in self.strokes])

    def map_xy(self, fn) -> "Sketch":
        """Return a copy with every stroke's coordinates replaced by ``fn(xy)``."""
        return Sketch(tuple(Stroke(fn(s.xy), s.t, s.index, s.pressure) for s in self.strokes),
                      self.label, self.user_id)


class BoundingBox(NamedTuple):
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    @property
    def diagonal(self) -> float:
        return math.hypot(self.max_x - self.min_x, self.max_y - self.min_y)


def bounding_box(sketch: Sketch) -> BoundingBox:
    xy = sketch.all_xy()
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    return BoundingBox(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def resample_arclength(stroke: Stroke, step: float) -> Stroke:
    """Resample ``stroke`` at uniform arc-length spacing ``step``.

    The first and last input points are kept; t and pressure are linearly
    interpolated in arc length. A remainder shorter than 1e-9 * step is
    absorbed into the last interval. A closed stroke shorter than ``step``
    would collapse onto its start, so it keeps its arc-length midpoint too.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    s = stroke.cumulative_length()
    total = s[-1]
    n = int(math.floor(total / step + 1e-9))
    targets = np.arange(n + 1, dtype=float) * step
    if total - targets[-1] > 1e-9 * step:
        targets = np.append(targets, total)
    else:
        targets[-1] = total
    if len(targets) == 2 and np.array_equal(stroke.xy[0], stroke.xy[-1]):
        targets = np.array([0.0, total / 2, total])
    # duplicate samples give zero-length intervals; keep them out of interp
    keep = np.concatenate(([True], np.diff(s) > 0))
    sk = s[keep]
    x = np.interp(targets, sk, stroke.xy[keep, 0])
    y = np.interp(targets, sk, stroke.xy[keep, 1])
    t = np.interp(targets, sk, stroke.t[keep])
    xy = np.column_stack([x, y])
    xy[0] = stroke.xy[0]
    xy[-1] = stroke.xy[-1]
    t[0], t[-1] = stroke.t[0], stroke.t[-1]
    p = None
    if stroke.pressure is not None:
        pk = stroke.pressure[keep]
        good = ~np.isnan(pk)
        p = np.interp(targets, sk[good], pk[good]) if good.sum() >= 1 else None
    return Stroke(xy, t, stroke.index, p)


# -- canonical format -------------------------------------------------------

def _num(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedDocument(f"expected a number, got {v!r}")
    f = float(v)
    if not math.isfinite(f):
        raise MalformedDocument("non-finite number")
    return f


def parse_ink(data: bytes | str) -> Sketch:
    """Parse a canonical ink document (one JSON object per line)."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedDocument(f"not UTF-8: {e}") from None
    if not data.strip():
        # no records at all is not a document; a header with no strokes is EmptyInk
        raise MalformedDocument("empty document")
    label = user = None
    records = []
    for lineno, line in enumerate(data.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line, parse_constant=lambda c: _num(float(c)))
        except json.JSONDecodeError as e:
            raise MalformedDocument(f"line {lineno}: {e.msg}") from None
        if not isinstance(obj, dict):
            raise MalformedDocument(f"line {lineno}: expected an object")
        if "stroke" not in obj:
            if records or set(obj) - {"label", "user"}:
                raise MalformedDocument(f"line {lineno}: unexpected record {sorted(obj)}")
            label, user = obj.get("label"), obj.get("user")
            continue
        if set(obj) != {"stroke", "points"}:
            raise MalformedDocument(f"line {lineno}: stroke record needs exactly 'stroke' and 'points'")
        k = obj["stroke"]
        if isinstance(k, bool) or not isinstance(k, int):
            raise MalformedDocument(f"line {lineno}: stroke id must be an integer")
        if records and k <= records[-1][0]:
            raise MalformedDocument(f"line {lineno}: stroke ids must ascend")
        pts = obj["points"]
        if not isinstance(pts, list):
            raise MalformedDocument(f"line {lineno}: points must be a list")
        rows = []
        for p in pts:
            if not isinstance(p, list) or len(p) not in (3, 4):
                raise MalformedDocument(f"line {lineno}: point must be [x, y, t] or [x, y, t, p]")
            rows.append([_num(v) for v in p] + ([math.nan] if len(p) == 3 else []))
        records.append((k, rows))
    if not records:
        raise EmptyInk("document has no strokes")
    strokes = []
    for idx, (_, rows) in enumerate(records):
        if len(rows) < 2:
            raise EmptyInk(f"stroke {idx} has {len(rows)} point(s), need at least 2")
        a = np.array(rows, dtype=float)
        p = a[:, 3] if not np.all(np.isnan(a[:, 3])) else None
        strokes.append(Stroke(a[:, :2], a[:, 2], idx, p))
    return Sketch(tuple(strokes), label=label, user_id=user)


def serialize_ink(sketch: Sketch) -> str:
    lines = []
    if sketch.label is not None or sketch.user_id is not None:
        header = {}
        if sketch.label is not None:
            header["label"] = sketch.label
        if sketch.user_id is not None:
            header["user"] = sketch.user_id
        lines.append(json.dumps(header))
    for s in sketch.strokes:
        pts = []
        for i in range(len(s)):
            row = [float(s.xy[i, 0]), float(s.xy[i, 1]), float(s.t[i])]
            if s.pressure is not None and not math.isnan(s.pressure[i]):
                row.append(float(s.pressure[i]))
            pts.append(row)
        lines.append(json.dumps({"stroke": s.index, "points": pts}))
    return "\n".join(lines) + "\n"


def read_ink(path) -> Sketch:
    with open(path, "rb") as fh:
        return parse_ink(fh.read())


def write_ink(sketch: Sketch, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_ink(sketch))


def rigid(xy: np.ndarray, angle_deg: float = 0.0, scale: float = 1.0,
          offset: Iterable[float] = (0.0, 0.0)) -> np.ndarray:
    """Rotate about the origin, scale, then translate."""
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    R = np.array([[c, -s], [s, c]])
    return scale * (np.asarray(xy, float) @ R.T) + np.asarray(tuple(offset), float)
