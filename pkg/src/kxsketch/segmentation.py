"""Characteristic points and line/arc primitives.

Strokes are resampled at a fixed fraction of the bounding-box diagonal and
every downstream index (``sample_index``, ``sample_range``) refers to the
resampled strokes held in :class:`Segmentation`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .config import PipelineConfig
from .ink import Sketch, Stroke, bounding_box, resample_arclength


class Kind(str, enum.Enum):
    CURVATURE = "curvature"
    SPEED = "speed"
    PRESSURE = "pressure"
    START = "start"
    END = "end"
    INTERSECTION = "intersection"


BOUNDARY_KINDS = frozenset({Kind.START, Kind.END, Kind.CURVATURE})


@dataclass(frozen=True)
class CharacteristicPoint:
    position: tuple[float, float]
    source_stroke: int
    sample_index: int
    timestamp: float
    kinds: frozenset
    primitive_refs: frozenset = frozenset()
    id: int = -1

    @property
    def is_boundary(self) -> bool:
        return bool(self.kinds & BOUNDARY_KINDS)


@dataclass(frozen=True)
class Primitive:
    id: int
    kind: str                      # "line" or "arc"
    source_stroke: int
    sample_range: tuple[int, int]  # inclusive
    start: tuple[float, float]
    end: tuple[float, float]
    fit_error: float
    length: float
    center: Optional[tuple[float, float]] = None
    radius: Optional[float] = None
    start_angle: Optional[float] = None   # degrees
    sweep: Optional[float] = None         # signed degrees, > 0 counter-clockwise

    def direction_at(self, p) -> float:
        """Undirected tangent direction (degrees in [0, 180)) nearest to ``p``."""
        if self.kind == "arc":
            a = math.atan2(p[1] - self.center[1], p[0] - self.center[0])
            d = math.degrees(a) + 90.0
        else:
            d = math.degrees(math.atan2(self.end[1] - self.start[1], self.end[0] - self.start[0]))
        return d % 180.0


@dataclass(frozen=True)
class Segmentation:
    sketch: Sketch
    strokes: tuple[Stroke, ...]     # resampled
    char_points: tuple[CharacteristicPoint, ...]
    primitives: tuple[Primitive, ...]
    diagonal: float

    def primitive_xy(self, prim: Primitive) -> np.ndarray:
        a, b = prim.sample_range
        return self.strokes[prim.source_stroke].xy[a:b + 1]


class SegmentationError(ValueError):
    pass


# -- characteristic points ---------------------------------------------------

def resample_sketch(sketch: Sketch, cfg: PipelineConfig) -> tuple[tuple[Stroke, ...], float]:
    diag = bounding_box(sketch).diagonal
    step = cfg.resample_step_frac * diag
    return tuple(resample_arclength(s, step) for s in sketch.strokes), diag


def _curvature_candidates(turn: np.ndarray, thr: float) -> list[int]:
    above = turn > thr
    out = []
    i, n = 0, len(turn)
    while i < n:
        if above[i]:
            j = i
            while j + 1 < n and above[j + 1]:
                j += 1
            out.append(i + int(np.argmax(turn[i:j + 1])))
            i = j + 1
        else:
            i += 1
    return out


def _speed_minima(stroke: Stroke, frac: float) -> list[int]:
    n = len(stroke)
    if n < 3:
        return []
    s = stroke.cumulative_length()
    t = stroke.t
    lo = np.r_[0, np.arange(n - 1)]
    hi = np.r_[np.arange(1, n), n - 1]
    ds = s[hi] - s[lo]
    dt = t[hi] - t[lo]
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(dt > 0, ds / dt, np.inf)
    med = float(np.median(v))
    if not math.isfinite(med):
        return []
    out = []
    for i in range(1, n - 1):
        if v[i] < v[i - 1] and v[i] <= v[i + 1] and v[i] < frac * med:
            out.append(i)
    return out


def _pressure_jumps(stroke: Stroke, jump: float) -> list[int]:
    if stroke.pressure is None:
        return []
    p = stroke.pressure
    d = np.abs(np.diff(p))
    return [i + 1 for i in np.flatnonzero(np.nan_to_num(d) > jump) if 0 < i + 1 < len(p) - 1]


def _stroke_char_points(stroke: Stroke, cfg: PipelineConfig, diag: float) -> list[CharacteristicPoint]:
    n = len(stroke)
    turn = kernels.turning_angles(stroke.xy, cfg.curvature_k)
    cand: dict[int, set] = {}
    for i in _curvature_candidates(turn, cfg.corner_angle_deg):
        if 0 < i < n - 1:
            cand.setdefault(i, set()).add(Kind.CURVATURE)
    for i in _speed_minima(stroke, cfg.speed_min_frac):
        cand.setdefault(i, set()).add(Kind.SPEED)
    for i in _pressure_jumps(stroke, cfg.pressure_jump):
        cand.setdefault(i, set()).add(Kind.PRESSURE)

    s = stroke.cumulative_length()
    merge = cfg.merge_frac * diag
    start = {Kind.START}
    end = {Kind.END}
    clusters: list[tuple[list[int], set]] = []
    for i in sorted(cand):
        kinds = cand[i]
        if s[i] < merge:
            start |= kinds
        elif s[-1] - s[i] < merge:
            end |= kinds
        elif clusters and s[i] - s[clusters[-1][0][-1]] < merge:
            clusters[-1][0].append(i)
            clusters[-1][1].update(kinds)
        else:
            clusters.append(([i], set(kinds)))

    def cp(i, kinds):
        return CharacteristicPoint((float(stroke.xy[i, 0]), float(stroke.xy[i, 1])), stroke.index, i,
                                   float(stroke.t[i]), frozenset(kinds))

    pts = [cp(0, start)]
    for members, kinds in clusters:
        # latest timestamp wins; t is non-decreasing so ties go to the higher index
        pts.append(cp(max(members, key=lambda j: (stroke.t[j], j)), kinds))
    pts.append(cp(n - 1, end))
    return pts


def detect_characteristic_points(sketch: Sketch, cfg: PipelineConfig = PipelineConfig()) -> list[CharacteristicPoint]:
    """Stroke ends, curvature maxima, speed minima and pressure jumps, per stroke.

    Sample indices refer to the strokes returned by :func:`resample_sketch`.
    """
    strokes, diag = resample_sketch(sketch, cfg)
    out = []
    for st in strokes:
        out.extend(_stroke_char_points(st, cfg, diag))
    return out


# -- primitive fitting ---------------------------------------------------------

def fit_circle(xy: np.ndarray) -> tuple[float, float, float]:
    """Algebraic least-squares circle (Kasa). Returns (cx, cy, r)."""
    m = xy.mean(axis=0)
    p = xy - m
    A = np.column_stack([p[:, 0], p[:, 1], np.ones(len(p))])
    rhs = -(p[:, 0] ** 2 + p[:, 1] ** 2)
    (D, E, F), *_ = np.linalg.lstsq(A, rhs, rcond=None)
    cx, cy = -D / 2, -E / 2
    r2 = cx * cx + cy * cy - F
    if not r2 > 0:
        return float("nan"), float("nan"), float("nan")
    return float(cx + m[0]), float(cy + m[1]), math.sqrt(r2)


def _line_rms(xy: np.ndarray) -> tuple[float, np.ndarray]:
    c = xy[-1] - xy[0]
    L = math.hypot(c[0], c[1])
    rel = xy - xy[0]
    if L <= 1e-12 * max(1.0, float(np.abs(xy).max())):
        dev = np.hypot(rel[:, 0], rel[:, 1])
        return math.inf, dev
    dev = np.abs(rel[:, 0] * c[1] - rel[:, 1] * c[0]) / L
    return float(np.sqrt(np.mean(dev * dev))), dev


def _arc_fit(xy: np.ndarray):
    cx, cy, r = fit_circle(xy)
    if not math.isfinite(r):
        return math.inf, None
    rad = np.hypot(xy[:, 0] - cx, xy[:, 1] - cy)
    rms = float(np.sqrt(np.mean((rad - r) ** 2)))
    ang = np.unwrap(np.arctan2(xy[:, 1] - cy, xy[:, 0] - cx))
    sweep = math.degrees(ang[-1] - ang[0])
    return rms, (cx, cy, r, math.degrees(ang[0]), sweep)


def _fit_span(xy, s, a, b, cfg, min_len, depth) -> list[tuple]:
    seg = xy[a:b + 1]
    span_len = s[b] - s[a]
    line_rms, dev = _line_rms(seg)
    if line_rms <= cfg.line_tol * span_len:
        return [("line", a, b, line_rms, None)]
    arc_rms, arc = _arc_fit(seg)
    if arc is not None and arc_rms <= cfg.arc_tol * span_len and abs(arc[4]) >= cfg.arc_min_sweep_deg:
        return [("arc", a, b, arc_rms, arc)]
    if depth < cfg.max_split_depth:
        order = np.argsort(-dev, kind="stable")
        for j in order:
            j = a + int(j)
            if a < j < b and s[j] - s[a] >= min_len and s[b] - s[j] >= min_len:
                return (_fit_span(xy, s, a, j, cfg, min_len, depth + 1)
                        + _fit_span(xy, s, j, b, cfg, min_len, depth + 1))
            if dev[j - a] <= 0:
                break
    if arc is not None and arc_rms < line_rms:
        return [("arc", a, b, arc_rms, arc)]
    if not math.isfinite(line_rms):
        return [("arc", a, b, arc_rms, arc)] if arc is not None else [("line", a, b, float(dev.max()), None)]
    return [("line", a, b, line_rms, None)]


def _drop_short_spans(bounds: list[int], s: np.ndarray, min_len: float) -> list[int]:
    bounds = list(bounds)
    while len(bounds) > 2:
        lens = [s[bounds[k + 1]] - s[bounds[k]] for k in range(len(bounds) - 1)]
        k = int(np.argmin(lens))
        if lens[k] >= min_len:
            break
        if k == 0:
            del bounds[1]
        elif k == len(lens) - 1:
            del bounds[-2]
        elif lens[k - 1] <= lens[k + 1]:
            del bounds[k]
        else:
            del bounds[k + 1]
    return bounds


def fit_primitives(stroke: Stroke, char_points: Sequence[CharacteristicPoint],
                   cfg: PipelineConfig = PipelineConfig(), diagonal: Optional[float] = None,
                   first_id: int = 0) -> list[Primitive]:
    """Fit lines/arcs to the spans between boundary characteristic points.

    ``stroke`` must be the resampled stroke the points index into. Spans
    shorter than the minimum primitive length are merged into a neighbour.
    """
    if diagonal is None:
        lo, hi = stroke.xy.min(axis=0), stroke.xy.max(axis=0)
        diagonal = float(np.hypot(*(hi - lo)))
    n = len(stroke)
    s = stroke.cumulative_length()
    min_len = cfg.min_primitive_frac * diagonal
    bounds = sorted({0, n - 1} | {c.sample_index for c in char_points
                                  if c.source_stroke == stroke.index and c.is_boundary})
    bounds = _drop_short_spans(bounds, s, min_len)
    pieces = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        pieces.extend(_fit_span(stroke.xy, s, a, b, cfg, min_len, 0))
    prims = []
    for k, (kind, a, b, err, arc) in enumerate(pieces):
        p0 = (float(stroke.xy[a, 0]), float(stroke.xy[a, 1]))
        p1 = (float(stroke.xy[b, 0]), float(stroke.xy[b, 1]))
        extra = {}
        if kind == "arc":
            cx, cy, r, a0, sw = arc
            extra = dict(center=(cx, cy), radius=r, start_angle=a0, sweep=sw)
        prims.append(Primitive(first_id + k, kind, stroke.index, (a, b), p0, p1, float(err),
                               float(s[b] - s[a]), **extra))
    return prims


# -- intersections -----------------------------------------------------------

_EPS = 1e-9


def _on_arc(prim: Primitive, x: float, y: float) -> bool:
    ang = math.degrees(math.atan2(y - prim.center[1], x - prim.center[0]))
    sw = prim.sweep
    if abs(sw) >= 360.0:
        return True
    rel = (ang - prim.start_angle) * (1 if sw > 0 else -1) % 360.0
    return _EPS < rel < abs(sw) - _EPS


def _seg_seg(p: Primitive, q: Primitive) -> list[tuple[float, float]]:
    (x1, y1), (x2, y2) = p.start, p.end
    (x3, y3), (x4, y4) = q.start, q.end
    dx1, dy1, dx2, dy2 = x2 - x1, y2 - y1, x4 - x3, y4 - y3
    den = dx1 * dy2 - dy1 * dx2
    if abs(den) <= 1e-12 * math.hypot(dx1, dy1) * math.hypot(dx2, dy2):
        return []
    ta = ((x3 - x1) * dy2 - (y3 - y1) * dx2) / den
    tb = ((x3 - x1) * dy1 - (y3 - y1) * dx1) / den
    if _EPS < ta < 1 - _EPS and _EPS < tb < 1 - _EPS:
        return [(x1 + ta * dx1, y1 + ta * dy1)]
    return []


def _seg_circle(p: Primitive, cx: float, cy: float, r: float) -> list[tuple[float, float, float]]:
    (x1, y1), (x2, y2) = p.start, p.end
    dx, dy = x2 - x1, y2 - y1
    fx, fy = x1 - cx, y1 - cy
    a = dx * dx + dy * dy
    b = 2 * (fx * dx + fy * dy)
    c = fx * fx + fy * fy - r * r
    disc = b * b - 4 * a * c
    if a == 0 or disc <= _EPS * b * b + 1e-300:
        return []
    sq = math.sqrt(disc)
    out = []
    for tt in ((-b - sq) / (2 * a), (-b + sq) / (2 * a)):
        if _EPS < tt < 1 - _EPS:
            out.append((x1 + tt * dx, y1 + tt * dy, tt))
    return out


def _seg_arc(p: Primitive, q: Primitive):
    return [(x, y) for x, y, _ in _seg_circle(p, q.center[0], q.center[1], q.radius) if _on_arc(q, x, y)]


def _arc_arc(p: Primitive, q: Primitive):
    (x0, y0), r0 = p.center, p.radius
    (x1, y1), r1 = q.center, q.radius
    d = math.hypot(x1 - x0, y1 - y0)
    if d <= _EPS * max(r0, r1) or not (abs(r0 - r1) + _EPS * d < d < r0 + r1 - _EPS * d):
        return []
    a = (r0 * r0 - r1 * r1 + d * d) / (2 * d)
    h = math.sqrt(max(r0 * r0 - a * a, 0.0))
    mx, my = x0 + a * (x1 - x0) / d, y0 + a * (y1 - y0) / d
    pts = [(mx + h * (y1 - y0) / d, my - h * (x1 - x0) / d),
           (mx - h * (y1 - y0) / d, my + h * (x1 - x0) / d)]
    return [pt for pt in pts if _on_arc(p, *pt) and _on_arc(q, *pt)]


def intersect_pair(p: Primitive, q: Primitive) -> list[tuple[float, float]]:
    if p.kind == "line" and q.kind == "line":
        return _seg_seg(p, q)
    if p.kind == "line":
        return _seg_arc(p, q)
    if q.kind == "line":
        return _seg_arc(q, p)
    return _arc_arc(p, q)


def _nearest_sample(strokes, prim: Primitive, pt) -> int:
    a, b = prim.sample_range
    xy = strokes[prim.source_stroke].xy[a:b + 1]
    return a + int(np.argmin(np.hypot(xy[:, 0] - pt[0], xy[:, 1] - pt[1])))


def find_intersections(primitives: Sequence[Primitive],
                       strokes: Optional[Sequence[Stroke]] = None) -> list[CharacteristicPoint]:
    """Transversal crossings between primitives that are not stroke neighbours.

    With ``strokes`` (the resampled strokes) the crossing gets the timestamp
    of the later traversal; without them sample_index is -1 and t is 0.
    """
    out = []
    prims = list(primitives)
    for i, p in enumerate(prims):
        for q in prims[i + 1:]:
            if p.source_stroke == q.source_stroke and abs(p.id - q.id) == 1:
                continue
            for pt in intersect_pair(p, q):
                stroke_id, idx, t = q.source_stroke, -1, 0.0
                if strokes is not None:
                    ip = _nearest_sample(strokes, p, pt)
                    iq = _nearest_sample(strokes, q, pt)
                    tp = float(strokes[p.source_stroke].t[ip])
                    tq = float(strokes[q.source_stroke].t[iq])
                    if tp > tq:
                        stroke_id, idx, t = p.source_stroke, ip, tp
                    else:
                        stroke_id, idx, t = q.source_stroke, iq, tq
                out.append(CharacteristicPoint((float(pt[0]), float(pt[1])), stroke_id, idx, t,
                                               frozenset({Kind.INTERSECTION}),
                                               frozenset({p.id, q.id})))
    return out


# -- whole pipeline -------------------------------------------------------------

def segment(sketch: Sketch, cfg: PipelineConfig = PipelineConfig()) -> Segmentation:
    strokes, diag = resample_sketch(sketch, cfg)
    if not diag > 0:
        raise SegmentationError("sketch has a zero-size bounding box")
    cps: list[CharacteristicPoint] = []
    prims: list[Primitive] = []
    for st in strokes:
        pts = _stroke_char_points(st, cfg, diag)
        new = fit_primitives(st, pts, cfg, diag, first_id=len(prims))
        for c in pts:
            refs = frozenset(p.id for p in new if p.sample_range[0] <= c.sample_index <= p.sample_range[1])
            cps.append(replace(c, primitive_refs=refs))
        prims.extend(new)
    cps.extend(find_intersections(prims, strokes))
    cps.sort(key=lambda c: (c.source_stroke, c.sample_index, c.timestamp))
    cps = [replace(c, id=k) for k, c in enumerate(cps)]
    return Segmentation(sketch, strokes, tuple(cps), tuple(prims), diag)


def dump_records(seg: Segmentation) -> str:
    """Line-delimited JSON records of primitives and characteristic points."""
    import json

    lines = []
    for p in seg.primitives:
        rec = {"type": "primitive", "id": p.id, "kind": p.kind, "stroke": p.source_stroke,
               "range": list(p.sample_range), "start": list(p.start), "end": list(p.end),
               "fit_error": p.fit_error, "length": p.length}
        if p.kind == "arc":
            rec.update(center=list(p.center), radius=p.radius, start_angle=p.start_angle, sweep=p.sweep)
        lines.append(json.dumps(rec))
    for c in seg.char_points:
        lines.append(json.dumps({"type": "char_point", "id": c.id, "position": list(c.position),
                                 "stroke": c.source_stroke, "sample": c.sample_index, "t": c.timestamp,
                                 "kinds": sorted(k.value for k in c.kinds),
                                 "primitives": sorted(c.primitive_refs)}))
    return "\n".join(lines) + "\n"
