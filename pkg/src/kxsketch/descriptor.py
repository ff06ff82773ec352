"""16-portion circular descriptors anchored at interest points."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .config import PipelineConfig
from .ink import Stroke, resample_arclength
from .interest import InterestPoint
from .segmentation import Primitive, Segmentation

log = logging.getLogger(__name__)

NBINS = kernels.NBINS
PORTION = kernels.PORTION
FINE_OFFSETS = np.arange(-11, 12, dtype=float)


AXIS_TOL = 1e-7   # degrees; rounding noise around 0 and +-90 must not flip the numbering or portion 0


class EmptyNeighborhood(ValueError):
    pass


class DegenerateInertia(ValueError):
    """Raised only by ``inertia_axis(..., strict=True)``."""


@dataclass(frozen=True, eq=False)
class Descriptor:
    bins: np.ndarray
    anchor: tuple[float, float]
    axis_angle: float           # degrees, after fine rotation
    enumeration_sign: int       # +1 counter-clockwise numbering, -1 clockwise
    radius: float
    raw_axis: float = 0.0

    def __post_init__(self):
        b = np.array(self.bins, dtype=float).reshape(-1)
        if b.shape != (NBINS,):
            raise ValueError(f"descriptor needs {NBINS} bins")
        if np.any(b < 0) or not np.any(b > 0):
            raise ValueError("bins must be non-negative with at least one positive")
        b.flags.writeable = False
        object.__setattr__(self, "bins", b)

    def to_record(self, **extra) -> dict:
        rec = dict(extra)
        rec.update(anchor=[float(self.anchor[0]), float(self.anchor[1])], axis_angle=float(self.axis_angle),
                   raw_axis=float(self.raw_axis), sign=int(self.enumeration_sign), radius=float(self.radius),
                   bins=[float(x) for x in self.bins])
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "Descriptor":
        return cls(np.asarray(rec["bins"], float), tuple(rec["anchor"]), float(rec["axis_angle"]),
                   int(rec["sign"]), float(rec["radius"]), float(rec.get("raw_axis", rec["axis_angle"])))


def histogram_stddev(bins) -> float:
    """Population standard deviation of the bin masses."""
    return float(np.std(np.asarray(bins, dtype=float)))


def inertia_axis(points: np.ndarray, center=None, strict: bool = False) -> float:
    """Major principal axis of the 2x2 second-moment matrix, degrees in (-90, 90].

    Axes within ``AXIS_TOL`` of -90 are reported on the +90 side, so a
    vertical axis always starts portion 0 pointing the same way.

    Moments are taken about ``center`` (the centroid when omitted). An
    isotropic set (eigenvalue ratio below 1 + 1e-6) has no axis; 0 is
    returned unless ``strict``.
    """
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    c = p.mean(axis=0) if center is None else np.asarray(center, dtype=float)
    q = p - c
    sxx = float(np.dot(q[:, 0], q[:, 0]))
    syy = float(np.dot(q[:, 1], q[:, 1]))
    sxy = float(np.dot(q[:, 0], q[:, 1]))
    half_tr = (sxx + syy) / 2
    rad = math.hypot((sxx - syy) / 2, sxy)
    lo, hi = half_tr - rad, half_tr + rad
    if hi <= 0 or hi < (1 + 1e-6) * lo:
        if strict:
            raise DegenerateInertia("isotropic point set")
        return 0.0
    ang = 0.5 * math.degrees(math.atan2(2 * sxy, sxx - syy))
    return ang + 180.0 if ang <= -90.0 + AXIS_TOL else ang


def pick_fine_rotation(sd: np.ndarray, sign: int) -> int:
    """Index of the chosen candidate among ``FINE_OFFSETS``.

    Candidates within 1e-9 (relative) of the best deviation form plateaus.
    The middle of the widest plateau is taken, so every portion edge stays
    as far as possible from the ink. Remaining ties prefer the plateau
    nearest the raw axis, then the offset turned against the numbering
    direction; the rule is symmetric under mirroring.
    """
    sd = np.asarray(sd, dtype=float)
    is_max = sd >= sd.max() * (1 - 1e-9)
    runs, k = [], 0
    while k < len(sd):
        if is_max[k]:
            j = k
            while j + 1 < len(sd) and is_max[j + 1]:
                j += 1
            runs.append((k, j))
            k = j + 1
        else:
            k += 1
    off = FINE_OFFSETS

    def key(run):
        lo, hi = run
        centre = (off[lo] + off[hi]) / 2
        return (hi - lo, -abs(centre), -sign * centre)

    lo, hi = max(runs, key=key)
    mid = [(lo + hi) // 2, (lo + hi + 1) // 2]
    return max(mid, key=lambda c: -sign * off[c])


def slope_sign(axis_deg: float) -> int:
    """+1 for a non-negative slope (horizontal and vertical axes included).

    Axes within ``AXIS_TOL`` of horizontal or vertical count as such.
    """
    return -1 if -90.0 + AXIS_TOL < axis_deg < -AXIS_TOL else 1


def _qualifying_primitives(seg: Segmentation, center, radius) -> list[Primitive]:
    cx, cy = center
    inside = {pid for c in seg.char_points
              if math.hypot(c.position[0] - cx, c.position[1] - cy) <= radius
              for pid in c.primitive_refs}
    return [p for p in seg.primitives if p.id in inside]


def collect_neighborhood(seg: Segmentation, ip: InterestPoint | tuple,
                         cfg: PipelineConfig = PipelineConfig()) -> np.ndarray:
    """Points of qualifying primitives inside the descriptor disc, resampled.

    A primitive qualifies when one of its characteristic points lies in the
    disc. Each qualifying primitive is resampled along its ink at
    (shortest qualifying length) / N0, rounded so that the primitive holds a
    whole number of steps (no stub interval next to its end point). A sample
    coinciding with the anchor is kept here and dropped when binning.
    """
    anchor = ip.position if isinstance(ip, InterestPoint) else tuple(ip)
    radius = cfg.radius_frac * seg.diagonal
    prims = _qualifying_primitives(seg, anchor, radius)
    if not prims:
        raise EmptyNeighborhood(f"no qualifying primitive around {anchor}")
    step = min(p.length for p in prims) / cfg.resample_points_on_min_primitive
    chunks = []
    for p in prims:
        a, b = p.sample_range
        st = seg.strokes[p.source_stroke]
        piece = Stroke(st.xy[a:b + 1], st.t[a:b + 1], p.source_stroke)
        n = max(1, round(p.length / step))
        chunks.append(resample_arclength(piece, p.length / n).xy)
    pts = np.concatenate(chunks)
    d = np.hypot(pts[:, 0] - anchor[0], pts[:, 1] - anchor[1])
    pts = pts[d <= radius]
    if len(pts) == 0:
        raise EmptyNeighborhood(f"no ink around {anchor}")
    return pts


def build_descriptor(seg: Segmentation, ip: InterestPoint | tuple,
                     cfg: PipelineConfig = PipelineConfig()) -> Descriptor:
    """Histogram the neighbourhood into 16 portions around the best axis.

    Portion 0 is centred on the axis and portions are numbered in the
    direction given by the sign of the raw axis slope. Of the 23 candidate
    axes (raw +-11 deg, 1 deg steps) one with the largest histogram standard
    deviation wins; see :func:`pick_fine_rotation` for ties.
    """
    anchor = ip.position if isinstance(ip, InterestPoint) else tuple(ip)
    pts = collect_neighborhood(seg, anchor, cfg)
    # the direction of a sample sitting on the anchor is undefined
    pts = pts[np.hypot(pts[:, 0] - anchor[0], pts[:, 1] - anchor[1]) > 1e-12 * cfg.radius_frac * seg.diagonal]
    if len(pts) == 0:
        raise EmptyNeighborhood(f"only the anchor itself around {anchor}")
    raw = inertia_axis(pts)
    sign = slope_sign(raw)
    ang = np.degrees(np.arctan2(pts[:, 1] - anchor[1], pts[:, 0] - anchor[0]))
    hists = kernels.sector_histograms(ang, raw + FINE_OFFSETS, sign)
    best = pick_fine_rotation(hists.std(axis=1), sign)
    mass = NBINS * cfg.resample_points_on_min_primitive
    bins = hists[best] * (mass / hists[best].sum())
    return Descriptor(bins, (float(anchor[0]), float(anchor[1])), float(raw + FINE_OFFSETS[best]), sign,
                      cfg.radius_frac * seg.diagonal, raw)


def describe(seg: Segmentation, points: Sequence[InterestPoint],
             cfg: PipelineConfig = PipelineConfig()) -> list[Descriptor]:
    """Descriptors for every interest point; empty neighbourhoods are skipped with a warning."""
    out = []
    for ip in points:
        try:
            out.append(build_descriptor(seg, ip, cfg))
        except EmptyNeighborhood as e:
            log.warning("skipping interest point: %s", e)
    return out


# -- persistence --------------------------------------------------------------

def dumps_descriptors(records: Sequence[dict]) -> str:
    return "".join(json.dumps(r) + "\n" for r in records)


def loads_descriptors(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]
