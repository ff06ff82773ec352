"""Interest points: collapse redrawing zones and structural neighbours.

Both groupings are single-linkage clusters under the radius
``redraw_radius_frac * diagonal``; each cluster is represented by its most
recently recorded member.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .config import PipelineConfig
from .segmentation import CharacteristicPoint, Primitive, Segmentation


@dataclass(frozen=True)
class RedrawZone:
    members: tuple[CharacteristicPoint, ...]

    @property
    def representative(self) -> CharacteristicPoint:
        return latest(self.members)


@dataclass(frozen=True)
class NeighborGroup:
    members: tuple[CharacteristicPoint, ...]

    @property
    def representative(self) -> CharacteristicPoint:
        return latest(self.members)


@dataclass(frozen=True)
class InterestPoint:
    position: tuple[float, float]
    origin: CharacteristicPoint
    collapsed_from: Optional[RedrawZone | NeighborGroup] = None


def latest(points: Sequence[CharacteristicPoint]) -> CharacteristicPoint:
    return max(points, key=lambda c: (c.timestamp, c.source_stroke, c.sample_index))


def _dist(a: CharacteristicPoint, b: CharacteristicPoint) -> float:
    return math.hypot(a.position[0] - b.position[0], a.position[1] - b.position[1])


def _clusters(points: Sequence[CharacteristicPoint], linked) -> list[tuple[CharacteristicPoint, ...]]:
    n = len(points)
    rows, cols = [], []
    for i in range(n):
        for j in range(i + 1, n):
            if linked(points[i], points[j]):
                rows.append(i)
                cols.append(j)
    if not rows:
        return []
    g = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    groups: dict[int, list] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(points[i])
    return [tuple(m) for m in groups.values() if len(m) >= 2]


def _overlap_fraction(a: np.ndarray, b: np.ndarray, radius: float) -> float:
    """Share of the shorter sample run lying within ``radius`` of the other."""
    if len(a) > len(b):
        a, b = b, a
    d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1]).min(axis=1)
    return float(np.mean(d <= radius))


def _angle_gap(a: float, b: float) -> float:
    g = abs(a - b) % 180.0
    return min(g, 180.0 - g)


def detect_redraw_zones(seg: Segmentation, cfg: PipelineConfig = PipelineConfig()) -> list[RedrawZone]:
    """Points within the radius whose primitives run over the same ink in the same direction."""
    rho = cfg.redraw_radius_frac * seg.diagonal
    prims = {p.id: p for p in seg.primitives}
    overlap_cache: dict[tuple[int, int], bool] = {}

    def overlaps(p: Primitive, q: Primitive) -> bool:
        key = (min(p.id, q.id), max(p.id, q.id))
        if key not in overlap_cache:
            frac = _overlap_fraction(seg.primitive_xy(p), seg.primitive_xy(q), rho)
            overlap_cache[key] = frac >= cfg.redraw_overlap
        return overlap_cache[key]

    def linked(a: CharacteristicPoint, b: CharacteristicPoint) -> bool:
        if _dist(a, b) > rho:
            return False
        for pa in a.primitive_refs:
            for pb in b.primitive_refs:
                if pa == pb:
                    continue
                P, Q = prims[pa], prims[pb]
                if (_angle_gap(P.direction_at(a.position), Q.direction_at(b.position)) <= cfg.redraw_tangent_deg
                        and overlaps(P, Q)):
                    return True
        return False

    return [RedrawZone(m) for m in _clusters(seg.char_points, linked)]


def _structural_link(rho: float):
    def linked(a: CharacteristicPoint, b: CharacteristicPoint) -> bool:
        return _dist(a, b) <= rho and len(a.primitive_refs | b.primitive_refs) >= 2
    return linked


def detect_structural_neighbors(seg: Segmentation, cfg: PipelineConfig = PipelineConfig(),
                                zones: Sequence[RedrawZone] = ()) -> list[NeighborGroup]:
    """Points within the radius that sit on a junction of two or more primitives.

    Members of ``zones`` are excluded.
    """
    rho = cfg.redraw_radius_frac * seg.diagonal
    taken = {c.id for z in zones for c in z.members}
    free = [c for c in seg.char_points if c.id not in taken]
    return [NeighborGroup(m) for m in _clusters(free, _structural_link(rho))]


def absorb_into_zones(seg: Segmentation, zones: Sequence[RedrawZone],
                      cfg: PipelineConfig = PipelineConfig()) -> list[RedrawZone]:
    """Grow zones by the junction relation so no free point stays next to a zone.

    Zones that become connected this way are merged. Without this step a
    stroke end meeting a redrawn corner would survive beside the zone's
    representative.
    """
    if not zones:
        return list(zones)
    rho = cfg.redraw_radius_frac * seg.diagonal
    zone_of = {c.id: k for k, z in enumerate(zones) for c in z.members}
    link = _structural_link(rho)

    def linked(a, b):
        za, zb = zone_of.get(a.id), zone_of.get(b.id)
        return (za is not None and za == zb) or link(a, b)

    out = []
    for members in _clusters(seg.char_points, linked):
        if any(c.id in zone_of for c in members):
            out.append(RedrawZone(tuple(sorted(members, key=lambda c: c.id))))
    return out


def select_interest_points(char_points: Sequence[CharacteristicPoint], zones: Sequence[RedrawZone] = (),
                           groups: Sequence[NeighborGroup] = ()) -> list[InterestPoint]:
    owner: dict[int, RedrawZone | NeighborGroup] = {}
    for grp in list(zones) + list(groups):
        for c in grp.members:
            if c.id in owner:
                raise ValueError(f"characteristic point {c.id} belongs to two groups")
            owner[c.id] = grp
    out, seen = [], set()
    for c in char_points:
        grp = owner.get(c.id)
        if grp is None:
            out.append(InterestPoint(c.position, c))
        elif id(grp) not in seen:
            seen.add(id(grp))
            rep = grp.representative
            out.append(InterestPoint(rep.position, rep, grp))
    out.sort(key=lambda ip: (ip.origin.timestamp, ip.origin.source_stroke, ip.origin.sample_index))
    return out


def interest_points(seg: Segmentation, cfg: PipelineConfig = PipelineConfig()) -> list[InterestPoint]:
    zones = absorb_into_zones(seg, detect_redraw_zones(seg, cfg), cfg)
    groups = detect_structural_neighbors(seg, cfg, zones)
    return select_interest_points(seg.char_points, zones, groups)
