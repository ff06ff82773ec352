"""Perfect reference polygons and synthetic sketches.

Canonical interior angles per class (degrees, in drawing order):

* triangle: right isosceles, 90/45/45
* square: 90 x 4
* parallelogram: 45/135/45/135 (equal sides)
* pentagon: 90/90/112.5/135/112.5
* hexagon: 90/112.5/135/135/135/112.5

Polygons are drawn counter-clockwise from vertex 0. Edge lengths are the
least-norm correction of equal edges that closes the polygon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ink import Sketch, Stroke

CLASSES = ("triangle", "square", "parallelogram", "pentagon", "hexagon")

CANONICAL_ANGLES = {
    "triangle": (90.0, 45.0, 45.0),
    "square": (90.0, 90.0, 90.0, 90.0),
    "parallelogram": (45.0, 135.0, 45.0, 135.0),
    "pentagon": (90.0, 90.0, 112.5, 135.0, 112.5),
    "hexagon": (90.0, 112.5, 135.0, 135.0, 135.0, 112.5),
}

# ink units per millisecond, relative to the nominal edge length
_SPEED = 1.0 / 400.0
_PEN_UP_MS = 120.0


@dataclass(frozen=True)
class PatternSpec:
    class_name: str
    interior_angles: tuple[float, ...] = ()
    scale: float = 100.0
    rotation: float = 0.0
    sampling_step: Optional[float] = None    # default: scale / 50

    def __post_init__(self):
        if not self.interior_angles:
            if self.class_name not in CANONICAL_ANGLES:
                raise ValueError(f"unknown class {self.class_name!r}")
            object.__setattr__(self, "interior_angles", CANONICAL_ANGLES[self.class_name])
        n = len(self.interior_angles)
        if n < 3:
            raise ValueError("a polygon needs at least 3 angles")
        if abs(sum(self.interior_angles) - (n - 2) * 180.0) > 1e-6:
            raise ValueError(f"interior angles sum to {sum(self.interior_angles)}, expected {(n - 2) * 180}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.sampling_step is not None and not self.sampling_step > 0:
            raise ValueError("sampling_step must be positive")

    @property
    def step(self) -> float:
        return self.sampling_step if self.sampling_step is not None else self.scale / 50.0


@dataclass(frozen=True)
class SynthSpec:
    base: PatternSpec
    jitter: float = 0.0
    stroke_split: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 <= self.jitter < 0.05:
            raise ValueError("jitter must lie in [0, 0.05)")
        n = len(self.base.interior_angles)
        bad = [e for e in self.stroke_split if not 0 <= e < n]
        if bad:
            raise ValueError(f"stroke_split edges out of range: {bad}")


def edge_headings(angles: Sequence[float]) -> np.ndarray:
    """Heading (degrees) of edge j, which leaves vertex j."""
    turns = 180.0 - np.asarray(angles, float)
    # edge 0 leaves vertex 0; turning at vertex j+1 gives edge j+1
    return np.concatenate(([0.0], np.cumsum(turns[1:])))


def polygon_vertices(spec: PatternSpec) -> np.ndarray:
    """Closed polygon vertices (n, 2), centred on the vertex centroid, rotated."""
    head = np.radians(edge_headings(spec.interior_angles))
    A = np.vstack([np.cos(head), np.sin(head)])          # closure: A @ L = 0
    L0 = np.full(len(head), spec.scale)
    L = L0 - A.T @ np.linalg.solve(A @ A.T, A @ L0)
    if np.any(L <= 0):
        raise ValueError("angle sequence admits no closed polygon near equal edges")
    steps = (A * L).T
    v = np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)[:-1]])
    v -= v.mean(axis=0)
    a = math.radians(spec.rotation)
    R = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    return v @ R.T


def closure_residual(spec: PatternSpec) -> float:
    head = np.radians(edge_headings(spec.interior_angles))
    A = np.vstack([np.cos(head), np.sin(head)])
    L0 = np.full(len(head), spec.scale)
    L = L0 - A.T @ np.linalg.solve(A @ A.T, A @ L0)
    return float(np.hypot(*(A @ L)))


def interior_angles_of(vertices: np.ndarray) -> np.ndarray:
    """Interior angles (degrees) of a counter-clockwise polygon."""
    v = np.asarray(vertices, float)
    prev = np.roll(v, 1, axis=0) - v
    nxt = np.roll(v, -1, axis=0) - v
    cross = prev[:, 0] * nxt[:, 1] - prev[:, 1] * nxt[:, 0]
    dot = (prev * nxt).sum(axis=1)
    ang = np.degrees(np.arctan2(np.abs(cross), dot))
    return ang


def _sample_edges(vertices: np.ndarray, step: float) -> tuple[list[np.ndarray], np.ndarray]:
    """Per-edge sample arrays (each includes both end vertices) and edge lengths."""
    n = len(vertices)
    edges, lengths = [], []
    for j in range(n):
        p, q = vertices[j], vertices[(j + 1) % n]
        L = float(np.hypot(*(q - p)))
        m = max(1, math.ceil(L / step - 1e-9))
        f = np.linspace(0.0, 1.0, m + 1)[:, None]
        edges.append(p + f * (q - p))
        lengths.append(L)
    return edges, np.array(lengths)


def _assemble(edges: list[np.ndarray], splits: Sequence[int]) -> list[np.ndarray]:
    """Join edge samples into strokes, lifting the pen after each edge in ``splits``."""
    strokes, cur = [], []
    for j, e in enumerate(edges):
        cur.append(e if not cur else e[1:])
        if j in splits and j != len(edges) - 1:
            strokes.append(np.vstack(cur))
            cur = []
    strokes.append(np.vstack(cur))
    return strokes


def _to_sketch(polylines: list[np.ndarray], label: str, user: Optional[str], scale: float) -> Sketch:
    speed = scale * _SPEED
    out, t0 = [], 0.0
    for k, xy in enumerate(polylines):
        s = np.concatenate(([0.0], np.cumsum(np.hypot(*np.diff(xy, axis=0).T))))
        out.append(Stroke(xy, t0 + s / speed, index=k))
        t0 += s[-1] / speed + _PEN_UP_MS
    return Sketch(tuple(out), label=label, user_id=user)


def perfect_pattern(class_name: str, scale: float = 100.0, rotation: float = 0.0,
                    sampling_step: Optional[float] = None) -> Sketch:
    """Single-stroke closed polygon of the class, drawn at constant speed."""
    spec = PatternSpec(class_name, scale=scale, rotation=rotation, sampling_step=sampling_step)
    return pattern_sketch(spec)


def pattern_sketch(spec: PatternSpec, user: Optional[str] = None) -> Sketch:
    edges, _ = _sample_edges(polygon_vertices(spec), spec.step)
    return _to_sketch(_assemble(edges, ()), spec.class_name, user, spec.scale)


def _smooth_field(rng: np.random.Generator, u: np.ndarray, modes: int = 4) -> np.ndarray:
    """Periodic 2-D displacement over u in [0, 1], peak norm 1."""
    out = np.zeros((len(u), 2))
    for axis in range(2):
        for k in range(1, modes + 1):
            amp = rng.normal() / k
            ph = rng.uniform(0, 2 * math.pi)
            out[:, axis] += amp * np.sin(2 * math.pi * k * u + ph)
    peak = float(np.hypot(out[:, 0], out[:, 1]).max())
    return out / peak if peak > 0 else out


def synth_sketch(spec: SynthSpec, seed: int = 1, user: Optional[str] = None) -> Sketch:
    """Deterministic synthetic sketch: smooth jitter plus optional pen lifts.

    Jitter is a low-frequency displacement along the closed outline whose
    peak magnitude is ``jitter * scale``; it is periodic, so the pen-lift
    points of consecutive strokes stay coincident.
    """
    base = spec.base
    edges, lengths = _sample_edges(polygon_vertices(base), base.step)
    if spec.jitter > 0:
        rng = np.random.default_rng(seed)
        perim = lengths.sum()
        offset = 0.0
        field_pts = []
        for e, L in zip(edges, lengths):
            u = (offset + np.linspace(0.0, L, len(e))) / perim
            field_pts.append(u)
            offset += L
        u_all = np.concatenate(field_pts)
        disp = _smooth_field(rng, u_all) * spec.jitter * base.scale
        jittered, pos = [], 0
        for e in edges:
            jittered.append(e + disp[pos:pos + len(e)])
            pos += len(e)
        edges = jittered
    polylines = _assemble(edges, tuple(sorted(set(spec.stroke_split))))
    return _to_sketch(polylines, base.class_name, user, base.scale)


def synthetic_suite(seed: int = 1, per_class: int = 4, jitter_max: float = 0.02) -> list[Sketch]:
    """Synthetic test set: ``per_class`` sketches per class with varied pose.

    Rotations mix multiples of 22.5 degrees with in-between angles, scales
    span a factor of ten, and some sketches are split into several strokes.
    """
    rng = np.random.default_rng(seed)
    out = []
    for ci, name in enumerate(CLASSES):
        n = len(CANONICAL_ANGLES[name])
        for j in range(per_class):
            if j % 2 == 0:
                rot = 22.5 * int(rng.integers(0, 16))
            else:
                rot = float(np.round(rng.uniform(0, 360), 1))
            scale = float(np.round(10 ** rng.uniform(0.5, 2.5), 3))
            jitter = float(np.round(rng.uniform(0, jitter_max), 4)) if j > 0 else 0.0
            split = () if j % 3 == 0 else tuple(sorted(rng.choice(n, size=int(rng.integers(1, n + 1)),
                                                                    replace=False).tolist()))
            spec = SynthSpec(PatternSpec(name, scale=scale, rotation=rot), jitter, split)
            out.append(synth_sketch(spec, seed=seed * 1000 + ci * 100 + j, user="synthetic"))
    return out
