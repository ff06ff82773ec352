"""SVG rendering of a sketch with optional analysis overlays."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional
from xml.sax.saxutils import quoteattr

from .config import PipelineConfig
from .ink import Sketch, bounding_box
from .pipeline import Analysis, analyze

PRIMITIVE_COLORS = {"line": "#1f77b4", "arc": "#d62728"}


@dataclass(frozen=True)
class RenderAnnotations:
    char_points: bool = False
    interest_points: bool = False
    primitives: bool = False
    descriptors: bool = False

    @classmethod
    def all(cls) -> "RenderAnnotations":
        return cls(True, True, True, True)

    @property
    def any(self) -> bool:
        return self.char_points or self.interest_points or self.primitives or self.descriptors


def _f(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _arc_path(p) -> str:
    cx, cy = p.center
    r = p.radius
    a0 = math.radians(p.start_angle)
    sw = math.radians(p.sweep)
    # SVG cannot draw a full turn in one segment
    n = max(1, math.ceil(abs(sw) / math.pi))
    parts = [f"M {_f(cx + r * math.cos(a0))} {_f(cy + r * math.sin(a0))}"]
    for k in range(1, n + 1):
        a = a0 + sw * k / n
        large = 1 if abs(sw / n) > math.pi else 0
        sweep_flag = 1 if sw > 0 else 0
        parts.append(f"A {_f(r)} {_f(r)} 0 {large} {sweep_flag} {_f(cx + r * math.cos(a))} {_f(cy + r * math.sin(a))}")
    return " ".join(parts)


def render_svg(sketch: Sketch, annotations: RenderAnnotations = RenderAnnotations(),
               cfg: PipelineConfig = PipelineConfig(), analysis: Optional[Analysis] = None) -> str:
    box = bounding_box(sketch)
    diag = box.diagonal or 1.0
    pad = 0.05 * diag
    if annotations.descriptors:
        pad += cfg.radius_frac * diag
    x0, y0 = box.min_x - pad, box.min_y - pad
    w, h = box.max_x - box.min_x + 2 * pad, box.max_y - box.min_y + 2 * pad
    sw = 0.004 * diag
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{_f(x0)} {_f(y0)} {_f(w)} {_f(h)}" '
        f'width="{_f(600 * w / max(w, h))}" height="{_f(600 * h / max(w, h))}">',
    ]
    if sketch.label is not None:
        out.append(f"<title>{_escape(sketch.label)}</title>")
    out.append('<g id="strokes" fill="none" stroke="#000000" stroke-opacity="0.35" '
               f'stroke-width="{_f(sw)}" stroke-linecap="round" stroke-linejoin="round">')
    for s in sketch.strokes:
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in s.xy)
        out.append(f'<polyline class="stroke" data-index="{s.index}" points="{pts}"/>')
    out.append("</g>")

    if annotations.any:
        a = analysis or analyze(sketch, cfg)
        if annotations.primitives:
            out.append(f'<g id="primitives" fill="none" stroke-width="{_f(1.5 * sw)}">')
            for p in a.segmentation.primitives:
                color = PRIMITIVE_COLORS[p.kind]
                if p.kind == "line":
                    out.append(f'<line class="primitive line" data-id="{p.id}" x1="{_f(p.start[0])}" '
                               f'y1="{_f(p.start[1])}" x2="{_f(p.end[0])}" y2="{_f(p.end[1])}" stroke="{color}"/>')
                else:
                    out.append(f'<path class="primitive arc" data-id="{p.id}" d="{_arc_path(p)}" stroke="{color}"/>')
            out.append("</g>")
        if annotations.descriptors:
            out.append(f'<g id="descriptors" fill="none" stroke="#2ca02c" stroke-width="{_f(0.5 * sw)}">')
            for d in a.descriptors:
                cx, cy = d.anchor
                out.append(f'<g class="descriptor" data-sign="{d.enumeration_sign}" '
                           f'data-axis="{_f(d.axis_angle)}">')
                out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(d.radius)}"/>')
                for j in range(16):
                    t = math.radians(d.axis_angle + 11.25 + 22.5 * j)
                    out.append(f'<line x1="{_f(cx)}" y1="{_f(cy)}" x2="{_f(cx + d.radius * math.cos(t))}" '
                               f'y2="{_f(cy + d.radius * math.sin(t))}"/>')
                t = math.radians(d.axis_angle)
                out.append(f'<line class="axis" stroke-dasharray="{_f(2 * sw)}" x1="{_f(cx)}" y1="{_f(cy)}" '
                           f'x2="{_f(cx + d.radius * math.cos(t))}" y2="{_f(cy + d.radius * math.sin(t))}"/>')
                out.append("</g>")
            out.append("</g>")
        if annotations.char_points:
            out.append('<g id="char-points" fill="#ff7f0e">')
            for c in a.segmentation.char_points:
                kinds = " ".join(sorted(k.value for k in c.kinds))
                out.append(f'<circle class="char-point" data-kinds={quoteattr(kinds)} cx="{_f(c.position[0])}" '
                           f'cy="{_f(c.position[1])}" r="{_f(1.5 * sw)}"/>')
            out.append("</g>")
        if annotations.interest_points:
            out.append(f'<g id="interest-points" fill="none" stroke="#9467bd" stroke-width="{_f(sw)}">')
            for ip in a.interest_points:
                out.append(f'<circle class="interest-point" cx="{_f(ip.position[0])}" '
                           f'cy="{_f(ip.position[1])}" r="{_f(3 * sw)}"/>')
            out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
