"""Sketch -> segmentation -> interest points -> descriptors."""
from __future__ import annotations

from dataclasses import dataclass

from .config import PipelineConfig
from .descriptor import Descriptor, describe
from .ink import Sketch
from .interest import InterestPoint, interest_points
from .segmentation import Segmentation, segment


@dataclass(frozen=True)
class Analysis:
    segmentation: Segmentation
    interest_points: tuple[InterestPoint, ...]
    descriptors: tuple[Descriptor, ...]


def analyze(sketch: Sketch, cfg: PipelineConfig = PipelineConfig()) -> Analysis:
    seg = segment(sketch, cfg)
    ips = interest_points(seg, cfg)
    return Analysis(seg, tuple(ips), tuple(describe(seg, ips, cfg)))


def sketch_descriptors(sketch: Sketch, cfg: PipelineConfig = PipelineConfig()) -> list[Descriptor]:
    return list(analyze(sketch, cfg).descriptors)
