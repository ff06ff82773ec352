"""Sketch recognition with KX-weighted circular descriptors."""
__version__ = "0.1.0"

from .config import ConfigError, PipelineConfig, load_config
from .ink import (DegenerateStroke, EmptyInk, InkError, MalformedDocument, NonMonotoneTime, Sketch,
                  Stroke, bounding_box, parse_ink, read_ink, serialize_ink, write_ink)
from .segmentation import CharacteristicPoint, Primitive, Segmentation, segment
from .interest import InterestPoint, interest_points
from .descriptor import Descriptor, EmptyNeighborhood, build_descriptor
from .dissimilarity import KxResult, kx_distance, kx_matrix
from .pipeline import Analysis, analyze, sketch_descriptors
from .classify import (ClassificationResult, EmptyDescriptorList, RatesTable, ReferenceSet,
                       build_references, classify, classify_sketch, shape_dissimilarity)
from .patterns import CLASSES, perfect_pattern, synthetic_suite
from .render import RenderAnnotations, render_svg
