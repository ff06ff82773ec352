import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kxsketch.ink import bounding_box
from kxsketch.patterns import (CANONICAL_ANGLES, CLASSES, PatternSpec, SynthSpec, closure_residual,
                               edge_headings, interior_angles_of, pattern_sketch, perfect_pattern,
                               polygon_vertices, synth_sketch, synthetic_suite)


def _closing_gap(sk):
    xy = sk.all_xy()
    return float(np.hypot(*(xy[-1] - xy[0])))


@pytest.mark.parametrize("name", CLASSES)
def test_vertex_angles_are_canonical(name):
    v = polygon_vertices(PatternSpec(name, rotation=33.0))
    assert sorted(interior_angles_of(v)) == pytest.approx(sorted(CANONICAL_ANGLES[name]), abs=1e-9)
    assert len(v) == len(CANONICAL_ANGLES[name])


def test_square_and_parallelogram_have_equal_edges():
    for name in ("square", "parallelogram"):
        v = polygon_vertices(PatternSpec(name, scale=10.0))
        edges = np.hypot(*(np.roll(v, -1, axis=0) - v).T)
        assert edges == pytest.approx(np.full(4, 10.0), abs=1e-12)


def test_edge_headings_square():
    assert edge_headings([90, 90, 90, 90]).tolist() == [0, 90, 180, 270]


@pytest.mark.parametrize("name", CLASSES)
@pytest.mark.parametrize("scale", [0.5, 1.0, 100.0, 1e4])
def test_closure_residual_tiny(name, scale):
    spec = PatternSpec(name, scale=scale)
    assert closure_residual(spec) < 1e-9 * scale
    sk = pattern_sketch(spec)
    assert _closing_gap(sk) < 1e-9 * scale


@pytest.mark.parametrize("name", CLASSES)
def test_perfect_pattern_shape(name):
    sk = perfect_pattern(name, scale=50.0)
    assert len(sk.strokes) == 1
    assert sk.label == name
    st_ = sk.strokes[0]
    steps = np.hypot(*np.diff(st_.xy, axis=0).T)
    assert steps.max() <= 50.0 / 50 + 1e-9
    assert np.all(np.diff(st_.t) > 0)


def test_vertices_centred_and_rotated():
    a = polygon_vertices(PatternSpec("pentagon", rotation=0.0))
    b = polygon_vertices(PatternSpec("pentagon", rotation=90.0))
    assert a.mean(axis=0) == pytest.approx([0, 0], abs=1e-12)
    assert b == pytest.approx(np.column_stack([-a[:, 1], a[:, 0]]), abs=1e-12)


def test_zero_jitter_is_the_perfect_pattern():
    spec = PatternSpec("hexagon", scale=20.0, rotation=10.0)
    a = synth_sketch(SynthSpec(spec), seed=5)
    b = pattern_sketch(spec)
    assert a.strokes == b.strokes


@pytest.mark.parametrize("split", [(0,), (0, 2), (0, 1, 2, 3)])
def test_splits_give_separate_strokes(split):
    sk = synth_sketch(SynthSpec(PatternSpec("square"), 0.01, split), seed=3)
    expected = len(split) + (0 if 3 in split else 1)
    assert len(sk.strokes) == expected
    # consecutive strokes meet where the pen was lifted
    for s0, s1 in zip(sk.strokes, sk.strokes[1:]):
        assert s0.xy[-1] == pytest.approx(s1.xy[0], abs=1e-12)
        assert s1.t[0] > s0.t[-1]
    assert _closing_gap(sk) < 1e-9 * 100


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(CLASSES), st.floats(0.001, 0.0499), st.integers(0, 2**31 - 1))
def test_jitter_bounded_and_deterministic(name, jitter, seed):
    spec = PatternSpec(name, scale=10.0)
    a = synth_sketch(SynthSpec(spec, jitter), seed=seed)
    b = synth_sketch(SynthSpec(spec, jitter), seed=seed)
    assert a.strokes == b.strokes
    base = pattern_sketch(spec).all_xy()
    disp = np.hypot(*(a.all_xy() - base).T)
    assert disp.max() <= jitter * 10.0 * (1 + 1e-12)


def test_suite_is_deterministic_and_varied():
    a = synthetic_suite(seed=4, per_class=4)
    b = synthetic_suite(seed=4, per_class=4)
    assert len(a) == 20
    assert all(x.strokes == y.strokes and x.label == y.label for x, y in zip(a, b))
    assert {s.label for s in a} == set(CLASSES)
    diags = [bounding_box(s).diagonal for s in a]
    assert max(diags) / min(diags) > 3
    assert any(len(s.strokes) > 1 for s in a)
    c = synthetic_suite(seed=5, per_class=4)
    assert any(x.strokes != y.strokes for x, y in zip(a, c))


@pytest.mark.parametrize("kwargs", [
    dict(class_name="circle"),
    dict(class_name="x", interior_angles=(90, 90)),
    dict(class_name="x", interior_angles=(90, 90, 90)),
    dict(class_name="square", scale=0.0),
    dict(class_name="square", sampling_step=-1.0),
])
def test_pattern_spec_validation(kwargs):
    with pytest.raises(ValueError):
        PatternSpec(**kwargs)


@pytest.mark.parametrize("kwargs", [dict(jitter=0.05), dict(jitter=-0.01), dict(stroke_split=(4,))])
def test_synth_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SynthSpec(PatternSpec("square"), **kwargs)


def test_custom_angles_close():
    spec = PatternSpec("kite", interior_angles=(60.0, 120.0, 60.0, 120.0), scale=3.0)
    assert closure_residual(spec) < 1e-9 * 3.0
    assert sorted(interior_angles_of(polygon_vertices(spec))) == pytest.approx([60, 60, 120, 120])
    assert math.isclose(sum(spec.interior_angles), 360.0)
