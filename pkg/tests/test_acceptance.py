"""End-to-end acceptance checks; each prints one PASS/FAIL line."""
import math
import os
from pathlib import Path

import numpy as np
import pytest

from conftest import random_bins
from oracles import brute_assignment, naive_kx
from kxsketch.classify import build_references, classify_sketch, shape_dissimilarity
from kxsketch.cli import main
from kxsketch.descriptor import AXIS_TOL, Descriptor
from kxsketch.dissimilarity import kx_distance, kx_matrix, reenumerate
from kxsketch.ink import (DegenerateStroke, EmptyInk, MalformedDocument, NonMonotoneTime, Sketch, Stroke,
                          parse_ink, rigid)
from kxsketch.patterns import CANONICAL_ANGLES, CLASSES, PatternSpec, closure_residual, perfect_pattern, synthetic_suite
from kxsketch.pipeline import analyze

N0 = 16
MASS = 16 * N0


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def refs():
    return build_references([(c, c, perfect_pattern(c)) for c in CLASSES])


@pytest.fixture(scope="module")
def suite():
    s = synthetic_suite(seed=1, per_class=4, jitter_max=0.02)
    assert len(s) >= 18 and {x.label for x in s} == set(CLASSES)
    return s


def _predict(sketches, refs):
    return [classify_sketch(s, refs).predicted_class for s in sketches]


def test_criterion_1_synthetic_accuracy(capsys, refs, suite):
    preds = _predict(suite, refs)
    hits = sum(p == s.label for p, s in zip(preds, suite))
    report(capsys, 1, hits == len(suite), f"synthetic suite accuracy {hits}/{len(suite)}")


def test_criterion_2_kx_oracle(capsys):
    rng = np.random.default_rng(2024)
    bad = 0
    for _ in range(1000):
        u = random_bins(rng, rng.uniform(0, 0.9))
        v = random_bins(rng, rng.uniform(0, 0.9))
        res = kx_distance(u, v)
        best, rots = naive_kx(u, v)
        bad += not (res.distance == best and res.best_rotation in rots)
    report(capsys, 2, bad == 0, f"kx_distance vs brute force on 1000 pairs, {bad} mismatches")


def test_criterion_3_assignment_oracle(capsys):
    rng = np.random.default_rng(99)
    bad = trials = 0
    for _ in range(250):
        n, m = (int(x) for x in rng.integers(1, 7, size=2))
        A = [Descriptor(random_bins(rng), (0, 0), 0.0, 1, 1.0) for _ in range(n)]
        B = [Descriptor(random_bins(rng), (0, 0), 0.0, 1, 1.0) for _ in range(m)]
        bad += shape_dissimilarity(A, B) != brute_assignment(kx_matrix(A, B))
        trials += 1
    report(capsys, 3, bad == 0, f"assignment vs exhaustive permutations, {trials} trials, {bad} mismatches")


def _matched(a, b, tf):
    out = []
    for da in a.descriptors:
        pos = tf(np.array([da.anchor]))[0]
        out.append((da, min(b.descriptors, key=lambda d: math.dist(d.anchor, pos))))
    return out


def test_criterion_4a_scale(capsys, suite):
    worst = 0.0
    for sk in suite:
        a = analyze(sk)
        for s in (0.5, 2.0, 10.0):
            tf = lambda xy, s=s: xy * s
            b = analyze(sk.map_xy(tf))
            if len(b.descriptors) != len(a.descriptors):
                worst = math.inf
                continue
            for da, db in _matched(a, b, tf):
                worst = max(worst, float(np.abs(da.bins - db.bins).max()) / MASS)
    report(capsys, "4a", worst <= 1e-6, f"scale x0.5/2/10, largest bin change {worst:.3g} of total mass")


def test_criterion_4b_rotation(capsys, refs, suite):
    base = _predict(suite, refs)
    changed = 0
    for k in range(1, 16):
        rot = [s.map_xy(lambda xy, k=k: rigid(xy, 22.5 * k)) for s in suite]
        changed += sum(p != q for p, q in zip(base, _predict(rot, refs)))
    report(capsys, "4b", changed == 0, f"rotation by k*22.5 deg, k=1..15: {changed} predictions changed")


def _retime(sk):
    T = sk.strokes[-1].t[-1] + 1.0
    strokes = [Stroke(st.xy, 3.0 * st.t + 0.9 * T / math.pi * np.sin(math.pi * st.t / T) + 17.0, st.index)
               for st in sk.strokes]
    return Sketch(tuple(strokes), sk.label, sk.user_id)


def test_criterion_4c_retiming(capsys, suite):
    worst = 0.0
    for sk in suite:
        a, b = analyze(sk), analyze(_retime(sk))
        if len(a.descriptors) != len(b.descriptors):
            worst = math.inf
            continue
        for da, db in zip(a.descriptors, b.descriptors):
            worst = max(worst, float(np.abs(da.bins - db.bins).max()))
    report(capsys, "4c", worst <= 1e-9, f"re-timing, largest bin change {worst:.3g}")


def _mirror_symmetric(bins):
    r = reenumerate(bins)
    return any(np.array_equal(np.roll(r, k), bins) for k in range(16))


def test_criterion_4d_reflection(capsys, refs, suite):
    tf = lambda xy: xy * [1.0, -1.0]
    not_flipped = aligned = total = 0
    for sk in suite:
        a, b = analyze(sk), analyze(sk.map_xy(tf))
        for da, db in _matched(a, b, tf):
            total += 1
            if min(abs(da.raw_axis), abs(abs(da.raw_axis) - 90)) <= AXIS_TOL:
                # no slope to flip; the numbering direction is immaterial only if the bins are their own mirror
                aligned += 1
                not_flipped += not _mirror_symmetric(da.bins)
            else:
                not_flipped += db.enumeration_sign != -da.enumeration_sign
    mirrored = [s.map_xy(tf) for s in suite]
    changed = sum(p != q for p, q in zip(_predict(suite, refs), _predict(mirrored, refs)))
    ok = not_flipped == 0 and changed == 0
    report(capsys, "4d", ok, f"reflection: {total - aligned}/{total} signs flipped, {aligned} horizontal or "
                             f"vertical axes with mirror-symmetric bins, {not_flipped} violations, "
                             f"{changed} predictions changed")


def test_criterion_5_structure(capsys, suite):
    problems = []
    for name in CLASSES:
        n = len(CANONICAL_ANGLES[name])
        for scale in (1.0, 100.0, 5000.0):
            got = len(analyze(perfect_pattern(name, scale=scale)).interest_points)
            if got != n:
                problems.append(f"{name}@{scale}: {got} interest points")
            if not closure_residual(PatternSpec(name, scale=scale)) < 1e-9 * scale:
                problems.append(f"{name}@{scale}: closure")
    worst = 0.0
    for sk in suite + [perfect_pattern(c) for c in CLASSES]:
        for d in analyze(sk).descriptors:
            worst = max(worst, abs(d.bins.sum() - MASS))
    if worst > 1e-9:
        problems.append(f"mass off by {worst:.3g}")
    report(capsys, 5, not problems, "interest-point counts, closure, mass budget" +
           (": " + "; ".join(problems) if problems else f" (mass error {worst:.3g})"))


def test_criterion_6_paper_scale_dataset(capsys, tmp_path):
    root = os.environ.get("KXSKETCH_HHRECO_DIR")
    if not root or not Path(root).is_dir():
        with capsys.disabled():
            print("\ncriterion 6: NOT REPRODUCIBLE - HHreco dataset absent; set KXSKETCH_HHRECO_DIR to run it")
        pytest.skip("HHreco dataset absent")
    refs_dir = tmp_path / "refs"
    assert main(["gen-patterns", str(refs_dir)]) == 0
    rc = main(["evaluate", root, str(refs_dir / "refs.jsonl"), str(tmp_path / "rates.csv"), "--jobs", "4"])
    report(capsys, 6, rc == 0, "evaluation over the full dataset ran to completion (rates recorded, not asserted)")


DEGENERATE = [
    ("empty bytes", b"", MalformedDocument),
    ("whitespace only", b"  \n\n", MalformedDocument),
    ("header only", b'{"label": "square"}\n', EmptyInk),
    ("single-point stroke", b'{"stroke": 0, "points": [[0, 0, 0]]}\n', EmptyInk),
    ("zero-point stroke", b'{"stroke": 0, "points": []}\n', EmptyInk),
    ("all coincident", b'{"stroke": 0, "points": [[1, 1, 0], [1, 1, 1], [1, 1, 2]]}\n', DegenerateStroke),
    ("zero-length stroke", b'{"stroke": 0, "points": [[3, 4, 0], [3, 4, 0]]}\n', DegenerateStroke),
    ("time goes back", b'{"stroke": 0, "points": [[0, 0, 5], [1, 0, 4]]}\n', NonMonotoneTime),
    ("nan coordinate", b'{"stroke": 0, "points": [[NaN, 0, 0], [1, 0, 1]]}\n', MalformedDocument),
    ("not json", b"{stroke\n", MalformedDocument),
]


def test_criterion_7_degenerate_inputs(capsys):
    wrong = []
    for name, data, err in DEGENERATE:
        try:
            parse_ink(data)
            wrong.append(f"{name}: accepted")
        except err:
            pass
        except Exception as e:  # noqa: BLE001 - any other exception is a failure of this criterion
            wrong.append(f"{name}: {type(e).__name__}")
    try:
        Sketch(())
        wrong.append("no strokes: accepted")
    except EmptyInk:
        pass
    report(capsys, 7, not wrong, f"{len(DEGENERATE) + 1} degenerate inputs raise their documented errors" +
           (": " + "; ".join(wrong) if wrong else ""))
