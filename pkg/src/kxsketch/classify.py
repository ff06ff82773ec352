"""Sketch-level dissimilarity, nearest-reference classification and rate tables."""
from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import PipelineConfig
from .descriptor import Descriptor, dumps_descriptors, loads_descriptors
from .dissimilarity import kx_matrix
from .ink import Sketch
from .patterns import CLASSES
from .pipeline import sketch_descriptors

log = logging.getLogger(__name__)


class EmptyDescriptorList(ValueError):
    pass


def _padded_total(C: np.ndarray, rows, cols) -> float:
    matched = [float(C[r, c]) for r, c in zip(rows, cols)]
    n, m = C.shape
    return (math.fsum(matched) + abs(n - m) * max(matched)) / max(n, m)


def assignment_cost(C: np.ndarray) -> float:
    """Optimal one-to-one matching cost of a (possibly rectangular) cost matrix.

    Unmatched rows or columns each add the largest matched cost; the total
    is divided by the larger dimension. The matching minimises this padded
    total, not just the matched sum: for every candidate ceiling on the
    largest matched cost, the cheapest matching under that ceiling is found
    and the best padded total over all ceilings is kept. Sums use
    ``math.fsum`` so equal multisets of costs give equal totals.
    """
    C = np.asarray(C, dtype=float)
    n, m = C.shape
    rows, cols = linear_sum_assignment(C)
    best = _padded_total(C, rows, cols)
    if n == m:
        return best
    top = float(C[rows, cols].max())
    # no matching can have a smaller maximum than this bottleneck value
    floor = float(np.sort(C, axis=1)[:, 0].max() if n <= m else np.sort(C, axis=0)[0].max())
    for t in np.unique(C[(C >= floor) & (C < top)]):
        try:
            r, c = linear_sum_assignment(np.where(C <= t, C, np.inf))
        except ValueError:      # no complete matching under this ceiling
            continue
        best = min(best, _padded_total(C, r, c))
    return best


def shape_dissimilarity(A: Sequence[Descriptor], B: Sequence[Descriptor],
                        reenumerate_on_sign_mismatch: bool = False) -> float:
    if len(A) == 0 or len(B) == 0:
        raise EmptyDescriptorList("both descriptor lists must be non-empty")
    return assignment_cost(kx_matrix(A, B, reenumerate_on_sign_mismatch))


@dataclass
class ReferenceSet:
    entries: list[tuple[str, str, list[Descriptor]]] = field(default_factory=list)

    def __post_init__(self):
        for cls_name, ref_id, descs in self.entries:
            if not descs:
                raise EmptyDescriptorList(f"reference {ref_id!r} of class {cls_name!r} has no descriptors")
        ids = [e[1] for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("reference ids must be unique")

    @property
    def classes(self) -> list[str]:
        return sorted({e[0] for e in self.entries})

    def per_class(self) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        for c, _, _ in self.entries:
            out[c] += 1
        return dict(out)

    def add(self, class_name: str, ref_id: str, descriptors: Sequence[Descriptor]) -> None:
        if not descriptors:
            raise EmptyDescriptorList(f"reference {ref_id!r} has no descriptors")
        if any(e[1] == ref_id for e in self.entries):
            raise ValueError(f"duplicate reference id {ref_id!r}")
        self.entries.append((class_name, ref_id, list(descriptors)))

    def dumps(self) -> str:
        recs = [d.to_record(**{"class": c, "ref": r}) for c, r, descs in self.entries for d in descs]
        return dumps_descriptors(recs)

    @classmethod
    def loads(cls, text: str) -> "ReferenceSet":
        grouped: dict[str, tuple[str, list]] = {}
        for rec in loads_descriptors(text):
            try:
                cname, rid = rec["class"], rec["ref"]
            except KeyError:
                raise ValueError("reference record lacks 'class' or 'ref'") from None
            if rid in grouped and grouped[rid][0] != cname:
                raise ValueError(f"reference {rid!r} listed under two classes")
            grouped.setdefault(rid, (cname, []))[1].append(Descriptor.from_record(rec))
        if not grouped:
            raise ValueError("reference file is empty")
        return cls([(c, rid, ds) for rid, (c, ds) in grouped.items()])


@dataclass(frozen=True)
class ClassificationResult:
    predicted_class: str
    score: float
    per_reference_scores: dict
    class_scores: dict
    margin: float


def classify(descriptors: Sequence[Descriptor], refs: ReferenceSet,
             cfg: PipelineConfig = PipelineConfig()) -> ClassificationResult:
    if not descriptors:
        raise EmptyDescriptorList("sketch produced no descriptors")
    per_ref = {}
    class_scores: dict[str, float] = {}
    for cname, rid, rdescs in refs.entries:
        s = shape_dissimilarity(descriptors, rdescs, cfg.reenumerate_on_sign_mismatch)
        per_ref[rid] = s
        class_scores[cname] = min(s, class_scores.get(cname, math.inf))
    ranked = sorted(class_scores.items(), key=lambda kv: (kv[1], kv[0]))
    best, score = ranked[0]
    margin = ranked[1][1] - score if len(ranked) > 1 else math.inf
    return ClassificationResult(best, score, per_ref, class_scores, margin)


def classify_sketch(sketch: Sketch, refs: ReferenceSet,
                    cfg: PipelineConfig = PipelineConfig()) -> ClassificationResult:
    return classify(sketch_descriptors(sketch, cfg), refs, cfg)


def build_references(sketches: Iterable[tuple[str, str, Sketch]],
                     cfg: PipelineConfig = PipelineConfig()) -> ReferenceSet:
    refs = ReferenceSet()
    for cname, rid, sk in sketches:
        refs.add(cname, rid, sketch_descriptors(sk, cfg))
    return refs


# -- evaluation ---------------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    name: str
    user: str
    label: str
    predicted: Optional[str]
    score: float = math.nan
    margin: float = math.nan
    class_scores: tuple = ()
    error: Optional[str] = None

    @property
    def correct(self) -> bool:
        return self.predicted == self.label


def _class_order(names: Iterable[str]) -> list[str]:
    names = set(names)
    return [c for c in CLASSES if c in names] + sorted(names - set(CLASSES))


@dataclass
class RatesTable:
    counts: dict = field(default_factory=dict)   # (user, class) -> [correct, total]

    def add(self, user: str, label: str, correct: bool) -> None:
        cell = self.counts.setdefault((user, label), [0, 0])
        cell[0] += int(correct)
        cell[1] += 1

    def merge(self, other: "RatesTable") -> None:
        for key, (c, t) in other.counts.items():
            cell = self.counts.setdefault(key, [0, 0])
            cell[0] += c
            cell[1] += t

    @property
    def users(self) -> list[str]:
        return sorted({u for u, _ in self.counts})

    @property
    def classes(self) -> list[str]:
        return _class_order(c for _, c in self.counts)

    def _rate(self, keys) -> float:
        c = sum(self.counts[k][0] for k in keys)
        t = sum(self.counts[k][1] for k in keys)
        return c / t if t else math.nan

    def rate(self, user: str, cls: str) -> float:
        return self._rate([(user, cls)] if (user, cls) in self.counts else [])

    def user_rate(self, user: str) -> float:
        return self._rate([k for k in self.counts if k[0] == user])

    def class_rate(self, cls: str) -> float:
        return self._rate([k for k in self.counts if k[1] == cls])

    def overall(self) -> float:
        return self._rate(list(self.counts))

    def total(self) -> int:
        return sum(t for _, t in self.counts.values())


def _pct(x: float) -> str:
    return "" if math.isnan(x) else f"{100 * x:.2f}"


def rates_csv(table: RatesTable, modality: str, baseline: Optional[RatesTable] = None,
              baseline_modality: str = "baseline") -> str:
    """Per-user table followed by a per-class summary block."""
    classes = table.classes if baseline is None else _class_order(table.classes + baseline.classes)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["user", *classes, "global"])
    for u in table.users:
        w.writerow([u, *(_pct(table.rate(u, c)) for c in classes), _pct(table.user_rate(u))])
    w.writerow([])
    w.writerow(["modality", *classes, "global"])
    if baseline is not None:
        w.writerow([baseline_modality, *(_pct(baseline.class_rate(c)) for c in classes),
                    _pct(baseline.overall())])
    w.writerow([modality, *(_pct(table.class_rate(c)) for c in classes), _pct(table.overall())])
    if baseline is not None:
        def diff(a, b):
            return "" if math.isnan(a) or math.isnan(b) else f"{100 * (a - b):+.2f}"
        w.writerow(["progression", *(diff(table.class_rate(c), baseline.class_rate(c)) for c in classes),
                    diff(table.overall(), baseline.overall())])
    return buf.getvalue()


def predictions_csv(preds: Sequence[Prediction], classes: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "user", "label", "predicted", "correct", "score", "margin",
                *(f"d_{c}" for c in classes), "error"])
    for p in preds:
        cs = dict(p.class_scores)
        w.writerow([p.name, p.user, p.label, p.predicted or "", int(p.correct), repr(p.score), repr(p.margin),
                    *(repr(cs[c]) if c in cs else "" for c in classes), p.error or ""])
    return buf.getvalue()


def modality_name(refs: ReferenceSet) -> str:
    counts = set(refs.per_class().values())
    if counts == {1}:
        return "single pattern per class"
    return f"{max(counts)} patterns per class (max)" if len(counts) > 1 else f"{counts.pop()} patterns per class"


def predict_one(item: tuple[str, Sketch], refs: ReferenceSet, cfg: PipelineConfig) -> Prediction:
    name, sk = item
    user = sk.user_id or ""
    label = sk.label or ""
    try:
        res = classify_sketch(sk, refs, cfg)
    except ValueError as e:
        log.warning("%s: %s", name, e)
        return Prediction(name, user, label, None, error=f"{type(e).__name__}: {e}")
    return Prediction(name, user, label, res.predicted_class, res.score, res.margin,
                      tuple(sorted(res.class_scores.items())))


def _predict_chunk(args):
    items, refs, cfg = args
    return [predict_one(it, refs, cfg) for it in items]


def predict_all(items: Sequence[tuple[str, Sketch]], refs: ReferenceSet,
                cfg: PipelineConfig = PipelineConfig(), jobs: int = 1) -> list[Prediction]:
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [predict_one(it, refs, cfg) for it in items]
    chunks = [items[k::jobs] for k in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        parts = list(ex.map(_predict_chunk, [(c, refs, cfg) for c in chunks]))
    out: list[Optional[Prediction]] = [None] * len(items)
    for k, part in enumerate(parts):
        for j, p in enumerate(part):
            out[k + j * jobs] = p
    return out


def tally(preds: Iterable[Prediction]) -> RatesTable:
    table = RatesTable()
    for p in preds:
        table.add(p.user, p.label, p.correct)
    return table


def evaluate(dataset: Sequence[Sketch], refs: ReferenceSet, cfg: PipelineConfig = PipelineConfig(),
             jobs: int = 1) -> RatesTable:
    """Classify every labelled sketch; failures count as misclassifications."""
    for sk in dataset:
        if sk.label is None or sk.user_id is None:
            raise ValueError("every sketch needs a label and a user")
    items = [(f"{i}", sk) for i, sk in enumerate(dataset)]
    return tally(predict_all(items, refs, cfg, jobs))
