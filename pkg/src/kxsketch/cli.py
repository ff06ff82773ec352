"""Command line interface: ``kxsketch <command> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from ._accel import backend
from .classify import (Prediction, ReferenceSet, build_references, classify_sketch, modality_name,
                       predict_all, predictions_csv, rates_csv, tally)
from .config import ConfigError, PipelineConfig, load_config
from .ink import InkError, read_ink, write_ink
from .patterns import CLASSES, perfect_pattern, synthetic_suite
from .render import RenderAnnotations, render_svg
from .segmentation import dump_records, segment

log = logging.getLogger("kxsketch")


class CliError(Exception):
    pass


def _overrides(pairs) -> dict[str, str]:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise CliError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _cfg(args) -> PipelineConfig:
    return load_config(args.config, _overrides(args.set))


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise CliError(f"cannot write {path}: {e.strerror or e}") from None


def _read_refs(path) -> ReferenceSet:
    try:
        with open(path, encoding="utf-8") as fh:
            return ReferenceSet.loads(fh.read())
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror or e}") from None
    except ValueError as e:
        raise CliError(f"{path}: {e}") from None


def _read_ink(path):
    try:
        return read_ink(path)
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror or e}") from None


# -- commands -------------------------------------------------------------------

def cmd_gen_patterns(args) -> int:
    cfg = _cfg(args)
    out = Path(args.out_dir)
    sketches = []
    for name in CLASSES:
        sk = perfect_pattern(name, scale=args.scale)
        path = out / f"{name}.ink"
        try:
            out.mkdir(parents=True, exist_ok=True)
            write_ink(sk, path)
        except OSError as e:
            raise CliError(f"cannot write {path}: {e.strerror or e}") from None
        sketches.append((name, name, sk))
    refs = build_references(sketches, cfg)
    _write(out / "refs.jsonl", refs.dumps())
    print(f"wrote {len(sketches)} patterns and {out / 'refs.jsonl'}")
    return 0


def cmd_gen_synthetic(args) -> int:
    out = Path(args.out_dir)
    suite = synthetic_suite(seed=args.seed, per_class=args.per_class, jitter_max=args.jitter_max)
    counts: dict[str, int] = {}
    for sk in suite:
        k = counts.get(sk.label, 0)
        counts[sk.label] = k + 1
        path = out / (sk.user_id or "synthetic") / sk.label / f"{sk.label}_{k:03d}.ink"
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            write_ink(sk, path)
        except OSError as e:
            raise CliError(f"cannot write {path}: {e.strerror or e}") from None
    print(f"wrote {len(suite)} synthetic sketches under {out}")
    return 0


def cmd_build_refs(args) -> int:
    cfg = _cfg(args)
    items = []
    for p in args.inks:
        sk = _read_ink(p)
        if not sk.label:
            raise CliError(f"{p}: reference ink needs a label header")
        items.append((sk.label, Path(p).stem, sk))
    refs = build_references(items, cfg)
    _write(Path(args.out), refs.dumps())
    print(f"wrote {len(items)} references ({modality_name(refs)}) to {args.out}")
    return 0


def cmd_classify(args) -> int:
    cfg = _cfg(args)
    refs = _read_refs(args.refs)
    sk = _read_ink(args.ink)
    res = classify_sketch(sk, refs, cfg)
    print(f"predicted: {res.predicted_class}")
    print(f"score: {res.score:.6g}")
    print(f"margin: {res.margin:.6g}")
    print("reference scores:")
    classes = {rid: c for c, rid, _ in refs.entries}
    for rid, s in sorted(res.per_reference_scores.items(), key=lambda kv: (kv[1], kv[0])):
        print(f"  {classes[rid]:<14} {rid:<20} {s:.6g}")
    return 0


def load_dataset(root: Path) -> tuple[list, list[Prediction]]:
    """Read ``<user>/<class>/<name>.ink``; unreadable files become failed predictions."""
    items, failed = [], []
    for path in sorted(root.glob("*/*/*.ink")):
        user, label = path.parent.parent.name, path.parent.name
        name = str(path.relative_to(root))
        try:
            sk = read_ink(path)
        except (OSError, InkError) as e:
            log.warning("%s: %s", name, e)
            failed.append(Prediction(name, user, label, None, error=f"{type(e).__name__}: {e}"))
            continue
        items.append((name, type(sk)(sk.strokes, label=label, user_id=user)))
    return items, failed


def cmd_evaluate(args) -> int:
    cfg = _cfg(args)
    root = Path(args.dataset_dir)
    if not root.is_dir():
        raise CliError(f"dataset directory {root} does not exist")
    refs = _read_refs(args.refs)
    items, failed = load_dataset(root)
    if not items and not failed:
        raise CliError(f"no <user>/<class>/<name>.ink files under {root}")
    preds = failed + predict_all(items, refs, cfg, jobs=args.jobs)
    preds.sort(key=lambda p: p.name)
    table = tally(preds)
    baseline = base_name = None
    if args.baseline_refs:
        brefs = _read_refs(args.baseline_refs)
        bpreds = failed + predict_all(items, brefs, cfg, jobs=args.jobs)
        baseline, base_name = tally(bpreds), modality_name(brefs)
    _write(Path(args.out_csv), rates_csv(table, modality_name(refs), baseline, base_name or "baseline"))
    if args.predictions:
        _write(Path(args.predictions), predictions_csv(preds, sorted(set(refs.classes))))
    errors = sum(p.error is not None for p in preds)
    print(f"evaluated {table.total()} sketches ({errors} failed): overall {100 * table.overall():.2f}%")
    return 0


def _annotations(args) -> RenderAnnotations:
    if args.all:
        return RenderAnnotations.all()
    return RenderAnnotations(args.char_points, args.interest_points, args.primitives, args.descriptors)


def cmd_render(args) -> int:
    cfg = _cfg(args)
    sk = _read_ink(args.ink)
    _write(Path(args.out_svg), render_svg(sk, _annotations(args), cfg))
    return 0


def cmd_segment(args) -> int:
    cfg = _cfg(args)
    text = dump_records(segment(_read_ink(args.ink), cfg))
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_dump_config(args) -> int:
    text = _cfg(args).dumps()
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable; wins over --config)")
    common.add_argument("--seed", type=int, default=1, help="seed for generated data (default 1)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for evaluate")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="kxsketch", description=__doc__, parents=[common])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({backend()} kernels)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-patterns", parents=[common], help="write the 5 perfect patterns and their references")
    s.add_argument("out_dir")
    s.add_argument("--scale", type=float, default=100.0)
    s.set_defaults(func=cmd_gen_patterns)

    s = sub.add_parser("gen-synthetic", parents=[common], help="write a synthetic dataset tree")
    s.add_argument("out_dir")
    s.add_argument("--per-class", type=int, default=4)
    s.add_argument("--jitter-max", type=float, default=0.02)
    s.set_defaults(func=cmd_gen_synthetic)

    s = sub.add_parser("build-refs", parents=[common], help="build a reference file from labelled ink files")
    s.add_argument("out")
    s.add_argument("inks", nargs="+")
    s.set_defaults(func=cmd_build_refs)

    s = sub.add_parser("classify", parents=[common], help="classify one ink file")
    s.add_argument("ink")
    s.add_argument("refs")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("evaluate", parents=[common], help="rates table over <user>/<class>/<name>.ink")
    s.add_argument("dataset_dir")
    s.add_argument("refs")
    s.add_argument("out_csv")
    s.add_argument("--baseline-refs", help="second reference file; adds its rates and a progression row")
    s.add_argument("--predictions", help="also write per-sketch predictions and distances")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("render", parents=[common], help="render ink to SVG")
    s.add_argument("ink")
    s.add_argument("out_svg")
    s.add_argument("--char-points", action="store_true")
    s.add_argument("--interest-points", action="store_true")
    s.add_argument("--primitives", action="store_true")
    s.add_argument("--descriptors", action="store_true")
    s.add_argument("--all", action="store_true", help="enable every overlay")
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("segment", parents=[common], help="dump primitives and characteristic points")
    s.add_argument("ink")
    s.add_argument("out", nargs="?")
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("dump-config", parents=[common], help="print the effective configuration")
    s.add_argument("out", nargs="?")
    s.set_defaults(func=cmd_dump_config)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (CliError, ConfigError, InkError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
