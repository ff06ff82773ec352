import csv
import io
import os
import subprocess
import sys

import pytest

from kxsketch.classify import ReferenceSet, tally, Prediction
from kxsketch.cli import load_dataset, main
from kxsketch.ink import read_ink, rigid, write_ink
from kxsketch.patterns import CLASSES, perfect_pattern


@pytest.fixture(scope="module")
def pattern_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("patterns")
    assert main(["gen-patterns", str(d)]) == 0
    return d


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    assert main(["gen-synthetic", str(d), "--per-class", "3", "--seed", "2"]) == 0
    return d


def test_gen_patterns_files(pattern_dir):
    names = sorted(p.name for p in pattern_dir.iterdir())
    assert names == sorted([f"{c}.ink" for c in CLASSES] + ["refs.jsonl"])
    refs = ReferenceSet.loads((pattern_dir / "refs.jsonl").read_text())
    assert refs.classes == sorted(CLASSES)
    assert read_ink(pattern_dir / "square.ink").label == "square"


def test_gen_patterns_is_byte_identical(pattern_dir, tmp_path):
    assert main(["gen-patterns", str(tmp_path)]) == 0
    for p in pattern_dir.iterdir():
        assert (tmp_path / p.name).read_bytes() == p.read_bytes()


def test_unwritable_output_fails(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["gen-patterns", str(blocker / "sub")]) != 0
    assert "error" in capsys.readouterr().err


def test_empty_ink_file_fails(tmp_path, pattern_dir, capsys):
    p = tmp_path / "empty.ink"
    p.write_bytes(b"")
    assert main(["classify", str(p), str(pattern_dir / "refs.jsonl")]) != 0
    assert "MalformedDocument" in capsys.readouterr().err


def test_missing_file_fails(tmp_path, pattern_dir, capsys):
    assert main(["classify", str(tmp_path / "nope.ink"), str(pattern_dir / "refs.jsonl")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_classify_square(pattern_dir, capsys):
    assert main(["classify", str(pattern_dir / "square.ink"), str(pattern_dir / "refs.jsonl")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "predicted: square"
    assert out[1] == "score: 0"


def test_classify_rotated_pentagon(pattern_dir, tmp_path, capsys):
    sk = perfect_pattern("pentagon", scale=7.0).map_xy(lambda xy: rigid(xy, 45.0, offset=(3, -2)))
    p = tmp_path / "p.ink"
    write_ink(sk, p)
    assert main(["classify", str(p), str(pattern_dir / "refs.jsonl")]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "predicted: pentagon"


def test_dataset_layout(synth_dir):
    items, failed = load_dataset(synth_dir)
    assert not failed
    assert len(items) == 15
    for name, sk in items:
        user, label, fname = name.split(os.sep)
        assert (sk.user_id, sk.label) == (user, label)
        assert fname.startswith(label)


def test_evaluate_synthetic_tree(synth_dir, pattern_dir, tmp_path, capsys):
    out = tmp_path / "rates.csv"
    preds = tmp_path / "preds.csv"
    rc = main(["evaluate", str(synth_dir), str(pattern_dir / "refs.jsonl"), str(out), "--predictions", str(preds)])
    assert rc == 0
    assert "overall 100.00%" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert lines[0] == "user," + ",".join(CLASSES) + ",global"
    assert lines[1] == "synthetic," + ",".join(["100.00"] * 6)
    assert lines[2] == ""
    assert lines[4].startswith("single pattern per class,")
    rows = list(csv.DictReader(io.StringIO(preds.read_text())))
    table = tally(Prediction(r["name"], r["user"], r["label"], r["predicted"] or None) for r in rows)
    assert table.overall() == sum(r["correct"] == "1" for r in rows) / len(rows) == 1.0


def test_evaluate_counts_unreadable_files(synth_dir, pattern_dir, tmp_path, capsys):
    import shutil
    d = tmp_path / "ds"
    shutil.copytree(synth_dir, d)
    (d / "synthetic" / "square" / "broken.ink").write_text("{not json\n")
    out = tmp_path / "rates.csv"
    assert main(["evaluate", str(d), str(pattern_dir / "refs.jsonl"), str(out)]) == 0
    assert "(1 failed)" in capsys.readouterr().out
    assert out.read_text().splitlines()[1].split(",")[-1] == f"{100 * 15 / 16:.2f}"


def test_multi_reference_modality(synth_dir, pattern_dir, tmp_path):
    refs = tmp_path / "refs2.jsonl"
    inks = [str(pattern_dir / f"{c}.ink") for c in CLASSES]
    rotated = []
    for c in CLASSES:
        sk = read_ink(pattern_dir / f"{c}.ink").map_xy(lambda xy: rigid(xy, 10.0))
        p = tmp_path / f"{c}_rot.ink"
        write_ink(sk, p)
        rotated.append(str(p))
    assert main(["build-refs", str(refs), *inks, *rotated]) == 0
    out = tmp_path / "rates.csv"
    assert main(["evaluate", str(synth_dir), str(refs), str(out),
                 "--baseline-refs", str(pattern_dir / "refs.jsonl")]) == 0
    lines = out.read_text().splitlines()
    assert lines[-3].startswith("single pattern per class,")
    assert lines[-2].startswith("2 patterns per class,")
    assert lines[-1] == "progression," + ",".join(["+0.00"] * 6)


def test_evaluate_missing_dir(tmp_path, pattern_dir):
    assert main(["evaluate", str(tmp_path / "none"), str(pattern_dir / "refs.jsonl"), str(tmp_path / "o.csv")]) == 1


def test_dump_config_round_trip(tmp_path):
    a = tmp_path / "a.cfg"
    b = tmp_path / "b.cfg"
    assert main(["dump-config", str(a), "--set", "radius_frac=0.25"]) == 0
    assert main(["dump-config", str(b), "--config", str(a)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "radius_frac = 0.25" in a.read_text()


def test_unknown_config_key_fails(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("bogus = 1\n")
    assert main(["dump-config", "--config", str(cfg)]) == 1
    assert "bogus" in capsys.readouterr().err


def test_bad_jobs(pattern_dir, tmp_path):
    assert main(["evaluate", str(tmp_path), str(pattern_dir / "refs.jsonl"), str(tmp_path / "o"), "--jobs", "0"]) == 2


def test_render_and_segment(pattern_dir, tmp_path, capsys):
    svg = tmp_path / "s.svg"
    assert main(["render", str(pattern_dir / "square.ink"), str(svg), "--all"]) == 0
    assert svg.read_text().startswith("<?xml")
    assert main(["segment", str(pattern_dir / "square.ink")]) == 0
    assert capsys.readouterr().out.strip()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "kxsketch", "--version"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.startswith("kxsketch ")
