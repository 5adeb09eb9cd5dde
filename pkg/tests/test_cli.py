import csv
import io
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from lpcrit.cli import main
from lpcrit.report import CSV_COLUMNS, SCHEMA_VERSION


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def test_verify_criterion_box():
    code, text = run("verify-criterion", "--t", "1.5707963", "--s", "1", "--p", "2", "--fn", "box:0:1")
    assert code == 0
    doc = json.loads(text)
    assert doc["schema_version"] == SCHEMA_VERSION and doc["verdict"] == "bounded"
    assert doc["certificate"]["bound"] == pytest.approx(6.425, rel=0.01)


@pytest.mark.parametrize("t,s", [("pi", "1"), ("0", "1"), ("3pi/2", "2")])
def test_verify_criterion_violated(t, s):
    code, text = run("verify-criterion", "--t", t, "--s", s, "--fn", "box:0:1")
    assert code == 2
    assert json.loads(text)["verdict"] == "violated"


def test_verify_criterion_from_norms():
    code, text = run("verify-criterion", "--t", "1", "--s", "1", "--shift-norm", "1", "--sine-norm", "0.5")
    assert code == 0
    assert json.loads(text)["certificate"]["bound"] > 0


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-criterion", "--t", "1", "--s", "1"],
        ["verify-criterion", "--t", "abc", "--s", "1", "--fn", "box:0:1"],
        ["verify-criterion", "--t", "1", "--s", "1", "--p", "0.5", "--fn", "box:0:1"],
        ["counterexample", "--kind", "lattice_nd", "--n", "2", "--gamma", "0.6"],
        ["counterexample", "--kind", "nope"],
        ["counterexample", "--kind", "one_d_pi", "--format", "pdf", "--out-dir", "x"],
        ["trig-decomp", "--b", "1.5,0"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(argv):
    assert run(*argv)[0] == 64


def test_counterexample_outputs(tmp_path):
    out = tmp_path / "o"
    code, _ = run("counterexample", "--kind", "one_d_pi", "--p", "2", "--M", "1,3",
                  "--out-dir", str(out), "--format", "json,csv,svg")
    assert code == 3
    assert sorted(p.name for p in out.iterdir()) == ["mass.svg", "partial_sums.csv", "report.json", "sine_shift.svg"]
    doc = json.loads((out / "report.json").read_text())
    assert doc["schema_version"] == 1 and doc["report"]["trichotomy"]
    rows = list(csv.reader((out / "partial_sums.csv").read_text().splitlines()))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) - 1 == 544
    last = [float(v) for v in rows[-1][1:]]
    assert last[0] >= 3
    for name in ("mass.svg", "sine_shift.svg"):
        root = ET.fromstring((out / name).read_text())
        assert root.tag.endswith("svg")


def test_outputs_are_byte_identical(tmp_path):
    texts = []
    for i in range(2):
        out = tmp_path / str(i)
        run("counterexample", "--kind", "lattice_nd", "--n", "2", "--gamma", "0.7", "--p", "1",
            "--M", "5", "--out-dir", str(out), "--format", "json,csv,svg")
        texts.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert texts[0] == texts[1]


@pytest.mark.parametrize(
    "argv",
    [
        ["--kind", "t_zero", "--p", "2", "--M", "3"],
        ["--kind", "s_zero", "--p", "3", "--alpha", "0.2", "--t", "1"],
        ["--kind", "singleton_dependent", "--a", "pi,0,0", "--b", "1,0,0"],
        ["--kind", "singleton_independent", "--a", "pi,2,0", "--b", "1,0,0"],
    ],
)
def test_counterexample_kinds(argv):
    assert run("counterexample", *argv)[0] == 3


def test_singleton_kind_mismatch():
    assert run("counterexample", "--kind", "singleton_dependent", "--a", "pi,2,0", "--b", "1,0,0")[0] == 64


def test_lattice_count():
    assert run("lattice-count", "--n", "2", "--k", "7", "--orthant") == (0, "8\n")
    assert run("lattice-count", "--n", "2", "--k", "3") == (0, "12\n")


def test_trig_decomp():
    code, text = run("trig-decomp", "--b", "1,1")
    assert code == 0
    assert text.splitlines()[0] == "Q1 = cos(x2); Q2 = cos(x1)"


def test_simplex():
    assert run("simplex", "--n", "2", "--a", "1", "--volume") == (0, "0.5\n")
    code, text = run("simplex", "--n", "2", "--a", "1", "--moment", "--p", "2")
    assert code == 0 and float(text) == pytest.approx(1 / 12)


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "lattice-count", "n": 3, "k": 4, "orthant": True}))
    assert run("--config", str(cfg)) == (0, "15\n")
    cfg.write_text(json.dumps({"t": "pi/2", "s": 1, "fn": "box:0:1"}))
    code, text = run("--config", str(cfg), "verify-criterion")
    assert code == 0 and json.loads(text)["verdict"] == "bounded"
    cfg.write_text("[1, 2]")
    assert run("--config", str(cfg), "lattice-count")[0] == 64
    assert run("--config", str(tmp_path / "missing.json"), "lattice-count")[0] == 64


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "lpcrit", "lattice-count", "--n", "2", "--k", "7", "--orthant"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0 and res.stdout == "8\n"
