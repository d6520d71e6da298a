import json
import math
import shutil
import subprocess
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from selrisk import battery
from selrisk.cli import (
    EXIT_BUDGET,
    EXIT_OK,
    EXIT_PRECONDITION,
    EXIT_PROPS,
    EXIT_SCHEMA,
    EXIT_TOLERANCE,
    fmt,
    main,
)
from selrisk.scenario_io import load_scenario, parse_scenario, scenario_doc
from selrisk.errors import SchemaError
from selrisk.closed_forms import envelope_threshold

FIX = Path(__file__).resolve().parent.parent / "scenarios"


def fixture(name):
    return str(FIX / f"{name}.json")


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    return lines[0], [tuple(map(float, ln.split(","))) for ln in lines[1:]]


def test_fmt_round_trips_and_drops_negative_zero():
    assert fmt(-0.0) == "0.0"
    for v in (0.1, 1 / 3, -2.5e-17, 1e300):
        assert float(fmt(v)) == v


def test_compute_writes_sorted_csv(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["compute", "--scenario", fixture("fixed_points_nonconvex"), "--out", str(out)]) == EXIT_OK
    header, rows = read_csv(out)
    assert header == "x,y"
    xs = [x for x, _ in rows]
    assert xs == sorted(xs) and len(set(xs)) == len(xs)
    assert all(math.isfinite(y) for _, y in rows)
    # the two staircase corners of the nonconvex set
    ys = dict(rows)
    assert ys[-1.0] == 2.0 and ys[2.0] == -1.0


def test_compute_is_byte_identical_across_thread_counts(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("SELRISK_THREADS", threads)
        out = tmp_path / f"t{threads}.csv"
        assert main(["compute", "--scenario", fixture("avar_small_atoms"), "--out", str(out)]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_compute_svg_has_one_polyline(tmp_path):
    out, svg = tmp_path / "c.csv", tmp_path / "c.svg"
    assert main(["compute", "--scenario", fixture("two_point"), "--out", str(out), "--svg", str(svg)]) == EXIT_OK
    root = ET.parse(svg).getroot()
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}polyline")) == 1
    assert len(root.findall(f"{ns}line")) == 2
    pts = root.find(f"{ns}polyline").get("points").split()
    assert len(pts) == len(read_csv(out)[1])


def test_compute_closed_form(tmp_path):
    out = tmp_path / "c.csv"
    argv = ["compute", "--scenario", fixture("envelope_alpha075"), "--out", str(out), "--closed-form", "ikappa_avar"]
    assert main(argv) == EXIT_OK
    ys = dict(read_csv(out)[1])
    assert ys[0.0] == 0.0  # the origin belongs to the set
    assert math.isclose(ys[-0.05], float(envelope_threshold(0.05, 1.0, 0.75)))


def test_compare_ok_and_report(tmp_path):
    rep = tmp_path / "r.csv"
    argv = ["compare", "--scenario", fixture("two_point"), "--closed-form", "two_point", "--tol", "1e-9", "--report", str(rep)]
    assert main(argv) == EXIT_OK
    lines = rep.read_text().splitlines()
    assert lines[0] == "x,oracle_y,closed_y,gap"
    assert max(float(ln.split(",")[3]) for ln in lines[1:]) <= 1e-9


def test_compare_tolerance_exceeded_still_writes_report(tmp_path, capsys):
    rep = tmp_path / "r.csv"
    argv = ["compare", "--scenario", fixture("envelope_alpha075"), "--closed-form", "ikappa_avar", "--tol", "1e-6", "--report", str(rep)]
    assert main(argv) == EXIT_TOLERANCE
    assert rep.exists() and "tolerance exceeded" in capsys.readouterr().err


def test_compare_precondition(tmp_path, capsys):
    argv = ["compare", "--scenario", fixture("fixed_points_nonconvex"), "--closed-form", "ht", "--tol", "0.1", "--report", str(tmp_path / "r.csv")]
    assert main(argv) == EXIT_PRECONDITION
    assert "precondition" in capsys.readouterr().err


def test_schema_error_names_the_key(tmp_path, capsys):
    doc = json.loads(Path(fixture("two_point")).read_text())
    doc["engine"]["gridstep"] = 0.1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["compute", "--scenario", str(bad), "--out", str(tmp_path / "o.csv")]) == EXIT_SCHEMA
    assert "engine.gridstep" in capsys.readouterr().err


def test_schema_error_on_invalid_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["compute", "--scenario", str(bad), "--out", str(tmp_path / "o.csv")]) == EXIT_SCHEMA


@pytest.mark.parametrize(
    "patch,key",
    [
        (lambda d: d.update(dimension=3), "risk"),
        (lambda d: d["risk"][0].update(alpha=0.5), "risk[0].alpha"),
        (lambda d: d["portfolio"].update(kind="nope"), "portfolio.kind"),
        (lambda d: d["engine"].update(window=[[1, 0], [0, 1]]), "engine.window"),
        (lambda d: d.update(space=[0.5, 0.6]), "space"),
    ],
)
def test_schema_errors(patch, key):
    doc = json.loads(Path(fixture("fixed_cost_bounds")).read_text())
    patch(doc)
    with pytest.raises(SchemaError) as e:
        parse_scenario(doc)
    assert e.value.key == key


@pytest.mark.parametrize("name", sorted(p.stem for p in FIX.glob("*.json")))
def test_scenario_documents_round_trip(name):
    scn = load_scenario(fixture(name))
    again = parse_scenario(json.loads(json.dumps(scenario_doc(scn))))
    assert scenario_doc(again) == scenario_doc(scn)


def test_budget_exceeded(tmp_path, capsys):
    doc = json.loads(Path(fixture("avar_small_atoms")).read_text())
    doc["engine"]["selection_cap"] = 4  # the portfolio has 8 selections
    p = tmp_path / "cap.json"
    p.write_text(json.dumps(doc))
    assert main(["compute", "--scenario", str(p), "--out", str(tmp_path / "o.csv")]) == EXIT_BUDGET
    assert "selections required" in capsys.readouterr().err


def test_props_pass(capsys):
    assert main(["props", "--seed", "42", "--cases", "20", "--suite", "random_shift"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "random_shift: PASS (20 cases)"



def test_props_failure_exit_code(monkeypatch, capsys):
    case = battery.Case({}, {"x": 1})
    suite = battery.Suite("broken", lambda rng: case, lambda c: "always fails")
    monkeypatch.setitem(battery.SUITES, "broken", suite)
    assert main(["props", "--cases", "3"]) == EXIT_PROPS
    out = capsys.readouterr().out
    assert "broken: FAIL (1 cases)" in out
    assert "minimal reproduction:" in out and '"x": 1' in out


def test_console_script(tmp_path):
    exe = shutil.which("selrisk")
    if exe is None:
        pytest.skip("console script not installed")
    out = tmp_path / "c.csv"
    r = subprocess.run([exe, "compute", "--scenario", fixture("fixed_points_nonconvex"), "--out", str(out)])
    assert r.returncode == 0 and out.exists()
