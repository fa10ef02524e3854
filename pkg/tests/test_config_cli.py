import json
import logging
import textwrap

import pytest
from click.testing import CliRunner

from cboundary.cli import EXIT_ASSERT, EXIT_INPUT, EXIT_OK, main, run_job
from cboundary.config import ScenarioError, dump_scenario, parse_scenario_text

STRIP = textwrap.dedent(
    """
    name: strip
    mesh:
      grid: {lower: [0], upper: [10], shape: [41]}
    metric:
      h: "1"
      omega: ["0.3"]
    warp:
      expression: "1/(exp(-t)+1)"
    boundary_sequences:
      - label: to-zero
        points: [[2.0], [1.0], [0.5], [0.25], [0.0], [0.0], [0.0], [0.0]]
    probes: all
    jobs:
      - name: dist
        kind: distance
      - name: cond
        kind: conditions
        expect: {e4: true, e4_prime: false}
      - name: chron
        kind: chronology-batch
        pairs: [[0, 0, 5, 8], [0, 0, 5, 40], [0, 4, 1, 3]]
      - name: curve
        kind: busemann
        curve: {times: [0, 1, 2, 3], points: [0, 0, 0, 0]}
        expect: {finite: false}
      - name: bnd
        kind: boundary
        omegas: [0, 1]
    """
)


def _write(tmp_path, text, name="sc.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_minimal_file_with_default_warp(caplog):
    text = "name: tiny\nmesh: {grid: {lower: [0], upper: [1], shape: [3]}}\nmetric: {h: '1'}\n"
    with caplog.at_level(logging.WARNING):
        sc = parse_scenario_text(text)
    assert sc.warp == {"expression": "1"}
    assert "no warp section" in caplog.text
    assert sc.build_mesh().n_vertices == 3
    assert sc.jobs == []


def test_round_trip():
    sc = parse_scenario_text(STRIP)
    again = parse_scenario_text(dump_scenario(sc))
    assert again == sc


@pytest.mark.parametrize(
    "patch, where",
    [
        (("omega: [\"0.3\"]", "omega: [\"exp(\"]"), "metric.omega[0]"),
        (("shape: [41]", "shape: [0]"), "mesh.grid.shape"),
        (("kind: distance", "kind: teleport"), "jobs[0].kind"),
    ],
)
def test_errors_name_the_field(patch, where):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario_text(STRIP.replace(*patch))
    assert any(w == where for w, _ in exc.value.errors)


def test_yaml_syntax_error_has_line():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario_text("name: x\nmesh: [unclosed\n")
    assert "line" in str(exc.value)


def test_jobs_through_api(tmp_path):
    sc = parse_scenario_text(STRIP)
    cond = run_job(sc, "cond", str(tmp_path))
    assert cond.passed and cond.summary["e4"] is True
    chron = run_job(sc, "chron", str(tmp_path))
    assert chron.summary["pairs"] == 3
    text = (tmp_path / "chron_verdicts.csv").read_text().splitlines()
    assert text[0] == "t0,x0,t1,x1,cl,op,verdict"
    assert len(text) == 4
    curve = run_job(sc, "curve", str(tmp_path))
    assert curve.passed
    bnd = run_job(sc, "bnd", str(tmp_path))
    assert bnd.passed and bnd.summary["pairs"] == 2


def test_cli_run_and_parallel(tmp_path):
    path = _write(tmp_path, STRIP)
    runner = CliRunner()
    serial = runner.invoke(main, ["run", path, "--out", str(tmp_path / "a")])
    assert serial.exit_code == EXIT_OK, serial.output
    assert "PASS dist (distance)" in serial.output
    par = runner.invoke(main, ["run", path, "--out", str(tmp_path / "b"), "--parallel"])
    assert par.exit_code == EXIT_OK
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    strip = lambda r: [{k: v for k, v in j.items() if k != "files"} for j in r["jobs"]]  # noqa: E731
    assert strip(a) == strip(b)


def test_cli_exit_codes(tmp_path):
    runner = CliRunner()
    good = _write(tmp_path, STRIP)
    assert runner.invoke(main, ["check", good]).exit_code == EXIT_OK
    normalized = runner.invoke(main, ["check", good, "--normalized"])
    assert normalized.exit_code == EXIT_OK and "name: strip" in normalized.output
    bad = _write(tmp_path, STRIP.replace('omega: ["0.3"]', 'omega: ["exp("]'), "bad.yaml")
    res = runner.invoke(main, ["check", bad])
    assert res.exit_code == EXIT_INPUT and "metric.omega[0]" in res.output
    failing = _write(tmp_path, STRIP.replace("e4: true", "e4: false"), "fail.yaml")
    res = runner.invoke(main, ["run", failing, "--job", "cond", "--out", str(tmp_path / "c")])
    assert res.exit_code == EXIT_ASSERT
    res = runner.invoke(main, ["run", good, "--job", "nope", "--out", str(tmp_path / "d")])
    assert res.exit_code == EXIT_INPUT
    assert runner.invoke(main, ["paper", "no-such"]).exit_code == EXIT_INPUT
    assert runner.invoke(main, ["check", str(tmp_path / "missing.yaml")]).exit_code == EXIT_INPUT


def test_cli_oracle(tmp_path):
    res = CliRunner().invoke(main, ["oracle", _write(tmp_path, STRIP)])
    assert res.exit_code == EXIT_OK
    assert res.output.count("PASS") == 2


def test_cli_paper(tmp_path):
    res = CliRunner().invoke(main, ["paper", "example-strain", "--out", str(tmp_path)])
    assert res.exit_code == EXIT_OK, res.output
    assert "FAIL" not in res.output
    assert (tmp_path / "report.json").exists()


def test_help_lists_tolerances():
    res = CliRunner().invoke(main, ["--help"])
    assert "axioms=1e-09" in res.output
