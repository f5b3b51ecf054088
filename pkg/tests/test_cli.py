"""CLI tests: build command outputs, exit codes, overrides, determinism."""

import json

import pytest
from click.testing import CliRunner

from pkcurves import fileformat as ff
from pkcurves.cli import EXIT_DEGENERATE, EXIT_MALFORMED, main

ARC = [[0, 0], [1, 0.6], [2, 0.9], [3, 0.7], [4, 0.1]]


@pytest.fixture
def runner():
    return CliRunner()


def write_point_set(path, **overrides):
    data = {"version": 1, "topology": "open", "continuity": "C2", "points": ARC}
    data.update(overrides)
    path.write_text(json.dumps(data))
    return path


def test_build_writes_curve_file(tmp_path, runner):
    ps = write_point_set(tmp_path / "ps.json")
    out = tmp_path / "curve.json"
    result = runner.invoke(main, ["build", str(ps), "--out", str(out)])
    assert result.exit_code == 0, result.output
    doc = ff.read_curve_file(out)
    assert len(doc.records) == len(ARC) - 2


def test_build_collinear_c1_straight(tmp_path, runner):
    ps = write_point_set(tmp_path / "ps.json", points=[[0, 0], [1, 0], [2, 0]], continuity="C1")
    out = tmp_path / "curve.json"
    result = runner.invoke(main, ["build", str(ps), "--out", str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert data["energy_report"]["average_Ep"] <= 1e-10
    assert len(data["segments"]) == 1
    assert data["segments"][0]["degree"] == 4


def test_build_closed_topology_segment_count(tmp_path, runner):
    ps = write_point_set(tmp_path / "ps.json", points=[[0, 0], [2, 0], [2, 2], [0, 2]],
                         topology="closed")
    out = tmp_path / "curve.json"
    result = runner.invoke(main, ["build", str(ps), "--out", str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    # n interior points + the two bridging segments around the seam
    assert data["topology"] == "closed"
    assert len(data["segments"]) == 4


def test_build_svg_and_comb(tmp_path, runner):
    ps = write_point_set(tmp_path / "ps.json")
    svg_path = tmp_path / "curve.svg"
    result = runner.invoke(main, ["build", str(ps), "--svg", str(svg_path), "--comb", "0.3"])
    assert result.exit_code == 0, result.output
    assert svg_path.read_text().startswith("<svg")


def test_build_report_output(tmp_path, runner):
    ps = write_point_set(tmp_path / "ps.json")
    result = runner.invoke(main, ["build", str(ps), "--report"])
    assert result.exit_code == 0
    assert "E_avg:" in result.output
    assert "E_max:" in result.output
    assert "T_insert_avg:" in result.output


def test_build_continuity_override(tmp_path, runner):
    ps = write_point_set(tmp_path / "ps.json")
    out = tmp_path / "curve.json"
    result = runner.invoke(main, ["build", str(ps), "--out", str(out), "--continuity", "G1"])
    assert result.exit_code == 0
    assert json.loads(out.read_text())["continuity"] == "G1"
    assert json.loads(out.read_text())["segments"][0]["degree"] == 4


def test_build_malformed_file_exit_code(tmp_path, runner):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    result = runner.invoke(main, ["build", str(bad)])
    assert result.exit_code == EXIT_MALFORMED


def test_build_degenerate_input_exit_code(tmp_path, runner):
    ps = write_point_set(tmp_path / "ps.json", points=[[0, 0], [1, 1], [1, 1], [2, 0]])
    result = runner.invoke(main, ["build", str(ps)])
    assert result.exit_code == EXIT_DEGENERATE


def test_build_deterministic_bytes(tmp_path, runner):
    ps = write_point_set(tmp_path / "ps.json")
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert runner.invoke(main, ["build", str(ps), "--out", str(out1)]).exit_code == 0
    assert runner.invoke(main, ["build", str(ps), "--out", str(out2)]).exit_code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_build_weight_overrides(tmp_path, runner):
    ps = write_point_set(tmp_path / "ps.json")
    out = tmp_path / "curve.json"
    result = runner.invoke(main, ["build", str(ps), "--out", str(out),
                                  "--lambda-e", "0.0", "--lambda-c", "0.0"])
    assert result.exit_code == 0
    assert json.loads(out.read_text())["weights"] == {"lambda_e": 0.0, "lambda_c": 0.0}
