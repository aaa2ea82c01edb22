import csv
import io
import json
import math
import subprocess
import sys

import pytest

from mixphase.cli import main

TC3 = 2 / math.log(2)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def error_of(err):
    return json.loads(err)["error"]


def test_phase_uhlmann_low_temperature(capsys):
    code, out, _ = run(
        capsys, "phase", "--model", "three-level", "--phase", "uhlmann", "--loop", "meridian",
        "--omega", "1", "--R", "1", "--T", "0.5", "--method", "closed",
    )
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"re_g", "im_g", "phase", "visibility", "g", "residuals"}
    assert data["phase"] == math.pi


def test_phase_two_level_hot_equator(capsys):
    # on the equator both levels pick up e^{+-i pi} = -1, so G = -1 at any temperature
    code, out, _ = run(capsys, "phase", "--model", "two-level", "--loop", "equator", "--T", "1e9")
    assert code == 0
    data = json.loads(out)
    assert data["re_g"] == pytest.approx(-1.0, abs=1e-15)
    assert data["phase"] == math.pi


def test_phase_both_methods(capsys):
    code, out, _ = run(capsys, "phase", "--phase", "both", "--method", "both", "--omega", "2", "--T", "1.1", "--n-steps", "4000")
    assert code == 0
    data = json.loads(out)
    for kind in ("interferometric", "uhlmann"):
        assert data[f"abs_diff_{kind}"] <= 1e-6
        assert data[f"residuals_{kind}_numeric"]
        assert data[f"residuals_{kind}_closed"] == {}


def test_phase_at_transition_is_numerical_failure(capsys):
    code, out, err = run(capsys, "phase", "--omega", "2", "--T", repr(TC3))
    assert code == 2 and out == ""
    assert error_of(err)["code"] == "zero_amplitude"


@pytest.mark.parametrize(
    "argv",
    [
        ["phase"],
        ["phase", "--T", "1", "--model", "four-level"],
        ["phase", "--T", "-1"],
        ["phase", "--T", "1", "--n-steps", "4"],
        ["phase", "--T", "1", "--omega", "0"],
        ["sweep", "--n-points", "1"],
        ["sweep", "--t-min", "2", "--t-max", "1"],
        ["sweep", "--phase", "both"],
        ["bogus"],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == ""
    assert "code" in error_of(err)


def test_sweep_csv_format(capsys):
    code, out, _ = run(capsys, "sweep", "--omega", "2", "--t-min", "0.2", "--t-max", "6", "--n-points", "400")
    assert code == 0
    assert "\r" not in out and out.endswith("\n")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["T", "re_g", "im_g", "visibility", "g", "phase"]
    assert len(rows) == 401
    phases = [float(r[5]) for r in rows[1:]]
    T = [float(r[0]) for r in rows[1:]]
    jumps = [i for i in range(399) if phases[i] != phases[i + 1]]
    assert len(jumps) == 1 and T[jumps[0]] < TC3 < T[jumps[0] + 1]
    # full precision round trip
    assert T[1] == 0.2 + 5.8 / 399


def test_sweep_nan_rows(capsys):
    code, out, err = run(capsys, "sweep", "--omega", "2", "--t-min", "1", "--t-max", repr(TC3), "--n-points", "2")
    assert code == 0
    assert out.splitlines()[2].split(",")[5] == "nan"
    assert "zero_amplitude" in err
    code, _, _ = run(capsys, "sweep", "--omega", "2", "--t-min", "1", "--t-max", repr(TC3), "--n-points", "2", "--strict")
    assert code == 2


def test_sweep_json_and_output_file(capsys, tmp_path):
    path = tmp_path / "rows.json"
    code, out, _ = run(capsys, "sweep", "--format", "json", "--n-points", "5", "--output", str(path), "--phase", "uhlmann")
    assert code == 0 and out == ""
    rows = json.loads(path.read_text())["rows"]
    assert len(rows) == 5 and rows[0]["error"] is None


@pytest.mark.parametrize("omega,jumps", [(1, 1), (2, 2)])
def test_sweep_uhlmann_jumps(capsys, omega, jumps):
    _, out, _ = run(capsys, "sweep", "--phase", "uhlmann", "--omega", str(omega))
    phases = [float(line.split(",")[5]) for line in out.splitlines()[1:]]
    assert sum(abs(a - b) > 1 for a, b in zip(phases, phases[1:])) == jumps


def test_find_tc_examples(capsys):
    code, out, _ = run(capsys, "find-tc", "--omega", "2")
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"tc", "iterations", "visibility_at_tc"}
    assert data["tc"] == pytest.approx(TC3, abs=1e-9)
    _, out, _ = run(capsys, "find-tc", "--phase", "uhlmann", "--bracket", "0.5", "1.0")
    assert 0.7333 <= json.loads(out)["tc"] <= 0.7343


def test_find_tc_odd_winding_has_no_bracket(capsys):
    code, _, err = run(capsys, "find-tc", "--omega", "1")
    assert code == 2
    assert error_of(err)["code"] == "no_bracket"


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"omega": 2, "phase": "interferometric", "T": 2.0}))
    _, out, _ = run(capsys, "phase", "--config", str(cfg))
    assert json.loads(out)["phase"] == math.pi
    # the flag wins over the file
    _, out, _ = run(capsys, "phase", "--config", str(cfg), "--T", "4")
    assert json.loads(out)["phase"] == 0.0
    cfg.write_text(json.dumps({"colour": "red"}))
    code, _, err = run(capsys, "phase", "--config", str(cfg), "--T", "1")
    assert code == 1 and error_of(err)["code"] == "config_error"
    code, _, _ = run(capsys, "phase", "--config", str(tmp_path / "missing.json"), "--T", "1")
    assert code == 1


def test_verify_single_check(capsys):
    code, out, _ = run(capsys, "verify", "--check", "non-transitivity")
    assert code == 0
    assert out.startswith("PASS  non-transitivity")


def test_verify_coarse_grid_fails_thresholds_only(capsys):
    code, out, _ = run(capsys, "verify", "--n-steps", "16", "--check", "residuals", "--check", "convergence")
    assert code == 2
    status = {line.split()[1]: line.split()[0] for line in out.splitlines()[:2]}
    assert status == {"residuals": "FAIL", "convergence": "PASS"}
    assert "failed: residuals" in out


def _cli(*argv):
    return subprocess.run([sys.executable, "-m", "mixphase", *argv], capture_output=True, check=False)


def test_determinism_byte_for_byte(tmp_path):
    argv = ["sweep", "--phase", "uhlmann", "--method", "numeric", "--n-points", "6", "--n-steps", "64", "--omega", "2"]
    a, b = _cli(*argv), _cli(*argv, "--threads", "3")
    assert a.returncode == 0 and a.stdout == b.stdout
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    _cli(*argv, "--output", str(f1))
    _cli(*argv, "--output", str(f2))
    assert f1.read_bytes() == f2.read_bytes() == a.stdout
