"""Command line driver: exit codes, report files, determinism, diagnostics."""

import json
import subprocess
import sys


from kstab.cli import main

from conftest import config_path

DL = str(config_path("conic_double_line"))
TL = str(config_path("conic_two_lines"))
TRIVIAL = str(config_path("trivial_p1"))


def run(args, out):
    return main(args + ["--out", str(out)])


def load(out, stem):
    return json.loads((out / f"{stem}.json").read_text())


# -- happy paths -------------------------------------------------------------------


def test_flat_limit_payload(tmp_path):
    assert run(["flat-limit", DL], tmp_path) == 0
    payload = load(tmp_path, "conic_double_line_flat_limit")
    assert payload["schema"] == 1
    assert payload["command"] == "flat-limit"
    assert payload["weights"] == [0, 0, 1]
    assert payload["initial_ideal"] == ["y^2"]
    assert payload["initial_leads"] == [[0, 2, 0]]


def test_spectrum_payload(tmp_path):
    assert run(["spectrum", DL, "--kmax", "4"], tmp_path) == 0
    payload = load(tmp_path, "conic_double_line_spectrum")
    slices = payload["slices"]
    assert [s["k"] for s in slices] == [1, 2, 3, 4]
    assert slices[0]["b_spectrum"] == [0, 0, 1]
    assert slices[0]["a_spectrum"] == ["-1/3", "-1/3", "2/3"]
    assert slices[3]["dim"] == 9


def test_futaki_payload_exact_strings(tmp_path):
    assert run(["futaki", DL], tmp_path) == 0
    payload = load(tmp_path, "conic_double_line_futaki")
    assert payload["F_0"] == "1/2"
    assert payload["F_1"] == "-1/4"
    assert payload["n2_sq"] == "1/6"
    assert payload["Lambda"] == "-1/2"
    assert payload["trivial_action"] is False


def test_chow_payload(tmp_path):
    assert run(["chow", TL, "--r", "1,2,3"], tmp_path) == 0
    payload = load(tmp_path, "conic_two_lines_chow")
    assert payload["decay_ok"] is True
    assert [row["r"] for row in payload["rows"]] == [1, 2, 3]
    assert payload["rows"][0]["mu"] == "1/3"
    assert payload["operator_norm"]["pass"] is True


def test_n2_cross_check(tmp_path):
    assert run(["n2", DL, "--samples", "20000", "--seed", "3"], tmp_path) == 0
    payload = load(tmp_path, "conic_double_line_n2")
    assert payload["exact_n2_sq"] == "1/6"
    assert payload["pass"] is True
    assert payload["rel_error"] <= 0.02
    assert payload["seed"] == 3
    assert payload["samples"] == 20000


def test_mass_payload(tmp_path):
    code = run(["mass", DL, "--k", "2,3", "--samples", "20000"], tmp_path)
    payload = load(tmp_path, "conic_double_line_mass")
    assert code == 0
    assert payload["positivity_ok"] is True
    assert payload["bounded_ok"] is True
    assert [row["k"] for row in payload["rows"]] == [2, 3]


def test_ray_writes_json_and_csv(tmp_path):
    # values starting with a dash use the --flag=value form
    code = run(
        ["ray", DL, "--k", "2,4", "--samples", "10000", "--t-grid=-0.5:-30:8"],
        tmp_path,
    )
    assert code == 0
    csv_path = tmp_path / "conic_double_line_ray.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "t,point,k,phi,envelope"
    # grid rows: 8 times x 8 points x 2 levels
    assert len(lines) == 1 + 8 * 8 * 2
    payload = load(tmp_path, "conic_double_line_ray")
    assert payload["k_set"] == [2, 4]
    assert payload["slope_check"]["ok"] is True
    assert payload["convexity_check"]["ok"] is True


def test_outputs_are_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["ray", DL, "--k", "2,3", "--samples", "8000", "--seed", "9"]
    assert run(list(args), a) == 0
    assert run(list(args), b) == 0
    for name in ("conic_double_line_ray.json", "conic_double_line_ray.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_envelope_reports_honest_boundary_failure(tmp_path):
    # the three-level envelope keeps its boundary gap near 0.5, so the
    # command exits with the numeric-diagnostic code and writes the report
    code = run(["envelope", DL, "--samples", "20000"], tmp_path)
    assert code == 3
    payload = load(tmp_path, "conic_double_line_envelope")
    assert payload["strict_decrease"] is True
    assert payload["pass"] is False
    assert payload["boundary_continuity"] > payload["boundary_tolerance"]
    assert payload["attaining_near_boundary"] == [4]


def test_report_command_trivial(tmp_path):
    code = run(["report", TRIVIAL, "--samples", "10000"], tmp_path)
    assert code == 0
    payload = load(tmp_path, "trivial_p1_report")
    assert payload["futaki"]["F_1"] == "0"
    assert payload["futaki"]["trivial_action"] is True
    assert payload["n2"]["pass"] is True


def test_seed_echoed(tmp_path):
    assert run(["n2", DL, "--samples", "8192", "--seed", "5"], tmp_path) == 0
    assert load(tmp_path, "conic_double_line_n2")["seed"] == 5


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "kstab.cli",
            "spectrum",
            DL,
            "--kmax",
            "2",
            "--out",
            str(tmp_path),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "spectrum" in proc.stdout


# -- validation failures (exit 2) -----------------------------------------------------


def test_missing_file_is_a_config_error(tmp_path, capsys):
    assert run(["futaki", str(tmp_path / "nope.json")], tmp_path) == 2
    assert "nope.json" in capsys.readouterr().err


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["futaki", str(bad)], tmp_path) == 2
    assert "JSON" in capsys.readouterr().err


def write_config(tmp_path, **overrides):
    body = {
        "name": "probe",
        "variables": ["x", "y", "z"],
        "weights": [0, 0, 1],
        "generators": ["x*z - y^2"],
    }
    body.update(overrides)
    path = tmp_path / "probe.json"
    path.write_text(json.dumps(body))
    return str(path)


def test_missing_weights_key(tmp_path, capsys):
    body = {"name": "p", "variables": ["x", "y"], "generators": []}
    path = tmp_path / "p.json"
    path.write_text(json.dumps(body))
    assert run(["futaki", str(path)], tmp_path) == 2
    assert "weights" in capsys.readouterr().err


def test_inhomogeneous_generator(tmp_path, capsys):
    path = write_config(tmp_path, generators=["x + y^2"])
    assert run(["futaki", path], tmp_path) == 2
    assert "homogeneous" in capsys.readouterr().err


def test_non_integer_weights(tmp_path, capsys):
    path = write_config(tmp_path, weights=[0, 0, 0.5])
    assert run(["futaki", path], tmp_path) == 2
    err = capsys.readouterr().err
    assert "integer" in err or "weights" in err


def test_chart_component_arity(tmp_path, capsys):
    path = write_config(
        tmp_path, fiber=[{"chart_vars": 1, "components": ["1", "u"]}]
    )
    assert run(["ray", path, "--k", "2,3", "--samples", "4096"], tmp_path) == 2
    assert "chart" in capsys.readouterr().err.lower()


def test_ray_without_fiber(tmp_path, capsys):
    path = write_config(tmp_path)
    assert run(["ray", path, "--samples", "4096"], tmp_path) == 2
    assert "fiber" in capsys.readouterr().err


def test_n2_without_cycle(tmp_path, capsys):
    path = write_config(tmp_path)
    assert run(["n2", path, "--samples", "4096"], tmp_path) == 2
    assert "cycle" in capsys.readouterr().err


def test_envelope_needs_three_levels(tmp_path, capsys):
    assert run(["envelope", DL, "--k", "4,8", "--samples", "4096"], tmp_path) == 2
    assert "three" in capsys.readouterr().err


def test_bad_t_grid_spec(tmp_path, capsys):
    # argparse failures are translated to the validation exit code
    assert main(["ray", DL, "--t-grid=oops", "--out", str(tmp_path)]) == 2
    assert "t-grid" in capsys.readouterr().err
