import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from calogero.cli import main
from calogero.phase_core import PhaseState


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_state(tmp_path, x, p, coupling="imaginary", name="state.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"n": len(x), "coupling": coupling, "x": x, "p": p}))
    return str(path)


@pytest.fixture
def two_body_file(tmp_path):
    return write_state(tmp_path, [1.0, -1.0], [0.0, 0.0])


def test_generate_is_deterministic(capsys):
    a = run(capsys, "generate", "--seed", "42", "--n", "3")
    b = run(capsys, "generate", "--seed", "42", "--n", "3")
    assert a[0] == 0 and a[1] == b[1]
    assert run(capsys, "generate", "--seed", "43", "--n", "3")[1] != a[1]


def test_generate_valid_state(capsys):
    code, out, _ = run(capsys, "generate", "--seed", "7", "--n", "2")
    assert code == 0
    s = PhaseState.from_json(out)
    assert s.n == 2 and np.min(np.diff(s.x)) >= 0.2
    assert np.all(np.abs(s.x) <= 2) and np.all(np.abs(s.p) <= 1)


def test_generate_writes_file(capsys, tmp_path):
    out = tmp_path / "s.json"
    assert run(capsys, "generate", "--n", "4", "--out", str(out))[0] == 0
    assert PhaseState.from_json(out.read_text()).n == 4


def test_generate_rejects_empty(capsys):
    code, _, err = run(capsys, "generate", "--n", "0")
    assert code == 2 and "n must be" in err


def test_coords_single(capsys, tmp_path):
    code, out, _ = run(capsys, "coords", write_state(tmp_path, [5.0], [3.0]))
    d = json.loads(out)
    assert code == 0
    assert d["lambda"] == [[3.0, 0.0]] and d["mu"] == [[5.0, 0.0]] and d["mu_tilde"] == [[5.0, 0.0]]


def test_coords_two_body(capsys, two_body_file):
    code, out, _ = run(capsys, "coords", two_body_file)
    d = json.loads(out)
    np.testing.assert_allclose(d["mu_tilde"], [[0, -1], [0, 1]], atol=1e-14)
    np.testing.assert_allclose(d["mu_tilde_eigenvector"], [[0, -1], [0, 1]], atol=1e-14)
    assert d["route_deviation"] < 1e-12


def test_coords_degenerate(capsys, tmp_path):
    code, _, err = run(capsys, "coords", write_state(tmp_path, [0.0, 1e7], [0.5, 0.5]))
    assert code == 1 and "DEGENERATE" in err


@pytest.mark.parametrize("content", ["not json", '{"x": [0, 0], "p": [1, 1]}', '{"x": [0]}'])
def test_coords_malformed(capsys, tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert run(capsys, "coords", str(path))[0] == 2


def test_coords_missing_file(capsys, tmp_path):
    assert run(capsys, "coords", str(tmp_path / "absent.json"))[0] == 2


def test_verify_canonicity(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "canonicity", "--random", "10", "--n", "4")
    d = json.loads(out)
    assert code == 0 and d["pass"]
    assert d["worst"]["canonicity"] < 1e-6
    assert len(d["reports"]) == 10 and "entries" not in d["reports"][0]


def test_verify_state_file_with_entries(capsys, two_body_file):
    code, out, _ = run(capsys, "verify", two_body_file, "--suite", "euler", "--entries")
    d = json.loads(out)
    assert code == 0 and len(d["reports"]) == 1 and d["reports"][0]["entries"]


@pytest.mark.parametrize("suite", ["bracket1", "lenard", "table", "superintegrability", "euler",
                                   "delta-generator", "commutation"])
def test_verify_suites(capsys, suite):
    code, out, _ = run(capsys, "verify", "--suite", suite, "--n", "3", "--random", "2")
    assert code == 0, out
    assert json.loads(out)["pass"]


def test_verify_lift(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "lift", "--n", "2", "--trials", "5")
    d = json.loads(out)
    assert code == 0
    assert set(d["worst"]) == {"pencil_jacobi", "hierarchy", "lift_involution", "nijenhuis_spectrum"}


def test_lift_verify_command(capsys):
    assert run(capsys, "lift-verify", "--n", "2", "--trials", "3")[0] == 0
    assert run(capsys, "lift-verify", "--n", "5")[0] == 2


def test_lift_verify_point_file(capsys, tmp_path):
    path = tmp_path / "pt.json"
    path.write_text(json.dumps({"n": 2, "A": [[[1, 0], [0, 0]], [[0, 0], [2, 0]]],
                                "B": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]}))
    assert run(capsys, "lift-verify", "--point", str(path), "--trials", "3")[0] == 0


def test_verify_unknown_suite(capsys):
    assert run(capsys, "verify", "--suite", "nonsense")[0] == 2


def test_verify_failure_exit_code(capsys):
    # a tolerance no finite-difference result can meet
    code, out, _ = run(capsys, "verify", "--suite", "canonicity", "--n", "3", "--tol-check", "1e-30")
    assert code == 1 and not json.loads(out)["pass"]


def test_evolve_exact(capsys, two_body_file):
    code, out, err = run(capsys, "evolve", two_body_file, "--t-end", "2", "--method", "exact")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][0] == "t" and rows[0][-1] == "energy"
    last = dict(zip(rows[0], map(float, rows[-1])))
    assert last["x_1"] == pytest.approx(np.sqrt(2)) and last["x_2"] == pytest.approx(-np.sqrt(2))
    assert "energy drift" in err and "lambda drift" in err


def test_evolve_rk_matches_exact(capsys, two_body_file):
    ex = list(csv.reader(io.StringIO(run(capsys, "evolve", two_body_file, "--t-end", "2")[1])))
    rk = list(csv.reader(io.StringIO(run(capsys, "evolve", two_body_file, "--t-end", "2",
                                         "--method", "rk", "--tol-ode", "1e-10")[1])))
    assert abs(float(ex[-1][1]) - float(rk[-1][1])) < 1e-7
    assert float(rk[-1][0]) == 2.0


def test_evolve_real_coupling(capsys, tmp_path):
    code, _, err = run(capsys, "evolve", write_state(tmp_path, [1.0, -1.0], [0.0, 0.0], "real"))
    assert code == 1 and "COUPLING_UNSUPPORTED" in err


def test_evolve_rejects_json_format(capsys, two_body_file):
    with pytest.raises(SystemExit) as exc:
        main(["evolve", two_body_file, "--format", "json"])
    assert exc.value.code == 2


def test_scatter(capsys, two_body_file):
    code, out, _ = run(capsys, "scatter", two_body_file)
    d = json.loads(out)
    assert code == 0 and d["pass"]
    np.testing.assert_allclose(d["p_plus"], [-0.5, 0.5], atol=1e-9)
    assert d["momentum_deviation"] < 1e-6


def test_conjecture_real(capsys):
    code, out, _ = run(capsys, "conjecture", "--n-range", "1..8", "--coupling", "real", "--trials", "20")
    d = json.loads(out)
    assert code == 0 and d["pass"]
    assert all(r["residual"] < 1e-8 for r in d["per_n"])


def test_conjecture_imaginary_two_body(capsys):
    code, out, _ = run(capsys, "conjecture", "--n-range", "2..2", "--coupling", "imaginary")
    d = json.loads(out)
    assert code == 1 and not d["per_n"][0]["pass"]
    assert d["per_n"][0]["residual_c_scaled"] < 1e-8


@pytest.mark.parametrize("coupling", ["real", "imaginary"])
def test_conjecture_single_particle(capsys, coupling):
    code, out, _ = run(capsys, "conjecture", "--n-range", "1..1", "--coupling", coupling)
    assert code == 0 and json.loads(out)["per_n"][0]["residual"] == 0


@pytest.mark.parametrize("rng_text", ["0..3", "5..2", "abc", "1-3"])
def test_conjecture_bad_range(capsys, rng_text):
    assert run(capsys, "conjecture", "--n-range", rng_text)[0] == 2


def test_usage_errors_exit_2(capsys):
    for argv in (["frobnicate"], ["generate", "--coupling", "complex"], ["generate", "--tol-fd", "-1"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "calogero", "generate", "--seed", "3", "--n", "2"],
                         capture_output=True, text=True, check=True)
    assert PhaseState.from_json(out.stdout).n == 2
