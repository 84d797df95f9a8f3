import json
import subprocess
import sys

import pytest

from g2surf import catalog
from g2surf.algebra import TABLE_ROWS
from g2surf.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_algebra_passes_and_is_deterministic(capsys, tmp_path):
    code, out, _ = run(capsys, "algebra", "--trials", "200", "--out", str(tmp_path))
    assert code == 0
    first = (tmp_path / "algebra.json").read_bytes()
    d = json.loads(first)
    assert d["passed"] and d["schema_version"] == "g2surf.algebra/1"
    assert d["table_mismatches"] == []
    run(capsys, "algebra", "--trials", "200", "--out", str(tmp_path))
    assert (tmp_path / "algebra.json").read_bytes() == first
    assert [p.name for p in tmp_path.iterdir()] == ["algebra.json"]


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("G2SURF_SEED", "42")
    _, out, _ = run(capsys, "algebra", "--trials", "50")
    assert json.loads(out)["seed"] == 42
    _, out, _ = run(capsys, "algebra", "--trials", "50", "--seed", "5")
    assert json.loads(out)["seed"] == 5
    monkeypatch.setenv("G2SURF_SEED", "x")
    assert run(capsys, "algebra", "--trials", "50")[0] == 1


def test_algebra_sign_error_fixture(capsys, tmp_path):
    rows = list(TABLE_ROWS)
    rows[0] = rows[0].replace("+", "#").replace("-", "+").replace("#", "-")
    path = tmp_path / "table.json"
    path.write_text(json.dumps(rows))
    code, out, _ = run(capsys, "algebra", "--trials", "50", "--table", str(path))
    assert code == 2
    assert json.loads(out)["table_mismatches"]


def test_algebra_reference_table_fixture(capsys, tmp_path):
    path = tmp_path / "table.json"
    path.write_text(json.dumps({"rows": list(TABLE_ROWS)}))
    assert run(capsys, "algebra", "--trials", "50", "--table", str(path))[0] == 0


def test_algebra_malformed_table(capsys, tmp_path):
    path = tmp_path / "table.json"
    path.write_text("[1, 2]")
    assert run(capsys, "algebra", "--table", str(path))[0] == 1


@pytest.mark.parametrize("vectors, key, label", [
    (["e1", "e2", "e3"], "associative", "associative"),
    (["e1", "e2", "e4"], "associative", "generic"),
    (["e4", "e5", "e6", "e7"], "coassociative", "coassociative"),
    (["e1", "e2"], "associative_hull", "associative"),
])
def test_plane_verdicts(capsys, vectors, key, label):
    code, out, _ = run(capsys, "plane", *vectors)
    assert code == 0
    assert json.loads(out)["verdicts"][key]["label"] == label


def test_plane_numeric_vectors(capsys):
    code, out, _ = run(capsys, "plane", "1,0,0,0,0,0,0", "0,1,0,0,0,0,0", "e3")
    assert code == 0
    assert json.loads(out)["dim"] == 3


@pytest.mark.parametrize("argv", [
    ["plane", "e1"],
    ["plane", "e1", "e9"],
    ["plane", "e1", "1,2,3"],
    ["plane", "e1", "e1"],
])
def test_plane_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_synth_writes_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "synth", "--map", "trex", "--grid", "33", "--out", str(tmp_path))
    assert code == 0
    d = json.loads((tmp_path / "grid.json").read_text())
    assert d == json.loads(out)
    assert d["passed"] and d["shape"] == [33, 33]
    lines = (tmp_path / "grid.csv").read_text().splitlines()
    assert lines[0] == "# schema_version,g2surf.grid/1"
    assert len(lines) == 2 + 33 * 33
    assert sorted(p.name for p in tmp_path.iterdir()) == ["grid.csv", "grid.json"]


def test_synth_map_from_json_file(capsys, tmp_path):
    path = tmp_path / "map.json"
    path.write_text(json.dumps(catalog.clifford_coassoc().to_dict()))
    assert run(capsys, "synth", "--map", str(path), "--grid", "33,17")[0] == 0


def test_synth_rejects_non_harmonic(capsys, tmp_path):
    path = tmp_path / "map.json"
    path.write_text(json.dumps(catalog.non_harmonic_example().to_dict()))
    code, _, err = run(capsys, "synth", "--map", str(path), "--grid", "65", "--out", str(tmp_path / "o"))
    assert code == 2
    assert "NotClosed" in err and "warning" in err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("argv", [
    ["synth", "--map", "nowhere"],
    ["synth", "--map", "trex", "--grid", "8"],
    ["synth", "--map", "trex", "--grid", "a,b"],
    ["synth", "--map", "trex", "--domain", "0,1,0"],
    ["synth", "--map", "trex", "--domain", "0,0,0,1", "--grid", "17"],
    ["synth", "--map", "trex", "--step", "0"],
])
def test_configuration_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert err.startswith("error:")


def test_bad_command_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_invariants_report(capsys, tmp_path):
    code, out, _ = run(capsys, "invariants", "--map", "clifford_w1234", "--grid", "33",
                       "--pointwise", "--out", str(tmp_path))
    assert code == 0
    d = json.loads(out)
    assert d["verdict"] == "pseudo_umbilical_nonparallel"
    assert "pointwise" not in d
    full = json.loads((tmp_path / "report.json").read_text())
    assert full["schema_version"] == "g2surf.report/1"
    assert len(full["pointwise"]["theta"]) == 33


def test_invariants_fd_mode(capsys):
    code, out, _ = run(capsys, "invariants", "--map", "trex", "--grid", "33", "--mode", "fd")
    assert code == 0
    assert json.loads(out)["labels"] == ["minimal_in_hypersphere", "isotropic_surface"]


def test_invariants_numeric_tolerance(capsys):
    _, out, _ = run(capsys, "invariants", "--map", "clifford_w1234", "--grid", "33", "--tol", "1e-30")
    assert json.loads(out)["verdict"] == "generic"


def test_check_list(capsys):
    code, out, _ = run(capsys, "check", "--list")
    assert code == 0
    assert len(out.strip().splitlines()) == 10


def test_check_subset(capsys, tmp_path):
    code, out, _ = run(capsys, "check", "--only", "1", "10", "--out", str(tmp_path))
    assert code == 0
    assert out.count("[PASS]") == 2
    d = json.loads((tmp_path / "check.json").read_text())
    assert d["passed"] and len(d["criteria"]) == 2


def test_check_tight_tolerance_fails(capsys):
    code, out, _ = run(capsys, "check", "--only", "6", "--tol", "tight")
    assert code == 2
    assert "[FAIL]" in out


def test_check_unknown_criterion(capsys):
    assert run(capsys, "check", "--only", "11")[0] == 1


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "g2surf.cli", "check", "--list"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.split()[0] == "1."
