import json
import subprocess
import sys

import pytest

from dtwall.cli import COMMANDS, main

BASE = {"lattice": {"curve_rank": 1, "chi_X": 2}, "window": {"k_cut": 4, "beta_cut": [1]}}


def run(tmp_path, command, cfg, fmt="json"):
    path = tmp_path / "cfg.json"
    out = tmp_path / f"{command}.{fmt}"
    path.write_text(json.dumps(cfg))
    code = main([command, "--config", str(path), "--out", str(out), "--format", fmt])
    text = out.read_text() if out.exists() else None
    return code, text


@pytest.mark.parametrize("command", COMMANDS)
def test_every_command_runs_on_defaults(tmp_path, command):
    code, text = run(tmp_path, command, BASE)
    assert code == 0
    report = json.loads(text)
    assert report["ok"] is True and report["command"] == command
    assert isinstance(report["anchor"], str) and report["anchor"]


@pytest.mark.parametrize("command", ["macmahon", "walls", "hn", "identities"])
def test_output_is_deterministic(tmp_path, command):
    first = run(tmp_path, command, BASE)[1]
    second = run(tmp_path, command, BASE)[1]
    assert first == second


def test_identities(tmp_path):
    code, text = run(tmp_path, "identities", {"l_max": 7})
    assert code == 0
    rows = json.loads(text)["rows"]
    sums = [r for r in rows if r["identity"] == "surjection sum"]
    assert [r["value"] for r in sums] == ["1", "1/2", "1/6", "1/24", "1/120", "1/720", "1/5040"]


def test_macmahon_chi_zero(tmp_path):
    code, text = run(tmp_path, "macmahon", {"window": {"k_cut": 6}, "chi": 0})
    assert code == 0
    assert json.loads(text)["series"]["coeffs"] == [[0, [], 1, 1]]


def test_macmahon_values(tmp_path):
    code, text = run(tmp_path, "macmahon", {"window": {"k_cut": 4}, "chi": 1, "sign": -1})
    coeffs = json.loads(text)["series"]["coeffs"]
    assert [c[2] for c in coeffs] == [1, -1, 3, -6]


def test_dtpt_default_and_tsv(tmp_path):
    assert run(tmp_path, "dtpt-check", {"window": {"k_cut": 6}})[0] == 0
    code, text = run(tmp_path, "dtpt-check", BASE, fmt="tsv")
    assert code == 0 and text.splitlines()[0] == "n\tbeta0\tcoeff"


def test_verification_failure_exit_code(tmp_path):
    # a path into the PT chamber divides by the wall factor, so DT_0 is not M(x)^chi
    path = [{"z0": [[-1, 1], [2, 1]], "omega": [[1, 1]], "z1": [[-1, 1], [1, 1]]},
            {"z0": [[-2, 1], [1, 1]], "omega": [[1, 1]], "z1": [[-1, 1], [1, 1]]}]
    code, text = run(tmp_path, "dtpt-check", dict(BASE, path=path))
    assert code == 1
    report = json.loads(text)
    assert report["degree_zero_matches_macmahon"] is False
    assert report["first_mismatch"] is None


def test_explicit_transform(tmp_path):
    cfg = {"window": {"k_cut": 3},
           "germ": {"kind": "xi", "base": {"z0": [[-1, 1], [1, 1]], "omega": [],
                                           "z1": [[-1, 1], [1, 1]]},
                    "dz0": [[-1, 1], [-1, 1]]},
           "table": {"mode": "euler", "entries": [[-1, 0, 3, 2], [0, 1, 1, 1]]},
           "targets": [[-2, [], 1]]}
    code, text = run(tmp_path, "transform", cfg)
    assert code == 0
    row = json.loads(text)["rows"][0]
    assert row["value"] == "9/8" and row["match"]


def test_explicit_reps(tmp_path):
    cfg = {"quiver": {"vertex_count": 2, "arrows": [[0, 1]]},
           "reps": [{"dims": [1, 1], "maps": [[1]]}],
           "stability": {"directions": [[[0, 1], [1, 1]], [[-1, 1], [1, 1]]]}}
    code, text = run(tmp_path, "hn", cfg)
    assert code == 0
    assert json.loads(text)["rows"][0]["factors"] == [[0, 1], [1, 0]]


@pytest.mark.parametrize("cfg", [
    {"window": {"k_cut": 0}},
    {"unknown": 1},
    {"lattice": {"m_table": [[[0], 1]]}},
    {"lattice": {"curve_rank": 1, "m_table": [[[0], 0]]}, "window": {"k_cut": 3, "beta_cut": [1]}},
    {"window": {"k_cut": 40, "beta_cut": [9, 9]}, "lattice": {"curve_rank": 2},
     "budgets": {"max_index_count": 100}},
    {"all_reps_max_dim": 7},
    {"l_max": 30},
])
def test_config_errors(tmp_path, cfg):
    command = "hn" if "all_reps_max_dim" in cfg else "coeffs" if "l_max" in cfg else "macmahon"
    assert run(tmp_path, command, cfg)[0] == 2


def test_bad_json_and_unknown_command(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["macmahon", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    with pytest.raises(SystemExit):
        main(["nope", "--config", str(bad), "--out", str(tmp_path / "o")])


def test_console_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{}")
    out = tmp_path / "o.json"
    proc = subprocess.run([sys.executable, "-m", "dtwall.cli", "nhat", "--config", str(cfg),
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["rows"][0]["nhat"] == "0"
