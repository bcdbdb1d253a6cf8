import json
import subprocess
import sys

import pytest

from gauss_convex import __version__
from gauss_convex.cli import EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, _exit_for, main
from gauss_convex.report import read_csv

SLAB = "{kind: slab, axis: 0, c: 1.0, n: 2}"
FAST = ["--samples", "4096", "--seed", "7"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_influence_table(capsys):
    code, out, _ = run(["influence", "--body", SLAB, *FAST], capsys)
    assert code == EXIT_OK
    rows = read_csv(out)
    assert [r["quantity"] for r in rows] == ["influence", "influence", "total_influence", "max_influence"]
    assert abs(float(rows[0]["value"]) - 0.3422) < 0.05


def test_output_is_independent_of_workers(capsys):
    outputs = []
    for workers in ("1", "3"):
        code, out, _ = run(["influence", "--body", SLAB, "--workers", workers, "--seed", "3", "--samples", "70000"], capsys)
        outputs.append(out)
    assert outputs[0] == outputs[1]


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("GAUSS_CONVEX_SEED", "7")
    monkeypatch.setenv("GAUSS_CONVEX_SAMPLES", "4096")
    _, from_env, _ = run(["influence", "--body", SLAB], capsys)
    monkeypatch.delenv("GAUSS_CONVEX_SEED")
    monkeypatch.delenv("GAUSS_CONVEX_SAMPLES")
    _, from_flags, _ = run(["influence", "--body", SLAB, *FAST], capsys)
    assert from_env == from_flags


def test_verify_body_json(capsys):
    code, out, _ = run(["verify", "--body", SLAB, "--checks", "poincare,margulis_russo", "--format", "json", *FAST],
                       capsys)
    doc = json.loads(out)
    assert code == EXIT_OK
    assert {r["name"] for r in doc["rows"]} == {"poincare", "margulis_russo"}


@pytest.mark.parametrize("argv", [
    ["verify", "--body", SLAB, "--samples", "4096"],
    ["verify", "--body", SLAB, "--seed", "1", "--checks", "nonsense"],
    ["influence", "--body", "{kind: ball, r: -1, n: 2}"],
    ["influence", "--body", "missing.yaml"],
    ["influence", "--body", SLAB, "--sigma", "0"],
    ["influence", "--body", SLAB, "--seed", "-4"],
    ["shell", "--body", SLAB, "--radii", "3:1:5"],
    ["threshold", "--body", SLAB, "--eps", "1.5"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == EXIT_USAGE
    assert err


def test_spec_error_reports_position(capsys, tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("kind: ball\nr: 1\nn: zero\n")
    code, _, err = run(["influence", "--body", str(path)], capsys)
    assert code == EXIT_USAGE and f"{path}:3:4:" in err


def test_threshold_strict_exit(capsys):
    argv = ["threshold", "--body", SLAB, "--grid", "1.0:1.1:3", *FAST]
    assert run(argv, capsys)[0] == EXIT_OK
    assert run(argv + ["--strict"], capsys)[0] == EXIT_INCONCLUSIVE
    code, out, _ = run(["threshold", "--body", SLAB, *FAST], capsys)
    assert code == EXIT_OK and len(read_csv(out)) == 64


def test_shell_and_friedgut(capsys, tmp_path):
    target = tmp_path / "shell.csv"
    code, out, _ = run(["shell", "--body", SLAB, "--radii", "0.5:3:6", "-o", str(target), *FAST], capsys)
    assert code == EXIT_OK and out == "" and len(read_csv(target.read_text())) == 6
    code, out, _ = run(["friedgut", "--body", SLAB, "--eps", "0.05", "--inner", "64", "--samples", "2048",
                        "--seed", "1"], capsys)
    rows = read_csv(out)
    assert code == EXIT_OK and rows[-1]["verdict"] == "pass" and len(rows) == 2


def test_exit_code_mapping():
    assert _exit_for({"pass"}, True) == EXIT_OK
    assert _exit_for({"pass", "fail", "inconclusive"}, True) == EXIT_FAIL
    assert _exit_for({"inconclusive"}, False) == EXIT_OK
    assert _exit_for({"inconclusive"}, True) == EXIT_INCONCLUSIVE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gauss_convex", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
