"""Command-line behaviour: exit codes, outputs and golden JSON reports.

Set ``SBLKIT_REGEN_GOLDEN=1`` to rewrite the golden files.
"""

import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from sblkit.cli import main

ROOT = Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"
GOLDEN = Path(__file__).resolve().parent / "golden"

CASES = {
    "analyze_cattaneo": (["analyze", str(MODELS / "cattaneo.model"), "--samples", "32"], 0),
    "analyze_wave": (["analyze", str(MODELS / "table1_row4.model"), "--samples", "16"], 0),
    "verify_burgers": (["verify", str(MODELS / "burgers.model"), str(MODELS / "burgers_energy.sbl"), "--samples", "32"], 0),
    "verify_maxwell_div": (["verify", str(MODELS / "maxwell.model"), str(MODELS / "maxwell_divE.sbl"), "--samples", "16"], 1),
    "derive_entropy": (["cattaneo-derive", str(MODELS / "cattaneo.spec"), str(MODELS / "cattaneo_entropy.params"), "--samples", "64"], 0),
}


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def close(a, b, path="$"):
    if isinstance(a, dict):
        assert isinstance(b, dict) and set(a) == set(b), path
        for k in a:
            close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert isinstance(b, list) and len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            close(x, y, f"{path}[{i}]")
    elif isinstance(a, float) or isinstance(b, float):
        assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12), f"{path}: {a} != {b}"
    else:
        assert a == b, path


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_reports(name, capsys, tmp_path, monkeypatch):
    argv, expected_code = CASES[name]
    if argv[0] == "cattaneo-derive":
        argv = argv + ["--out-dir", str(tmp_path)]
    code, out, _ = run(argv, capsys)
    assert code == expected_code
    report = json.loads(out)
    golden = GOLDEN / f"{name}.json"
    if os.environ.get("SBLKIT_REGEN_GOLDEN"):
        GOLDEN.mkdir(exist_ok=True)
        golden.write_text(out, encoding="utf-8")
    close(report, json.loads(golden.read_text(encoding="utf-8")))


def test_reports_are_deterministic(capsys):
    argv = CASES["analyze_cattaneo"][0]
    assert run(argv, capsys)[1] == run(argv, capsys)[1]


def test_analyze_report_content(capsys):
    _, out, _ = run(CASES["analyze_cattaneo"][0], capsys)
    rep = json.loads(out)
    assert rep["schema"] == 1 and rep["command"] == "analyze"
    assert rep["classification"]["holonomic"] == "Holonomic"
    assert rep["classification"]["elliptic"] is True


def test_divergence_note(capsys):
    _, out, _ = run(CASES["verify_maxwell_div"][0], capsys)
    assert "divergence" in json.loads(out)["note"]


def test_text_format_and_json_file(capsys, tmp_path):
    target = tmp_path / "r.json"
    code, out, _ = run(CASES["verify_burgers"][0] + ["--format", "text", "--json", str(target)], capsys)
    assert code == 0 and out.strip().endswith("PASS")
    assert json.loads(target.read_text())["verification"]["passed"] is True


def test_require_definite_and_inequality(capsys, tmp_path):
    cand = tmp_path / "c.sbl"
    cand.write_text("[K0]\nu^3\n[K.1]\n3*u^4/4\n[Q]\n-3*u^3\n")
    code, _, _ = run(["verify", str(MODELS / "burgers.model"), str(cand), "--samples", "16", "--require-definite"], capsys)
    assert code == 1
    code, _, _ = run(["verify", str(MODELS / "burgers.model"), str(cand), "--samples", "16"], capsys)
    assert code == 0
    # burgers.model relaxes with Pi = -u, so the energy law has Q = -u^2 < 0
    code, _, _ = run(["verify", str(MODELS / "burgers.model"), str(MODELS / "burgers_energy.sbl"), "--samples", "16", "--require-inequality"], capsys)
    assert code == 1


def test_cattaneo_derive_outputs(capsys, tmp_path):
    code, _, _ = run(["cattaneo-derive", str(MODELS / "cattaneo.spec"), str(MODELS / "cattaneo_antientropy.params"), "--out-dir", str(tmp_path), "--require-entropy", "--samples", "32"], capsys)
    assert code == 1
    assert (tmp_path / "cattaneo.model").exists() and (tmp_path / "cattaneo.sbl").exists()
    code, _, _ = run(["verify", str(tmp_path / "cattaneo.model"), str(tmp_path / "cattaneo.sbl"), "--samples", "32"], capsys)
    assert code == 0


def test_grid_csv(capsys, tmp_path):
    code, out, _ = run(["analyze", str(MODELS / "table1_row4.model"), "--samples", "8", "--grid-csv", str(tmp_path / "g.csv"), "--grid-size", "5", "--format", "text"], capsys)
    assert code == 0
    lines = (tmp_path / "g_1.csv").read_text().splitlines()
    assert lines[0] == "y1,y2,value,truncated" and len(lines) == 26
    assert (tmp_path / "g_2.csv").exists()


def test_grid_on_elliptic_is_numeric_error(capsys, tmp_path):
    code, _, err = run(["analyze", str(MODELS / "table1_row3.model"), "--samples", "8", "--grid-csv", str(tmp_path / "g.csv")], capsys)
    assert code == 3 and "numeric error" in err


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["analyze", "/nonexistent.model"],
    ["verify", str(MODELS / "burgers.model"), str(MODELS / "maxwell_energy.sbl")],
    ["analyze", str(MODELS / "burgers.model"), "--samples", "0"],
])
def test_input_errors(argv, capsys):
    code, _, _ = run(argv, capsys)
    assert code == 2


def test_syntax_error_reports_location(capsys, tmp_path):
    bad = tmp_path / "bad.model"
    bad.write_text("[system]\nspatial_dim = 1\n[fields]\nu = 0, 1\n[density]\nu = sin(\n[flux.1]\nu = u\n")
    code, _, err = run(["analyze", str(bad)], capsys)
    assert code == 2 and f"{bad}:6" in err


def test_degenerate_lambda0_exit_code(capsys, tmp_path):
    params = tmp_path / "p.params"
    params.write_text("[params]\nlambda0_hat = (theta - 1)^2\n")
    code, _, err = run(["cattaneo-derive", str(MODELS / "cattaneo.spec"), str(params), "--out-dir", str(tmp_path)], capsys)
    assert code == 3


def test_export_zoo(capsys, tmp_path):
    code, out, _ = run(["export-zoo", str(tmp_path)], capsys)
    assert code == 0 and len(out.splitlines()) == len(list(tmp_path.iterdir()))


def test_console_module_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sblkit", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("sblkit ")
