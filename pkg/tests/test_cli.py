"""Command-line surface: outputs, exit codes, and determinism."""

import json
import subprocess
import sys

import pytest

from builders import triangle
from cspgap import cut_family, dicut_family
from cspgap.cli import main
from cspgap.serialize import canonical_dumps, family_to_dict, instance_to_dict


@pytest.fixture
def cut_family_file(tmp_path):
    path = tmp_path / "cut.json"
    path.write_text(canonical_dumps(family_to_dict(cut_family())))
    return str(path)


@pytest.fixture
def dicut_family_file(tmp_path):
    path = tmp_path / "dicut.json"
    path.write_text(canonical_dumps(family_to_dict(dicut_family())))
    return str(path)


@pytest.fixture
def triangle_file(tmp_path):
    path = tmp_path / "triangle.json"
    path.write_text(canonical_dumps(instance_to_dict(triangle())))
    return str(path)


def run_cli(args):
    proc = subprocess.run(
        [sys.executable, "-m", "cspgap.cli", *args],
        capture_output=True,
        text=True,
    )
    return proc


def test_family_stats_cut(cut_family_file, capsys):
    assert main(["family-stats", cut_family_file, "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["rho_lower"] == "1/2"
    assert data["width"] == "1/1"
    assert data["onewise"] == "strong"


def test_family_stats_dicut(dicut_family_file, capsys):
    assert main(["family-stats", dicut_family_file, "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["rho_lower"] == "1/4"
    assert data["width"] == "1/2"
    assert data["onewise"] == "none"


def test_lp_solve_triangle(triangle_file, capsys):
    assert main(["lp-solve", triangle_file, "--brute-force"]) == 0
    out = capsys.readouterr().out
    assert "lp_value: 1/1" in out
    assert "csp_value: 2/3" in out


def test_lp_solve_full_dump(triangle_file, capsys):
    assert main(["lp-solve", triangle_file, "--full", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["lp_value"] == "1/1"
    assert data["solution"]["objective"] == "1/1"
    assert len(data["solution"]["locals"]) == 3
    assert len(data["solution"]["marginals"]) == 3


def test_lp_dump(triangle_file, tmp_path, capsys):
    dump = tmp_path / "lp.txt"
    assert main(["lp-solve", triangle_file, "--dump-lp", str(dump)]) == 0
    capsys.readouterr()
    text = dump.read_text()
    assert text.startswith("maximize")
    assert "all variables >= 0" in text


def test_gap_check_exit_codes(triangle_file, tmp_path, capsys):
    assert main(["gap-check", triangle_file, "--gamma", "1/1", "--beta", "2/3"]) == 0
    capsys.readouterr()
    assert main(["gap-check", triangle_file, "--gamma", "1/1", "--beta", "1/2"]) == 1
    out = capsys.readouterr().out
    assert "soundness" in out
    cert = tmp_path / "cert.json"
    assert main([
        "gap-check", triangle_file, "--gamma", "1/1", "--beta", "2/3",
        "--out", str(cert),
    ]) == 0
    capsys.readouterr()
    assert main(["verify-cert", str(cert)]) == 0
    assert capsys.readouterr().out.startswith("PASS")


def test_gap_check_rejects_bad_targets(triangle_file, capsys):
    assert main(["gap-check", triangle_file, "--gamma", "1/2", "--beta", "2/3"]) == 2


def test_missing_file_is_operational_error(capsys):
    assert main(["lp-solve", "/nonexistent/x.json"]) == 2


def test_verify_tampered_certificate(triangle_file, tmp_path, capsys):
    cert_path = tmp_path / "cert.json"
    main([
        "gap-check", triangle_file, "--gamma", "1/1", "--beta", "2/3",
        "--out", str(cert_path),
    ])
    capsys.readouterr()
    data = json.loads(cert_path.read_text())
    data["lp_value"] = "9/10"
    cert_path.write_text(canonical_dumps(data))
    assert main(["verify-cert", str(cert_path)]) == 1
    assert capsys.readouterr().out.startswith("FAIL")


def test_gap_search_writes_certificate(cut_family_file, tmp_path):
    cert = tmp_path / "found.json"
    proc = run_cli([
        "gap-search", "--family", cut_family_file, "--gamma", "1/1",
        "--beta", "4/5", "--n-max", "4", "--max-constraints", "3",
        "--budget", "300", "--out", str(cert), "--json",
    ])
    assert proc.returncode == 0
    summary = json.loads(proc.stdout)
    assert summary["found"] is True
    assert cert.exists()
    verify = run_cli(["verify-cert", str(cert)])
    assert verify.returncode == 0


def test_gap_search_not_found_exit_one(cut_family_file):
    proc = run_cli([
        "gap-search", "--family", cut_family_file, "--gamma", "1/1",
        "--beta", "1/10", "--n-max", "3", "--max-constraints", "2",
        "--budget", "100",
    ])
    assert proc.returncode == 1
    assert "no (1/1, 1/10) gap" in proc.stderr


def test_json_outputs_are_byte_identical_across_runs(cut_family_file):
    args = ["family-stats", cut_family_file, "--json", "--seed", "7"]
    first = run_cli(args)
    second = run_cli(args)
    assert first.returncode == second.returncode == 0
    assert first.stdout == second.stdout


def test_bundled_data_files_match_documented_values():
    import pathlib

    data = pathlib.Path(__file__).resolve().parent.parent / "data"
    assert main(["family-stats", str(data / "cut_family.json"), "--json"]) == 0
    assert main(["lp-solve", str(data / "c5.json"), "--brute-force", "--json"]) == 0
    assert main(["lp-solve", str(data / "triangle.json"), "--brute-force"]) == 0


def test_progress_goes_to_stderr_not_stdout(cut_family_file, tmp_path):
    proc = run_cli([
        "gap-search", "--family", cut_family_file, "--gamma", "1/1",
        "--beta", "1/10", "--n-max", "3", "--max-constraints", "3",
        "--budget", "200", "--json",
    ])
    json.loads(proc.stdout)  # stdout stays parseable
    assert "evaluated" in proc.stderr or "no (" in proc.stderr
