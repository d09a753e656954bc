import json
import subprocess
import sys

import pytest

from parschema.cli import COMMANDS, main

ALL = [(g, c) for g, cmds in COMMANDS.items() for c in cmds]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_every_group_is_present():
    assert {g: sorted(c) for g, c in COMMANDS.items()} == {
        "schema": ["iosets", "run", "validate"],
        "loop": ["depth", "forward", "separate"],
        "dep": ["cone", "equations", "exec", "solve", "wavefront"],
        "ring": ["diagram", "equalize", "fault", "handshake", "sort"],
        "setdef": ["check", "encode", "solve", "variants"],
        "dps": ["petri", "pr", "run"],
    }


@pytest.mark.parametrize("group,cmd", ALL)
def test_selftest_passes(group, cmd, capsys):
    code, out, err = run([group, cmd, "--selftest"], capsys)
    assert code == 0, err
    assert out.splitlines()[-1] == "selftest: pass"
    assert out.startswith("# parschema report v1\n")


@pytest.mark.parametrize("group,cmd", ALL)
def test_records_format_is_versioned_json(group, cmd, capsys):
    code, out, _ = run([group, cmd, "--selftest", "--format", "records", "--seed", "3"], capsys)
    assert code == 0
    lines = [json.loads(line) for line in out.splitlines()]
    assert lines[0]["format"] == "parschema.report" and lines[0]["version"] == 1
    assert lines[0]["seed"] == 3 and lines[0]["fuel"] == 10000
    assert all("type" in rec for rec in lines[1:])


@pytest.mark.parametrize("group,cmd", ALL)
def test_reports_are_deterministic(group, cmd, capsys):
    argv = [group, cmd, "--selftest", "--seed", "11"]
    first = run(argv, capsys)
    second = run(argv, capsys)
    assert first == second


def test_equalize_worked_vector(capsys):
    code, out, _ = run(["ring", "equalize", "--start", "4,56,34,10,20,50,12,73,16,23"], capsys)
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("equalize:"))
    assert "converged=True" in line and "total=298" in line and "conserved=True" in line
    assert "within_bound=True" in line


def test_recursive_schema_is_a_domain_error(tmp_path, capsys):
    path = tmp_path / "rec.schema"
    path.write_text("start m0\nm0: do A then m1\nproc A start a0 {\n  a0: do A then a1\n}\n")
    code, out, err = run(["schema", "validate", str(path)], capsys)
    assert code == 1
    assert "recursive procedure" in err


def test_wavefront_layer_zero(capsys):
    code, out, _ = run(["dep", "wavefront", "--example", "four-point", "-N", "4"], capsys)
    assert code == 0
    assert "layer 0 (1 points, parallel=True): (1,1,1)" in out


@pytest.mark.parametrize("argv", [["ring"], ["ring", "nosuch"], ["schema", "validate"],
                                  ["schema", "validate", "/no/such/file"], ["dep", "solve", "i = j"],
                                  ["ring", "equalize", "--start", "1,x"], ["dps", "run", "--fuel", "-1", "--selftest"]])
def test_usage_errors_exit_2(argv, capsys):
    code, _, _ = run(argv, capsys)
    assert code == 2


def test_domain_errors_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.dps"
    path.write_text("[dps]\nstart = A\n[system F]\nB = {5}\n")
    code, _, err = run(["dps", "run", str(path)], capsys)
    assert code == 1
    assert "error [data processing]" in err
    code, _, err = run(["ring", "equalize", "--start", "1,2,3"], capsys)
    assert code == 1


def test_minimization_fuel_exhaustion_reported(capsys):
    code, out, _ = run(["dps", "pr", "minimize(sqdiff)", "7", "--fuel", "400"], capsys)
    assert code == 0
    assert "status=fuel-exhausted value=-" in out


def test_console_double_run_byte_identical():
    argv = [sys.executable, "-m", "parschema.cli", "dps", "run", "--selftest", "--strategy", "random", "--seed", "5",
            "--format", "records"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a
