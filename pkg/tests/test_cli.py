"""CLI round trips against frozen output files, plus the exit-code matrix."""

import json
import pathlib
import subprocess
import sys

import pytest

from stackyfans.cli import run_command

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
GOLDEN = FIXTURES / "golden"


def _run(capsys, *argv):
    code = run_command([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


GOLDEN_CASES = [
    (("gbeta", "--input", FIXTURES / "a1.json", "--json"), "a1_gbeta.json"),
    (("present", "--input", FIXTURES / "reduced_torsion_target.json",
      "--json", "--zeros", "3"), "present_reduced.json"),
    (("fantastack", "--input", FIXTURES / "square_cone_fantastack.json",
      "--json"), "square_fantastack.json"),
    (("iso", "--input", FIXTURES / "p1_cox_morphism.json", "--json"),
     "p1_cox_iso.json"),
    (("gms", "--input", FIXTURES / "a1.json", "--json"), "gms_a1.json"),
    (("moduli", "--input", FIXTURES / "p2_cox.json", "--json"),
     "moduli_p2_cox.json"),
    (("gerbe", "--input", FIXTURES / "reduced_torsion_target.json",
      "--zeros", "3", "--json"), "gerbe_reduced.json"),
    (("render", "--input", FIXTURES / "a1.json"), "a1_render.svg"),
]


@pytest.mark.parametrize("argv,golden", GOLDEN_CASES,
                         ids=[g for _, g in GOLDEN_CASES])
def test_golden_output(capsys, argv, golden):
    code, out, err = _run(capsys, *argv)
    assert code == 0, err
    assert out == (GOLDEN / golden).read_text()


def test_output_is_deterministic(capsys):
    results = []
    for _ in range(2):
        code, out, _ = _run(capsys, "gms", "--input", FIXTURES / "a1.json",
                            "--json")
        assert code == 0
        results.append(out)
    assert results[0] == results[1]


def test_validate_reports_rather_than_refuses(capsys):
    code, out, _ = _run(capsys, "validate", "--input",
                        FIXTURES / "overlap_invalid.json", "--json")
    assert code == 0
    assert json.loads(out)["valid"] is False


def test_other_commands_refuse_invalid_fan(capsys):
    code, out, err = _run(capsys, "gbeta", "--input",
                          FIXTURES / "overlap_invalid.json")
    assert code == 2
    assert out == ""
    assert "overlap_invalid.json" in err


def test_validate_detects_morphism_files(capsys):
    code, out, _ = _run(capsys, "validate", "--input",
                        FIXTURES / "p1_cox_morphism.json", "--json")
    assert code == 0
    assert json.loads(out)["valid"] is True


def test_malformed_input_names_file_and_field(capsys):
    code, _, err = _run(capsys, "gbeta", "--input", FIXTURES / "malformed.json")
    assert code == 2
    assert "malformed.json.target" in err
    assert "torsion" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = _run(capsys, "gbeta", "--input", tmp_path / "absent.json")
    assert code == 2
    assert "absent.json" in err


def test_unknown_command(capsys):
    assert _run(capsys, "frobnicate", "--input", FIXTURES / "a1.json")[0] == 2


def test_gerbe_requires_zeros(capsys):
    code, _, err = _run(capsys, "gerbe", "--input", FIXTURES / "a1.json")
    assert code == 2
    assert "--zeros" in err


def test_render_refuses_other_ranks(capsys):
    code, _, err = _run(capsys, "render", "--input", FIXTURES / "mu2_line.json")
    assert code == 2
    assert "rank" in err


def test_output_flag_writes_file(capsys, tmp_path):
    dest = tmp_path / "report.json"
    code, out, _ = _run(capsys, "gbeta", "--input", FIXTURES / "a1.json",
                        "--json", "--output", dest)
    assert code == 0
    assert out == ""
    assert dest.read_text() == (GOLDEN / "a1_gbeta.json").read_text()


def test_text_mode_present(capsys):
    code, out, _ = _run(capsys, "present", "--input", FIXTURES / "a1.json")
    assert code == 0
    assert "mu_2" in out


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "stackyfans.cli", "gbeta", "--input",
         str(FIXTURES / "a1.json"), "--json"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "a1_gbeta.json").read_text()
