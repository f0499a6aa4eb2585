import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from alcisep.cli import main
from support import fixture

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())
HAVE_Z3 = shutil.which("z3") is not None


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    rep = json.loads(out)
    jsonschema.validate(rep, SCHEMA)
    return code, rep


def test_strong_inseparable_exit_code(capsys):
    code, out, _ = run(capsys, "check-strong", "--kb", str(fixture("self_loop.kb")))
    assert code == 1
    assert "Inseparable" in out and "Ψ witness for (a, b)" in out


def test_strong_separable_exit_code(capsys):
    code, out, _ = run(capsys, "check-strong", "--kb", str(fixture("self_loop_full.kb")))
    assert code == 0 and "separator: not A" in out


def test_weak_projective_separable(capsys):
    code, rep = report(capsys, "check-weak", "--kb", str(fixture("cycle_n2.kb")),
                       "--projective", "--helpers", "1")
    assert code == 0 and rep["status"] == "Separable"
    assert rep["certificate"]["separator"] == "not H1 or exists R . exists R . H1"


def test_weak_unknown_exit_code(capsys):
    code, rep = report(capsys, "check-weak", "--kb", str(fixture("branching.kb")), "--max-size", "6",
                       "--helpers", "0", "--depth", "1", "--outdegree", "1")
    assert code == 2 and rep["status"] == "Unknown"


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 64
    assert run(capsys)[0] == 64
    assert run(capsys, "check-weak")[0] == 64  # --kb missing
    assert run(capsys, "check-weak", "--kb", str(fixture("self_loop.kb")), "--max-size", "0")[0] == 64
    kb = str(fixture("self_loop.kb"))
    assert run(capsys, "find-separator", "--kb", kb, "--helpers", "1")[0] == 64
    assert run(capsys, "find-separator", "--kb", kb, "--strong", "--projective")[0] == 64


def test_input_errors(capsys, tmp_path):
    code, _, err = run(capsys, "check-strong", "--kb", str(tmp_path / "missing.kb"))
    assert code == 65 and "cannot read" in err
    bad = tmp_path / "bad.kb"
    bad.write_text("database { R(a, }")
    assert run(capsys, "check-strong", "--kb", str(bad))[0] == 65
    undeclared = tmp_path / "undeclared.kb"
    undeclared.write_text("database { A(a); } positive { a } negative { zz }")
    assert run(capsys, "check-strong", "--kb", str(undeclared))[0] == 65


def test_parse_warnings_go_to_stderr(capsys, tmp_path):
    same = tmp_path / "same.kb"
    same.write_text("database { A(a); } positive { a } negative { a }")
    code, _, err = run(capsys, "check-strong", "--kb", str(same))
    assert code == 1 and err.startswith("warning:")


def test_json_is_deterministic(capsys):
    argv = ("check-strong", "--kb", str(fixture("self_loop.kb")), "--json")
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]
    argv = ("find-separator", "--kb", str(fixture("branching_full.kb")), "--max-size", "5", "--json")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


@pytest.mark.parametrize("argv", [
    ("check-strong", "--kb", "self_loop.kb"),
    ("check-strong", "--kb", "self_loop_full.kb"),
    ("check-strong", "--kb", "self_loop_full.kb", "--no-synthesize"),
    ("check-weak", "--kb", "cycle_n2.kb", "--projective"),
    ("check-weak", "--kb", "cycle_n2_serial.kb", "--projective", "--max-size", "4"),
    ("find-separator", "--kb", "branching_full.kb", "--max-size", "5"),
    ("find-separator", "--kb", "self_loop_full.kb", "--strong", "--max-size", "3"),
    ("check-weak", "--kb", "relativized.kb", "--max-size", "6", "--helpers", "0"),
])
def test_reports_verify(capsys, tmp_path, argv):
    argv = tuple(str(fixture(a)) if a.endswith(".kb") else a for a in argv)
    _, rep = report(capsys, *argv)
    assert rep["status"] in ("Separable", "Inseparable")
    path = tmp_path / "report.json"
    path.write_text(json.dumps(rep))
    code, out, _ = run(capsys, "--verify-certificate", str(path))
    assert code == 0 and out.startswith("VALID")


def test_tampered_reports_are_rejected(capsys, tmp_path):
    _, rep = report(capsys, "check-strong", "--kb", str(fixture("self_loop_full.kb")))
    rep["certificate"]["separator"] = "A"
    path = tmp_path / "report.json"
    path.write_text(json.dumps(rep))
    code, out, _ = run(capsys, "--verify-certificate", str(path))
    assert code == 1 and out.startswith("INVALID")

    _, rep = report(capsys, "check-weak", "--kb", str(fixture("cycle_n2.kb")), "--projective")
    rep["certificate"]["perNegative"]["b"]["separator"] = "exists R . top"
    path.write_text(json.dumps(rep))
    assert run(capsys, "--verify-certificate", str(path))[0] == 1

    _, rep = report(capsys, "check-strong", "--kb", str(fixture("self_loop.kb")))
    rep["kbText"] = rep["kbText"].replace("signature { R }", "signature { R A }")
    rep["signature"] = ["A", "R"]
    path.write_text(json.dumps(rep))
    assert run(capsys, "--verify-certificate", str(path))[0] == 1


def test_malformed_report_is_an_input_error(capsys, tmp_path):
    path = tmp_path / "report.json"
    path.write_text("{not json")
    assert run(capsys, "--verify-certificate", str(path))[0] == 65
    path.write_text(json.dumps({"status": "Separable"}))
    assert run(capsys, "--verify-certificate", str(path))[0] == 65


def test_show(capsys):
    code, out, _ = run(capsys, "show", "--kb", str(fixture("self_loop.kb")), "--types")
    assert code == 0 and out.startswith("3 realizable types")
    code, out, _ = run(capsys, "show", "--kb", str(fixture("cycle_n2.kb")), "--bisim", "--json")
    pairs = {tuple(p) for p in json.loads(out)["bisimulation"]}
    # every database element has R-successors and R-predecessors
    assert ("a", "b") in pairs and ("a", "b1") in pairs
    code, out, _ = run(capsys, "show", "--kb", str(fixture("self_loop.kb")))
    assert code == 0 and "signature" in out


def test_emit_fo_writes_tptp(capsys, tmp_path):
    out = tmp_path / "p.p"
    code, stdout, _ = run(capsys, "emit-fo", "--kb", str(fixture("self_loop.kb")), "--dialect", "gf",
                          "--out", str(out))
    assert code == 0 and stdout == ""
    from alcisep.tptp import check_fof
    check_fof(out.read_text())


def test_emit_fo_with_fake_prover(capsys, tmp_path):
    script = tmp_path / "prover.py"
    script.write_text("print('% SZS status Theorem')\n")
    prover = f"{sys.executable} {script} {{file}}"
    code, rep = report(capsys, "emit-fo", "--kb", str(fixture("self_loop.kb")), "--prove",
                       "--prover", prover)
    assert code == 0 and rep["certificate"]["pairs"][0]["szs"] == "Theorem"
    code, _, _ = run(capsys, "--prover", f"{sys.executable} -c pass", "emit-fo",
                     "--kb", str(fixture("self_loop.kb")), "--prove")
    assert code == 2


@pytest.mark.skipif(not HAVE_Z3, reason="z3 is not installed")
def test_emit_fo_prove_with_z3(capsys, tmp_path):
    code, rep = report(capsys, "emit-fo", "--kb", str(fixture("self_loop.kb")), "--prove", "--timeout", "20")
    assert code == 0 and rep["status"] == "Separable"
    path = tmp_path / "report.json"
    path.write_text(json.dumps(rep))
    assert run(capsys, "--verify-certificate", str(path), "--timeout", "20")[0] == 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "alcisep.cli", "check-strong",
                           "--kb", str(fixture("self_loop_full.kb"))], capture_output=True, text=True)
    assert proc.returncode == 0 and "Separable" in proc.stdout
