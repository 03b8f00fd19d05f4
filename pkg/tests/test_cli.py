import json
import shutil
import subprocess

import pytest

from bslts.cli import main

from conftest import MODELS


@pytest.fixture
def work(tmp_path):
    for p in MODELS.iterdir():
        shutil.copy(p, tmp_path / p.name)
    return tmp_path


def test_gen_writes_dump_and_dot(work, capsys):
    assert main(["gen", str(work / "demoney.mch"), "--dot", str(work / "out.dot")]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["minimal"] is True
    assert "[][G]GetData" in (work / "out.dot").read_text()


def test_gen_budget_one_warns(work, capsys):
    assert main(["gen", str(work / "demoney.mch"), "--budget", "1", "-o", str(work / "d.json")]) == 0
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "not minimal" in captured.err
    data = json.loads((work / "d.json").read_text())
    assert data["minimal"] is False
    assert {t["d_provenance"] for t in data["transitions"] if t["source"] != "Init"} == {"GuardByDefault"}


def test_budget_from_environment(work, capsys, monkeypatch):
    monkeypatch.setenv("BSLTS_BUDGET", "1")
    main(["gen", str(work / "demoney.mch")])
    assert json.loads(capsys.readouterr().out)["budget"] == 1
    monkeypatch.setenv("BSLTS_BUDGET", "lots")
    assert main(["gen", str(work / "demoney.mch")]) == 3


def test_check_dump(work, capsys):
    dump = work / "demoney_r1.slts"
    assert main(["gen-ref", str(work / "demoney_r1.ref"), "-o", str(dump)]) == 0
    capsys.readouterr()
    assert main(["check", str(dump), "--props", str(work / "atomicity.props"), "--syntactic"]) == 0
    lines = [ln for ln in capsys.readouterr().out.splitlines() if not ln.startswith(" ")]
    assert lines == ["F1: True (syntactic-case-5)", "F2: True (syntactic-case-7)", "F3: True (syntactic-case-7)",
                     "F4: True (syntactic-case-7)", "F5: True (syntactic-case-5)"]


def test_check_semantic_needs_model(work, capsys):
    main(["gen", str(work / "toggle.mch"), "-o", str(work / "t.json")])
    props = work / "t.props"
    props.write_text("ENABLED (x = TRUE) Flip\n")
    assert main(["check", str(work / "t.json"), "--props", str(props), "--semantic"]) == 3
    assert main(["check", str(work / "toggle.mch"), "--props", str(props), "--semantic"]) == 1
    assert "False (semantic)" in capsys.readouterr().out


def test_check_inconclusive_exit(work, capsys):
    props = work / "c.props"
    props.write_text("CROSSABLE (Error = FALSE) GetData -> (Error = TRUE)\n")
    assert main(["check", str(work / "demoney.mch"), "--props", str(props), "--budget", "1"]) == 2
    assert "Inconclusive" in capsys.readouterr().out


def test_gen_ref_reports(work, capsys):
    assert main(["gen-ref", str(work / "demoney_r1.ref")]) == 0
    out = capsys.readouterr().out
    assert "unreached: StatusWord/=ISO_Ok & CurTransaction/=None" in out
    assert "Demoney_R1|ref|liveness VALID" in out
    assert main(["gen-ref", str(work / "toggle_broken.ref")]) == 1
    assert "INVALID x=TRUE, y=TRUE" in capsys.readouterr().out
    assert main(["gen-ref", str(work / "counter_variant.ref")]) == 1
    assert main(["gen-ref", str(work / "demoney.mch")]) == 3


def test_explicit_abstraction(work, tmp_path_factory, capsys):
    other = tmp_path_factory.mktemp("elsewhere")
    shutil.copy(work / "demoney_r1.ref", other / "r1.ref")
    assert main(["gen-ref", str(other / "r1.ref")]) == 3
    assert "Demoney" in capsys.readouterr().err
    assert main(["gen-ref", str(other / "r1.ref"), "--abstract", str(work / "demoney.mch")]) == 0


def test_pos_listing(work, capsys):
    assert main(["pos", str(work / "toggle.mch")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "Toggle|completeness validity VALID proved" in lines
    assert "Toggle|x=TRUE|Flip|2 validity VALID proved" in lines


def test_assumption_file(work, capsys):
    (work / "a.txt").write_text("Demoney|Error=FALSE|Reset|1 VALID\n")
    main(["gen", str(work / "demoney.mch"), "--budget", "1", "--assume", str(work / "a.txt")])
    data = json.loads(capsys.readouterr().out)
    reset = [t for t in data["transitions"] if t["source"] == "Error=FALSE" and t["event"] == "Reset"]
    assert {t["d_provenance"] for t in reset} == {"Assumed"}
    (work / "bad.txt").write_text("nonsense\n")
    assert main(["gen", str(work / "demoney.mch"), "--assume", str(work / "bad.txt")]) == 3


def test_oracle_command(work, capsys):
    assert main(["oracle", str(work / "demoney.mch"), "--depth", "3"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "equal"
    assert main(["oracle", str(work / "demoney.mch"), "--depth", "-1"]) == 3


@pytest.mark.parametrize("argv", [
    ["gen", "missing.mch"],
    ["gen", "{models}/demoney.mch", "--budget", "0"],
    ["check", "{models}/demoney.mch", "--props", "{models}/demoney.mch"],
])
def test_input_errors(argv, work, capsys):
    argv = [a.format(models=work) for a in argv]
    assert main(argv) == 3
    assert capsys.readouterr().err.startswith("error: ")


def test_incomplete_needs_force(work, capsys):
    src = work / "p.mch"
    src.write_text("MACHINE P VARIABLES x INVARIANT x : BOOL ASSERTIONS x = TRUE "
                   "INITIALISATION x := TRUE EVENTS Go = x := FALSE END")
    assert main(["gen", str(src)]) == 3
    assert main(["gen", str(src), "--force"]) == 0


def test_outputs_are_deterministic(work, capsys):
    main(["gen", str(work / "counter.mch")])
    first = capsys.readouterr().out
    main(["gen", str(work / "counter.mch")])
    assert capsys.readouterr().out == first


def test_console_script(work):
    exe = shutil.which("bslts")
    if exe is None:
        pytest.skip("package not installed")
    proc = subprocess.run([exe, "oracle", str(work / "toggle.mch"), "--depth", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "equal" in proc.stdout
