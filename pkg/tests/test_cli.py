from __future__ import annotations

import json
import subprocess
import sys

import pytest

from conftest import MACHINES
from pctlsat.cli import main
from pctlsat.pctl import MarkovChain, parse_formula


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def param3(tmp_path, capsys):
    formula, model = tmp_path / "psi3.pctl", tmp_path / "w3.json"
    assert run(capsys, "compile", "param", "--n", 3, "--out", formula)[0] == 0
    assert run(capsys, "witness", "param", "--n", 3, "--out", model)[0] == 0
    return formula, model


def test_check_sat_and_unsat(capsys, tmp_path, param3):
    formula, model = param3
    code, out, _ = run(capsys, "check", "--model", model, "--formula", formula, "--state", "t3")
    assert code == 0 and out.strip() == "SAT at t3"
    false = tmp_path / "f.pctl"
    false.write_text("P=1 [ X false ]\n")
    for state in ("t3", "t0", "b1"):
        code, out, _ = run(capsys, "check", "--model", model, "--formula", false, "--state", state)
        assert code == 1 and out.startswith("UNSAT")


def test_check_printed_layout_is_unsat(capsys, tmp_path, param3):
    formula, _ = param3
    model = tmp_path / "printed.json"
    run(capsys, "witness", "param", "--n", 3, "--printed", "--out", model)
    assert len(MarkovChain.load(model)) == 10
    code, _, _ = run(capsys, "check", "--model", model, "--formula", formula, "--state", "t3")
    assert code == 1


def test_check_table_and_json(capsys, tmp_path, param3):
    _, model = param3
    f = tmp_path / "x.pctl"
    f.write_text("P>0 [ X a ] & P=1 [ F<=2 h ]")
    code, out, _ = run(capsys, "check", "--model", model, "--formula", f, "--table", "--json")
    report = json.loads(out)
    assert report["state"] == "t3" and [t["conjunct"] for t in report["table"]] == [0, 1]
    assert report["table"][0]["probs"]["t1"] == "12/47"


def test_usage_errors(capsys, tmp_path, param3):
    formula, model = param3
    assert run(capsys, "check", "--model", tmp_path / "nope.json", "--formula", formula)[0] == 2
    assert run(capsys, "check", "--model", model, "--formula", formula, "--state", "zz")[0] == 2
    bad = tmp_path / "bad.pctl"
    bad.write_text("P>=1.5 [ X a ]")
    code, _, err = run(capsys, "check", "--model", model, "--formula", bad)
    assert code == 2 and "1:" in err
    broken = tmp_path / "broken.json"
    broken.write_text('{"states": [{"id": "s", "trans": [["s", "1/2"]]}]}')
    assert run(capsys, "check", "--model", broken, "--formula", formula)[0] == 2
    assert run(capsys, "verify", "one-counter")[0] == 2
    assert run(capsys, "verify", "param")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["compile", "nonsense"])
    assert exc.value.code == 2


def test_invariant_exit_code(capsys, tmp_path):
    constants = tmp_path / "c.json"
    constants.write_text(json.dumps({"q": "1/2", "kappa": ["17/64", "1/32"], "gamma": "3/50"}))
    assert run(capsys, "verify", "param", "--n", 1, "--constants", constants)[0] == 3


def test_verify_param(capsys):
    code, out, _ = run(capsys, "verify", "param", "--n", 5)
    assert code == 0 and "witness: 19 states, start t5 SAT" in out
    code, out, _ = run(capsys, "verify", "param", "--n", 5, "--printed")
    assert code == 1 and "16 states" in out


def test_verify_one_counter(capsys):
    code, out, _ = run(capsys, "verify", "one-counter", "--machine", MACHINES / "loop.mm", "--depth", 8)
    assert code == 0 and out.rstrip().endswith("PASS")
    code, out, _ = run(capsys, "verify", "one-counter", "--machine", MACHINES / "unbounded.mm",
                       "--max-steps", 200)
    assert code == 0 and "no finite witness; formula compiled only" in out


def test_verify_strict_flag_fails(capsys):
    code, out, _ = run(capsys, "verify", "one-counter", "--machine", MACHINES / "loop.mm",
                       "--strict-paper")
    assert code == 1 and "UNSAT" in out


def test_verify_product_recurrence(capsys):
    code, out, _ = run(capsys, "verify", "product", "--m1", MACHINES / "loop.mm",
                       "--m2", MACHINES / "loop.mm", "--partition", MACHINES / "loop_partition.json",
                       "--recurrence", "--json")
    report = json.loads(out)
    assert code == 0 and report["ok"] and report["sat"] and report["label1_recurs"]
    assert report["lint_notes"] == ["recurrence conjunct uses unbounded F"]
    code, out, _ = run(capsys, "verify", "product", "--m1", MACHINES / "sink.mm",
                       "--m2", MACHINES / "sink_partner.mm",
                       "--partition", MACHINES / "sink_partition.json", "--recurrence", "--json")
    report = json.loads(out)
    assert code == 0 and not report["sat"] and not report["label1_recurs"]


def test_translate_and_verify_two_counter(capsys, tmp_path):
    out_dir = tmp_path / "tr"
    assert run(capsys, "translate", "two-counter", "--machine", MACHINES / "swap2.mm", "--out", out_dir)[0] == 0
    assert sorted(p.name for p in out_dir.iterdir()) == ["m1.mm", "m2.mm", "partition.json", "translation.json"]
    assert len((out_dir / "m1.mm").read_text().splitlines()) == 24
    code, out, _ = run(capsys, "verify", "product", "--m1", out_dir / "m1.mm", "--m2", out_dir / "m2.mm",
                       "--partition", out_dir / "partition.json")
    assert code == 0


def test_lint(capsys, tmp_path, param3):
    formula, _ = param3
    assert run(capsys, "lint", "--formula", formula)[0] == 0
    bad = tmp_path / "u.pctl"
    bad.write_text("P>0 [ a U b ]")
    code, out, _ = run(capsys, "lint", "--formula", bad)
    assert code == 1 and "unbounded U" in out


def test_export(capsys, tmp_path, param3):
    _, model = param3
    code, out, _ = run(capsys, "export", "dot", "--model", model)
    assert code == 0 and out.startswith('digraph "chain"')
    code, out, _ = run(capsys, "export", "json", "--model", model)
    assert MarkovChain.loads(out).to_json() == MarkovChain.load(model).to_json()


def test_outputs_are_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.pctl", tmp_path / "b.pctl"
    for path in (a, b):
        run(capsys, "compile", "one-counter", "--machine", MACHINES / "count3.mm", "--out", path)
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.pctl.json").read_bytes() == (tmp_path / "b.pctl.json").read_bytes()
    parse_formula(a.read_text())
    first = run(capsys, "verify", "one-counter", "--machine", MACHINES / "nondet.mm", "--json")[1]
    second = run(capsys, "verify", "one-counter", "--machine", MACHINES / "nondet.mm", "--json")[1]
    assert first == second


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pctlsat", "verify", "param", "--n", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS" in proc.stdout
