import csv
import json

from fondplan import BENCHMARK_DIR
from fondplan.cli import REPORT_HEADER, main

TIRE = BENCHMARK_DIR / "tireworld"
UNSOLV = BENCHMARK_DIR / "unsolvable"


def test_plan_writes_all_outputs(tmp_path, capsys):
    out = tmp_path / "pol.json"
    code = main(["plan", str(TIRE / "domain.pddl"), str(TIRE / "p01.pddl"), "-o", str(out)])
    assert code == 0
    assert "StrongCyclic" in capsys.readouterr().out
    rules = json.loads(out.read_text())
    assert rules and all(set(r) == {"partial_state", "action"} for r in rules)
    assert (tmp_path / "pol.txt").exists()
    stats = json.loads((tmp_path / "pol.stats.json").read_text())
    assert stats["verdict"] == "StrongCyclic" and "attempts" in stats
    with open(tmp_path / "pol.stats.csv") as fh:
        assert next(csv.reader(fh)) == REPORT_HEADER


def test_plan_then_validate(tmp_path, capsys):
    out = tmp_path / "pol.json"
    dom, prob = str(TIRE / "domain.pddl"), str(TIRE / "p01.pddl")
    main(["plan", dom, prob, "-o", str(out)])
    capsys.readouterr()
    assert main(["validate", dom, prob, str(out)]) == 0
    assert capsys.readouterr().out.startswith("Valid")


def test_validate_reports_a_witness(tmp_path, capsys):
    out = tmp_path / "empty.json"
    out.write_text("[]")
    assert main(["validate", str(TIRE / "domain.pddl"), str(TIRE / "p01.pddl"), str(out)]) == 1
    text = capsys.readouterr().out
    assert text.startswith("NotClosed") and "witness:" in text


def test_unsolvable_plan_exit_code(tmp_path):
    code = main(["plan", str(TIRE / "domain.pddl"), str(UNSOLV / "tire-nospare.pddl"),
                 "-o", str(tmp_path / "p.json")])
    assert code == 1
    assert json.loads((tmp_path / "p.json").read_text()) == []


def test_oracle(capsys):
    assert main(["oracle", str(TIRE / "domain.pddl"), str(UNSOLV / "tire-nospare.pddl")]) == 1
    assert capsys.readouterr().out.startswith("Unsolvable")
    assert main(["oracle", str(TIRE / "domain.pddl"), str(TIRE / "p01.pddl")]) == 0


def test_input_error_has_position(tmp_path, capsys):
    bad = tmp_path / "bad.pddl"
    bad.write_text("(define (domain d)\n (:predicates (p))\n (:action a :parameters () :precondition (q)\n :effect (p)))\n")
    assert main(["plan", str(bad), str(TIRE / "p01.pddl"), "-o", str(tmp_path / "x.json")]) == 3
    err = capsys.readouterr().err
    assert f"{bad}:3:" in err and "unknown predicate q" in err


def test_missing_file_is_an_input_error(tmp_path, capsys):
    assert main(["oracle", str(tmp_path / "nope.pddl"), str(TIRE / "p01.pddl")]) == 3


def test_toggles_reach_the_stats(tmp_path):
    out = tmp_path / "pol.json"
    main(["plan", str(TIRE / "domain.pddl"), str(TIRE / "p01.pddl"), "-o", str(out),
          "--no-poisoning", "--no-objsampling", "--penalty", "7"])
    stats = json.loads((tmp_path / "pol.stats.json").read_text())
    assert stats["toggles"]["poisoning"] is False and stats["toggles"]["object_sampling"] is False
    assert stats["penalty"] == 7 and stats["rung"] == "ALL"


def test_batch_report(tmp_path, capsys):
    report = tmp_path / "report.csv"
    assert main(["batch", "-o", str(report)]) == 0
    with open(report) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == REPORT_HEADER
    assert all(r[2] == "StrongCyclic" for r in rows[1:])
    assert "normalized           1.00" in capsys.readouterr().out


def test_batch_on_unsolvable_manifest(tmp_path):
    report = tmp_path / "r.csv"
    main(["batch", str(UNSOLV / "manifest.csv"), "-o", str(report)])
    with open(report) as fh:
        verdicts = {r["verdict"] for r in csv.DictReader(fh)}
    assert verdicts == {"NoStrongCyclicPlan"}
