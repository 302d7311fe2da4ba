"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line
and the lines are repeated in the terminal summary."""

import itertools
import json
import random
import time

from fondplan import BENCHMARK_DIR
from fondplan.generators import random_task
from fondplan.heuristic import FFHeuristic
from fondplan.model import PartialState, applicable, apply_outcome, binary_task, regress
from fondplan.pddl import ground, load
from fondplan.planner import SolveConfig, Verdict, solve
from fondplan.sampling import ALL, SamplingSchedule, run_with_sampling
from fondplan.validator import oracle_solve, validate_strong_cyclic

from test_heuristic import additive_reference, one_action_task, store_with

ABLATIONS = ("object_sampling", "poisoning", "fsap_penalty", "full_scd_marking", "force_1safe")


def run_row(row, **kw):
    dom, prob = load(row["domain"], row["problem"])
    return run_with_sampling(dom, prob, SolveConfig(**kw))


def test_every_strong_cyclic_result_validates(acceptance, suite_rows):
    checked, bad = 0, []
    for row in suite_rows:
        res = run_row(row)
        if res.solved:
            checked += 1
            if not validate_strong_cyclic(res.policy, res.task).valid:
                bad.append(row["problem"])
    rng = random.Random(1)
    for _ in range(300):
        t = random_task(rng)
        res = solve(t)
        if res.solved:
            checked += 1
            if not validate_strong_cyclic(res.policy, t).valid:
                bad.append(t.dump())
    ok = not bad and checked > 0
    acceptance(1, ok, f"{checked} StrongCyclic results validated, {len(bad)} invalid")
    assert ok, bad[:3]


def test_random_tasks_match_the_oracle(acceptance):
    rng = random.Random(20240)
    t0 = time.monotonic()
    n, mismatches, solvable = 1000, [], 0
    for _ in range(n):
        t = random_task(rng, max_vars=8, max_actions=6, max_outcomes=2)
        truth = oracle_solve(t).solvable
        res = solve(t, SolveConfig(time_limit=60))
        solvable += bool(truth)
        expected = Verdict.STRONG_CYCLIC if truth else Verdict.NO_PLAN
        if res.verdict is not expected:
            mismatches.append(t.dump())
    elapsed = time.monotonic() - t0
    ok = not mismatches and elapsed < 300
    acceptance(2, ok, f"{n - len(mismatches)}/{n} verdicts match the oracle "
               f"({solvable} solvable) in {elapsed:.1f}s (limit 300s)")
    assert ok, mismatches[:3]


def test_micro_suite(acceptance, suite_rows):
    slow, invalid = [], []
    solved: dict[str, list[bool]] = {}
    worst = 0.0
    for row in suite_rows:
        t0 = time.monotonic()
        res = run_row(row, time_limit=10)
        took = time.monotonic() - t0
        worst = max(worst, took)
        good = res.solved and validate_strong_cyclic(res.policy, res.task).valid
        if took >= 10:
            slow.append(row["problem"])
        if not good:
            invalid.append(row["problem"])
        solved.setdefault(row["tag"], []).append(good and took < 10)
    cov = sum(sum(v) / len(v) for v in solved.values()) / len(solved)
    ok = not slow and not invalid and cov == 1.0
    acceptance(3, ok, f"{len(suite_rows)} instances in {len(solved)} domains, normalized coverage "
               f"{cov:.2f}, slowest {worst:.2f}s (limit 10s)")
    assert ok, (slow, invalid)


def test_crafted_unsolvable_instances(acceptance, unsolvable_rows, trap_task):
    wrong = [r["problem"] for r in unsolvable_rows if run_row(r).verdict is not Verdict.NO_PLAN]
    if solve(trap_task).verdict is not Verdict.NO_PLAN:
        wrong.append("trap")
    ok = not wrong
    acceptance(4, ok, f"{len(unsolvable_rows) + 1 - len(wrong)}/{len(unsolvable_rows) + 1} "
               "unsolvable instances return NoStrongCyclicPlan")
    assert ok, wrong


def test_heuristic_reference_and_hand_values(acceptance):
    rng = random.Random(77)
    diffs = 0
    for _ in range(100):
        t = random_task(rng)
        s = tuple(rng.randint(0, 1) for _ in t.variables)
        if FFHeuristic(t, penalty=0).evaluate(s).value != additive_reference(t, s, t.goal):
            diffs += 1
    t = one_action_task()
    h = FFHeuristic(t, penalty=10)
    hand = (
        h.evaluate(t.initial_state, fsaps=store_with(t)).value,
        h.evaluate(t.initial_state, fsaps=store_with(t, ({}, 0))).value,
        h.evaluate(t.initial_state, fsaps=store_with(t, ({}, 0), ({1: 0}, 0))).value,
    )
    ok = diffs == 0 and hand == (1, 11, 21)
    acceptance(5, ok, f"{100 - diffs}/100 states equal the additive reference; hand values {hand}")
    assert ok


def test_regression_progression_duality(acceptance):
    rng = random.Random(5)
    samples = violations = 0
    while samples < 10_000:
        t = random_task(rng)
        n = len(t.variables)
        a = rng.choice(t.actions)
        o = rng.choice(a.outcomes)
        p = PartialState({v: rng.randint(0, 1) for v in rng.sample(range(n), rng.randint(0, n))})
        r = regress(p, a, o)
        s = tuple(rng.randint(0, 1) for _ in range(n))
        progresses = applicable(s, a) and p.entailed_by(apply_outcome(s, a, o))
        regresses = r is not None and r.entailed_by(s)
        violations += progresses != regresses
        samples += 1
    ok = violations == 0
    acceptance(6, ok, f"{samples} samples, {violations} duality violations")
    assert ok


def _refire_all_edges(sol):
    before = sol.controller.version
    for node in sol.nodes:
        sid = sol.step_of(node.id)
        if sid is None or sid not in sol.controller.steps:
            continue
        for k, dst in list(sol.controller.steps[sid].out.items()):
            sol.fpr(node.id, dst, k)
    return sol.controller.version == before


def test_fpr_invariants(acceptance, suite_rows):
    tasks = [ground(*load(r["domain"], r["problem"])) for r in suite_rows]
    rng = random.Random(8)
    tasks += [random_task(rng) for _ in range(200)]
    broken, checked = [], 0
    for t in tasks:
        try:
            res = solve(t, SolveConfig(check_invariants=True))
        except AssertionError as e:
            broken.append(f"{t.name}: {e}")
            continue
        if res.solution is None:
            continue
        sol = res.solution
        try:
            sol.controller.check_edges()
            sol.controller.check_regression()
        except AssertionError as e:
            broken.append(f"{t.name}: {e}")
        for step in sol.controller.steps.values():
            step.sc = False
        if not _refire_all_edges(sol):
            broken.append(f"{t.name}: fpr changed a consistent controller")
        checked += 1
    ok = not broken
    acceptance(7, ok, f"invariants checked after every step on {len(tasks)} tasks; "
               f"fpr idempotent on {checked - len(broken)}/{checked} final controllers")
    assert ok, broken[:3]


def test_ablations(acceptance, suite_rows, unsolvable_rows):
    rows = suite_rows + unsolvable_rows
    rng = random.Random(99)
    rand = [random_task(rng) for _ in range(150)]
    full_rows = {r["problem"] for r in rows if run_row(r, time_limit=10).solved}
    full_rand = {i for i, t in enumerate(rand) if solve(t, SolveConfig(time_limit=10)).solved}
    problems = []
    for flag in ABLATIONS:
        kw = {flag: False, "time_limit": 10}
        for r in rows:
            res = run_row(r, **kw)
            if res.solved:
                if r["problem"] not in full_rows:
                    problems.append(f"{flag}: {r['problem']} not solved by the full configuration")
                if not validate_strong_cyclic(res.policy, res.task).valid:
                    problems.append(f"{flag}: invalid policy on {r['problem']}")
        for i, t in enumerate(rand):
            res = solve(t, SolveConfig(**kw))
            if res.solved:
                if i not in full_rand:
                    problems.append(f"{flag}: random task {i} not solved by the full configuration")
                if not validate_strong_cyclic(res.policy, t).valid:
                    problems.append(f"{flag}: invalid policy on random task {i}")
    ok = not problems
    acceptance(8, ok, f"{len(ABLATIONS)} single-flag-off configurations on {len(rows) + len(rand)} tasks; "
               f"{len(problems)} subset or validity violations")
    assert ok, problems[:5]


def test_sampling_on_symmetric_spares(acceptance):
    d = BENCHMARK_DIR / "tireworld-spares"
    dom, prob = load(d / "domain.pddl", d / "p01.pddl")
    res = run_with_sampling(dom, prob)
    original = ground(dom, prob)
    first = res.attempts[0]
    accepted = (first.rung == "1" and first.accepted and res.stats.rung == "1"
                and validate_strong_cyclic(res.policy, original).valid)
    schedule = SamplingSchedule().budgets(3600)
    expected = [(1, 60.0), (2, 240.0), (4, 30.0), (8, 30.0), (ALL, 3240.0)]
    ok = accepted and schedule == expected
    acceptance(9, ok, f"rung-1 policy {'validates' if accepted else 'does not validate'} on the original "
               f"task; schedule {[(k, int(t)) for k, t in schedule]}")
    assert ok


def test_determinism(acceptance, suite_rows):
    diffs = []
    for row in suite_rows:
        a, b = run_row(row, seed=3), run_row(row, seed=3)
        if a.policy.dumps(a.task) != b.policy.dumps(b.task):
            diffs.append(f"policy {row['problem']}")
        sa = json.dumps(a.stats.to_dict(timing=False), sort_keys=True)
        sb = json.dumps(b.stats.to_dict(timing=False), sort_keys=True)
        if sa != sb:
            diffs.append(f"stats {row['problem']}")
    ok = not diffs
    acceptance(10, ok, f"{len(suite_rows)} instances solved twice; {len(diffs)} byte differences "
               "in policy JSON or stats (timing excluded)")
    assert ok, diffs
