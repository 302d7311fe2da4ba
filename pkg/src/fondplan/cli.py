"""Command-line interface: ``fondplan plan | validate | oracle | batch``.

Exit codes: 0 solved or valid, 1 proven unsolvable or invalid policy,
2 resources exhausted or verdict unknown, 3 bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import BENCHMARK_DIR, __version__
from .planner import SolveConfig, Verdict
from .pddl import PddlError, ground, load
from .sampling import run_with_sampling
from .solution import Policy
from .validator import ORACLE_MAX_STATES, VALIDATOR_MAX_STATES, oracle_solve, validate_strong_cyclic

EXIT_OK, EXIT_NO_PLAN, EXIT_EXHAUSTED, EXIT_INPUT = 0, 1, 2, 3

REPORT_HEADER = ["tag", "instance", "verdict", "time_s", "rules", "expansions", "fsaps"]

VERDICT_EXIT = {
    Verdict.STRONG_CYCLIC: EXIT_OK,
    Verdict.NO_PLAN: EXIT_NO_PLAN,
    Verdict.EXHAUSTED: EXIT_EXHAUSTED,
}

log = logging.getLogger("fondplan")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("limits")
    g.add_argument("--time-limit", type=float, default=3600.0, metavar="SEC",
                   help="total wall-clock budget in seconds (default 3600)")
    g.add_argument("--memory-limit", type=float, default=4096.0, metavar="MB",
                   help="internal node-accounting cap in MB (default 4096)")
    g.add_argument("--external-memory-limit", action="store_true",
                   help="disable the internal cap and rely on the OS (ulimit, cgroups)")
    g = p.add_argument_group("features")
    for flag, what in (
        ("objsampling", "redundant-object sampling"),
        ("poisoning", "poisoning of search nodes"),
        ("fsap-penalty", "the FSAP penalty in the heuristic"),
        ("full-scd-marking", "full strong-cyclic marking"),
        ("force-1safe", "forcing 1-safe weak plans"),
    ):
        g.add_argument(f"--no-{flag}", action="store_true", help=f"disable {what}")
    g.add_argument("--penalty", type=int, default=100, metavar="C",
                   help="heuristic cost per triggered FSAP (default 100)")
    g.add_argument("--seed", type=int, default=None, help="seed for object sampling")


def config_from_args(args: argparse.Namespace) -> SolveConfig:
    return SolveConfig(
        time_limit=args.time_limit,
        memory_limit_mb=math.inf if args.external_memory_limit else args.memory_limit,
        object_sampling=not args.no_objsampling,
        poisoning=not args.no_poisoning,
        fsap_penalty=not args.no_fsap_penalty,
        full_scd_marking=not args.no_full_scd_marking,
        force_1safe=not args.no_force_1safe,
        penalty=args.penalty,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fondplan", description="Strong cyclic FOND planner.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="compute a strong cyclic policy")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("-o", "--output", default="policy.json",
                   help="policy JSON path; a .txt rendering is written next to it")
    p.add_argument("--stats", default=None, help="stats JSON path (default: <output stem>.stats.json)")
    p.add_argument("--csv", default=None, help="stats CSV path (default: <output stem>.stats.csv)")
    p.add_argument("--no-validate", action="store_true",
                   help="skip the final check of the policy against the full task")
    _add_solver_flags(p)

    p = sub.add_parser("validate", help="check a policy file")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("policy")
    p.add_argument("--max-states", type=int, default=VALIDATOR_MAX_STATES)

    p = sub.add_parser("oracle", help="decide solvability by explicit enumeration")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("--max-states", type=int, default=ORACLE_MAX_STATES)

    p = sub.add_parser("batch", help="run every instance of a manifest")
    p.add_argument("manifest", nargs="?", default=str(BENCHMARK_DIR / "manifest.csv"),
                   help="CSV with columns tag,domain,problem[,expected] (default: bundled suite)")
    p.add_argument("-o", "--output", default="report.csv")
    p.add_argument("-j", "--jobs", type=int, default=1, help="worker processes (default 1)")
    _add_solver_flags(p)
    return ap


# -- plan --------------------------------------------------------------------

def _stem(path: str) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix == ".json" else p


def solve_files(domain: str, problem: str, cfg: SolveConfig):
    dom, prob = load(domain, problem)
    return run_with_sampling(dom, prob, cfg)


def cmd_plan(args) -> int:
    cfg = config_from_args(args)
    res = solve_files(args.domain, args.problem, cfg)
    task = res.task
    if res.verdict is Verdict.STRONG_CYCLIC and not args.no_validate:
        check = validate_strong_cyclic(res.policy, task)
        if not check.valid:
            print(f"internal error: produced policy is not strong cyclic: {check}", file=sys.stderr)
            return EXIT_EXHAUSTED
    out = Path(args.output)
    stem = _stem(args.output)
    policy = res.policy if res.policy is not None else Policy([])
    out.write_text(policy.dumps(task) + "\n", encoding="utf-8")
    Path(f"{stem}.txt").write_text(policy.text(task) + "\n", encoding="utf-8")
    stats = res.stats.to_dict()
    stats["instance"] = str(args.problem)
    stats["attempts"] = [vars(a) for a in res.attempts]
    Path(args.stats or f"{stem}.stats.json").write_text(json.dumps(stats, indent=1) + "\n", encoding="utf-8")
    with open(args.csv or f"{stem}.stats.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_HEADER)
        w.writerow(report_row(task.name.split("/")[0], args.problem, res.stats))
    print(f"{res.verdict.value}: {len(policy)} rules, {res.stats.expansions} expansions, "
          f"{res.stats.fsaps} FSAPs, rung {res.stats.rung}, {res.stats.time_total:.2f}s")
    return VERDICT_EXIT[res.verdict]


def report_row(tag: str, instance: str, st) -> list:
    return [tag, instance, st.verdict, f"{st.time_total:.3f}", st.rules, st.expansions, st.fsaps]


# -- validate / oracle ---------------------------------------------------------

def cmd_validate(args) -> int:
    dom, prob = load(args.domain, args.problem)
    task = ground(dom, prob)
    try:
        with open(args.policy, encoding="utf-8") as fh:
            data = json.load(fh)
        policy = Policy.from_json(data, task)
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise PddlError(f"bad policy file: {e}", source=args.policy) from None
    res = validate_strong_cyclic(policy, task, args.max_states)
    print(res.status)
    if res.witness is not None:
        shown = task.describe_state(res.witness)
        true_atoms = [k for k, v in shown.items() if v == "true"]
        print("witness: " + json.dumps(true_atoms if len(true_atoms) else shown))
    if res.detail:
        print(res.detail)
    if res.valid:
        return EXIT_OK
    return EXIT_EXHAUSTED if res.status == "Unknown" else EXIT_NO_PLAN


def cmd_oracle(args) -> int:
    dom, prob = load(args.domain, args.problem)
    task = ground(dom, prob)
    res = oracle_solve(task, args.max_states)
    print(f"{res.status} ({res.states} states)")
    return {True: EXIT_OK, False: EXIT_NO_PLAN, None: EXIT_EXHAUSTED}[res.solvable]


# -- batch -------------------------------------------------------------------

def _batch_one(job):
    tag, domain, problem, cfg = job
    t0 = time.monotonic()
    try:
        res = solve_files(domain, problem, cfg)
        if res.solved and not validate_strong_cyclic(res.policy, res.task).valid:
            return [tag, problem, "InvalidPolicy", f"{time.monotonic() - t0:.3f}", 0, 0, 0]
        return report_row(tag, problem, res.stats)
    except PddlError as e:
        log.error("%s", e)
        return [tag, problem, "InputError", f"{time.monotonic() - t0:.3f}", 0, 0, 0]


def read_manifest(path: str) -> list[dict]:
    base = Path(path).parent
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if not row.get("domain") or not row.get("problem"):
                raise PddlError("manifest rows need domain and problem columns", source=path)
            rows.append({
                "tag": row.get("tag") or Path(row["domain"]).parent.name,
                "domain": str(base / row["domain"]),
                "problem": str(base / row["problem"]),
                "expected": row.get("expected") or "",
            })
    return rows


def coverage(rows: list[list]) -> dict[str, float]:
    """Per-tag fraction of instances solved."""
    total: dict[str, int] = {}
    solved: dict[str, int] = {}
    for r in rows:
        total[r[0]] = total.get(r[0], 0) + 1
        solved[r[0]] = solved.get(r[0], 0) + (r[2] == Verdict.STRONG_CYCLIC.value)
    return {t: solved[t] / total[t] for t in total}


def cmd_batch(args) -> int:
    cfg = config_from_args(args)
    entries = read_manifest(args.manifest)
    jobs = [(e["tag"], e["domain"], e["problem"], cfg) for e in entries]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_batch_one, jobs))
    else:
        rows = [_batch_one(j) for j in jobs]
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_HEADER)
        w.writerows(rows)
    for r in rows:
        print(f"{r[0]:<20} {Path(r[1]).name:<28} {r[2]:<20} {r[3]:>8}s")
    cov = coverage(rows)
    print("coverage:")
    for tag, c in cov.items():
        print(f"  {tag:<20} {c:.2f}")
    if cov:
        print(f"  {'normalized':<20} {sum(cov.values()) / len(cov):.2f}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    handlers = {"plan": cmd_plan, "validate": cmd_validate, "oracle": cmd_oracle, "batch": cmd_batch}
    try:
        return handlers[args.command](args)
    except PddlError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
