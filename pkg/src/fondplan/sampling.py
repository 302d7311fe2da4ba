"""Redundant-object sampling: solve reduced problems first.

Objects that are interchangeable in the initial state are grouped into
classes.  Each rung of the schedule keeps at most ``k`` objects of every
eligible class, solves the smaller task and transfers the resulting policy
back.  A transferred policy is only trusted once it validates on the
original task, so a reduction can never produce an unsound answer; at worst
it wastes the rung's budget.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field, replace

from .model import FondTask
from .planner import SolveConfig, SolveResult, Verdict, solve
from .pddl import LiftedDomain, LiftedProblem, ground, remove_objects, symmetric_objects
from .solution import Policy
from .validator import validate_strong_cyclic

log = logging.getLogger(__name__)

ALL = "ALL"
DEFAULT_RUNGS: tuple[tuple[int | str, float], ...] = (
    (1, 60.0), (2, 240.0), (4, 30.0), (8, 30.0), (ALL, 3240.0),
)


@dataclass(frozen=True)
class SamplingSchedule:
    rungs: tuple[tuple[int | str, float], ...] = DEFAULT_RUNGS

    def __post_init__(self):
        if not self.rungs or self.rungs[-1][0] != ALL:
            raise ValueError("the last rung must keep ALL objects")
        for k, t in self.rungs[:-1]:
            if not isinstance(k, int) or k < 1:
                raise ValueError(f"objects per class must be a positive integer, got {k!r}")
            if t <= 0:
                raise ValueError("rung time limits must be positive")

    def budgets(self, total: float) -> list[tuple[int | str, float]]:
        """Per-rung time limits for a ``total`` budget.

        The ALL rung takes whatever the fixed rungs leave over.  When the
        total cannot even cover the fixed rungs, every rung (ALL included)
        is scaled by ``total / nominal total``.
        """
        fixed = sum(t for _, t in self.rungs[:-1])
        if total > fixed:
            return list(self.rungs[:-1]) + [(ALL, total - fixed)]
        nominal = sum(t for _, t in self.rungs)
        f = total / nominal
        return [(k, t * f) for k, t in self.rungs]


@dataclass
class RungAttempt:
    rung: str
    removed: int
    verdict: str
    accepted: bool
    detail: str = ""


@dataclass
class SamplingResult(SolveResult):
    task: FondTask | None = None
    attempts: list[RungAttempt] = field(default_factory=list)


def _pick(cls: tuple[str, ...], k: int, seed: int | None) -> list[str]:
    objs = sorted(cls)
    if seed is not None:
        random.Random(f"{seed}:{','.join(objs)}").shuffle(objs)
    return objs[:k]


def reduction(dom: LiftedDomain, prob: LiftedProblem, k: int, seed: int | None = None) -> frozenset[str]:
    """Objects removed when keeping ``k`` per eligible class."""
    part = symmetric_objects(dom, prob)
    removed = set()
    for cls in part.eligible_classes():
        keep = set(_pick(cls, k, seed))
        removed.update(o for o in cls if o not in keep)
    return frozenset(removed)


def transfer(policy: Policy, reduced: FondTask, original: FondTask) -> Policy:
    """Rewrite a reduced-task policy over the original task's variables and
    actions.  Raises ``KeyError`` if some name has no counterpart."""
    return Policy.from_json(policy.to_json(reduced), original)


def run_with_sampling(dom: LiftedDomain, prob: LiftedProblem, cfg: SolveConfig | None = None,
                      schedule: SamplingSchedule | None = None) -> SamplingResult:
    """Climb the schedule until some rung yields a policy that validates on
    the original task; the ALL rung's verdict is final."""
    cfg = cfg or SolveConfig()
    schedule = schedule or SamplingSchedule()
    t0 = time.monotonic()
    deadline = t0 + cfg.time_limit
    original = ground(dom, prob)
    attempts: list[RungAttempt] = []

    rungs = schedule.budgets(cfg.time_limit) if cfg.object_sampling else [(ALL, cfg.time_limit)]
    tried: set[frozenset[str]] = set()
    for k, budget in rungs[:-1]:
        removed = reduction(dom, prob, k, cfg.seed)
        if not removed or removed in tried:
            continue
        tried.add(removed)
        left = deadline - time.monotonic()
        if left <= 0:
            break
        reduced = ground(dom, remove_objects(prob, removed, dom))
        sub = solve(reduced, replace(cfg, time_limit=min(budget, left), validate=False))
        att = RungAttempt(str(k), len(removed), sub.verdict.value, False)
        attempts.append(att)
        if not sub.solved:
            continue
        try:
            policy = transfer(sub.policy, reduced, original)
        except KeyError as e:
            att.detail = f"transfer failed: {e}"
            continue
        check = validate_strong_cyclic(policy, original)
        att.detail = str(check)
        if check.valid:
            att.accepted = True
            sub.stats.rung = str(k)
            sub.stats.time_total = time.monotonic() - t0
            log.info("rung %s accepted after removing %d objects", k, len(removed))
            return SamplingResult(Verdict.STRONG_CYCLIC, policy, sub.stats, None, original, attempts)

    left = max(deadline - time.monotonic(), 1e-3)
    res = solve(original, replace(cfg, time_limit=left))
    attempts.append(RungAttempt(ALL, 0, res.verdict.value, res.solved))
    res.stats.rung = ALL
    res.stats.time_total = time.monotonic() - t0
    return SamplingResult(res.verdict, res.policy, res.stats, res.solution, original, attempts)

