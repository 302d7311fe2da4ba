"""Independent policy checking and a brute-force strong-cyclic oracle.

Nothing here depends on the planner's internals: both functions work on the
explicit state space reachable from the initial state.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .model import FondTask, apply_effect

VALIDATOR_MAX_STATES = 1_000_000
ORACLE_MAX_STATES = 100_000


@dataclass
class ValidationResult:
    status: str  # Valid, NotClosed, Inapplicable, Improper or Unknown
    witness: tuple | None = None
    states: int = 0
    detail: str = ""

    @property
    def valid(self) -> bool:
        return self.status == "Valid"

    def __str__(self) -> str:
        extra = f" at {list(self.witness)}" if self.witness is not None else ""
        return f"{self.status}{extra} ({self.states} states){': ' + self.detail if self.detail else ''}"


def validate_strong_cyclic(policy, task: FondTask, max_states: int = VALIDATOR_MAX_STATES) -> ValidationResult:
    """Check that ``policy`` is closed, proper and executable from the
    initial state.  ``policy`` only needs a ``lookup(state)`` method."""
    s0 = task.initial_state
    succ: dict[tuple, list[tuple]] = {}
    queue = deque([s0])
    succ_seen = {s0}
    goals = []
    while queue:
        s = queue.popleft()
        if task.is_goal(s):
            succ[s] = []
            goals.append(s)
            continue
        act = policy.lookup(s)
        if act is None or act == "GOAL":
            return ValidationResult("NotClosed", s, len(succ_seen), "no rule for a non-goal state")
        if not act.precondition.entailed_by(s):
            return ValidationResult("Inapplicable", s, len(succ_seen), f"{act.name} not applicable")
        nxt = []
        for o in act.outcomes:
            s2 = apply_effect(s, o.effect)
            nxt.append(s2)
            if s2 not in succ_seen:
                if len(succ_seen) >= max_states:
                    return ValidationResult("Unknown", None, len(succ_seen), "state cap reached")
                succ_seen.add(s2)
                queue.append(s2)
        succ[s] = nxt
    pred: dict[tuple, list[tuple]] = {s: [] for s in succ}
    for s, nxt in succ.items():
        for s2 in nxt:
            pred[s2].append(s)
    ok = set(goals)
    queue = deque(goals)
    while queue:
        s = queue.popleft()
        for p in pred[s]:
            if p not in ok:
                ok.add(p)
                queue.append(p)
    for s in succ:
        if s not in ok:
            return ValidationResult("Improper", s, len(succ), "goal unreachable under the policy")
    return ValidationResult("Valid", None, len(succ))


@dataclass
class OracleResult:
    solvable: bool | None  # None (Unknown) when the state cap was hit
    states: int
    policy: dict[tuple, int] = field(default_factory=dict)

    @property
    def status(self) -> str:
        return {True: "Solvable", False: "Unsolvable", None: "Unknown"}[self.solvable]


def reachable_states(task: FondTask, max_states: int = ORACLE_MAX_STATES):
    """All states reachable from the initial state under any action, with
    ``(action id, successor list)`` per applicable action; ``None`` on cap."""
    s0 = task.initial_state
    trans: dict[tuple, list[tuple[int, list[tuple]]]] = {}
    queue = deque([s0])
    seen = {s0}
    while queue:
        s = queue.popleft()
        out = []
        for a in task.actions:
            if not a.precondition.entailed_by(s):
                continue
            nxt = [apply_effect(s, o.effect) for o in a.outcomes]
            out.append((a.id, nxt))
            for s2 in nxt:
                if s2 not in seen:
                    if len(seen) >= max_states:
                        return None
                    seen.add(s2)
                    queue.append(s2)
        trans[s] = out
    return trans


def oracle_solve(task: FondTask, max_states: int = ORACLE_MAX_STATES) -> OracleResult:
    """Greatest-fixpoint strong-cyclic check by explicit enumeration.

    Repeatedly keeps the states that can reach the goal using only actions
    whose outcomes all stay inside the kept set.
    """
    trans = reachable_states(task, max_states)
    if trans is None:
        return OracleResult(None, max_states)
    good = set(trans)
    while True:
        safe: dict[tuple, list[tuple[int, list[tuple]]]] = {}
        for s in good:
            safe[s] = [(aid, nxt) for aid, nxt in trans[s] if all(x in good for x in nxt)]
        # backward BFS from goal states through safe actions
        back: dict[tuple, list[tuple[tuple, int]]] = {}
        for s, pairs in safe.items():
            for aid, nxt in pairs:
                for s2 in nxt:
                    back.setdefault(s2, []).append((s, aid))
        policy: dict[tuple, int] = {}
        new_good = {s for s in good if task.is_goal(s)}
        queue = deque(sorted(new_good))
        while queue:
            s = queue.popleft()
            for p, aid in back.get(s, ()):
                if p not in new_good:
                    new_good.add(p)
                    policy[p] = aid
                    queue.append(p)
        if new_good == good:
            break
        good = new_good
    return OracleResult(task.initial_state in good, len(trans), policy)


class _OraclePolicy:
    def __init__(self, task: FondTask, res: OracleResult):
        self.task, self.res = task, res

    def lookup(self, state):
        aid = self.res.policy.get(tuple(state))
        return None if aid is None else self.task.actions[aid]


def oracle_policy(task: FondTask, res: OracleResult) -> _OraclePolicy:
    """Wrap an oracle result so it can be handed to the validator."""
    return _OraclePolicy(task, res)


@dataclass
class SimulationReport:
    episodes: int = 0
    goals: int = 0
    truncated: int = 0
    failures: list[tuple[str, tuple]] = field(default_factory=list)  # (NotClosed|Inapplicable, state)

    @property
    def goal_rate(self) -> float:
        return self.goals / self.episodes if self.episodes else 0.0


def run_episode(policy, task: FondTask, rng: random.Random, horizon: int,
                state: Sequence[int] | None = None) -> tuple[str, list[tuple]]:
    """One execution with uniformly random outcomes.  The status is
    ``Goal``, ``Truncated``, ``NotClosed`` or ``Inapplicable``."""
    s = tuple(task.initial_state if state is None else state)
    trace = [s]
    for _ in range(horizon):
        if task.is_goal(s):
            return "Goal", trace
        act = policy.lookup(s)
        if act is None or act == "GOAL":
            return "NotClosed", trace
        if not act.precondition.entailed_by(s):
            return "Inapplicable", trace
        s = apply_effect(s, rng.choice(act.outcomes).effect)
        trace.append(s)
    return ("Goal" if task.is_goal(s) else "Truncated"), trace


def simulate(policy, task: FondTask, seed: int = 0, episodes: int = 1000,
             horizon: int = 10_000) -> SimulationReport:
    """Repeated fair executions of ``policy`` from the initial state.

    Truncated episodes are counted apart from failures: a valid policy may
    still need more than ``horizon`` steps on an unlucky run.
    """
    rng = random.Random(seed)
    rep = SimulationReport()
    for _ in range(episodes):
        status, trace = run_episode(policy, task, rng, horizon)
        rep.episodes += 1
        if status == "Goal":
            rep.goals += 1
        elif status == "Truncated":
            rep.truncated += 1
        else:
            rep.failures.append((status, trace[-1]))
    return rep
