"""Greedy best-first weak-plan search over the all-outcomes determinization."""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .heuristic import INF, FFHeuristic
from .model import Action, FondTask, Outcome, PartialState, apply_effect

Matcher = Callable[[tuple, int], Optional[int]]


@dataclass
class SearchLimits:
    max_time: float = float("inf")
    max_expansions: int = 10**7
    deadline: float | None = None

    def __post_init__(self):
        if self.max_time <= 0 or self.max_expansions <= 0:
            raise ValueError("search limits must be positive")

    def effective_deadline(self) -> float:
        d = time.monotonic() + self.max_time if self.max_time != float("inf") else float("inf")
        if self.deadline is not None:
            d = min(d, self.deadline)
        return d


@dataclass
class WeakPlan:
    steps: list[tuple[Action, Outcome]]
    start: tuple
    achieves: PartialState
    states: list[tuple] = field(default_factory=list)
    matched: int | None = None

    def __len__(self) -> int:
        return len(self.steps)

    def replay(self) -> tuple:
        s = self.start
        for a, o in self.steps:
            if not a.precondition.entailed_by(s):
                raise AssertionError(f"plan step {a.name} not applicable")
            s = apply_effect(s, o.effect)
        return s


@dataclass
class NoPlan:
    pass


@dataclass
class Timeout:
    pass


SearchResult = WeakPlan | NoPlan | Timeout


class WeakPlanner:
    """Greedy best-first search with a preferred-operator queue.

    Forbidden actions (per the FSAP store) are never expanded.  When a
    ``matcher`` is given, search stops at the first generated state the
    matcher recognizes and returns the plan prefix reaching it.
    """

    def __init__(self, task: FondTask, heuristic: FFHeuristic, record_deadends: int = 16):
        self.task = task
        self.h = heuristic
        self.record_deadends = record_deadends
        self.expansions = 0
        self.generated = 0
        self.searches = 0
        self.found_deadends: list[tuple] = []

    def find_weak_plan(self, start: Sequence[int], goal: PartialState, fsaps=None,
                       matcher: Matcher | None = None, limits: SearchLimits | None = None) -> SearchResult:
        limits = limits or SearchLimits()
        deadline = limits.effective_deadline()
        start = tuple(start)
        self.searches += 1
        self.found_deadends = []
        if goal.entailed_by(start):
            return WeakPlan([], start, goal, [start])

        task = self.task
        actions = task.actions
        counter = itertools.count()
        parent: dict[tuple, tuple | None] = {start: None}
        best_g = {start: 0}
        evals: dict[tuple, tuple] = {}

        def evaluate(s):
            r = evals.get(s)
            if r is None:
                hr = self.h.evaluate(s, goal, fsaps)
                r = evals[s] = (hr.value, hr.helpful)
            return r

        h0, _ = evaluate(start)
        if h0 == INF:
            self._note_deadend(start)
            return NoPlan()
        open_all = [(h0, 0, next(counter), start)]
        open_pref: list = []
        turn = 0
        expanded_here = 0
        expanded: dict[tuple, int] = {}

        def build(last, matched=None):
            steps, states = [], [last]
            cur = last
            while parent[cur] is not None:
                prev, aid, oi = parent[cur]
                a = actions[aid]
                steps.append((a, a.outcomes[oi]))
                states.append(prev)
                cur = prev
            steps.reverse()
            states.reverse()
            return WeakPlan(steps, start, goal, states, matched)

        while open_all or open_pref:
            if open_pref and (turn % 2 == 0 or not open_all):
                h, g, _, s = heapq.heappop(open_pref)
            else:
                h, g, _, s = heapq.heappop(open_all)
            turn += 1
            if g != best_g.get(s) or expanded.get(s, INF) <= g:
                continue
            expanded[s] = g
            expanded_here += 1
            self.expansions += 1
            if expanded_here > limits.max_expansions or (
                expanded_here & 63 == 0 and time.monotonic() > deadline
            ):
                return Timeout()
            _, helpful = evaluate(s)
            mask = task.state_mask(s) if fsaps is not None else 0
            for a in actions:
                if not a.precondition.entailed_by(s):
                    continue
                if fsaps is not None and fsaps.forbids(mask, a.id):
                    continue
                preferred = a.id in helpful
                for o in a.outcomes:
                    s2 = apply_effect(s, o.effect)
                    g2 = g + a.cost
                    old = best_g.get(s2)
                    if old is not None and old <= g2:
                        continue
                    best_g[s2] = g2
                    parent[s2] = (s, a.id, o.outcome_index)
                    self.generated += 1
                    if goal.entailed_by(s2):
                        return build(s2)
                    if matcher is not None:
                        m = matcher(s2, task.state_mask(s2))
                        if m is not None:
                            return build(s2, m)
                    h2, _ = evaluate(s2)
                    if h2 == INF:
                        self._note_deadend(s2)
                        continue
                    entry = (h2, g2, next(counter), s2)
                    heapq.heappush(open_all, entry)
                    if preferred:
                        heapq.heappush(open_pref, entry)
        return NoPlan()

    def plan_locally(self, start, expected: PartialState, fsaps=None, matcher: Matcher | None = None,
                     limits: SearchLimits | None = None) -> SearchResult:
        """Same search with the goal temporarily set to ``expected``."""
        return self.find_weak_plan(start, expected, fsaps, matcher, limits)

    def _note_deadend(self, s):
        if len(self.found_deadends) < self.record_deadends:
            self.found_deadends.append(s)
