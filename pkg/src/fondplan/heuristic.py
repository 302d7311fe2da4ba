"""FSAP-aware additive/FF heuristic over the all-outcomes determinization."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .model import FondTask, PartialState, determinize

INF = float("inf")
DEFAULT_PENALTY = 100


@dataclass
class HeuristicResult:
    value: float
    helpful: frozenset = field(default_factory=frozenset)

    @property
    def is_deadend(self) -> bool:
        return self.value == INF


class RelaxedTask:
    """Proposition-level view of the determinized task shared by the heuristic
    and the deadend reachability test."""

    def __init__(self, task: FondTask):
        self.task = task
        self.det = determinize(task)
        self.num_props = task.num_props
        self.pre = [tuple(task.prop_index(v, x) for v, x in d.precondition) for d in self.det]
        self.eff = [tuple(task.prop_index(v, x) for v, x in d.effect) for d in self.det]
        self.source = [d.source[0] for d in self.det]
        self.cost = [d.cost for d in self.det]
        self.users: list[list[int]] = [[] for _ in range(self.num_props)]
        for a, pre in enumerate(self.pre):
            for p in pre:
                self.users[p].append(a)
        self.no_pre = [a for a, pre in enumerate(self.pre) if not pre]
        self.var_props = []
        for var in task.variables:
            base = task.prop_index(var.id, 0)
            self.var_props.append(tuple(range(base, base + var.domain_size)))

    def props_of(self, ps: Iterable[tuple[int, int]]) -> list[int]:
        return [self.task.prop_index(v, x) for v, x in ps]

    def relaxed_reachable(self, ps, goal: PartialState, forbidden: Iterable[int] = ()) -> bool:
        """Delete-relaxed reachability of ``goal`` from every state consistent
        with ``ps``; ``forbidden`` holds determinized-action ids to ignore."""
        if not isinstance(ps, PartialState):
            ps = PartialState(enumerate(ps))
        reached = bytearray(self.num_props)
        for v, props in enumerate(self.var_props):
            x = ps.get(v)
            if x is None:
                for p in props:
                    reached[p] = 1
            else:
                reached[props[x]] = 1
        goal_props = self.props_of(goal)
        missing = sum(1 for p in goal_props if not reached[p])
        if not missing:
            return True
        banned = set(forbidden)
        goal_set = set(goal_props)
        left = [len(pre) for pre in self.pre]
        queue = deque(p for p in range(self.num_props) if reached[p])
        fired = [a for a in self.no_pre if a not in banned]
        while True:
            for a in fired:
                for q in self.eff[a]:
                    if not reached[q]:
                        reached[q] = 1
                        queue.append(q)
                        if q in goal_set:
                            missing -= 1
                            if not missing:
                                return True
            if not queue:
                return False
            p = queue.popleft()
            fired = []
            for a in self.users[p]:
                left[a] -= 1
                if left[a] == 0 and a not in banned:
                    fired.append(a)


class FFHeuristic:
    """Additive cost propagation with FSAP penalties plus helpful actions
    extracted from the relaxed plan.

    ``penalty`` is the constant added per potentially triggered FSAP; with
    ``filter_helpful`` off, forbidden actions may still be reported helpful.
    """

    def __init__(self, task: FondTask, penalty: int = DEFAULT_PENALTY, filter_helpful: bool = True,
                 relaxed: RelaxedTask | None = None):
        self.task = task
        self.penalty = penalty
        self.filter_helpful = filter_helpful
        self.rt = relaxed or RelaxedTask(task)
        self.evaluations = 0
        # last evaluation tables, kept for inspection in tests
        self.prop_cost: list[float] = []
        self.best_supporter: list[int] = []

    def fsap_cost(self, act: int, fsaps, prop_cost: Sequence[float], seen: set | None = None) -> int:
        """Cost of determinized action ``act`` plus ``penalty`` for each FSAP on
        its source action whose partial state is fully relaxed-reachable."""
        total = self.rt.cost[act]
        if fsaps is None or not self.penalty:
            return total
        if seen is None:
            seen = set()
        for f in fsaps.for_action(self.rt.source[act]):
            if f in seen:
                total += self.penalty
            elif all(prop_cost[p] < INF for p in f.props):
                seen.add(f)
                total += self.penalty
        return total

    def evaluate(self, state: Sequence[int], goal: PartialState | None = None, fsaps=None) -> HeuristicResult:
        self.evaluations += 1
        rt = self.rt
        goal = self.task.goal if goal is None else goal
        n = rt.num_props
        cost = [INF] * n
        supp = [-1] * n
        queue = deque()
        for p in rt.props_of(enumerate(state)):
            cost[p] = 0
            queue.append((p, 0))
        act_heur = [0] * len(rt.pre)
        left = [len(pre) for pre in rt.pre]
        processed: list[float | None] = [None] * n
        seen: set = set()

        def fire(a):
            new_cost = act_heur[a] + self.fsap_cost(a, fsaps, cost, seen)
            for q in rt.eff[a]:
                c = cost[q]
                if c > new_cost:
                    cost[q] = new_cost
                    supp[q] = a
                    queue.append((q, new_cost))
                elif c == new_cost and supp[q] > a:
                    supp[q] = a

        # zero-precondition actions are never triggered by a popped proposition
        for a in rt.no_pre:
            fire(a)
        while queue:
            p, c = queue.popleft()
            if c != cost[p]:
                continue
            old = processed[p]
            if old is not None and old <= c:
                continue
            processed[p] = c
            for a in rt.users[p]:
                if old is None:
                    act_heur[a] += c
                    left[a] -= 1
                else:
                    act_heur[a] -= old - c
                if left[a] == 0:
                    fire(a)

        self.prop_cost, self.best_supporter = cost, supp
        goal_props = rt.props_of(goal)
        total = 0
        for p in goal_props:
            total += cost[p]
        if total == INF:
            return HeuristicResult(INF)
        return HeuristicResult(total, self._helpful(state, goal_props, cost, supp, fsaps))

    def _helpful(self, state, goal_props, cost, supp, fsaps) -> frozenset:
        rt = self.rt
        used = set()
        visited = set()
        stack = [p for p in goal_props if cost[p] > 0]
        while stack:
            q = stack.pop()
            if q in visited:
                continue
            visited.add(q)
            a = supp[q]
            if a < 0 or a in used:
                continue
            used.add(a)
            stack.extend(p for p in rt.pre[a] if cost[p] > 0)
        helpful = set()
        mask = None
        for a in used:
            if all(cost[p] == 0 for p in rt.pre[a]):
                src = rt.source[a]
                if self.filter_helpful and fsaps is not None:
                    if mask is None:
                        mask = self.task.state_mask(state)
                    if fsaps.forbids(mask, src):
                        continue
                helpful.add(src)
        return frozenset(helpful)

