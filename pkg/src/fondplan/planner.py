"""Top-level solve loop: repeated solve attempts over a growing FSAP set."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction

from .deadends import DeadendManager, poison
from .heuristic import DEFAULT_PENALTY, FFHeuristic, RelaxedTask
from .model import FondTask, PartialState, apply_effect
from .search import NoPlan, SearchLimits, Timeout, WeakPlan, WeakPlanner
from .solution import Policy, Solution, make_policy

log = logging.getLogger(__name__)

# rough per-node footprint used for the internal memory accounting
NODE_BYTES = 600


class Verdict(str, Enum):
    STRONG_CYCLIC = "StrongCyclic"
    NO_PLAN = "NoStrongCyclicPlan"
    EXHAUSTED = "ResourceExhausted"


@dataclass
class SolveConfig:
    time_limit: float = 3600.0
    memory_limit_mb: float = 4096.0
    object_sampling: bool = True
    poisoning: bool = True
    fsap_penalty: bool = True
    full_scd_marking: bool = True
    force_1safe: bool = True
    plan_locally: bool = True
    penalty: int = DEFAULT_PENALTY
    seed: int | None = None
    check_invariants: bool = False
    validate: bool = False

    def __post_init__(self):
        if self.time_limit <= 0 or self.memory_limit_mb <= 0:
            raise ValueError("budgets must be positive")
        if self.penalty < 0:
            raise ValueError("penalty must be nonnegative")

    def toggles(self) -> dict[str, bool]:
        return {
            "object_sampling": self.object_sampling,
            "poisoning": self.poisoning,
            "fsap_penalty": self.fsap_penalty,
            "full_scd_marking": self.full_scd_marking,
            "force_1safe": self.force_1safe,
        }


@dataclass
class RunStats:
    verdict: str = ""
    iterations: int = 0
    expansions: int = 0
    generated: int = 0
    searches: int = 0
    evaluations: int = 0
    fsaps: int = 0
    deadends: int = 0
    shrink_ratio: float = 0.0
    nodes: int = 0
    solsteps: int = 0
    rules: int = 0
    clones: int = 0
    fpr_calls: int = 0
    poison_events: int = 0
    one_safe_retries: int = 0
    cases: dict = field(default_factory=lambda: {str(i): 0 for i in range(7)})
    toggles: dict = field(default_factory=dict)
    penalty: int = DEFAULT_PENALTY
    rung: str = ""
    time_total: float = 0.0
    time_search: float = 0.0

    TIMING_FIELDS = ("time_total", "time_search")

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        d["shrink_ratio"] = round(d["shrink_ratio"], 6)
        if not timing:
            for k in self.TIMING_FIELDS:
                d.pop(k)
        return d


@dataclass
class SolveResult:
    verdict: Verdict
    policy: Policy | None
    stats: RunStats
    solution: Solution | None = None

    @property
    def solved(self) -> bool:
        return self.verdict is Verdict.STRONG_CYCLIC


class _Exhausted(Exception):
    pass


class Planner:
    """Iterates solve attempts until the incumbent is strong cyclic, the
    initial state is proven a deadend, or a budget runs out."""

    def __init__(self, task: FondTask, cfg: SolveConfig | None = None, dm: DeadendManager | None = None):
        self.task = task
        self.cfg = cfg or SolveConfig()
        self.rt = RelaxedTask(task)
        penalty = self.cfg.penalty if self.cfg.fsap_penalty else 0
        self.h = FFHeuristic(task, penalty, filter_helpful=self.cfg.fsap_penalty, relaxed=self.rt)
        self.dm = dm or DeadendManager(task, self.rt)
        self.search = WeakPlanner(task, self.h)
        self.stats = RunStats(toggles=self.cfg.toggles(), penalty=self.cfg.penalty)
        self._deadline = float("inf")
        self._node_cap = self.cfg.memory_limit_mb * 1024 * 1024 / NODE_BYTES

    @property
    def store(self):
        return self.dm.store

    def solve(self) -> SolveResult:
        t0 = time.monotonic()
        self._deadline = t0 + self.cfg.time_limit
        incumbent: Solution | None = None
        inc_rate = Fraction(-1)
        verdict = None
        s0 = self.task.initial_state
        if not self.task.is_goal(s0) and not self.rt.relaxed_reachable(s0, self.task.goal):
            # not even the delete relaxation reaches the goal
            self.dm.record(s0)
            return self._finish(Verdict.NO_PLAN, None, t0)
        while verdict is None:
            self.stats.iterations += 1
            before = len(self.store)
            sol = Solution(self.task, self.store)
            try:
                root_dead = self._iterate(sol)
            except _Exhausted:
                verdict = Verdict.EXHAUSTED
                break
            if root_dead:
                verdict = Verdict.NO_PLAN
                break
            sol.sweep()
            rate = sol.success_rate()
            log.debug("iteration %d: success rate %s, fsaps %d", self.stats.iterations, rate, len(self.store))
            if rate >= inc_rate:
                incumbent, inc_rate = sol, rate
            if incumbent.is_strong_cyclic():
                verdict = Verdict.STRONG_CYCLIC
            elif len(self.store) == before:
                # the next attempt would replay this one exactly
                verdict = Verdict.EXHAUSTED
        return self._finish(verdict, incumbent, t0)

    def _finish(self, verdict: Verdict, incumbent: Solution | None, t0: float) -> SolveResult:
        st = self.stats
        st.verdict = verdict.value
        policy = None
        if verdict is Verdict.STRONG_CYCLIC:
            policy = make_policy(incumbent.controller, incumbent.root_step())
        elif verdict is Verdict.NO_PLAN:
            policy = Policy([])
        elif incumbent is not None:
            policy = make_policy(incumbent.controller, None, incumbent)
        if incumbent is not None:
            st.nodes = len(incumbent.nodes)
            st.solsteps = len(incumbent.controller)
        st.rules = len(policy) if policy is not None else 0
        st.expansions = self.search.expansions
        st.generated = self.search.generated
        st.searches = self.search.searches
        st.evaluations = self.h.evaluations
        st.fsaps = len(self.store)
        st.deadends = len(self.dm.deadends)
        st.shrink_ratio = self.dm.shrink_ratio
        st.time_total = time.monotonic() - t0
        if verdict is Verdict.STRONG_CYCLIC and self.cfg.validate:
            from .validator import validate_strong_cyclic

            v = validate_strong_cyclic(policy, self.task)
            if not v.valid:
                raise AssertionError(f"unsound policy produced: {v}")
        return SolveResult(verdict, policy, st, incumbent)

    # -- one solve attempt ----------------------------------------------------

    def _check_budget(self, sol: Solution) -> None:
        if time.monotonic() > self._deadline:
            raise _Exhausted()
        if len(sol.nodes) + len(sol.controller) > self._node_cap:
            raise _Exhausted()

    def _iterate(self, sol: Solution) -> bool:
        """Process the open list; returns True iff the initial state is a deadend."""
        cfg = self.cfg
        ctrl = sol.controller
        st = self.stats
        s0 = self.task.initial_state
        while True:
            self._check_budget(sol)
            nid = sol.pop_unhandled()
            if nid is None:
                break
            res = sol.classify(nid)
            if res is not None:
                case, arg = res
                st.cases[str(case)] += 1
                if case == 0:
                    sol.handle_case0(nid, arg)
                elif case == 1:
                    sol.handle_case1(nid)
                elif case == 2:
                    sol.handle_case2_exact_match(nid, arg)
                elif case == 3:
                    sol.handle_case3_predefined(nid, arg)
                else:
                    sol.handle_case4_hookup(nid, arg)
            else:
                found = self._find_plan(sol, nid)
                if found is None:
                    st.cases["6"] += 1
                    node = sol.nodes[nid]
                    node.handled, node.case = True, 6
                    self.dm.record(node.state)
                    if node.state == s0:
                        return True
                    if cfg.poisoning:
                        poison(nid, sol)
                        st.poison_events += 1
                else:
                    st.cases["5"] += 1
                    plan, target = found
                    sol.incorporate_weak_plan(nid, plan, target)
            if cfg.full_scd_marking:
                ctrl.mark_strong_cyclic()
            else:
                ctrl.mark_local()
            if cfg.check_invariants:
                sol.check_invariants()
            if sol.is_strong_cyclic():
                break
        st.clones += sol.clones
        st.fpr_calls += sol.fpr_calls
        return False

    def _find_plan(self, sol: Solution, nid: int):
        """Case 5: plan locally first, then for the real goal.  Returns
        ``(plan, target_step)`` or ``None`` when no weak plan exists."""
        ctrl = sol.controller
        node = sol.nodes[nid]
        allowed = sol.attach_filter(nid)
        targets: list[int] = []
        if self.cfg.plan_locally and node.parent is not None:
            psid = sol.step_of(node.parent)
            pss = ctrl.steps[psid] if psid is not None else None
            if pss is not None and pss.expected is not None and pss.expected != node.arriving:
                exp = pss.out.get(pss.expected)
                if (exp is not None and exp != ctrl.goal_step and not sol.step_poisoned(exp)
                        and sol.attachable(exp, allowed)):
                    targets.append(exp)
        targets.append(ctrl.goal_step)

        def matcher(state, mask):
            return sol.best_match(state, mask, include_goal=False, allowed=allowed)

        for target in targets:
            goal = ctrl.steps[target].ps
            r = self._search_1safe(node.state, goal, matcher)
            if isinstance(r, Timeout):
                raise _Exhausted()
            if isinstance(r, NoPlan):
                continue
            if r.matched is not None:
                return r, r.matched
            if target != ctrl.goal_step:
                final = r.states[-1]
                if sol.step_poisoned(target) or sol.forbidden(final, ctrl.steps[target]):
                    continue
            return r, target
        return None

    def _search_1safe(self, state, goal: PartialState, matcher):
        t = time.monotonic()
        limits = SearchLimits(deadline=self._deadline)
        try:
            while True:
                r = self.search.find_weak_plan(state, goal, self.store, matcher, limits)
                if goal == self.task.goal:
                    # relaxed deadends w.r.t. a local target prove nothing
                    for d in self.search.found_deadends:
                        self.dm.record(d)
                if not isinstance(r, WeakPlan):
                    return r
                r.replay()
                if not self.cfg.force_1safe or not self._record_unsafe_siblings(r):
                    return r
                self.stats.one_safe_retries += 1
        finally:
            self.stats.time_search += time.monotonic() - t

    def _record_unsafe_siblings(self, plan: WeakPlan) -> bool:
        """Record relaxed deadends among the plan's sibling outcomes; True if
        any new FSAP was added (so the plan must be recomputed)."""
        added = 0
        for i, (a, o) in enumerate(plan.steps):
            s = plan.states[i]
            for oo in a.outcomes:
                if oo.outcome_index == o.outcome_index:
                    continue
                s2 = apply_effect(s, oo.effect)
                if self.dm.is_relaxed_deadend(s2):
                    added += self.dm.record(s2)
        return added > 0


def solve(task: FondTask, cfg: SolveConfig | None = None) -> SolveResult:
    return Planner(task, cfg).solve()
