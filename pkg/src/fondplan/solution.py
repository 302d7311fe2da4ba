"""Controller / Reachable solution graph.

The Controller is a graph of :class:`SolStep` nodes (partial state + action,
outcome-labelled edges).  Reachable is the explored graph of complete-state
:class:`SearchNode` objects overlaying it.  Every handled node's state
entails the partial state of the SolStep it is mapped to, and every edge
``src --k--> dst`` satisfies ``regress(dst.ps, src.action, k) ⊆ src.ps``;
:meth:`Solution.check_invariants` asserts both.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .model import Action, FondTask, PartialState, apply_effect, regress, update

INF = float("inf")


@dataclass(eq=False)
class SolStep:
    id: int
    ps: PartialState
    action: Action | None
    out: dict[int, int] = field(default_factory=dict)
    preds: set[int] = field(default_factory=set)
    sc: bool = False
    expected: int | None = None
    mask: int = 0

    @property
    def is_goal(self) -> bool:
        return self.action is None

    @property
    def num_outcomes(self) -> int:
        return 0 if self.action is None else len(self.action.outcomes)


class Controller:
    def __init__(self, task: FondTask):
        self.task = task
        self.steps: dict[int, SolStep] = {}
        self._next = 0
        self.version = 0
        self.dirty: set[int] = set()
        goal = self.add(task.goal, None)
        goal.sc = True
        self.goal_step = goal.id
        self._dist_cache: tuple[int, dict] | None = None

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, sid: int) -> SolStep:
        return self.steps[sid]

    def add(self, ps: PartialState, action: Action | None, expected: int | None = None) -> SolStep:
        ss = SolStep(self._next, ps, action, expected=expected, mask=self.task.prop_mask(ps))
        self._next += 1
        self.steps[ss.id] = ss
        self.version += 1
        self.dirty.add(ss.id)
        return ss

    def set_ps(self, sid: int, ps: PartialState) -> None:
        ss = self.steps[sid]
        ss.ps = ps
        ss.mask = self.task.prop_mask(ps)
        self.version += 1

    def set_edge(self, src: int, k: int, dst: int) -> None:
        s = self.steps[src]
        old = s.out.get(k)
        if old == dst:
            return
        s.out[k] = dst
        self.steps[dst].preds.add(src)
        if old is not None and old not in s.out.values():
            self.steps[old].preds.discard(src)
        self.version += 1
        self.dirty.add(src)

    def clone(self, sid: int, ps: PartialState) -> SolStep:
        src = self.steps[sid]
        new = self.add(ps, src.action, src.expected)
        new.out = dict(src.out)
        for t in set(new.out.values()):
            self.steps[t].preds.add(new.id)
        return new

    def remove(self, sid: int) -> None:
        ss = self.steps.pop(sid)
        for t in set(ss.out.values()):
            if t in self.steps:
                self.steps[t].preds.discard(sid)
        for p in ss.preds:
            if p in self.steps:
                pss = self.steps[p]
                for k in [k for k, t in pss.out.items() if t == sid]:
                    del pss.out[k]
        self.version += 1

    def distances(self, allowed: set[int] | None = None) -> dict[int, int]:
        """Hop distance to the goal step along outcome edges (reverse BFS)."""
        if allowed is None and self._dist_cache and self._dist_cache[0] == self.version:
            return self._dist_cache[1]
        dist = {self.goal_step: 0}
        queue = deque([self.goal_step])
        while queue:
            x = queue.popleft()
            for p in sorted(self.steps[x].preds):
                if p in dist or (allowed is not None and p not in allowed):
                    continue
                dist[p] = dist[x] + 1
                queue.append(p)
        if allowed is None:
            self._dist_cache = (self.version, dist)
        return dist

    def goal_reachers(self, avoid: tuple[int, int] | None = None) -> set[int]:
        """Steps with a path to the goal step, optionally ignoring the single
        edge ``avoid = (src, k)``."""
        skip_src, skip_dst = None, None
        if avoid is not None:
            skip_src = avoid[0]
            skip_dst = self.steps[skip_src].out.get(avoid[1])
            others = [t for kk, t in self.steps[skip_src].out.items() if kk != avoid[1]]
            if skip_dst in others:
                skip_src = None
        seen = {self.goal_step}
        queue = deque([self.goal_step])
        while queue:
            x = queue.popleft()
            for p in self.steps[x].preds:
                if p in seen or (p == skip_src and x == skip_dst):
                    continue
                seen.add(p)
                queue.append(p)
        return seen

    def goal_path_avoiding(self, dst: int, src: int, k: int) -> bool:
        """Does ``dst`` reach the goal step without using edge ``src --k-->``?"""
        return dst in self.goal_reachers((src, k))

    def reachable_from(self, sid: int) -> set[int]:
        seen = {sid}
        stack = [sid]
        while stack:
            x = stack.pop()
            for t in self.steps[x].out.values():
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    def mark_strong_cyclic(self) -> int:
        """Full strong-cyclic marking; returns the number of newly marked steps."""
        unmarked = [ss for ss in self.steps.values() if not ss.sc and not ss.is_goal]
        not_sc = set()
        queue = deque()
        for ss in unmarked:
            if len(ss.out) != ss.num_outcomes:
                not_sc.add(ss.id)
                queue.append(ss.id)
        while True:
            while queue:
                x = queue.popleft()
                for p in self.steps[x].preds:
                    if p not in not_sc:
                        not_sc.add(p)
                        queue.append(p)
            # closed cycles that never reach the goal are not strong cyclic
            alive = {self.goal_step}
            back = deque([self.goal_step])
            while back:
                x = back.popleft()
                for p in self.steps[x].preds:
                    if p not in alive and p not in not_sc:
                        alive.add(p)
                        back.append(p)
            stuck = [ss.id for ss in unmarked if ss.id not in not_sc and ss.id not in alive]
            if not stuck:
                break
            not_sc.update(stuck)
            queue.extend(stuck)
        marked = 0
        for ss in unmarked:
            if ss.id not in not_sc:
                ss.sc = True
                marked += 1
        self.dirty.clear()
        return marked

    def mark_local(self) -> int:
        """Weakened marking: a step becomes strong cyclic only once all of its
        successors already are; cycles are never closed."""
        queue = deque(sorted(self.dirty))
        self.dirty.clear()
        marked = 0
        while queue:
            sid = queue.popleft()
            ss = self.steps.get(sid)
            if ss is None or ss.sc or ss.is_goal:
                continue
            if len(ss.out) == ss.num_outcomes and all(self.steps[t].sc for t in ss.out.values()):
                ss.sc = True
                marked += 1
                queue.extend(sorted(ss.preds))
        return marked

    def check_edges(self) -> None:
        for ss in self.steps.values():
            for k, t in ss.out.items():
                assert t in self.steps, f"edge {ss.id}->{t} dangles"
                assert ss.id in self.steps[t].preds, f"missing pred {ss.id} on {t}"
                assert 0 <= k < ss.num_outcomes
            for p in ss.preds:
                assert p in self.steps and ss.id in self.steps[p].out.values(), f"stale pred {p} on {ss.id}"

    def check_regression(self) -> None:
        for ss in self.steps.values():
            if ss.is_goal:
                continue
            assert update(ss.ps, ss.action.precondition) == ss.ps, f"step {ss.id} lacks its precondition"
            for k, t in ss.out.items():
                r = regress(self.steps[t].ps, ss.action, ss.action.outcomes[k])
                assert r is not None, f"edge {ss.id}-{k}->{t} has undefined regression"
                assert update(ss.ps, r) == ss.ps, f"edge {ss.id}-{k}->{t} is not a regression fixpoint"

    def check_marking(self) -> None:
        for ss in self.steps.values():
            if ss.sc and not ss.is_goal:
                assert len(ss.out) == ss.num_outcomes, f"sc step {ss.id} has a dangling outcome"
                assert all(self.steps[t].sc for t in ss.out.values()), f"sc step {ss.id} has non-sc successor"

    def to_dot(self) -> str:
        lines = ["digraph controller {"]
        for ss in sorted(self.steps.values(), key=lambda s: s.id):
            label = "GOAL" if ss.is_goal else ss.action.name
            ps = ",".join(f"{v}={x}" for v, x in ss.ps)
            color = "gold" if ss.is_goal else ("lightblue" if ss.sc else "white")
            lines.append(f'  s{ss.id} [label="{ss.id}: {label}\\n{ps}" style=filled fillcolor={color}];')
            for k, t in sorted(ss.out.items()):
                lines.append(f'  s{ss.id} -> s{t} [label="{k}"];')
        lines.append("}")
        return "\n".join(lines)


@dataclass(eq=False)
class SearchNode:
    id: int
    state: tuple
    parent: int | None = None
    arriving: int | None = None
    solstep: int | None = None
    children: list[int] = field(default_factory=list)
    poisoned: bool = False
    handled: bool = False
    merged_into: int | None = None
    extra_parents: list[tuple[int, int]] = field(default_factory=list)
    case: int | None = None


class Solution:
    """One solve attempt: Controller plus the Reachable overlay and its open list."""

    def __init__(self, task: FondTask, fsaps=None):
        self.task = task
        self.controller = Controller(task)
        self.nodes: list[SearchNode] = []
        self.open: list[int] = []
        self.reach: dict[int, set[int]] = {self.controller.goal_step: set()}
        self.state_index: dict[tuple, list[int]] = {}
        self.fsaps = fsaps
        self.poison_events = 0
        self.fpr_calls = 0
        self.clones = 0
        self.root = self.new_node(task.initial_state, None, None)

    # -- Reachable bookkeeping ------------------------------------------------

    def new_node(self, state: tuple, parent: int | None, k: int | None, push: bool = True) -> int:
        node = SearchNode(len(self.nodes), tuple(state), parent, k)
        self.nodes.append(node)
        if parent is not None:
            self.nodes[parent].children.append(node.id)
        if push:
            self.open.append(node.id)
        return node.id

    def pop_unhandled(self) -> int | None:
        while self.open:
            nid = self.open.pop()
            if not self.nodes[nid].handled:
                return nid
        return None

    def step_of(self, nid: int) -> int | None:
        node = self.nodes[nid]
        while node.merged_into is not None:
            node = self.nodes[node.merged_into]
        return node.solstep

    def assign(self, nid: int, sid: int) -> None:
        node = self.nodes[nid]
        if node.solstep is not None:
            self.reach[node.solstep].discard(nid)
        node.solstep = sid
        self.reach.setdefault(sid, set()).add(nid)

    def parents_of(self, nid: int) -> list[tuple[int, int]]:
        node = self.nodes[nid]
        ps = [(node.parent, node.arriving)] if node.parent is not None else []
        return ps + node.extra_parents

    def index_state(self, nid: int) -> None:
        self.state_index.setdefault(self.nodes[nid].state, []).append(nid)

    def step_poisoned(self, sid: int) -> bool:
        """A non-strong-cyclic step whose every overlay node is poisoned."""
        ss = self.controller.steps[sid]
        if ss.sc:
            return False
        nodes = self.reach.get(sid)
        return bool(nodes) and all(self.nodes[n].poisoned for n in nodes)

    def forbidden(self, state: tuple, ss: SolStep, mask: int | None = None) -> bool:
        if ss.is_goal or self.fsaps is None:
            return False
        if mask is None:
            mask = self.task.state_mask(state)
        return self.fsaps.forbids(mask, ss.action.id)

    # -- node analysis --------------------------------------------------------

    def attach_filter(self, nid: int) -> set[int] | None:
        """Steps the node may be attached to without cutting its parent
        step's route to the goal; ``None`` means no restriction.

        Only relevant when the parent's outcome edge already exists and its
        target is unusable for this node, so attaching elsewhere replaces it.
        Strong-cyclic steps are always allowed and are not listed.
        """
        node = self.nodes[nid]
        if node.parent is None:
            return None
        psid = self.step_of(node.parent)
        if psid is None:
            return None
        pss = self.controller.steps[psid]
        if pss.sc or pss.is_goal or pss.out.get(node.arriving) is None:
            return None
        return self.controller.goal_reachers((psid, node.arriving))

    def attachable(self, sid: int, allowed: set[int] | None) -> bool:
        return allowed is None or sid in allowed or self.controller.steps[sid].sc

    def predefined(self, nid: int) -> int | None:
        node = self.nodes[nid]
        if node.parent is None:
            return None
        psid = self.step_of(node.parent)
        if psid is None:
            return None
        return self.controller.steps[psid].out.get(node.arriving)

    def matching_steps(self, state: tuple, mask: int | None = None, include_goal: bool = True) -> list[int]:
        if mask is None:
            mask = self.task.state_mask(state)
        found = []
        for ss in self.controller.steps.values():
            if ss.mask & ~mask:
                continue
            if ss.is_goal and not include_goal:
                continue
            if self.step_poisoned(ss.id) or self.forbidden(state, ss, mask):
                continue
            found.append(ss.id)
        return found

    def best_match(self, state: tuple, mask: int | None = None, include_goal: bool = True,
                   allowed: set[int] | None = None) -> int | None:
        cands = [c for c in self.matching_steps(state, mask, include_goal) if self.attachable(c, allowed)]
        if not cands:
            return None
        dist = self.controller.distances()
        return min(cands, key=lambda s: (dist.get(s, INF), s))

    def classify(self, nid: int) -> tuple[int, int] | None:
        """First applicable case among 0–4 with its payload, or ``None`` when a
        weak plan is needed (Case 5, or Case 6 if none exists)."""
        node = self.nodes[nid]
        ctrl = self.controller
        state = node.state
        pre = self.predefined(nid)
        if pre is not None and ctrl.steps[pre].sc:
            return 0, pre
        if self.task.is_goal(state):
            return 0, ctrl.goal_step
        if node.poisoned:
            return 1, -1
        mask = self.task.state_mask(state)
        pre_usable = pre is not None and not self.step_poisoned(pre) and not self.forbidden(state, ctrl.steps[pre], mask)
        lazy: list = []

        def allowed():
            if not lazy:
                lazy.append(self.attach_filter(nid))
            return lazy[0]

        for m in self.state_index.get(state, ()):
            mnode = self.nodes[m]
            if mnode.poisoned or mnode.solstep is None:
                continue
            sid = mnode.solstep
            if self.step_poisoned(sid) or self.forbidden(state, ctrl.steps[sid], mask):
                continue
            if pre is None or pre == sid or self.attachable(sid, allowed()):
                return 2, m
        if pre_usable:
            return 3, pre
        best = self.best_match(state, mask, allowed=allowed() if pre is not None else None)
        if best is not None:
            return 4, best
        return None

    # -- case handlers --------------------------------------------------------

    def expand(self, nid: int) -> list[int]:
        """Create one open child per outcome of the node's step action."""
        node = self.nodes[nid]
        ss = self.controller.steps[node.solstep]
        if ss.is_goal:
            return []
        kids = [self.new_node(apply_effect(node.state, o.effect), nid, o.outcome_index, push=False)
                for o in ss.action.outcomes]
        self.open.extend(reversed(kids))
        return kids

    def connect_parent(self, nid: int) -> None:
        node = self.nodes[nid]
        if node.parent is not None and self.step_of(node.parent) is not None:
            self.fpr(node.parent, self.step_of(nid), node.arriving)

    def handle_case0(self, nid: int, sid: int) -> None:
        self.assign(nid, sid)
        self._finish(nid, 0)
        node = self.nodes[nid]
        if node.parent is not None:
            psid = self.step_of(node.parent)
            if psid is not None and self.controller.steps[psid].out.get(node.arriving) != sid:
                self.fpr(node.parent, sid, node.arriving)

    def handle_case1(self, nid: int) -> None:
        self._finish(nid, 1, index=False)

    def handle_case2_exact_match(self, nid: int, match: int) -> None:
        node = self.nodes[nid]
        node.merged_into = match
        self._finish(nid, 2, index=False)
        if node.parent is not None:
            self.nodes[match].extra_parents.append((node.parent, node.arriving))
            if self.step_of(node.parent) is not None:
                self.fpr(node.parent, self.nodes[match].solstep, node.arriving)

    def handle_case3_predefined(self, nid: int, sid: int) -> None:
        self.assign(nid, sid)
        self._finish(nid, 3)
        self.expand(nid)

    def handle_case4_hookup(self, nid: int, sid: int) -> None:
        self.assign(nid, sid)
        self._finish(nid, 4)
        self.connect_parent(nid)
        if not self.controller.steps[self.step_of(nid)].sc:
            self.expand(nid)

    def incorporate_weak_plan(self, nid: int, plan, target: int) -> list[int]:
        """Add the plan as a SolStep chain ending in ``target`` and enqueue every
        sibling outcome; returns the new step ids."""
        ctrl = self.controller
        if not plan.steps:
            self.handle_case4_hookup(nid, target)
            return []
        ps = ctrl.steps[target].ps
        chain_ps = []
        for a, o in reversed(plan.steps):
            ps = regress(ps, a, o)
            assert ps is not None, "weak plan outcome inconsistent with its target"
            chain_ps.append(ps)
        chain_ps.reverse()
        new_steps = [ctrl.add(p, a, o.outcome_index) for p, (a, o) in zip(chain_ps, plan.steps)]
        for i, (a, o) in enumerate(plan.steps):
            nxt = new_steps[i + 1].id if i + 1 < len(new_steps) else target
            ctrl.set_edge(new_steps[i].id, o.outcome_index, nxt)
        self.assign(nid, new_steps[0].id)
        self._finish(nid, 5)
        pushed = []
        cur = nid
        for i, (a, o) in enumerate(plan.steps):
            state = plan.states[i]
            nxt_node = None
            for oo in a.outcomes:
                s2 = apply_effect(state, oo.effect)
                is_next = oo.outcome_index == o.outcome_index
                child = self.new_node(s2, cur, oo.outcome_index, push=False)
                if is_next and i + 1 < len(plan.steps):
                    nxt_node = child
                    self.assign(child, new_steps[i + 1].id)
                    self._finish(child, 5)
                else:
                    pushed.append(child)
            cur = nxt_node
        self.open.extend(reversed(pushed))
        self.connect_parent(nid)
        return [s.id for s in new_steps]

    def _finish(self, nid: int, case: int, index: bool = True) -> None:
        node = self.nodes[nid]
        node.handled = True
        node.case = case
        if index and not node.poisoned:
            self.index_state(nid)

    # -- fixed-point regression ----------------------------------------------

    def fpr(self, n_src: int, dst: int, k: int) -> None:
        """Connect ``Controller(n_src)`` to ``dst`` along outcome ``k``,
        strengthening (by cloning) the source and recursing backwards.

        An existing edge is only overwritten when ``dst`` keeps a goal path
        that does not use it; otherwise the source is cloned, so no step ever
        loses its route to the goal.
        """
        ctrl = self.controller
        work = [(n_src, dst, k)]
        done = set()
        while work:
            item = work.pop()
            if item in done:
                continue
            done.add(item)
            n_src, dst, k = item
            self.fpr_calls += 1
            if self.nodes[n_src].poisoned or dst not in ctrl.steps or self.step_poisoned(dst):
                continue
            src_id = self.step_of(n_src)
            if src_id is None:
                continue
            src = ctrl.steps[src_id]
            if src.sc or src.is_goal:
                continue
            cur = src.out.get(k)
            if cur is not None and cur != dst and ctrl.steps[cur].sc and not ctrl.steps[dst].sc:
                # the strong-cyclic edge already covers this outcome
                continue
            r = regress(ctrl.steps[dst].ps, src.action, src.action.outcomes[k])
            if r is None:
                raise AssertionError(f"fpr: outcome {k} of {src.action.name} contradicts step {dst}")
            ps = update(src.ps, r)
            if cur == dst and ps == src.ps:
                continue
            safe = (cur is None or cur == dst or ctrl.steps[dst].sc
                    or ctrl.goal_path_avoiding(dst, src_id, k))
            if ps == src.ps and safe:
                ctrl.set_edge(src_id, k, dst)
                continue
            owner = self.nodes[n_src]
            while owner.merged_into is not None:
                n_src = owner.merged_into
                owner = self.nodes[n_src]
            if safe and self.reach.get(src_id) == {n_src} and not src.preds:
                ctrl.set_ps(src_id, ps)
                ctrl.set_edge(src_id, k, dst)
                new_id = src_id
            else:
                new = ctrl.clone(src_id, ps)
                ctrl.set_edge(new.id, k, dst)
                self.assign(n_src, new.id)
                self.clones += 1
                new_id = new.id
            for anc, ka in self.parents_of(n_src):
                if self.step_of(anc) is not None:
                    work.append((anc, new_id, ka))

    # -- whole-solution queries -----------------------------------------------

    def root_step(self) -> int | None:
        return self.step_of(self.root)

    def is_strong_cyclic(self) -> bool:
        sid = self.root_step()
        return sid is not None and self.controller.steps[sid].sc

    def success_rate(self) -> Fraction:
        if self.is_strong_cyclic():
            return Fraction(1)
        if not self.nodes:
            return Fraction(0)
        good = sum(1 for n in self.nodes if n.handled and not n.poisoned and n.case not in (1, 6))
        return Fraction(good, len(self.nodes))

    def sweep(self) -> int:
        """Drop steps with neither overlay nodes nor incoming edges."""
        ctrl = self.controller
        keep = self.root_step()
        removed = 0
        changed = True
        while changed:
            changed = False
            for sid in sorted(ctrl.steps):
                ss = ctrl.steps[sid]
                if ss.is_goal or sid == keep or ss.preds or self.reach.get(sid):
                    continue
                ctrl.remove(sid)
                self.reach.pop(sid, None)
                removed += 1
                changed = True
        return removed

    def check_invariants(self) -> None:
        ctrl = self.controller
        ctrl.check_edges()
        ctrl.check_regression()
        ctrl.check_marking()
        for sid, nodes in self.reach.items():
            for nid in nodes:
                node = self.nodes[nid]
                assert node.solstep == sid, f"node {nid} mapping out of sync"
                if sid in ctrl.steps:
                    assert ctrl.steps[sid].ps.entailed_by(node.state), \
                        f"node {nid} state does not entail step {sid}"


@dataclass
class Policy:
    """Ordered (partial state -> action) rules; the first consistent rule wins."""

    rules: list[tuple[PartialState, Action | None]]
    distances: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rules)

    def lookup(self, state: Sequence[int]):
        """Action for ``state``; ``None`` when no rule applies.  Goal rules
        return the string ``"GOAL"``."""
        for ps, a in self.rules:
            if ps.entailed_by(state):
                return "GOAL" if a is None else a
        return None

    def to_json(self, task: FondTask) -> list[dict]:
        return [
            {"partial_state": task.describe_partial(ps), "action": None if a is None else a.name}
            for ps, a in self.rules
        ]

    def dumps(self, task: FondTask) -> str:
        return json.dumps(self.to_json(task), indent=1)

    @classmethod
    def from_json(cls, data: Iterable[dict], task: FondTask) -> "Policy":
        var_index = {}
        for var in task.variables:
            var_index[var.name or f"v{var.id}"] = (var.id, {n: i for i, n in enumerate(var.value_names)})
        rules = []
        for row in data:
            assign = {}
            for vname, value in row["partial_state"].items():
                if vname not in var_index:
                    raise KeyError(f"unknown variable {vname!r}")
                vid, values = var_index[vname]
                if value not in values:
                    raise KeyError(f"unknown value {value!r} for {vname!r}")
                assign[vid] = values[value]
            name = row["action"]
            if name is None:
                action = None
            else:
                action = task.action_by_name(name)
                if action is None:
                    raise KeyError(f"unknown action {name!r}")
            rules.append((PartialState(assign), action))
        return cls(rules)

    def text(self, task: FondTask) -> str:
        lines = []
        for i, (ps, a) in enumerate(self.rules):
            cond = " & ".join(f"{k}={v}" for k, v in task.describe_partial(ps).items()) or "true"
            lines.append(f"{i}: if {cond} then {'GOAL' if a is None else a.name}")
        return "\n".join(lines)


def make_policy(controller: Controller, root_step: int | None = None, sol: Solution | None = None) -> Policy:
    """Rules sorted by hop distance to the goal.

    With a strong-cyclic ``root_step`` only the strong-cyclic steps reachable
    from it are used; otherwise every non-poisoned step with a goal path.
    """
    if root_step is not None and controller.steps[root_step].sc:
        allowed = controller.reachable_from(root_step)
        allowed.add(controller.goal_step)
        dist = controller.distances(allowed)
    else:
        dist = controller.distances()
        if sol is not None:
            dist = {s: d for s, d in dist.items() if not sol.step_poisoned(s)}
    order = sorted(dist, key=lambda s: (dist[s], s))
    rules, dists, seen = [], [], set()
    for sid in order:
        ss = controller.steps[sid]
        key = (ss.ps, None if ss.action is None else ss.action.id)
        if key in seen:
            continue
        seen.add(key)
        rules.append((ss.ps, ss.action))
        dists.append(dist[sid])
    return Policy(rules, dists)
