"""Grounding of a lifted FOND-PDDL task into a binary-variable FondTask."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..model import Action, FondTask, Outcome, PartialState, Variable
from .parser import Atom, EffAnd, EffOneof, Effect, LiftedAction, LiftedDomain, LiftedProblem, Literal, PddlError


def expand_effect(e: Effect) -> list[tuple[Literal, ...]]:
    """Outcomes of an effect tree: ``and`` takes the cross product of its
    children's outcome lists, ``oneof`` their union."""
    if isinstance(e, Literal):
        return [(e,)]
    if isinstance(e, EffOneof):
        out = []
        for c in e.children:
            out.extend(expand_effect(c))
        return out
    combos = [()]
    for c in e.children:
        opts = expand_effect(c)
        combos = [a + b for a in combos for b in opts]
    return combos


@dataclass(frozen=True)
class GroundAction:
    name: str
    pre_pos: tuple[Atom, ...]
    pre_neg: tuple[Atom, ...]
    outcomes: tuple[tuple[tuple[Atom, ...], tuple[Atom, ...]], ...]  # (adds, dels)


def _objects_by_type(dom: LiftedDomain, prob: LiftedProblem) -> dict[str, list[str]]:
    names = dict(dom.constants)
    names.update(prob.objects)
    by_type: dict[str, list[str]] = {}
    types = set(dom.types) | set(dom.types.values()) | {"object"}
    for t in types:
        by_type[t] = sorted(o for o, ot in names.items() if dom.is_subtype(ot, t))
    return by_type


def _static_predicates(dom: LiftedDomain) -> set[str]:
    fluent = set()

    def walk(e):
        if isinstance(e, Literal):
            fluent.add(e.atom.pred)
        else:
            for c in e.children:
                walk(c)

    for a in dom.actions:
        walk(a.effect)
    return {p for p in dom.predicates if p not in fluent} | {"="}


def _bind(atom: Atom, sub: dict[str, str]) -> Atom:
    return Atom(atom.pred, tuple(sub.get(x, x) for x in atom.args))


def _ground_action(a: LiftedAction, by_type, statics: set[str], init: set[Atom]):
    """Enumerate bindings satisfying the static preconditions; checks each
    static literal as soon as its arguments are bound."""
    params = [p for p, _ in a.params]
    static_lits = [lit for lit in a.precondition if lit.atom.pred in statics]
    # literal index -> position after which it is fully bound
    ready: dict[int, list[Literal]] = {}
    pos = {p: i for i, p in enumerate(params)}
    for lit in static_lits:
        idx = max((pos[x] for x in lit.atom.args if x in pos), default=-1)
        ready.setdefault(idx, []).append(lit)

    def holds(lit: Literal, sub) -> bool:
        at = _bind(lit.atom, sub)
        if at.pred == "=":
            val = at.args[0] == at.args[1]
        else:
            val = at in init
        return val == lit.positive

    for lit in ready.get(-1, ()):
        if not holds(lit, {}):
            return
    sub: dict[str, str] = {}
    domains = [by_type.get(t, []) for _, t in a.params]

    def rec(i):
        if i == len(params):
            yield dict(sub)
            return
        for o in domains[i]:
            sub[params[i]] = o
            if all(holds(lit, sub) for lit in ready.get(i, ())):
                yield from rec(i + 1)
        sub.pop(params[i], None)

    yield from rec(0)


def ground_actions(dom: LiftedDomain, prob: LiftedProblem) -> list[GroundAction]:
    """All ground actions whose static preconditions hold, in lexicographic
    order of ``name arg1 arg2``."""
    by_type = _objects_by_type(dom, prob)
    statics = _static_predicates(dom)
    init = set(prob.init)
    out = []
    for a in dom.actions:
        outcomes_lifted = expand_effect(a.effect)
        for sub in _ground_action(a, by_type, statics, init):
            name = " ".join([a.name] + [sub[p] for p, _ in a.params])
            pos, neg = [], []
            for lit in a.precondition:
                if lit.atom.pred in statics:
                    continue
                (pos if lit.positive else neg).append(_bind(lit.atom, sub))
            if set(pos) & set(neg):
                continue  # contradictory precondition
            outs = []
            for lits in outcomes_lifted:
                adds = tuple(dict.fromkeys(_bind(l.atom, sub) for l in lits if l.positive))
                dels = tuple(dict.fromkeys(_bind(l.atom, sub) for l in lits if not l.positive))
                outs.append((adds, dels))
            out.append(GroundAction(name, tuple(dict.fromkeys(pos)), tuple(dict.fromkeys(neg)), tuple(outs)))
    out.sort(key=lambda g: g.name)
    return out


def relaxed_reachable_atoms(init: set[Atom], actions: list[GroundAction]) -> tuple[set[Atom], list[GroundAction]]:
    """Delete-relaxed fixpoint: reachable fluent atoms and the actions whose
    positive preconditions are all reachable (negative ones are ignored)."""
    reached = set(init)
    left = [len(set(g.pre_pos)) for g in actions]
    users: dict[Atom, list[int]] = {}
    for i, g in enumerate(actions):
        for p in set(g.pre_pos):
            users.setdefault(p, []).append(i)
    queue = deque()
    fired = [False] * len(actions)

    def fire(i):
        fired[i] = True
        for adds, _ in actions[i].outcomes:
            for at in adds:
                if at not in reached:
                    reached.add(at)
                    queue.append(at)

    for i, g in enumerate(actions):
        if left[i] == 0:
            fire(i)
    for at in list(init):
        queue.append(at)
    while queue:
        at = queue.popleft()
        for i in users.get(at, ()):
            left[i] -= 1
            if left[i] == 0 and not fired[i]:
                fire(i)
    return reached, [g for i, g in enumerate(actions) if fired[i]]


def ground(dom: LiftedDomain, prob: LiftedProblem) -> FondTask:
    """Binary-variable FondTask over the relaxed-reachable fluent atoms.

    Statics are evaluated away during grounding, unreachable actions are
    dropped and ``oneof`` trees are expanded into outcome lists.  A goal atom
    outside the reachable set still gets a (constant false) variable so the
    goal stays expressible; the planner then rejects the task immediately.
    """
    statics = _static_predicates(dom)
    for lit in prob.goal:
        if lit.atom.pred == "=":
            raise PddlError("equality in the goal is not supported")
    fluent_init = {a for a in prob.init if a.pred not in statics}
    actions = ground_actions(dom, prob)
    reached, actions = relaxed_reachable_atoms(fluent_init, actions)
    var_atoms = set(reached)
    for lit in prob.goal:
        var_atoms.add(lit.atom)
    ordered = sorted(var_atoms, key=lambda a: (a.pred, a.args))
    index = {a: i for i, a in enumerate(ordered)}
    variables = [Variable(i, 2, ("false", "true"), str(a)) for i, a in enumerate(ordered)]
    init_state = tuple(1 if a in prob.init else 0 for a in ordered)
    goal = PartialState({index[lit.atom]: int(lit.positive) for lit in prob.goal})

    task_actions = []
    for g in actions:
        pre = {}
        for at in g.pre_pos:
            pre[index[at]] = 1
        for at in g.pre_neg:
            if at in index:
                pre[index[at]] = 0
        effects = []
        for adds, dels in g.outcomes:
            eff = {}
            for at in dels:
                if at in index:
                    eff[index[at]] = 0
            for at in adds:
                eff[index[at]] = 1  # add wins over delete of the same atom
            ps = PartialState(eff)
            if ps not in effects:
                effects.append(ps)
        aid = len(task_actions)
        outs = tuple(Outcome(aid, i, e) for i, e in enumerate(effects))
        task_actions.append(Action(aid, g.name, PartialState(pre), outs))
    return FondTask(variables, init_state, goal, task_actions, f"{dom.name}/{prob.name}")


def load(domain_path: str, problem_path: str):
    """Parse and ground two files; errors carry the offending file name."""
    from .parser import parse_domain, parse_problem

    with open(domain_path, encoding="utf-8") as fh:
        dtext = fh.read()
    with open(problem_path, encoding="utf-8") as fh:
        ptext = fh.read()
    try:
        dom = parse_domain(dtext)
    except PddlError as e:
        raise e.with_source(domain_path) from None
    try:
        prob = parse_problem(ptext, dom)
    except PddlError as e:
        raise e.with_source(problem_path) from None
    return dom, prob
