"""Object symmetry classes and object removal for redundant-object sampling."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from .parser import Atom, LiftedDomain, LiftedProblem, PddlError


@dataclass(frozen=True)
class SymmetryPartition:
    classes: tuple[tuple[str, ...], ...]
    eligible: tuple[bool, ...]

    def eligible_classes(self) -> list[tuple[str, ...]]:
        return [c for c, ok in zip(self.classes, self.eligible) if ok]

    def class_of(self, obj: str) -> int:
        for i, c in enumerate(self.classes):
            if obj in c:
                return i
        raise KeyError(obj)


def goal_objects(prob: LiftedProblem) -> set[str]:
    return {arg for lit in prob.goal for arg in lit.atom.args}


def _signature(obj: str, atoms) -> tuple:
    """Multiset of (predicate, position, pattern of the other arguments),
    where the pattern only records which other slots repeat ``obj``."""
    sig = Counter()
    for at in atoms:
        for i, a in enumerate(at.args):
            if a == obj:
                pattern = tuple(j for j, b in enumerate(at.args) if b == obj)
                sig[(at.pred, i, pattern)] += 1
    return tuple(sorted(sig.items()))


def _swap_invariant(o1: str, o2: str, atoms: frozenset) -> bool:
    def sw(x):
        return o2 if x == o1 else o1 if x == o2 else x

    return all(Atom(at.pred, tuple(sw(x) for x in at.args)) in atoms for at in atoms)


def symmetric_objects(dom: LiftedDomain, prob: LiftedProblem) -> SymmetryPartition:
    """Partition the problem objects into interchangeable classes.

    Objects are grouped by type and signature first; inside a group an exact
    test confirms that swapping the two names maps the initial atoms onto
    themselves.  Goal objects are singleton classes marked ineligible.
    """
    init = frozenset(prob.init)
    in_goal = goal_objects(prob)
    objs = sorted(o for o in prob.objects if o not in dom.constants)
    groups: dict[tuple, list[str]] = {}
    singles = []
    for o in objs:
        if o in in_goal:
            singles.append(o)
            continue
        key = (prob.objects[o], _signature(o, prob.init))
        groups.setdefault(key, []).append(o)
    classes: list[tuple[tuple[str, ...], bool]] = []
    for members in groups.values():
        reps: list[list[str]] = []
        for o in members:
            for cls in reps:
                if _swap_invariant(cls[0], o, init):
                    cls.append(o)
                    break
            else:
                reps.append([o])
        classes.extend((tuple(c), True) for c in reps)
    classes.extend(((o,), False) for o in singles)
    classes.sort(key=lambda c: c[0][0])
    return SymmetryPartition(tuple(c for c, _ in classes), tuple(e for _, e in classes))


def remove_objects(prob: LiftedProblem, removed, dom: LiftedDomain | None = None) -> LiftedProblem:
    """Drop ``removed`` objects and every initial atom mentioning them."""
    removed = set(removed)
    if not removed:
        return replace(prob, objects=dict(prob.objects))
    bad_goal = removed & goal_objects(prob)
    if bad_goal:
        raise PddlError(f"cannot remove goal objects: {sorted(bad_goal)}")
    if dom is not None and removed & set(dom.constants):
        raise PddlError(f"cannot remove constants: {sorted(removed & set(dom.constants))}")
    unknown = removed - set(prob.objects)
    if unknown:
        raise PddlError(f"cannot remove unknown objects: {sorted(unknown)}")
    objects = {o: t for o, t in prob.objects.items() if o not in removed}
    init = tuple(at for at in prob.init if not removed & set(at.args))
    return replace(prob, objects=objects, init=init)
