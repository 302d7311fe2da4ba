"""Deadend generalization, forbidden state-action pairs and poisoning."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .heuristic import RelaxedTask
from .model import FondTask, PartialState, can_regress_set, regress


@dataclass(frozen=True, eq=False)
class Fsap:
    ps: PartialState
    action_id: int
    source_deadend: PartialState
    props: tuple[int, ...] = ()
    mask: int = 0

    def key(self) -> tuple:
        return (self.ps, self.action_id)

    def __eq__(self, other):
        return isinstance(other, Fsap) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True)
class DeadendRecord:
    ps: PartialState
    witness: tuple
    generalized: bool = True


@dataclass
class FsapStore:
    """Insert-only FSAP store with per-action buckets.

    Matching against complete states uses proposition bitmasks: for a complete
    state the FSAP matches iff its mask is a subset of the state's mask.
    """

    task: FondTask
    buckets: dict[int, list[Fsap]] = field(default_factory=dict)
    generation: int = 0
    _keys: set = field(default_factory=set)

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key) -> bool:
        if isinstance(key, Fsap):
            key = key.key()
        return key in self._keys

    def make(self, ps: PartialState, action_id: int, source: PartialState) -> Fsap:
        props = tuple(self.task.prop_index(v, x) for v, x in ps)
        return Fsap(ps, action_id, source, props, self.task.prop_mask(ps))

    def add(self, fsap: Fsap) -> bool:
        if fsap.key() in self._keys:
            return False
        self._keys.add(fsap.key())
        self.buckets.setdefault(fsap.action_id, []).append(fsap)
        self.generation += 1
        return True

    def for_action(self, action_id: int) -> list[Fsap]:
        return self.buckets.get(action_id, ())

    def forbids(self, state_mask: int, action_id: int) -> bool:
        for f in self.buckets.get(action_id, ()):
            if f.mask & ~state_mask == 0:
                return True
        return False

    def all(self) -> list[Fsap]:
        return [f for aid in sorted(self.buckets) for f in self.buckets[aid]]


def is_forbidden(state: Sequence[int], action, store: FsapStore) -> bool:
    aid = action if isinstance(action, int) else action.id
    return store.forbids(store.task.state_mask(state), aid)


def generalize_deadend(state: Sequence[int], rt: RelaxedTask) -> DeadendRecord:
    """Drop variables in id order while the goal stays delete-relaxed
    unreachable.  A state the relaxation cannot prove dead is kept whole."""
    goal = rt.task.goal
    current = dict(enumerate(state))
    if rt.relaxed_reachable(PartialState(current), goal):
        return DeadendRecord(PartialState(current), tuple(state), generalized=False)
    for v in range(len(state)):
        value = current.pop(v)
        if rt.relaxed_reachable(PartialState(current), goal):
            current[v] = value
    return DeadendRecord(PartialState(current), tuple(state), generalized=True)


def generate_fsaps(de: DeadendRecord, task: FondTask, store: FsapStore | None = None) -> list[Fsap]:
    """FSAPs obtained by regressing the deadend through every consistent
    action outcome; pairs already present in ``store`` are skipped."""
    out, keys = [], set()
    for a, o in can_regress_set(de.ps, task):
        ps = regress(de.ps, a, o)
        if ps is None:
            continue
        key = (ps, a.id)
        if key in keys or (store is not None and key in store):
            continue
        keys.add(key)
        if store is not None:
            out.append(store.make(ps, a.id, de.ps))
        else:
            out.append(Fsap(ps, a.id, de.ps))
    return out


@dataclass
class DeadendManager:
    """Records deadends and keeps the FSAP store for one solve run."""

    task: FondTask
    rt: RelaxedTask
    store: FsapStore = None
    deadends: list[DeadendRecord] = field(default_factory=list)
    _seen: set = field(default_factory=set)
    shrink_total: float = 0.0

    def __post_init__(self):
        if self.store is None:
            self.store = FsapStore(self.task)

    def record(self, state: Sequence[int]) -> int:
        """Generalize the deadend ``state``; return the number of new FSAPs."""
        state = tuple(state)
        if state in self._seen:
            return 0
        self._seen.add(state)
        de = generalize_deadend(state, self.rt)
        if de.generalized:
            assert not self.rt.relaxed_reachable(de.ps, self.task.goal)
        self.deadends.append(de)
        self.shrink_total += 1.0 - len(de.ps) / max(1, len(state))
        added = 0
        for f in generate_fsaps(de, self.task, self.store):
            added += self.store.add(f)
        return added

    def is_relaxed_deadend(self, state: Sequence[int]) -> bool:
        return not self.rt.relaxed_reachable(tuple(state), self.task.goal)

    @property
    def shrink_ratio(self) -> float:
        return self.shrink_total / len(self.deadends) if self.deadends else 0.0


def poison(node_id: int, sol) -> int:
    """Poison the parent of ``node_id`` and every node created beneath it.

    Returns the number of newly poisoned nodes; a root node has no parent and
    nothing is poisoned.
    """
    parent = sol.nodes[node_id].parent
    if parent is None:
        return 0
    count = 0
    stack = [parent]
    while stack:
        nid = stack.pop()
        node = sol.nodes[nid]
        if node.poisoned:
            continue
        node.poisoned = True
        count += 1
        stack.extend(node.children)
    sol.poison_events += 1
    return count
