"""Grounded FOND task representation and the partial-state algebra.

Complete states are plain tuples of ints (one value per variable).  Partial
states are immutable :class:`PartialState` objects holding only the defined
variables.  Everything in the planner is written against these two types.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

CompleteState = tuple


class PartialState:
    """Immutable partial assignment ``var -> value``; missing vars are undefined."""

    __slots__ = ("_map", "_items", "_hash")

    def __init__(self, assignments: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        m = dict(assignments)
        self._map = m
        self._items = tuple(sorted(m.items()))
        self._hash = hash(self._items)

    @classmethod
    def from_state(cls, state: Sequence[int]) -> "PartialState":
        return cls(enumerate(state))

    def get(self, var: int, default=None):
        return self._map.get(var, default)

    def items(self) -> tuple[tuple[int, int], ...]:
        return self._items

    def variables(self) -> Iterator[int]:
        return iter(self._map)

    def as_dict(self) -> dict[int, int]:
        return dict(self._map)

    def __contains__(self, var: int) -> bool:
        return var in self._map

    def __getitem__(self, var: int) -> int:
        return self._map[var]

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartialState):
            return NotImplemented
        return self._items == other._items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"v{v}={x}" for v, x in self._items)
        return f"PartialState({{{inner}}})"

    def entailed_by(self, state: Sequence[int]) -> bool:
        """True iff the complete ``state`` agrees with every defined variable."""
        for v, x in self._items:
            if state[v] != x:
                return False
        return True


EMPTY = PartialState()


@dataclass(frozen=True)
class Variable:
    id: int
    domain_size: int
    value_names: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        if self.domain_size < 1:
            raise ValueError(f"variable {self.id}: domain_size must be >= 1")
        if len(self.value_names) != self.domain_size:
            raise ValueError(f"variable {self.id}: expected {self.domain_size} value names")


@dataclass(frozen=True)
class Outcome:
    action_id: int
    outcome_index: int
    effect: PartialState


@dataclass(frozen=True)
class Action:
    id: int
    name: str
    precondition: PartialState
    outcomes: tuple[Outcome, ...]
    cost: int = 1

    def __post_init__(self):
        if not self.outcomes:
            raise ValueError(f"action {self.name!r} has no outcomes")
        for i, o in enumerate(self.outcomes):
            if o.outcome_index != i or o.action_id != self.id:
                raise ValueError(f"action {self.name!r}: outcome {i} mislabelled")

    @property
    def deterministic(self) -> bool:
        return len(self.outcomes) == 1


@dataclass(frozen=True)
class DeterminizedAction:
    id: int
    source: tuple[int, int]
    precondition: PartialState
    effect: PartialState
    cost: int = 1


@dataclass
class FondTask:
    variables: list[Variable]
    initial_state: CompleteState
    goal: PartialState
    actions: list[Action]
    name: str = "task"
    _prop_offsets: list[int] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.initial_state = tuple(self.initial_state)
        self.validate()
        offsets, total = [], 0
        for var in self.variables:
            offsets.append(total)
            total += var.domain_size
        self._prop_offsets = offsets
        self.num_props = total

    def validate(self) -> None:
        n = len(self.variables)
        for i, var in enumerate(self.variables):
            if var.id != i:
                raise ValueError(f"variable ids must be dense, got {var.id} at {i}")
        if len(self.initial_state) != n:
            raise ValueError("initial state must assign every variable")
        for v, x in enumerate(self.initial_state):
            if not 0 <= x < self.variables[v].domain_size:
                raise ValueError(f"initial value {x} out of domain for variable {v}")
        self._check_partial(self.goal, "goal")
        for i, a in enumerate(self.actions):
            if a.id != i:
                raise ValueError(f"action ids must be dense, got {a.id} at {i}")
            self._check_partial(a.precondition, f"precondition of {a.name}")
            for o in a.outcomes:
                self._check_partial(o.effect, f"outcome {o.outcome_index} of {a.name}")

    def _check_partial(self, ps: PartialState, what: str) -> None:
        for v, x in ps:
            if not 0 <= v < len(self.variables):
                raise ValueError(f"{what}: unknown variable {v}")
            if not 0 <= x < self.variables[v].domain_size:
                raise ValueError(f"{what}: value {x} out of domain for variable {v}")

    def prop_index(self, var: int, value: int) -> int:
        return self._prop_offsets[var] + value

    def prop_mask(self, ps: Iterable[tuple[int, int]]) -> int:
        """Bitmask over propositions (var, value) for a partial or complete state."""
        offs = self._prop_offsets
        mask = 0
        for v, x in ps:
            mask |= 1 << (offs[v] + x)
        return mask

    def state_mask(self, state: Sequence[int]) -> int:
        return self.prop_mask(enumerate(state))

    def is_goal(self, state: Sequence[int]) -> bool:
        return self.goal.entailed_by(state)

    def action_by_name(self, name: str) -> Action | None:
        if not hasattr(self, "_by_name"):
            self._by_name = {a.name: a for a in self.actions}
        return self._by_name.get(name)

    def describe_partial(self, ps: PartialState) -> dict[str, str]:
        return {
            self.variables[v].name or f"v{v}": self.variables[v].value_names[x] for v, x in ps
        }

    def describe_state(self, state: Sequence[int]) -> dict[str, str]:
        return {self.variables[v].name or f"v{v}": self.variables[v].value_names[x] for v, x in enumerate(state)}

    def dump(self) -> str:
        lines = [f"task {self.name}"]
        for var in self.variables:
            lines.append(f"var {var.id} {var.name} {list(var.value_names)}")
        lines.append(f"init {list(self.initial_state)}")
        lines.append(f"goal {self.goal.as_dict()}")
        for a in self.actions:
            lines.append(f"action {a.id} {a.name!r} pre={a.precondition.as_dict()} cost={a.cost}")
            for o in a.outcomes:
                lines.append(f"  outcome {o.outcome_index} {o.effect.as_dict()}")
        return "\n".join(lines)


def update(p1: PartialState, p2: PartialState) -> PartialState:
    """``p1 ⊕ p2``: values of ``p2`` override those of ``p1``."""
    if not len(p2):
        return p1
    if not len(p1):
        return p2
    merged = p1.as_dict()
    merged.update(p2.as_dict())
    return PartialState(merged)


def consistent(p1, p2) -> bool:
    """No variable is assigned different values by the two partial states."""
    if isinstance(p1, PartialState) and isinstance(p2, PartialState):
        if len(p1) > len(p2):
            p1, p2 = p2, p1
        for v, x in p1:
            y = p2.get(v)
            if y is not None and y != x:
                return False
        return True
    # complete state (tuple) against partial state
    if isinstance(p1, PartialState):
        p1, p2 = p2, p1
    if isinstance(p2, PartialState):
        return p2.entailed_by(p1)
    return tuple(p1) == tuple(p2)


def applicable(state: Sequence[int], action: Action) -> bool:
    return action.precondition.entailed_by(state)


def apply_effect(state: Sequence[int], effect: PartialState) -> CompleteState:
    if not len(effect):
        return tuple(state)
    s = list(state)
    for v, x in effect:
        s[v] = x
    return tuple(s)


def apply_outcome(state: Sequence[int], action: Action, outcome: Outcome) -> CompleteState:
    if outcome.action_id != action.id:
        raise ValueError("outcome does not belong to action")
    if not applicable(state, action):
        raise ValueError(f"action {action.name!r} is not applicable")
    return apply_effect(state, outcome.effect)


def regress(p: PartialState, action: Action, outcome: Outcome) -> PartialState | None:
    """Weakest partial state under which ``action`` with ``outcome`` yields ``p``.

    Returns ``None`` when ``p`` and the outcome disagree on some variable, or
    when ``p`` requires a value on a variable the outcome leaves alone but the
    precondition fixes differently (no state could then reach ``p``).
    """
    eff = outcome.effect
    pre = action.precondition
    result = {}
    for v, x in p:
        e = eff.get(v)
        if e is None:
            y = pre.get(v)
            if y is not None and y != x:
                return None
            result[v] = x
        elif e != x:
            return None
    result.update(action.precondition.as_dict())
    return PartialState(result)


def can_regress_set(p: PartialState, task: FondTask) -> list[tuple[Action, Outcome]]:
    return [
        (a, o) for a in task.actions for o in a.outcomes if consistent(p, o.effect)
    ]


def determinize(task: FondTask) -> list[DeterminizedAction]:
    det = []
    for a in task.actions:
        for o in a.outcomes:
            det.append(
                DeterminizedAction(len(det), (a.id, o.outcome_index), a.precondition, o.effect, a.cost)
            )
    return det


def make_action(aid: int, name: str, pre: Mapping[int, int], effects: Sequence[Mapping[int, int]], cost: int = 1) -> Action:
    """Convenience constructor used by generators and tests."""
    outs = tuple(Outcome(aid, i, PartialState(e)) for i, e in enumerate(effects))
    return Action(aid, name, PartialState(pre), outs, cost)


def binary_task(num_vars: int, init: Sequence[int], goal: Mapping[int, int],
                actions: Sequence[tuple[str, Mapping[int, int], Sequence[Mapping[int, int]]]],
                name: str = "task") -> FondTask:
    variables = [Variable(i, 2, ("false", "true"), f"p{i}") for i in range(num_vars)]
    acts = [make_action(i, n, pre, effs) for i, (n, pre, effs) in enumerate(actions)]
    return FondTask(variables, tuple(init), PartialState(goal), acts, name)
