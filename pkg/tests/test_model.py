import random

import pytest

from fondplan.generators import random_task
from fondplan.model import (
    PartialState,
    apply_outcome,
    applicable,
    binary_task,
    can_regress_set,
    consistent,
    determinize,
    make_action,
    regress,
    update,
)

P = PartialState


def test_update_overrides_left():
    assert update(P({1: 0, 2: 1}), P({2: 0})) == P({1: 0, 2: 0})
    assert update(P({1: 0}), P()) == P({1: 0})
    assert update(P(), P({1: 1})) == P({1: 1})


def test_update_leaves_inputs_alone():
    a, b = P({0: 1}), P({0: 0, 1: 1})
    update(a, b)
    assert a == P({0: 1}) and b == P({0: 0, 1: 1})


def test_update_right_chain_associative():
    rng = random.Random(3)
    for _ in range(300):
        p, q1, q2 = (P({v: rng.randint(0, 1) for v in rng.sample(range(5), rng.randint(0, 5))})
                     for _ in range(3))
        assert update(update(p, q1), q2) == update(p, update(q1, q2))


def test_consistent():
    assert consistent(P({1: 0}), P({2: 1}))
    assert not consistent(P({1: 0}), P({1: 1}))
    p = P({0: 1, 3: 0})
    assert consistent(p, p)


def test_consistent_is_symmetric_and_matches_extension():
    rng = random.Random(5)
    for _ in range(300):
        s = tuple(rng.randint(0, 1) for _ in range(4))
        p = P({v: rng.randint(0, 1) for v in rng.sample(range(4), rng.randint(0, 4))})
        q = P({v: rng.randint(0, 1) for v in rng.sample(range(4), rng.randint(0, 4))})
        assert consistent(p, q) == consistent(q, p)
        assert consistent(s, p) == all(s[v] == x for v, x in p)
        assert consistent(s, p) == p.entailed_by(s)


def test_applicable():
    a = make_action(0, "a", {0: 0}, [{}])
    assert applicable((0,), a)
    assert not applicable((1,), a)
    assert applicable((1, 0, 1), make_action(0, "b", {}, [{}]))


def test_apply_outcome():
    a = make_action(0, "a", {}, [{0: 1}, {}, {0: 0}])
    assert apply_outcome((0, 0), a, a.outcomes[0]) == (1, 0)
    assert apply_outcome((0, 0), a, a.outcomes[1]) == (0, 0)
    assert apply_outcome((0,), a, a.outcomes[2]) == (0,)


def test_apply_outcome_rejects_inapplicable():
    a = make_action(0, "a", {0: 1}, [{1: 1}])
    with pytest.raises(ValueError):
        apply_outcome((0, 0), a, a.outcomes[0])


def test_regress_examples():
    a = make_action(0, "a", {2: 1}, [{1: 1}])
    assert regress(P({1: 1}), a, a.outcomes[0]) == P({2: 1})
    noop = make_action(1, "noop", {}, [{}])
    assert regress(P({1: 1}), noop, noop.outcomes[0]) == P({1: 1})
    b = make_action(2, "b", {}, [{1: 0}])
    assert regress(P({1: 1}), b, b.outcomes[0]) is None


def test_regress_undefined_when_precondition_conflicts():
    # v0 must be 1 afterwards, the action needs v0 = 0 and never touches it
    a = make_action(0, "a", {0: 0}, [{1: 1}])
    assert regress(P({0: 1}), a, a.outcomes[0]) is None


def test_can_regress_set():
    t = binary_task(2, [0, 0], {0: 1}, [("a1", {}, [{0: 1}]), ("a2", {}, [{1: 0}])])
    assert len(can_regress_set(P(), t)) == 2
    assert [(a.name, o.outcome_index) for a, o in can_regress_set(P({0: 1}), t)] == [("a1", 0), ("a2", 0)]
    t2 = binary_task(2, [0, 0], {0: 1}, [("z", {}, [{0: 0}])])
    assert can_regress_set(P({0: 1}), t2) == []


def test_determinize_counts_and_order():
    t = binary_task(2, [0, 0], {0: 1}, [("a1", {1: 0}, [{0: 1}, {1: 1}]), ("a2", {}, [{0: 0}])])
    det = determinize(t)
    assert [d.source for d in det] == [(0, 0), (0, 1), (1, 0)]
    assert det[1].precondition == P({1: 0}) and det[1].effect == P({1: 1})
    t3 = binary_task(1, [0], {0: 1}, [("x", {}, [{0: 1}, {0: 0}, {}])])
    assert len(determinize(t3)) == 3


def test_determinize_regroups_to_original():
    rng = random.Random(11)
    for _ in range(50):
        t = random_task(rng)
        groups = {}
        for d in determinize(t):
            groups.setdefault(d.source[0], []).append(d)
        for a in t.actions:
            ds = groups[a.id]
            assert [d.source[1] for d in ds] == list(range(len(a.outcomes)))
            assert all(d.precondition == a.precondition for d in ds)
            assert [d.effect for d in ds] == [o.effect for o in a.outcomes]


def test_task_validation():
    with pytest.raises(ValueError):
        binary_task(2, [0, 2], {0: 1}, [])
    with pytest.raises(ValueError):
        binary_task(2, [0, 0], {3: 1}, [])
    with pytest.raises(ValueError):
        binary_task(1, [0], {0: 1}, [("a", {}, [])])


def test_dump_mentions_every_action():
    t = binary_task(2, [0, 0], {0: 1}, [("go", {}, [{0: 1}, {}])])
    text = t.dump()
    assert "go" in text and text.count("outcome") == 2
