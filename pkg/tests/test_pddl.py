import pytest

from fondplan import BENCHMARK_DIR
from fondplan.pddl import (
    EffOneof,
    PddlError,
    domain_to_pddl,
    expand_effect,
    ground,
    load,
    parse,
    parse_domain,
    parse_problem,
    problem_to_pddl,
    remove_objects,
    symmetric_objects,
)

MINI_DOMAIN = """
(define (domain mini)
  (:requirements :strips :typing)
  (:types thing)
  (:predicates (ready ?x - thing) (done ?x - thing))
  (:action finish
    :parameters (?x - thing)
    :precondition (ready ?x)
    :effect (and (done ?x) (not (ready ?x)))))
"""

MINI_PROBLEM = """
(define (problem mini-1)
  (:domain mini)
  (:objects a b - thing)
  (:init (ready a) (ready b))
  (:goal (and (done a))))
"""

TRI = BENCHMARK_DIR / "triangle-tireworld"
SPARES = BENCHMARK_DIR / "tireworld-spares"


def count_oneof(e) -> int:
    if isinstance(e, EffOneof):
        return 1 + sum(count_oneof(c) for c in e.children)
    return sum(count_oneof(c) for c in getattr(e, "children", ()))


def test_minimal_domain():
    dom = parse_domain(MINI_DOMAIN)
    assert dom.name == "mini"
    assert len(dom.actions) == 1
    assert count_oneof(dom.actions[0].effect) == 0
    assert ":typing" in dom.requirements


def test_oneof_shape():
    dom = parse_domain(MINI_DOMAIN.replace(
        "(and (done ?x) (not (ready ?x)))", "(oneof (done ?x) (ready ?x))"))
    eff = dom.actions[0].effect
    assert isinstance(eff, EffOneof) and len(eff.children) == 2


def test_truncated_input_reports_end_of_input():
    with pytest.raises(PddlError) as err:
        parse_domain("(define (domain")
    assert "end of input" in str(err.value)
    assert err.value.line == 1


def test_unbalanced_close_paren():
    with pytest.raises(PddlError) as err:
        parse_domain("(define (domain x)))")
    assert err.value.line == 1 and err.value.col is not None


@pytest.mark.parametrize("bad, needle", [
    ("(ready ?x)", None),
    ("(ready ?y)", "unbound variable ?y"),
    ("(ready ?x ?x)", "wrong arity"),
    ("(shiny ?x)", "unknown predicate shiny"),
    ("(or (ready ?x) (done ?x))", "unsupported construct 'or'"),
])
def test_precondition_errors_name_the_offender(bad, needle):
    text = MINI_DOMAIN.replace(":precondition (ready ?x)", f":precondition {bad}")
    if needle is None:
        parse_domain(text)
        return
    with pytest.raises(PddlError) as err:
        parse_domain(text)
    assert needle in str(err.value)
    assert err.value.line is not None


def test_problem_errors():
    dom = parse_domain(MINI_DOMAIN)
    with pytest.raises(PddlError, match="unknown object c"):
        parse_problem(MINI_PROBLEM.replace("(ready b)", "(ready c)"), dom)
    with pytest.raises(PddlError, match="unknown type gadget"):
        parse_problem(MINI_PROBLEM.replace("a b - thing", "a b - gadget"), dom)
    with pytest.raises(PddlError, match="not mini"):
        parse_problem(MINI_PROBLEM.replace("(:domain mini)", "(:domain other)"), dom)


def test_error_location_points_at_token():
    text = MINI_DOMAIN.replace(":precondition (ready ?x)", ":precondition (shiny ?x)")
    with pytest.raises(PddlError) as err:
        parse_domain(text)
    line = text.splitlines()[err.value.line - 1]
    assert line[err.value.col - 1:].startswith("shiny")


def test_unsupported_requirement():
    with pytest.raises(PddlError, match="unsupported requirement :conditional-effects"):
        parse_domain(MINI_DOMAIN.replace(":strips :typing", ":strips :conditional-effects"))


def test_load_errors_carry_file_name(tmp_path):
    d = tmp_path / "d.pddl"
    d.write_text(MINI_DOMAIN.replace("(ready ?x)\n", "(shiny ?x)\n", 1))
    p = tmp_path / "p.pddl"
    p.write_text(MINI_PROBLEM)
    with pytest.raises(PddlError) as err:
        load(str(d), str(p))
    assert str(err.value).startswith(str(d) + ":")


def test_ground_counts_bindings():
    dom, prob = parse(MINI_DOMAIN, MINI_PROBLEM)
    task = ground(dom, prob)
    assert [a.name for a in task.actions] == ["finish a", "finish b"]
    assert all(len(a.outcomes) == 1 for a in task.actions)


def test_cross_product_of_oneofs():
    dom = parse_domain("""
    (define (domain xp)
      (:predicates (a) (b) (c) (d))
      (:action act :parameters ()
        :precondition (and)
        :effect (and (oneof (a) (b)) (oneof (c) (d)))))""")
    outs = expand_effect(dom.actions[0].effect)
    names = [sorted(str(l.atom) for l in o) for o in outs]
    assert names == [["a", "c"], ["a", "d"], ["b", "c"], ["b", "d"]]


def test_nested_oneof_flattens():
    dom = parse_domain("""
    (define (domain nest)
      (:predicates (a) (b) (c))
      (:action act :parameters () :precondition (and)
        :effect (oneof (a) (oneof (b) (c)))))""")
    assert len(expand_effect(dom.actions[0].effect)) == 3


def test_triangle_moves_have_two_outcomes():
    dom, prob = load(TRI / "domain.pddl", TRI / "p01.pddl")
    task = ground(dom, prob)
    moves = [a for a in task.actions if a.name.startswith("move-car")]
    assert moves and all(len(a.outcomes) == 2 for a in moves)
    # the flat-tire outcome additionally deletes not-flattire
    a = moves[0]
    flat = task.variables.index(next(v for v in task.variables if v.name == "not-flattire"))
    assert a.outcomes[1].effect.get(flat) == 0 and a.outcomes[0].effect.get(flat) is None


def test_statics_are_compiled_away():
    dom, prob = load(TRI / "domain.pddl", TRI / "p01.pddl")
    task = ground(dom, prob)
    assert not any(v.name.startswith("road ") for v in task.variables)


def test_equality_and_negative_preconditions():
    dom, prob = load(BENCHMARK_DIR / "blocksworld" / "domain.pddl", BENCHMARK_DIR / "blocksworld" / "p01.pddl")
    task = ground(dom, prob)
    names = {a.name for a in task.actions}
    assert "put-on-block a a" not in names and "put-on-block a b" in names


def test_goal_atom_outside_relaxation_still_gets_a_variable():
    dom, prob = parse(MINI_DOMAIN, MINI_PROBLEM.replace("(:goal (and (done a)))", "(:goal (and (done a) (ready a) (done b)))"))
    task = ground(dom, prob)
    assert len(task.goal) == 3


def test_round_trip_fixpoint():
    for sub in ("triangle-tireworld", "blocksworld", "miner", "doors"):
        dom, prob = load(BENCHMARK_DIR / sub / "domain.pddl", BENCHMARK_DIR / sub / "p01.pddl")
        d1, p1 = domain_to_pddl(dom), problem_to_pddl(prob)
        dom2, prob2 = parse(d1, p1)
        assert domain_to_pddl(dom2) == d1
        assert problem_to_pddl(prob2) == p1
        assert ground(dom2, prob2).dump() == ground(dom, prob).dump()


def test_symmetric_spares_share_a_class():
    dom, prob = load(SPARES / "domain.pddl", SPARES / "p01.pddl")
    part = symmetric_objects(dom, prob)
    assert ("t1", "t2", "t3") in part.eligible_classes()
    assert ("t4", "t5", "t6") in part.eligible_classes()
    i = part.class_of("ld")
    assert part.classes[i] == ("ld",) and not part.eligible[i]


def test_distinct_objects_stay_singletons():
    dom, prob = load(BENCHMARK_DIR / "chain" / "domain.pddl", BENCHMARK_DIR / "chain" / "p01.pddl")
    part = symmetric_objects(dom, prob)
    assert all(len(c) == 1 for c in part.classes)


TWINS_DOMAIN = """
(define (domain twins)
  (:predicates (link ?a ?b) (mark ?a) (goal-reached))
  (:action go :parameters (?a ?b) :precondition (link ?a ?b) :effect (goal-reached)))"""


def _twins(init: str):
    dom = parse_domain(TWINS_DOMAIN)
    prob = parse_problem(f"""
    (define (problem twins-1) (:domain twins)
      (:objects w x y z)
      (:init {init})
      (:goal (goal-reached)))""", dom)
    return symmetric_objects(dom, prob)


def test_swap_check_rejects_signature_twins():
    # w and y look alike atom by atom, but swapping only them turns
    # (link w x) into (link y x), which is not in the initial state
    part = _twins("(link w x) (link y z) (mark x) (mark z)")
    assert part.classes[part.class_of("w")] == ("w",)
    assert part.classes[part.class_of("y")] == ("y",)


def test_swap_check_accepts_true_twins():
    part = _twins("(link w x) (link y x) (mark x) (mark z)")
    assert part.classes[part.class_of("w")] == ("w", "y")


def test_remove_objects():
    dom, prob = load(SPARES / "domain.pddl", SPARES / "p01.pddl")
    assert remove_objects(prob, set()) == prob
    smaller = remove_objects(prob, {"t2"}, dom)
    assert "t2" not in smaller.objects
    assert not any("t2" in a.args for a in smaller.init)
    assert smaller.goal == prob.goal
    with pytest.raises(PddlError, match="goal objects"):
        remove_objects(prob, {"ld"}, dom)
    with pytest.raises(PddlError, match="unknown"):
        remove_objects(prob, {"nope"}, dom)
