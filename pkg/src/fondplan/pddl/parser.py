"""S-expression reader and lifted AST for FOND-PDDL (STRIPS, typing,
equality, ``oneof`` effects)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


class PddlError(Exception):
    """Syntax or semantic error; carries a 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None, source: str | None = None):
        self.message, self.line, self.col, self.source = message, line, col, source
        super().__init__(self._render())

    def _render(self) -> str:
        where = ""
        if self.source:
            where = self.source
        if self.line is not None:
            where += f"{':' if where else 'line '}{self.line}:{self.col}"
        return f"{where}: {self.message}" if where else self.message

    def with_source(self, source: str) -> "PddlError":
        return PddlError(self.message, self.line, self.col, source)


class Sym(str):
    """A symbol token remembering where it was read."""

    line: int
    col: int

    def __new__(cls, text: str, line: int = 0, col: int = 0):
        obj = super().__new__(cls, text)
        obj.line, obj.col = line, col
        return obj


class SList(list):
    line: int = 0
    col: int = 0


SExpr = Union[Sym, SList]


def read_sexprs(text: str) -> list[SExpr]:
    """Parse ``text`` into nested lists of lowercase symbols.  Comments start
    with ``;`` and run to the end of the line."""
    stack: list[SList] = []
    top: list[SExpr] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "(":
            lst = SList()
            lst.line, lst.col = line, col
            stack.append(lst)
            i += 1
            col += 1
            continue
        if c == ")":
            if not stack:
                raise PddlError("unbalanced ')'", line, col)
            done = stack.pop()
            (stack[-1] if stack else top).append(done)
            i += 1
            col += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        tok = Sym(text[i:j].lower(), line, col)
        (stack[-1] if stack else top).append(tok)
        col += j - i
        i = j
    if stack:
        raise PddlError(f"unexpected end of input: {len(stack)} unclosed '('", line, col)
    return top


# -- lifted AST ---------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return " ".join((self.pred,) + self.args)

    def sexpr(self) -> str:
        return "(" + str(self) + ")"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def sexpr(self) -> str:
        return self.atom.sexpr() if self.positive else f"(not {self.atom.sexpr()})"


@dataclass(frozen=True)
class EffAnd:
    children: tuple


@dataclass(frozen=True)
class EffOneof:
    children: tuple


Effect = Union[EffAnd, EffOneof, Literal]


@dataclass(frozen=True)
class LiftedAction:
    name: str
    params: tuple[tuple[str, str], ...]
    precondition: tuple[Literal, ...]
    effect: Effect


@dataclass
class LiftedDomain:
    name: str
    requirements: tuple[str, ...] = ()
    types: dict[str, str] = field(default_factory=dict)  # type -> supertype
    constants: dict[str, str] = field(default_factory=dict)
    predicates: dict[str, tuple[str, ...]] = field(default_factory=dict)
    actions: list[LiftedAction] = field(default_factory=list)

    def is_subtype(self, t: str, sup: str) -> bool:
        seen = set()
        while t not in seen:
            if t == sup:
                return True
            seen.add(t)
            t = self.types.get(t, "object")
        return sup == "object"

    def count_oneof(self) -> int:
        def walk(e):
            if isinstance(e, Literal):
                return 0
            return int(isinstance(e, EffOneof)) + sum(walk(c) for c in e.children)

        return sum(walk(a.effect) for a in self.actions)


@dataclass
class LiftedProblem:
    name: str
    domain_name: str
    objects: dict[str, str] = field(default_factory=dict)
    init: tuple[Atom, ...] = ()
    goal: tuple[Literal, ...] = ()


# -- parsing ------------------------------------------------------------------

SUPPORTED_REQUIREMENTS = {
    ":strips", ":typing", ":equality", ":non-deterministic", ":negative-preconditions",
}


def _err(msg: str, node) -> PddlError:
    return PddlError(msg, getattr(node, "line", None), getattr(node, "col", None))


def _expect_list(node, what: str) -> SList:
    if not isinstance(node, list):
        raise _err(f"expected a list for {what}, got {node!r}", node)
    return node


def _typed_list(items, default: str = "object") -> list[tuple[str, str]]:
    """``a b - t c`` -> [(a, t), (b, t), (c, object)]."""
    out, pending = [], []
    i = 0
    while i < len(items):
        tok = items[i]
        if isinstance(tok, list):
            raise _err("unexpected list in typed list (either-types are not supported)", tok)
        if tok == "-":
            if i + 1 >= len(items) or isinstance(items[i + 1], list):
                raise _err("missing type after '-'", tok)
            t = items[i + 1]
            out.extend((p, t) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(tok)
        i += 1
    out.extend((p, default) for p in pending)
    return out


def _parse_atom(node, ctx: str) -> Atom:
    node = _expect_list(node, ctx)
    if not node or isinstance(node[0], list):
        raise _err(f"malformed atom in {ctx}", node)
    for a in node[1:]:
        if isinstance(a, list):
            raise _err(f"nested term in atom {node[0]!r}", a)
    return Atom(node[0], tuple(node[1:]))


def _parse_literal(node, ctx: str) -> Literal:
    node = _expect_list(node, ctx)
    if node and node[0] == "not":
        if len(node) != 2:
            raise _err("'not' takes exactly one argument", node)
        return Literal(_parse_atom(node[1], ctx), False)
    return Literal(_parse_atom(node, ctx), True)


_UNSUPPORTED = {"or", "imply", "forall", "exists", "when", "increase", "decrease"}


def _parse_condition(node, ctx: str) -> tuple[Literal, ...]:
    node = _expect_list(node, ctx)
    if not node:
        return ()
    head = node[0]
    if head == "and":
        out = []
        for c in node[1:]:
            out.extend(_parse_condition(c, ctx))
        return tuple(out)
    if head in _UNSUPPORTED:
        raise _err(f"unsupported construct '{head}' in {ctx}", node)
    return (_parse_literal(node, ctx),)


def _parse_effect(node, ctx: str) -> Effect:
    node = _expect_list(node, ctx)
    if not node:
        return EffAnd(())
    head = node[0]
    if head == "and":
        return EffAnd(tuple(_parse_effect(c, ctx) for c in node[1:]))
    if head == "oneof":
        if len(node) < 2:
            raise _err("'oneof' needs at least one branch", node)
        return EffOneof(tuple(_parse_effect(c, ctx) for c in node[1:]))
    if head in _UNSUPPORTED:
        raise _err(f"unsupported construct '{head}' in {ctx} (conditional effects are not supported)", node)
    return _parse_literal(node, ctx)


def _sections(node: SList, kind: str):
    if len(node) < 2 or node[0] != "define":
        raise _err(f"expected (define ...) for {kind}", node)
    header = _expect_list(node[1], kind)
    if len(header) != 2 or header[0] != kind:
        raise _err(f"expected ({kind} <name>)", header)
    return str(header[1]), node[2:]


def parse_domain(text: str) -> LiftedDomain:
    exprs = read_sexprs(text)
    if len(exprs) != 1:
        raise PddlError("expected exactly one (define (domain ...)) form", 1, 1)
    name, body = _sections(_expect_list(exprs[0], "domain"), "domain")
    dom = LiftedDomain(name)
    for sec in body:
        sec = _expect_list(sec, "domain section")
        if not sec:
            raise _err("empty section", sec)
        key = sec[0]
        if key == ":requirements":
            dom.requirements = tuple(str(r) for r in sec[1:])
            for r in dom.requirements:
                if r not in SUPPORTED_REQUIREMENTS:
                    raise _err(f"unsupported requirement {r}", r)
        elif key == ":types":
            for t, sup in _typed_list(sec[1:]):
                dom.types[t] = sup
        elif key == ":constants":
            for c, t in _typed_list(sec[1:]):
                dom.constants[c] = t
        elif key == ":predicates":
            for p in sec[1:]:
                p = _expect_list(p, "predicate declaration")
                if not p or isinstance(p[0], list):
                    raise _err("malformed predicate declaration", p)
                dom.predicates[str(p[0])] = tuple(t for _, t in _typed_list(p[1:]))
        elif key == ":action":
            dom.actions.append(_parse_action(sec))
        else:
            raise _err(f"unknown domain section {key}", key)
    _check_domain(dom)
    return dom


def _parse_action(sec: SList) -> LiftedAction:
    if len(sec) < 2 or isinstance(sec[1], list):
        raise _err("action needs a name", sec)
    name = str(sec[1])
    params: list[tuple[str, str]] = []
    pre: tuple[Literal, ...] = ()
    eff: Effect = EffAnd(())
    i = 2
    while i < len(sec):
        key = sec[i]
        if i + 1 >= len(sec):
            raise _err(f"missing value for {key} in action {name}", key)
        val = sec[i + 1]
        if key == ":parameters":
            params = _typed_list(_expect_list(val, "parameters"))
        elif key == ":precondition":
            pre = _parse_condition(val, f"precondition of {name}")
        elif key == ":effect":
            eff = _parse_effect(val, f"effect of {name}")
        else:
            raise _err(f"unknown action field {key}", key)
        i += 2
    return LiftedAction(name, tuple(params), pre, eff)


def _effect_literals(e: Effect):
    if isinstance(e, Literal):
        yield e
    else:
        for c in e.children:
            yield from _effect_literals(c)


def _check_domain(dom: LiftedDomain) -> None:
    known_types = set(dom.types) | set(dom.types.values()) | {"object"}
    for c, t in dom.constants.items():
        if t not in known_types:
            raise _err(f"constant {c} has unknown type {t}", t)
    for p, ts in dom.predicates.items():
        for t in ts:
            if t not in known_types:
                raise _err(f"predicate {p} uses unknown type {t}", t)
    for a in dom.actions:
        bound = {v for v, _ in a.params}
        for v, t in a.params:
            if not v.startswith("?"):
                raise _err(f"action {a.name}: parameter {v} must start with '?'", v)
            if t not in known_types:
                raise _err(f"action {a.name}: unknown type {t}", t)
        for lit in list(a.precondition) + list(_effect_literals(a.effect)):
            at = lit.atom
            if at.pred == "=":
                if len(at.args) != 2:
                    raise _err(f"action {a.name}: '=' takes two arguments", at.pred)
            elif at.pred not in dom.predicates:
                raise _err(f"action {a.name}: unknown predicate {at.pred}", at.pred)
            elif len(at.args) != len(dom.predicates[at.pred]):
                raise _err(f"action {a.name}: wrong arity for {at.pred}", at.pred)
            for arg in at.args:
                if arg.startswith("?") and arg not in bound:
                    raise _err(f"action {a.name}: unbound variable {arg}", arg)
                if not arg.startswith("?") and arg not in dom.constants:
                    raise _err(f"action {a.name}: unknown constant {arg}", arg)
        for lit in _effect_literals(a.effect):
            if lit.atom.pred == "=":
                raise _err(f"action {a.name}: '=' cannot appear in an effect", lit.atom.pred)


def parse_problem(text: str, domain: LiftedDomain | None = None) -> LiftedProblem:
    exprs = read_sexprs(text)
    if len(exprs) != 1:
        raise PddlError("expected exactly one (define (problem ...)) form", 1, 1)
    name, body = _sections(_expect_list(exprs[0], "problem"), "problem")
    prob = LiftedProblem(name, "")
    for sec in body:
        sec = _expect_list(sec, "problem section")
        if not sec:
            raise _err("empty section", sec)
        key = sec[0]
        if key == ":domain":
            prob.domain_name = sec[1]
        elif key == ":requirements":
            pass
        elif key == ":objects":
            for o, t in _typed_list(sec[1:]):
                prob.objects[o] = t
        elif key == ":init":
            atoms = []
            for a in sec[1:]:
                lit = _parse_literal(a, "init")
                if not lit.positive:
                    continue  # closed world: negative init facts are redundant
                atoms.append(lit.atom)
            prob.init = tuple(dict.fromkeys(atoms))
        elif key == ":goal":
            if len(sec) != 2:
                raise _err("goal takes one formula", sec)
            prob.goal = _parse_condition(sec[1], "goal")
        else:
            raise _err(f"unknown problem section {key}", key)
    if domain is not None:
        check_problem(domain, prob)
    return prob


def check_problem(dom: LiftedDomain, prob: LiftedProblem) -> None:
    if prob.domain_name and prob.domain_name != dom.name:
        raise _err(f"problem is for domain {prob.domain_name}, not {dom.name}", prob.domain_name)
    known_types = set(dom.types) | set(dom.types.values()) | {"object"}
    for o, t in prob.objects.items():
        if t not in known_types:
            raise _err(f"object {o} has unknown type {t}", t)
    names = dict(dom.constants)
    names.update(prob.objects)
    for at in list(prob.init) + [lit.atom for lit in prob.goal]:
        if at.pred == "=":
            continue
        if at.pred not in dom.predicates:
            raise _err(f"unknown predicate {at.pred} in problem", at.pred)
        sig = dom.predicates[at.pred]
        if len(at.args) != len(sig):
            raise _err(f"wrong arity in ({at})", at.pred)
        for arg, t in zip(at.args, sig):
            if arg not in names:
                raise _err(f"unknown object {arg} in ({at})", arg)
            if not dom.is_subtype(names[arg], t):
                raise _err(f"object {arg} is not of type {t} in ({at})", arg)


def parse(domain_text: str, problem_text: str) -> tuple[LiftedDomain, LiftedProblem]:
    dom = parse_domain(domain_text)
    return dom, parse_problem(problem_text, dom)


# -- printing -----------------------------------------------------------------


def _typed(pairs) -> str:
    return " ".join(f"{n} - {t}" for n, t in pairs)


def effect_sexpr(e: Effect) -> str:
    if isinstance(e, Literal):
        return e.sexpr()
    head = "and" if isinstance(e, EffAnd) else "oneof"
    return "(" + " ".join([head] + [effect_sexpr(c) for c in e.children]) + ")"


def domain_to_pddl(dom: LiftedDomain) -> str:
    lines = [f"(define (domain {dom.name})"]
    if dom.requirements:
        lines.append(f"  (:requirements {' '.join(dom.requirements)})")
    if dom.types:
        lines.append(f"  (:types {_typed(sorted(dom.types.items()))})")
    if dom.constants:
        lines.append(f"  (:constants {_typed(sorted(dom.constants.items()))})")
    preds = []
    for p, ts in dom.predicates.items():
        args = " ".join(f"?x{i} - {t}" for i, t in enumerate(ts))
        preds.append(f"({p}{' ' + args if args else ''})")
    lines.append(f"  (:predicates {' '.join(preds)})")
    for a in dom.actions:
        pre = " ".join(lit.sexpr() for lit in a.precondition)
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({_typed(a.params)})")
        lines.append(f"    :precondition (and {pre})")
        lines.append(f"    :effect {effect_sexpr(a.effect)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def problem_to_pddl(prob: LiftedProblem) -> str:
    lines = [f"(define (problem {prob.name})", f"  (:domain {prob.domain_name})"]
    lines.append(f"  (:objects {_typed(sorted(prob.objects.items()))})")
    lines.append("  (:init " + " ".join(a.sexpr() for a in prob.init) + ")")
    lines.append("  (:goal (and " + " ".join(lit.sexpr() for lit in prob.goal) + "))")
    lines.append(")")
    return "\n".join(lines) + "\n"
