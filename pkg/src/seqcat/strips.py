"""STRIPS condition lists, their threading through substitutions, and plan execution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from lark import Lark, Transformer, UnexpectedInput

from .categories import Category, is_atomic
from .terms import (Abs, App, Const, Term, Var, alpha_key, free_vars, normalize,
                    show, spine, substitute_many, term_from_sexpr)
from .sexpr import is_symbol


@dataclass(frozen=True)
class Literal:
    functor: str
    args: tuple = ()

    def __post_init__(self):
        if not self.functor:
            raise ValueError("literal functor must be nonempty")
        object.__setattr__(self, "args", tuple(self.args))

    def key(self) -> tuple:
        return (self.functor,) + tuple(alpha_key(a) for a in self.args)

    def free_vars(self) -> set[str]:
        out = set()
        for a in self.args:
            out |= free_vars(a)
        return out

    def is_ground(self) -> bool:
        return not self.free_vars()

    def __str__(self):
        if not self.args:
            return self.functor
        return f"{self.functor}({','.join(show_arg(a) for a in self.args)})"


def show_arg(t: Term) -> str:
    """Render a literal argument in ``f(a,b)`` style where possible."""
    head, args = spine(t)
    if args and isinstance(head, (Const, Var)):
        return f"{show(head)}({','.join(show_arg(a) for a in args)})"
    if isinstance(t, Abs):
        return f"[{show(t)}]"
    return show(t)


@dataclass(frozen=True)
class CondLists:
    pre: tuple = ()
    add: tuple = ()
    dele: tuple = ()  # ``del`` is a keyword

    def __post_init__(self):
        for name in ("pre", "add", "dele"):
            object.__setattr__(self, name, _dedup(getattr(self, name)))

    def is_empty(self) -> bool:
        return not (self.pre or self.add or self.dele)

    def free_vars(self) -> set[str]:
        out = set()
        for lit in self.pre + self.add + self.dele:
            out |= lit.free_vars()
        return out

    def key(self) -> tuple:
        return tuple(tuple(l.key() for l in lst) for lst in (self.pre, self.add, self.dele))

    def map_args(self, fn: Callable[[Term], Term]) -> "CondLists":
        def m(lits):
            return tuple(Literal(l.functor, tuple(fn(a) for a in l.args)) for l in lits)
        return CondLists(m(self.pre), m(self.add), m(self.dele))

    def lines(self) -> list[str]:
        out = []
        for label, lits in (("pre", self.pre), ("add", self.add), ("del", self.dele)):
            if lits:
                out.append(f"{label}: " + ", ".join(str(l) for l in lits))
        return out


def _dedup(lits: Iterable[Literal]) -> tuple:
    seen, out = set(), []
    for lit in lits:
        k = lit.key()
        if k not in seen:
            seen.add(k)
            out.append(lit)
    return tuple(out)


EMPTY = CondLists()


@dataclass(frozen=True)
class Item:
    category: Category
    lf: Term
    conds: CondLists = EMPTY

    def key(self) -> tuple:
        return (self.category, alpha_key(self.lf), self.conds.key())


# ---------------------------------------------------------------- threading

def thread(conds: CondLists, binding: dict[str, Term]) -> CondLists:
    """Apply ``binding`` to every literal argument, normalizing the results."""
    if not binding:
        return conds
    return conds.map_args(lambda a: normalize(substitute_many(a, binding)))


def merge(a: CondLists, b: CondLists) -> CondLists:
    """Componentwise union in first-seen order."""
    return CondLists(a.pre + b.pre, a.add + b.add, a.dele + b.dele)


# ---------------------------------------------------------------- world states

class PlanError(Exception):
    def __init__(self, msg: str, world: "WorldState"):
        super().__init__(msg)
        self.world = world


class PreconditionFailure(PlanError):
    def __init__(self, literal: Literal, world: "WorldState"):
        super().__init__(f"PreconditionFailure({literal})", world)
        self.literal = literal


class NotExecutable(PlanError):
    pass


class UngroundEffect(PlanError):
    pass


@dataclass(frozen=True)
class WorldState:
    """Closed-world set of ground literals; iteration follows insertion order."""
    facts: tuple = ()

    def __post_init__(self):
        facts = _dedup(self.facts)
        for f in facts:
            if not f.is_ground():
                raise ValueError(f"world facts must be ground: {f}")
        object.__setattr__(self, "facts", facts)

    def holds(self, lit: Literal) -> bool:
        k = lit.key()
        return any(f.key() == k for f in self.facts)

    def as_set(self) -> frozenset:
        return frozenset(f.key() for f in self.facts)

    def __eq__(self, other):
        return isinstance(other, WorldState) and self.as_set() == other.as_set()

    def __hash__(self):
        return hash(self.as_set())

    def __len__(self):
        return len(self.facts)

    def __str__(self):
        return "\n".join(str(f) for f in self.facts)


# ---------------------------------------------------------------- matching

def _match(pattern: Term, fact: Term, b: dict) -> bool:
    if isinstance(pattern, Var):
        if pattern.name in b:
            return alpha_key(b[pattern.name]) == alpha_key(fact)
        b[pattern.name] = fact
        return True
    if isinstance(pattern, App):
        return (isinstance(fact, App) and _match(pattern.fun, fact.fun, b)
                and _match(pattern.arg, fact.arg, b))
    if isinstance(pattern, Abs) and free_vars(pattern):
        inst = substitute_many(pattern, {v: b[v] for v in free_vars(pattern) if v in b})
        return not free_vars(inst) and alpha_key(inst) == alpha_key(fact)
    return alpha_key(pattern) == alpha_key(fact)


def _match_literal(lit: Literal, fact: Literal, b: dict) -> Optional[dict]:
    if lit.functor != fact.functor or len(lit.args) != len(fact.args):
        return None
    trial = dict(b)
    for p, f in zip(lit.args, fact.args):
        if not _match(p, f, trial):
            return None
    return trial


def _negated(lit: Literal) -> Optional[Literal]:
    """``not(p(a))`` as the literal ``p(a)``; None for positive literals."""
    if lit.functor != "not" or len(lit.args) != 1:
        return None
    head, args = spine(lit.args[0])
    if not isinstance(head, Const):
        return None
    return Literal(head.name, tuple(args))


def _solve(pre: tuple, world: WorldState, b: dict) -> Optional[dict]:
    if not pre:
        return b
    lit, rest = pre[0], pre[1:]
    neg = _negated(lit)
    if neg is not None:
        for fact in world.facts:
            if _match_literal(instantiate_literal(neg, b), fact, {}) is not None:
                return None
        return _solve(rest, world, b)
    for fact in world.facts:
        trial = _match_literal(lit, fact, b)
        if trial is not None:
            out = _solve(rest, world, trial)
            if out is not None:
                return out
    return None


def satisfiable(pre: Iterable[Literal], world: WorldState) -> Optional[dict]:
    """First consistent assignment (facts tried in insertion order), or None."""
    return _solve(tuple(pre), world, {})


def instantiate_literal(lit: Literal, b: dict) -> Literal:
    if not b:
        return lit
    return Literal(lit.functor, tuple(normalize(substitute_many(a, b)) for a in lit.args))


def first_failure(pre: tuple, world: WorldState) -> Literal:
    """The literal ending the longest satisfiable prefix of ``pre``."""
    for i in range(1, len(pre) + 1):
        if satisfiable(pre[:i], world) is None:
            return pre[i - 1]
    raise ValueError("preconditions are satisfiable")


def execute(item: Item, world: WorldState, check_partial: bool = False) -> WorldState:
    """Run ``item`` as a plan step: delete then add, or raise a PlanError.

    With ``check_partial`` the item may still expect arguments; only its
    fully ground preconditions are checked and the world is never changed.
    """
    pre = item.conds.pre
    if check_partial:
        for lit in pre:
            if lit.is_ground() and satisfiable((lit,), world) is None:
                raise PreconditionFailure(lit, world)
        return world
    if not is_atomic(item.category):
        raise NotExecutable(f"category {item.category} still expects arguments", world)
    b = satisfiable(pre, world)
    if b is None:
        raise PreconditionFailure(first_failure(pre, world), world)
    dels = [instantiate_literal(l, b) for l in item.conds.dele]
    adds = [instantiate_literal(l, b) for l in item.conds.add]
    for lit in dels + adds:
        if not lit.is_ground():
            raise UngroundEffect(f"effect {lit} is not ground after matching", world)
    gone = {l.key() for l in dels}
    kept = [f for f in world.facts if f.key() not in gone]
    return WorldState(tuple(kept) + tuple(adds))


# ---------------------------------------------------------------- text formats

_LIT_GRAMMAR = r"""
start: lit
lit: NAME ("(" [lit ("," lit)*] ")")?
NAME: /[A-Za-z0-9_.'+-]+/
%ignore /\s+/
"""

_lit_parser = Lark(_LIT_GRAMMAR, parser="lalr")


class _LitBuild(Transformer):
    def __init__(self, variables):
        super().__init__()
        self.variables = variables

    def _sym(self, name):
        if name in self.variables or name[:1].isupper():
            return Var(name)
        if name.endswith(".0") and len(name) > 2:
            return Const(name[:-2], offline=True)
        return Const(name)

    def lit(self, items):
        name = str(items[0])
        args = [a for a in items[1:] if a is not None]
        term = self._sym(name)
        for a in args:
            term = App(term, a)
        return term

    def start(self, items):
        return items[0]


def parse_literal(text: str, variables: Iterable[str] = ()) -> Literal:
    """Parse ``on(b2,z)``. Capitalized names and ``variables`` become variables."""
    try:
        tree = _lit_parser.parse(text)
    except UnexpectedInput as exc:
        raise SyntaxError(f"bad literal {text!r} at position {exc.pos_in_stream}") from None
    term = _LitBuild(set(variables)).transform(tree)
    head, args = spine(term)
    if not isinstance(head, Const):
        raise SyntaxError(f"literal functor must be a constant: {text!r}")
    return Literal(head.name, tuple(args))


def parse_world(text: str) -> WorldState:
    """One ground literal per line; ``#`` starts a comment."""
    facts = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            lit = parse_literal(line)
        except SyntaxError as exc:
            raise SyntaxError(f"line {lineno}: {exc}") from None
        if not lit.is_ground():
            raise SyntaxError(f"line {lineno}: world facts must be ground: {line}")
        facts.append(lit)
    return WorldState(tuple(facts))


def literal_from_sexpr(form, variables: frozenset) -> Literal:
    """``(on x z)`` to a Literal; ``variables`` and capitalized symbols are Vars."""
    if not isinstance(form, list) or not form or not is_symbol(form[0]):
        raise SyntaxError(f"bad condition literal {form!r}")
    bound = set(variables) | _capitalized(form[1:])
    args = tuple(term_from_sexpr(a, frozenset(bound)) for a in form[1:])
    return Literal(str(form[0]), args)


def _capitalized(forms) -> set[str]:
    out = set()
    for f in forms:
        if isinstance(f, list):
            out |= _capitalized(f)
        elif is_symbol(f) and str(f)[:1].isupper():
            out.add(str(f))
    return out


def conds_from_sexpr(clauses: dict, variables: frozenset) -> CondLists:
    def lits(key):
        return tuple(literal_from_sexpr(f, variables) for f in clauses.get(key, []))
    return CondLists(lits("pre"), lits("add"), lits("del"))
