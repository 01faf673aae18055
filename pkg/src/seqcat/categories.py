"""Directional categories, their text syntax, and one-way schema matching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from lark import Lark, Transformer, UnexpectedInput

FWD = "/"
BACK = "\\"


@dataclass(frozen=True)
class Atom:
    name: str
    tag: Optional[str] = None

    def __str__(self):
        return self.name + (f"[{self.tag}]" if self.tag else "")


@dataclass(frozen=True)
class Slash:
    result: "Category"
    direction: str
    arg: "Category"

    def __post_init__(self):
        if self.direction not in (FWD, BACK):
            raise ValueError(f"bad slash direction {self.direction!r}")

    def __str__(self):
        arg = f"({self.arg})" if isinstance(self.arg, Slash) else str(self.arg)
        return f"{self.result}{self.direction}{arg}"


@dataclass(frozen=True)
class MetaVar:
    """Schema variable; never appears in lexical categories."""
    name: str

    def __str__(self):
        return self.name


Category = Union[Atom, Slash, MetaVar]


class CategorySyntaxError(SyntaxError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at position {pos} in {text!r}")
        self.pos = pos


class UnifyFailure(Exception):
    pass


_GRAMMAR = r"""
?cat: cat "/" basic   -> fwd
    | cat "\\" basic  -> back
    | basic
?basic: atom
      | "(" cat ")"
atom: NAME ("[" NAME "]")?
NAME: /[A-Za-z0-9_']+/
%ignore " "
"""

_parser = Lark(_GRAMMAR, start="cat", parser="lalr")


class _Build(Transformer):
    def __init__(self, metas):
        super().__init__()
        self.metas = metas

    def atom(self, items):
        name = str(items[0])
        tag = str(items[1]) if len(items) > 1 else None
        if name in self.metas and tag is None:
            return MetaVar(name)
        return Atom(name, tag)

    def fwd(self, items):
        return Slash(items[0], FWD, items[1])

    def back(self, items):
        return Slash(items[0], BACK, items[1])


def parse_category(text: str, metavars: frozenset = frozenset()) -> Category:
    """Parse ``S/(S\\T)``-style text. Names in ``metavars`` become MetaVars."""
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as exc:
        raise CategorySyntaxError("unexpected input", text, exc.pos_in_stream or 0) from None
    return _Build(metavars).transform(tree)


SCHEMA_VARS = frozenset({"X", "Y", "Z", "W"})


def parse_schema(text: str) -> Category:
    return parse_category(text, SCHEMA_VARS)


def is_atomic(c: Category) -> bool:
    return isinstance(c, Atom)


def has_metavar(c: Category) -> bool:
    if isinstance(c, MetaVar):
        return True
    if isinstance(c, Slash):
        return has_metavar(c.result) or has_metavar(c.arg)
    return False


def unify(concrete: Category, schema: Category, bindings: Optional[dict] = None) -> dict:
    """One-way match of ``schema`` against ``concrete``; returns new bindings.

    An untagged schema atom matches a concrete atom carrying any tag. A bound
    metavariable must equal the concrete category exactly.
    """
    out = dict(bindings or {})
    _match(concrete, schema, out)
    return out


def _match(c: Category, s: Category, b: dict) -> None:
    if isinstance(s, MetaVar):
        if s.name in b:
            if b[s.name] != c:
                raise UnifyFailure(f"{s.name} bound to {b[s.name]}, not {c}")
        else:
            b[s.name] = c
        return
    if isinstance(s, Atom):
        if not isinstance(c, Atom) or c.name != s.name:
            raise UnifyFailure(f"{c} does not match {s}")
        if s.tag is not None and s.tag != c.tag:
            raise UnifyFailure(f"tag mismatch {c} vs {s}")
        return
    if not isinstance(c, Slash):
        raise UnifyFailure(f"{c} is not a function category")
    if c.direction != s.direction:
        raise UnifyFailure(f"direction mismatch {c} vs {s}")
    _match(c.result, s.result, b)
    _match(c.arg, s.arg, b)


def instantiate(schema: Category, bindings: dict) -> Category:
    if isinstance(schema, MetaVar):
        if schema.name not in bindings:
            raise UnifyFailure(f"unbound metavariable {schema.name}")
        return bindings[schema.name]
    if isinstance(schema, Slash):
        return Slash(instantiate(schema.result, bindings), schema.direction,
                     instantiate(schema.arg, bindings))
    return schema


def result_spine(c: Category) -> list[Category]:
    """``c`` followed by successive results: ``(S\\T)/T`` gives ``[(S\\T)/T, S\\T, S]``."""
    out = [c]
    while isinstance(c, Slash):
        c = c.result
        out.append(c)
    return out


def arity(c: Category) -> int:
    return len(result_spine(c)) - 1
