"""Thin wrapper over ``sexpdata`` for the lexicon, rule and term file formats."""

from __future__ import annotations

import sexpdata
from sexpdata import Symbol


class SexprError(ValueError):
    pass


def read_all(text: str) -> list:
    """Parse every top-level s-expression in ``text``.

    ``nil`` and ``t`` stay ordinary symbols (block worlds use ``nil`` as a
    value), and numbers are turned back into symbols.
    """
    try:
        forms = sexpdata.parse(text, nil=None, true=None)
    except Exception as exc:  # sexpdata raises assorted exception types
        raise SexprError(str(exc)) from exc
    return [_normalize(f) for f in forms]


def read_one(text: str):
    forms = read_all(text)
    if len(forms) != 1:
        raise SexprError(f"expected one s-expression, found {len(forms)}")
    return forms[0]


def _normalize(x):
    if isinstance(x, list):
        return [_normalize(y) for y in x]
    if isinstance(x, bool):
        return Symbol("t" if x else "nil")
    if isinstance(x, (int, float)):
        return Symbol(str(x))
    return x


def is_symbol(x) -> bool:
    return isinstance(x, Symbol)


def dumps(x) -> str:
    return sexpdata.dumps(x)
