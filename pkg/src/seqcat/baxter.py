"""Permutation patterns, separation trees, and the category encoding of orders."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .categories import BACK, FWD, Atom, Category, Slash
from .deriver import LexEntry, Lexicon, derive
from .strips import Item
from .terms import Const, Term, Var, app, lam

Permutation = tuple

FORBIDDEN = ((3, 1, 4, 2), (2, 4, 1, 3))


class NotSeparable(ValueError):
    pass


def parse_permutation(text: str) -> Permutation:
    """``3142`` (n <= 9), ``10,2,...`` or ``10 2 ...``; must be a bijection on 1..n."""
    text = text.strip()
    if "," in text or " " in text:
        values = tuple(int(x) for x in text.replace(",", " ").split())
    else:
        if not text.isdigit():
            raise ValueError(f"not a permutation: {text!r}")
        values = tuple(int(c) for c in text)
    check_permutation(values)
    return values


def format_permutation(p: Sequence[int]) -> str:
    if len(p) <= 9:
        return "".join(str(v) for v in p)
    return ",".join(str(v) for v in p)


def check_permutation(p: Sequence[int]) -> None:
    if sorted(p) != list(range(1, len(p) + 1)):
        raise ValueError(f"not a permutation of 1..{len(p)}: {p}")


def _pattern_of(values: Sequence[int]) -> tuple:
    order = sorted(values)
    return tuple(order.index(v) + 1 for v in values)


def contains_pattern(p: Sequence[int], pattern: Sequence[int]) -> bool:
    """Classical containment: some subsequence of ``p`` is order-isomorphic to ``pattern``."""
    k = len(pattern)
    if k > len(p):
        return False
    target = tuple(pattern)
    return any(_pattern_of(sub) == target for sub in itertools.combinations(p, k))


# ---------------------------------------------------------------- separation trees

@dataclass(frozen=True)
class Leaf:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Node:
    sign: str    # "+" or "-"
    left: "SeparationTree"
    right: "SeparationTree"

    def __str__(self):
        return f"[{self.sign} {self.left} {self.right}]"


SeparationTree = Union[Leaf, Node]


def _split(values: Sequence[int]) -> Optional[tuple[int, str]]:
    for k in range(1, len(values)):
        pre, suf = values[:k], values[k:]
        if max(pre) - min(pre) + 1 != k:
            continue
        if max(pre) < min(suf):
            return k, "+"
        if min(pre) > max(suf):
            return k, "-"
    return None


def separation_tree(p: Sequence[int]) -> SeparationTree:
    """Split at the shortest prefix whose values form an interval above or below the rest."""
    values = tuple(p)
    if not values:
        raise ValueError("empty permutation")
    if len(values) == 1:
        return Leaf(values[0])
    found = _split(values)
    if found is None:
        raise NotSeparable(format_permutation(p))
    k, sign = found
    return Node(sign, separation_tree(values[:k]), separation_tree(values[k:]))


def tree_leaves(t: SeparationTree) -> list[int]:
    if isinstance(t, Leaf):
        return [t.value]
    return tree_leaves(t.left) + tree_leaves(t.right)


def valid_tree(t: SeparationTree, p: Sequence[int]) -> bool:
    """Leaves spell ``p`` and every node's sign orders its subtrees' leaves."""
    if tree_leaves(t) != list(p):
        return False

    def ok(node):
        if isinstance(node, Leaf):
            return True
        lo, hi = tree_leaves(node.left), tree_leaves(node.right)
        if node.sign == "+":
            good = max(lo) < min(hi)
        elif node.sign == "-":
            good = min(lo) > max(hi)
        else:
            return False
        return good and ok(node.left) and ok(node.right)
    return ok(t)


def is_separable(p: Sequence[int]) -> bool:
    try:
        separation_tree(p)
        return True
    except NotSeparable:
        return False


def count_separable(n: int) -> int:
    return sum(1 for p in itertools.permutations(range(1, n + 1)) if is_separable(p))


# ---------------------------------------------------------------- category encoding

def chain_hierarchy(n: int) -> dict[int, list[int]]:
    """Each value takes the next one: 1 over 2 over ... over n."""
    return {v: ([v + 1] if v < n else []) for v in range(1, n + 1)}


def split_hierarchy(n: int) -> dict[int, list[int]]:
    """Value 1 heads a lower and an upper chain.

    The lower values ``2..m`` attach downward from ``m`` (``m`` takes ``m-1``,
    ...) and the upper values ``m+1..n`` attach upward from ``m+1``, with
    ``m = (n+2)//2``. For n = 5: 1 over 3 and 4, 3 over 2, 4 over 5.
    """
    deps: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    if n == 1:
        return deps
    m = (n + 2) // 2
    lower = list(range(m, 1, -1))       # m, m-1, ..., 2
    upper = list(range(m + 1, n + 1))   # m+1, ..., n
    for chain in (lower, upper):
        if chain:
            deps[1].append(chain[0])
            for a, b in zip(chain, chain[1:]):
                deps[a].append(b)
    deps[1].sort()
    return deps


HIERARCHIES = {"chain": chain_hierarchy, "split": split_hierarchy}


def encode_permutation(p: Sequence[int], hierarchy: str = "chain") -> list[tuple[Category, Term]]:
    """Category and LF for each position of the order ``p``.

    Atoms are named by value. A value with dependents is a functor taking them
    in increasing value order (so the largest is innermost), each slash pointing toward
    the side on which that dependent occurs. LFs are per-value constants
    abstracted over the dependents, atoms are bare constants.

    ``hierarchy`` names who heads whom (see HIERARCHIES).
    """
    p = tuple(p)
    check_permutation(p)
    if hierarchy not in HIERARCHIES:
        raise ValueError(f"unknown hierarchy {hierarchy!r}")
    pos = {v: i for i, v in enumerate(p)}
    deps = HIERARCHIES[hierarchy](len(p))
    out = []
    for v in p:
        cat: Category = Atom(str(v))
        for d in reversed(deps[v]):
            cat = Slash(cat, FWD if pos[d] > pos[v] else BACK, Atom(str(d)))
        names = [f"a{d}" for d in deps[v]]
        body = app(Const(f"c{v}"), *[Var(x) for x in names])
        out.append((cat, lam(names, body)))
    return out


def encoding_lexicon(p: Sequence[int], hierarchy: str = "chain"):
    """A lexicon whose token for value ``v`` is ``str(v)``."""
    return Lexicon(LexEntry(str(v), Item(c, t))
                   for v, (c, t) in zip(p, encode_permutation(p, hierarchy)))


def derives_root(p: Sequence[int], config, hierarchy: str = "chain") -> list:
    """Derivations of the encoded order whose result is the root atom ``1``."""
    toks = [str(v) for v in p]
    return [d for d in derive(toks, encoding_lexicon(p, hierarchy), config)
            if d.item.category == Atom("1")]
