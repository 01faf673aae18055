"""Lexicons, chart derivation over adjacent spans, and derivation rendering."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .categories import parse_category
from .rules import (RuleConfig, RuleDescriptor, canonical_names, combine, combine_all,
                    raise_candidates, type_raise)
from .sexpr import SexprError, dumps, is_symbol, read_all
from .strips import CondLists, Item, conds_from_sexpr
from .terms import binder_prefix, normalize, print_term, show, term_from_sexpr


class UnknownToken(KeyError):
    def __init__(self, form: str):
        super().__init__(form)
        self.form = form

    def __str__(self):
        return f"UnknownToken({self.form!r})"


class ChartLimit(RuntimeError):
    pass


class DuplicateExactEntry(UserWarning):
    pass


@dataclass(frozen=True)
class LexEntry:
    form: str
    item: Item
    note: str = ""   # e.g. "raised from T"


class Lexicon:
    def __init__(self, entries: Iterable[LexEntry] = ()):
        self._by_form: dict[str, list[LexEntry]] = {}
        for e in entries:
            self.add(e)

    def add(self, entry: LexEntry) -> None:
        bucket = self._by_form.setdefault(entry.form, [])
        if any(e.item.key() == entry.item.key() for e in bucket):
            warnings.warn(f"duplicate entry for {entry.form!r}", DuplicateExactEntry)
            return
        bucket.append(entry)

    def lookup(self, form: str) -> list[LexEntry]:
        if form not in self._by_form:
            raise UnknownToken(form)
        return list(self._by_form[form])

    def forms(self) -> list[str]:
        return list(self._by_form)

    def entries(self) -> list[LexEntry]:
        return [e for bucket in self._by_form.values() for e in bucket]

    def __len__(self):
        return sum(len(b) for b in self._by_form.values())

    def __contains__(self, form):
        return form in self._by_form


def _clauses(form) -> dict:
    out: dict = {}
    for clause in form[2:]:
        if not isinstance(clause, list) or not clause or not is_symbol(clause[0]):
            raise SyntaxError(f"bad clause {clause!r}")
        out.setdefault(str(clause[0]), []).append(clause[1:])
    return out


def entry_from_sexpr(form) -> list[LexEntry]:
    """One ``(entry "form" (cat ..) (lf ..) (pre ..) (add ..) (del ..) (raise ..))``.

    The form may also be written as a bare symbol.
    """
    if (not isinstance(form, list) or len(form) < 3 or not is_symbol(form[0])
            or str(form[0]) != "entry" or not isinstance(form[1], str)):
        raise SyntaxError(f"expected (entry \"form\" ...), got {dumps(form)[:60]}")
    word = str(form[1])
    cl = _clauses(form)
    unknown = set(cl) - {"cat", "lf", "pre", "add", "del", "raise"}
    if unknown:
        raise SyntaxError(f"{word}: unknown clauses {sorted(unknown)}")
    if "cat" not in cl or "lf" not in cl:
        raise SyntaxError(f"{word}: entry needs cat and lf")
    cat = parse_category(str(cl["cat"][0][0]))
    lf = normalize(term_from_sexpr(cl["lf"][0][0]))
    prefix, _ = binder_prefix(lf)
    conds = conds_from_sexpr({k: sum(cl.get(k, []), []) for k in ("pre", "add", "del")},
                             frozenset(prefix))
    base = Item(cat, lf, conds)
    out = [LexEntry(word, base)]
    for form in cl.get("raise", []):
        if len(form) != 2 or str(form[0]) not in ("fwd", "back"):
            raise SyntaxError(f"{word}: (raise fwd|back \"X\")")
        target = parse_category(str(form[1]))
        out.append(LexEntry(word, type_raise(base, target, str(form[0])),
                            note=f"raised from {cat}"))
    return out


def load_lexicon(source: str) -> Lexicon:
    """Parse lexicon text (one s-expression per entry; ``;`` comments)."""
    try:
        forms = read_all(source)
    except SexprError as exc:
        raise SyntaxError(f"lexicon: {exc}") from None
    lex = Lexicon()
    for form in forms:
        for e in entry_from_sexpr(form):
            lex.add(e)
    return lex


def load_lexicon_file(path) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return load_lexicon(fh.read())


# ---------------------------------------------------------------- derivations

@dataclass(frozen=True)
class Derivation:
    item: Item
    rule: str                      # "lex", ">", "<B", ">T", ...
    children: tuple = ()
    span: tuple = (0, 1)
    form: Optional[str] = None     # leaves only
    descriptor: Optional[RuleDescriptor] = None
    raise_target: Optional[object] = None  # unary raise nodes

    @property
    def kind(self) -> str:
        if self.rule == "lex":
            return "lex"
        if self.descriptor is None:
            return "raise"
        return self.descriptor.kind

    def leaves(self) -> list["Derivation"]:
        if not self.children:
            return [self]
        return [l for c in self.children for l in c.leaves()]

    def nodes(self) -> list["Derivation"]:
        return [self] + [n for c in self.children for n in c.nodes()]

    def structure(self) -> tuple:
        return (self.rule, self.span, self.item.key(),
                tuple(c.structure() for c in self.children))


@dataclass
class _Packed:
    item: Item
    backs: list = field(default_factory=list)   # (rule, left_ref, right_ref, lraise, rraise)


class Chart:
    """Packed CKY chart; cells map item keys to packed entries."""

    def __init__(self, tokens: list[str], lexicon: Lexicon, config: RuleConfig,
                 item_cap: int = 10_000):
        self.tokens = tokens
        self.config = config
        self.cells: dict[tuple, dict] = {}
        self.count = 0
        self.cap = item_cap
        for i, tok in enumerate(tokens):
            cell = self.cells.setdefault((i, i + 1), {})
            for e in lexicon.lookup(tok):
                self._add(cell, e.item, ("lex", tok))
        n = len(tokens)
        for width in range(2, n + 1):
            for i in range(0, n - width + 1):
                self._fill(i, i + width)

    def _add(self, cell: dict, item: Item, back) -> None:
        k = item.key()
        if k not in cell:
            self.count += 1
            if self.count > self.cap:
                raise ChartLimit(f"more than {self.cap} chart items")
            cell[k] = _Packed(item)
        cell[k].backs.append(back)

    def _fill(self, i: int, j: int) -> None:
        cell = self.cells.setdefault((i, j), {})
        for k in range(i + 1, j):
            for lk, lp in list(self.cells[(i, k)].items()):
                for rk, rp in list(self.cells[(k, j)].items()):
                    left_ref, right_ref = (i, k, lk), (k, j, rk)
                    direct = combine_all(lp.item, rp.item, self.config)
                    for rule, res in direct:
                        self._add(cell, res, (rule, left_ref, right_ref, None, None))
                    # raising is on demand: only for pairs nothing else combines
                    if direct or not self.config.syntactic_raise:
                        continue
                    for direction, target in raise_candidates(lp.item, rp.item):
                        if direction == "fwd":
                            raised = type_raise(lp.item, target, "fwd")
                            pairs = combine_all(raised, rp.item, self.config)
                            lr, rr = (target, "fwd"), None
                        else:
                            raised = type_raise(rp.item, target, "back")
                            pairs = combine_all(lp.item, raised, self.config)
                            lr, rr = None, (target, "back")
                        for rule, res in pairs:
                            self._add(cell, res, (rule, left_ref, right_ref, lr, rr))

    def full_span(self) -> list[_Packed]:
        return list(self.cells.get((0, len(self.tokens)), {}).values())

    # unpacking
    def trees(self, i: int, j: int, key, first_only: bool = True) -> list[Derivation]:
        packed = self.cells[(i, j)][key]
        out = []
        for back in packed.backs:
            if back[0] == "lex":
                out.append(Derivation(packed.item, "lex", (), (i, j), form=back[1]))
            else:
                rule, (li, lj, lk), (ri, rj, rk), lr, rr = back
                lefts = self.trees(li, lj, lk, first_only)
                rights = self.trees(ri, rj, rk, first_only)
                for l, r in itertools.product(lefts, rights):
                    if lr is not None:
                        l = _raised(l, *lr)
                    if rr is not None:
                        r = _raised(r, *rr)
                    out.append(Derivation(packed.item, rule.label, (l, r), (i, j),
                                          descriptor=rule))
                    if first_only:
                        break
            if first_only and out:
                break
        return out


def _raised(d: Derivation, target, direction) -> Derivation:
    item = type_raise(d.item, target, direction)
    label = ">T" if direction == "fwd" else "<T"
    return Derivation(item, label, (d,), d.span, raise_target=target)


def derive(tokens: Iterable[str], lexicon: Lexicon, config: RuleConfig,
           span_limit: int = 20, item_cap: int = 10_000,
           all_derivations: bool = False) -> list[Derivation]:
    """Full-span derivations, one per distinct reading unless ``all_derivations``."""
    tokens = list(tokens)
    if not tokens:
        return []
    if len(tokens) > span_limit:
        raise ChartLimit(f"{len(tokens)} tokens exceeds the span limit {span_limit}")
    for t in tokens:
        lexicon.lookup(t)
    chart = Chart(tokens, lexicon, config, item_cap)
    n = len(tokens)
    out = []
    for key in chart.cells.get((0, n), {}):
        out.extend(chart.trees(0, n, key, first_only=not all_derivations))
    return out


def replay(d: Derivation, config: Optional[RuleConfig] = None) -> Item:
    """Recompute a derivation's item from its leaves."""
    if d.rule == "lex":
        return d.item
    if d.descriptor is None:
        (child,) = d.children
        return type_raise(replay(child, config), d.raise_target,
                          "fwd" if d.rule.startswith(">") else "back")
    left, right = (replay(c, config) for c in d.children)
    mode = config.mode if config else "planning"
    return combine(left, right, d.descriptor, mode)


# ---------------------------------------------------------------- rendering

def item_lines(item: Item) -> list[str]:
    return [f"{item.category} : {show(item.lf)}"] + ["  " + l for l in item.conds.lines()]


def render(d: Derivation, style: str = "ascii") -> str:
    if style == "sexpr":
        return _render_sexpr(d)
    if style != "ascii":
        raise ValueError(f"unknown style {style!r}")
    leaves = d.leaves()
    blocks = [[leaf.form] + item_lines(leaf.item) for leaf in leaves]
    widths = [max(len(s) for s in b) + 3 for b in blocks]
    starts = [sum(widths[:k]) for k in range(len(widths) + 1)]
    base = leaves[0].span[0]

    def col(pos):
        return starts[pos - base]

    rows = []
    depth = max(len(b) for b in blocks)
    for r in range(depth):
        line = "".join((b[r] if r < len(b) else "").ljust(w) for b, w in zip(blocks, widths))
        rows.append(line.rstrip())
        if r == 0:
            rows.append("".join(("-" * (w - 3)).ljust(w) for w in widths).rstrip())
    for node in _combination_order(d):
        a, b = col(node.span[0]), col(node.span[1]) - 3
        name = "raise" if node.descriptor is None else node.descriptor.kind
        rows.append(" " * a + "-" * max(b - a, 3) + f" {name} ({node.rule})")
        for text in item_lines(node.item):
            rows.append(" " * a + text)
    return "\n".join(rows)


def _height(d: Derivation) -> int:
    return 0 if not d.children else 1 + max(_height(c) for c in d.children)


def _combination_order(d: Derivation) -> list[Derivation]:
    inner = [n for n in d.nodes() if n.children]
    return sorted(inner, key=lambda n: (_height(n), n.span[0], n.span[1] - n.span[0]))


def _render_sexpr(d: Derivation) -> str:
    it = d.item
    prefix, _ = binder_prefix(it.lf)
    parts = [f"(cat {dumps(str(it.category))})", f"(lf {print_term(it.lf)})"]
    for label, lits in (("pre", it.conds.pre), ("add", it.conds.add), ("del", it.conds.dele)):
        if lits:
            parts.append(f"({label} " + " ".join(_lit_sexpr(l, prefix) for l in lits) + ")")
    if d.rule == "lex":
        return f"(leaf {dumps(d.form)} " + " ".join(parts) + ")"
    kids = " ".join(_render_sexpr(c) for c in d.children)
    return f"(node {dumps(d.rule)} " + " ".join(parts) + f" (children {kids}))"


def _lit_sexpr(lit, bound) -> str:
    return "(" + " ".join([lit.functor] + [print_term(a, bound) for a in lit.args]) + ")"


def to_json(d: Derivation) -> dict:
    it = d.item
    out = {"rule": d.rule, "span": list(d.span), "category": str(it.category),
           "lf": print_term(it.lf), "lf_text": show(it.lf),
           "pre": [str(l) for l in it.conds.pre], "add": [str(l) for l in it.conds.add],
           "del": [str(l) for l in it.conds.dele]}
    if d.form is not None:
        out["form"] = d.form
    if d.children:
        out["children"] = [to_json(c) for c in d.children]
    return out
