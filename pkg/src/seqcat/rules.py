"""Combinatory rules as data: category schemas paired with closed combinator terms.

``combine`` instantiates a schema against two adjacent items, applies the
rule's combinator to their logical forms, and threads the condition lists
through the substitutions recorded while normalizing.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .categories import (BACK, FWD, Category, Slash, UnifyFailure, instantiate,
                         is_atomic, parse_schema, result_spine, unify)
from .sexpr import read_all
from .strips import CondLists, Item, merge, thread
from .terms import (Abs, App, Const, Term, Var, binder_prefix, constants, fresh_name,
                    free_vars, lam, map_modality, normalize, parse_term, spine,
                    substitute_many)

APPLY, COMPOSE, SUBSTITUTE, RAISE, SUBCOMPOSE, INTERCALATE = (
    "apply", "compose", "substitute", "raise", "subcompose", "intercalate")
KINDS = (APPLY, COMPOSE, SUBSTITUTE, RAISE, SUBCOMPOSE, INTERCALATE)
HARMONIC, CROSSED = "harmonic", "crossed"
_LETTER = {APPLY: "", COMPOSE: "B", SUBSTITUTE: "S", RAISE: "T", SUBCOMPOSE: "D",
           INTERCALATE: "L"}


class RuleMismatch(Exception):
    pass


class RuleDisabled(Exception):
    pass


class NotAtomic(Exception):
    pass


@dataclass(frozen=True)
class RuleDescriptor:
    kind: str
    direction: str = "fwd"          # fwd | back
    harmony: Optional[str] = None   # compose, substitute, intercalate
    z_slash: Optional[str] = None   # intercalate: slash on the main functor's outer argument
    enabled: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.direction not in ("fwd", "back"):
            raise ValueError(f"unknown direction {self.direction!r}")
        needs_harmony = self.kind in (COMPOSE, SUBSTITUTE, INTERCALATE)
        if needs_harmony and self.harmony not in (HARMONIC, CROSSED):
            raise ValueError(f"{self.kind} needs harmonic or crossed")
        if self.kind == INTERCALATE and self.z_slash not in (FWD, BACK):
            raise ValueError("intercalate needs z_slash '/' or '\\'")

    @property
    def label(self) -> str:
        arrow = ">" if self.direction == "fwd" else "<"
        x = "x" if self.harmony == CROSSED else ""
        return f"{arrow}{_LETTER[self.kind]}{x}"

    @property
    def name(self) -> str:
        return self.kind

    def __str__(self):
        extra = f" {self.harmony}" if self.harmony else ""
        extra += f" {self.z_slash}" if self.z_slash else ""
        return f"({self.kind} {self.direction}{extra})"


# ---------------------------------------------------------------- schemas

@dataclass(frozen=True)
class Schema:
    left: Category
    right: Category
    result: Category
    combinator: Term  # closed; takes the left LF, then the right LF


def _c(text: str) -> Term:
    return parse_term(text)


_COMB = {
    (APPLY, "fwd"): _c("(lam f (lam a (f a)))"),
    (APPLY, "back"): _c("(lam a (lam f (f a)))"),
    (COMPOSE, "fwd"): _c("(lam f (lam g (lam x (f (g x)))))"),
    (COMPOSE, "back"): _c("(lam g (lam f (lam x (f (g x)))))"),
    (SUBSTITUTE, "fwd"): _c("(lam f (lam g (lam x (f x (g x)))))"),
    (SUBSTITUTE, "back"): _c("(lam g (lam f (lam x (f x (g x)))))"),
    (SUBCOMPOSE, "fwd"): _c("(lam f (lam g (lam h (f (lam x (g (h x)))))))"),
    (SUBCOMPOSE, "back"): _c("(lam g (lam f (lam h (f (lam x (g (h x)))))))"),
    (INTERCALATE, "fwd"): _c("(lam f (lam g (lam x (lam y (f y (g x))))))"),
    (INTERCALATE, "back"): _c("(lam g (lam f (lam x (lam y (f y (g x))))))"),
}

RAISE_COMBINATOR = _c("(lam a (lam p (p a)))")


def schema_for(rule: RuleDescriptor) -> Schema:
    k, d, h = rule.kind, rule.direction, rule.harmony
    if k == RAISE:
        raise ValueError("type raising is unary; see type_raise")
    p = parse_schema
    if k == APPLY:
        cats = ("X/Y", "Y", "X") if d == "fwd" else ("Y", "X\\Y", "X")
    elif k == COMPOSE:
        cats = {("fwd", HARMONIC): ("X/Y", "Y/Z", "X/Z"),
                ("fwd", CROSSED): ("X/Y", "Y\\Z", "X\\Z"),
                ("back", HARMONIC): ("Y\\Z", "X\\Y", "X\\Z"),
                ("back", CROSSED): ("Y/Z", "X\\Y", "X/Z")}[d, h]
    elif k == SUBSTITUTE:
        cats = {("fwd", HARMONIC): ("(X/Y)/Z", "Y/Z", "X/Z"),
                ("fwd", CROSSED): ("(X/Y)\\Z", "Y\\Z", "X\\Z"),
                ("back", HARMONIC): ("Y\\Z", "(X\\Y)\\Z", "X\\Z"),
                ("back", CROSSED): ("Y/Z", "(X\\Y)/Z", "X/Z")}[d, h]
    elif k == SUBCOMPOSE:
        cats = ("X/(Y\\Z)", "Y/W", "X/(W\\Z)") if d == "fwd" else ("Y\\W", "X\\(Y/Z)", "X\\(W/Z)")
    else:
        z = rule.z_slash
        if d == "fwd":
            w = FWD if h == HARMONIC else BACK
            cats = (f"(X/Y){z}Z", f"Y{w}W", f"(X{z}Z){w}W")
        else:
            w = BACK if h == HARMONIC else FWD
            cats = (f"Y{w}W", f"(X\\Y){z}Z", f"(X{z}Z){w}W")
    return Schema(p(cats[0]), p(cats[1]), p(cats[2]), _COMB[k, d])


def introduces_predicate_abstraction(rule: RuleDescriptor) -> bool:
    """True when the combinator applies one of its own (non-slot) binders.

    Subcomposition's ``h x`` and type raising's ``p a`` do; application,
    composition, substitution and intercalation only pass their extra
    binders as arguments.
    """
    if rule.kind == RAISE:
        comb, slots = RAISE_COMBINATOR, 1
    else:
        comb, slots = schema_for(rule).combinator, 2
    names, body = binder_prefix(comb)
    own = set(names[slots:])
    return bool(_head_vars(body) & own)


def _head_vars(t: Term) -> set[str]:
    out = set()
    if isinstance(t, App):
        head, args = spine(t)
        if isinstance(head, Var):
            out.add(head.name)
        for x in [head] + args:
            if not isinstance(x, Var):
                out |= _head_vars(x)
    elif isinstance(t, Abs):
        out |= _head_vars(t.body)
    return out


# ---------------------------------------------------------------- configs

@dataclass(frozen=True)
class RuleConfig:
    mode: str = "planning"                  # language | planning
    rules: tuple = ()
    syntactic_raise: bool = False

    def enabled(self) -> list[RuleDescriptor]:
        return [r for r in self.rules if r.enabled]

    def allows(self, rule: RuleDescriptor) -> bool:
        return any(r == replace(rule, enabled=True) for r in self.enabled())

    def with_rules(self, *extra: RuleDescriptor) -> "RuleConfig":
        return replace(self, rules=self.rules + tuple(extra))

    def without(self, kind: str) -> "RuleConfig":
        return replace(self, rules=tuple(r for r in self.rules if r.kind != kind))


def _r(kind, direction="fwd", harmony=None, z_slash=None):
    return RuleDescriptor(kind, direction, harmony, z_slash)


def _apply_and_compose() -> tuple:
    out = [_r(APPLY, "fwd"), _r(APPLY, "back")]
    for d in ("fwd", "back"):
        for h in (HARMONIC, CROSSED):
            out.append(_r(COMPOSE, d, h))
    return tuple(out)


def preset(name: str) -> RuleConfig:
    """``language``, ``planning`` or ``invariant`` (application, composition, substitution)."""
    if name == "language":
        rules = _apply_and_compose() + (
            _r(SUBSTITUTE, "back", CROSSED),
            _r(INTERCALATE, "back", HARMONIC, FWD),
            _r(INTERCALATE, "fwd", CROSSED, BACK),
        )
        return RuleConfig("language", rules, syntactic_raise=False)
    if name == "planning":
        base = preset("language").rules
        rules = base + (
            _r(SUBSTITUTE, "fwd", CROSSED),
            _r(INTERCALATE, "fwd", HARMONIC, BACK),
            _r(SUBCOMPOSE, "fwd"),
        )
        return RuleConfig("planning", rules, syntactic_raise=True)
    if name == "invariant":
        rules = _apply_and_compose() + tuple(
            _r(SUBSTITUTE, d, h) for d in ("fwd", "back") for h in (HARMONIC, CROSSED))
        return RuleConfig("language", rules, syntactic_raise=False)
    if name == "all":
        rules = _apply_and_compose() + tuple(
            _r(SUBSTITUTE, d, h) for d in ("fwd", "back") for h in (HARMONIC, CROSSED))
        rules += tuple(_r(INTERCALATE, d, h, z) for d in ("fwd", "back")
                       for h in (HARMONIC, CROSSED) for z in (FWD, BACK))
        rules += (_r(SUBCOMPOSE, "fwd"), _r(SUBCOMPOSE, "back"))
        return RuleConfig("planning", rules, syntactic_raise=True)
    raise ValueError(f"unknown preset {name!r}")


PRESETS = ("language", "planning", "invariant", "all")


def load_config(text: str) -> RuleConfig:
    """Read a rule configuration.

    ::

        (rules (mode language) (syntactic-raise off)
               (rule apply fwd) (rule compose back crossed)
               (rule intercalate back harmonic /) (rule subcompose fwd off))

    ``(preset planning)`` starts from a named preset; later clauses extend it,
    and a clause naming a rule already present replaces it. A backslash is
    written ``\\\\``.
    """
    forms = read_all(text)
    if len(forms) != 1 or not forms[0] or str(forms[0][0]) != "rules":
        raise SyntaxError("rule config must be a single (rules ...) form")
    mode, syn, rules = "planning", False, []
    for clause in forms[0][1:]:
        if not isinstance(clause, list) or not clause:
            raise SyntaxError(f"bad clause {clause!r}")
        head, args = str(clause[0]), [str(a) for a in clause[1:]]
        if head == "preset":
            base = preset(args[0])
            mode, syn, rules = base.mode, base.syntactic_raise, list(base.rules)
        elif head == "mode":
            mode = args[0]
        elif head == "syntactic-raise":
            syn = args[0] in ("on", "t", "true", "yes")
        elif head == "rule":
            enabled = True
            if args and args[-1] in ("on", "off"):
                enabled = args.pop() == "on"
            kind, rest = args[0], args[1:]
            direction = rest.pop(0) if rest else "fwd"
            harmony = rest.pop(0) if rest else None
            z = rest.pop(0) if rest else None
            rule = RuleDescriptor(kind, direction, harmony, z, enabled)
            # a later clause for the same rule replaces the earlier one
            rules = [r for r in rules if replace(r, enabled=rule.enabled) != rule]
            rules.append(rule)
        else:
            raise SyntaxError(f"unknown clause {head!r}")
    if mode not in ("language", "planning"):
        raise SyntaxError(f"unknown mode {mode!r}")
    return RuleConfig(mode, tuple(rules), syn)


def dump_config(cfg: RuleConfig) -> str:
    lines = [f"(rules (mode {cfg.mode})",
             f"       (syntactic-raise {'on' if cfg.syntactic_raise else 'off'})"]
    for r in cfg.rules:
        # a lone backslash would escape the next character
        z = "\\\\" if r.z_slash == BACK else r.z_slash
        parts = [r.kind, r.direction] + [x for x in (r.harmony, z) if x]
        parts.append("on" if r.enabled else "off")
        lines.append("       (rule " + " ".join(parts) + ")")
    return "\n".join(lines) + ")"


# ---------------------------------------------------------------- naming hygiene

_counter = itertools.count(1)
_SEP = "#"


def _unique(base: str) -> str:
    return f"{base.split(_SEP)[0]}{_SEP}{next(_counter)}"


def _rename(t: Term, mapping: dict) -> Term:
    """Rename every variable occurrence and binder listed in ``mapping``."""
    if isinstance(t, Var):
        return Var(mapping.get(t.name, t.name))
    if isinstance(t, Const):
        return map_modality(t, lambda n: mapping.get(n, n))
    if isinstance(t, Abs):
        return Abs(mapping.get(t.binder, t.binder), _rename(t.body, mapping))
    return App(_rename(t.fun, mapping), _rename(t.arg, mapping))


def _standardize(item: Item) -> Item:
    """Give every binder of the LF a globally unique name.

    Condition-list variables that name a top-level binder follow it.
    """
    prefix, _ = binder_prefix(item.lf)

    def go(t, env):
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, Const):
            return map_modality(t, lambda n: env.get(n, n))
        if isinstance(t, Abs):
            new = _unique(t.binder)
            return Abs(new, go(t.body, {**env, t.binder: new}))
        return App(go(t.fun, env), go(t.arg, env))

    lf = go(item.lf, {})
    new_prefix, _ = binder_prefix(lf)
    link = dict(zip(prefix, new_prefix))
    conds = item.conds.map_args(lambda a: _rename_free(a, link)) if link else item.conds
    return Item(item.category, lf, conds)


def _rename_free(t: Term, mapping: dict) -> Term:
    if not mapping:
        return t
    return substitute_many(t, {k: Var(v) for k, v in mapping.items() if k in free_vars(t)})


def _binders_in_order(t: Term, out: list) -> list:
    if isinstance(t, Abs):
        out.append(t.binder)
        _binders_in_order(t.body, out)
    elif isinstance(t, App):
        _binders_in_order(t.fun, out)
        _binders_in_order(t.arg, out)
    return out


def _vars_in_order(t: Term, out: list) -> list:
    if isinstance(t, Var):
        out.append(t.name)
    elif isinstance(t, Const) and isinstance(t.modality, Var):
        out.append(t.modality.name)
    elif isinstance(t, Abs):
        out.append(t.binder)
        _vars_in_order(t.body, out)
    elif isinstance(t, App):
        _vars_in_order(t.fun, out)
        _vars_in_order(t.arg, out)
    return out


def canonical_names(item: Item) -> Item:
    """Replace internal unique names by readable ones (``z``, ``z1``, ...)."""
    order = _binders_in_order(item.lf, [])
    for lit in item.conds.pre + item.conds.add + item.conds.dele:
        for a in lit.args:
            _vars_in_order(a, order)
    internal = [n for n in dict.fromkeys(order) if _SEP in n]
    if not internal:
        return item
    taken = {n for n in order if _SEP not in n}
    # a binder never prints like a constant
    taken |= {c.name for c in constants(item.lf)}
    for lit in item.conds.pre + item.conds.add + item.conds.dele:
        for a in lit.args:
            taken |= {c.name for c in constants(a)}
    mapping = {}
    for n in internal:
        base = n.split(_SEP)[0]
        clean = base if base not in taken else fresh_name(base, taken)
        taken.add(clean)
        mapping[n] = clean
    lf = _rename(item.lf, mapping)
    conds = item.conds.map_args(lambda a: _rename(a, mapping))
    return Item(item.category, lf, conds)


# ---------------------------------------------------------------- world-reference hoisting

def hoist_world_binders(t: Term) -> tuple[Term, list[str]]:
    """Open abstractions sitting in argument position of constant-headed terms.

    In plan mode a residual ``λz`` is a reference to the world in which an
    action happens, not a higher-order argument. When composition leaves one
    inside another action's argument list (``takeflight (λz.buy z ...) y``),
    its binder is moved to the end of the top-level prefix so that both
    actions share the outer binder list.
    """
    prefix, body = binder_prefix(t)
    hoisted: list[str] = []
    body = _hoist(body, hoisted)
    return lam(prefix + hoisted, body), hoisted


def _hoist(t: Term, acc: list) -> Term:
    if not isinstance(t, App):
        return t
    head, args = spine(t)
    if not isinstance(head, Const):
        return App(_hoist(t.fun, acc), _hoist(t.arg, acc))
    new_args = []
    for a in args:
        names, inner = binder_prefix(a)
        acc.extend(names)
        new_args.append(_hoist(inner, acc))
    out = head
    for a in new_args:
        out = App(out, a)
    return out


def _strip_binders(t: Term, names: set) -> Term:
    if isinstance(t, Abs):
        body = _strip_binders(t.body, names)
        return body if t.binder in names else Abs(t.binder, body)
    if isinstance(t, App):
        return App(_strip_binders(t.fun, names), _strip_binders(t.arg, names))
    return t


# ---------------------------------------------------------------- combination

def _resolve(trace: list) -> dict[str, Term]:
    """Close the recorded ``binder -> argument`` pairs under each other."""
    sigma = {}
    for b, a in trace:
        sigma.setdefault(b, a)
    out = {}
    for v, val in sigma.items():
        for _ in range(len(sigma) + 1):
            pending = free_vars(val) & sigma.keys()
            pending.discard(v)
            if not pending:
                break
            val = normalize(substitute_many(val, {u: sigma[u] for u in pending}))
        out[v] = val
    return out


def _apply_combinator(comb: Term, lfs: list[Term], conds: list[CondLists],
                      plan_mode: bool) -> tuple[Term, CondLists]:
    comb = _standardize(Item(None, comb)).lf
    term = comb
    for lf in lfs:
        term = App(term, lf)
    trace: list = []
    nf = normalize(term, trace=trace)
    hoisted: list = []
    if plan_mode:
        nf, hoisted = hoist_world_binders(nf)
    sigma = _resolve(trace)
    if hoisted:
        sigma = {k: _strip_binders(v, set(hoisted)) for k, v in sigma.items()}
    merged = CondLists()
    for c in conds:
        merged = merge(merged, thread(c, sigma))
    return nf, merged


def combine(left: Item, right: Item, rule: RuleDescriptor, mode: str = "planning",
            config: Optional[RuleConfig] = None) -> Item:
    """Combine two adjacent items with ``rule``; raises RuleMismatch on failure."""
    if rule.kind == RAISE:
        raise RuleMismatch("type raising is unary")
    if config is not None:
        if not config.allows(rule):
            raise RuleDisabled(str(rule))
        mode = config.mode
    elif not rule.enabled:
        raise RuleDisabled(str(rule))
    sch = schema_for(rule)
    try:
        b = unify(left.category, sch.left)
        b = unify(right.category, sch.right, b)
        cat = instantiate(sch.result, b)
    except UnifyFailure as exc:
        raise RuleMismatch(f"{rule.label}: {exc}") from None
    lhs, rhs = _standardize(left), _standardize(right)
    lf, conds = _apply_combinator(sch.combinator, [lhs.lf, rhs.lf],
                                  [lhs.conds, rhs.conds], mode == "planning")
    return canonical_names(Item(cat, lf, conds))


def type_raise(item: Item, target: Category, direction: str = "fwd") -> Item:
    """``T:a`` to ``X/(X\\T) : λp.p a`` (forward) or ``X\\(X/T)`` (backward)."""
    if not is_atomic(item.category):
        raise NotAtomic(f"cannot raise non-atomic {item.category}")
    a = item.category
    if direction == "fwd":
        cat = Slash(target, FWD, Slash(target, BACK, a))
    else:
        cat = Slash(target, BACK, Slash(target, FWD, a))
    lf = normalize(App(_standardize(Item(None, RAISE_COMBINATOR)).lf, item.lf))
    return canonical_names(Item(cat, lf, item.conds))


def combine_all(left: Item, right: Item, config: RuleConfig) -> list[tuple[RuleDescriptor, Item]]:
    """Every result of every enabled binary rule on the pair, in config order."""
    out = []
    for rule in config.enabled():
        if rule.kind == RAISE:
            continue
        try:
            out.append((rule, combine(left, right, rule, config.mode)))
        except RuleMismatch:
            pass
    return out


def raise_candidates(left: Item, right: Item) -> list[tuple[str, Category]]:
    """Targets for raising an atomic neighbour on demand (planning mode).

    An atomic left item is raised forward, an atomic right item backward,
    in both cases over the final atomic result of the other item: a term
    stands in for whatever the adjacent action eventually yields.
    """
    out = []
    if is_atomic(left.category) and not is_atomic(right.category):
        out.append(("fwd", result_spine(right.category)[-1]))
    if is_atomic(right.category) and not is_atomic(left.category):
        out.append(("back", result_spine(left.category)[-1]))
    return out


def constant_occurrences(t: Term) -> Counter:
    """Constant names in ``t``; a modality tag counts as an occurrence of its name.

    A modality still referring to a binder counts for nothing: the constant
    it will name arrives through that binder.
    """
    out = Counter()
    for c in constants(t):
        out[(c.name, c.offline)] += 1
        if isinstance(c.modality, str):
            out[(c.modality, False)] += 1
    return out


def lexical_lfs_preserved(leaves: Iterable[Term], root: Term) -> bool:
    """No constant of any leaf LF is lost in ``root`` (multiset containment)."""
    need = Counter()
    for lf in leaves:
        need.update(constant_occurrences(lf))
    have = constant_occurrences(root)
    return all(have[c] >= n for c, n in need.items())
