"""Untyped lambda terms: substitution, normal-order reduction, alpha-equivalence.

Terms are immutable dataclasses. Constants carry two inert annotations: an
``offline`` flag (written ``name.0``) and an optional ``modality``. A modality
is either a literal tag (a string) or a ``Var`` naming an enclosing binder;
substituting a constant for that binder turns the reference into the
constant's name, so ``λx.angry∘x`` applied to ``qi`` gives ``angry∘qi``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .sexpr import SexprError, is_symbol, read_one

DEFAULT_FUEL = 10_000


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str
    offline: bool = False
    modality: Optional[Union[str, "Var"]] = None


@dataclass(frozen=True)
class Abs:
    binder: str
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


Term = Union[Var, Const, Abs, App]


class FuelExhausted(RuntimeError):
    """Raised when a term does not reach normal form within the step budget."""

    def __init__(self, term: Term, fuel: int):
        super().__init__(f"no normal form within {fuel} steps")
        self.term = term
        self.fuel = fuel


class TermSyntaxError(ValueError):
    pass


# ---------------------------------------------------------------- builders

def app(f: Term, *args: Term) -> Term:
    for a in args:
        f = App(f, a)
    return f


def lam(binders: Union[str, Iterable[str]], body: Term) -> Term:
    names = binders.split() if isinstance(binders, str) else list(binders)
    for b in reversed(names):
        body = Abs(b, body)
    return body


def spine(t: Term) -> tuple[Term, list[Term]]:
    """Split ``f a b c`` into ``(f, [a, b, c])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def binder_prefix(t: Term) -> tuple[list[str], Term]:
    names = []
    while isinstance(t, Abs):
        names.append(t.binder)
        t = t.body
    return names, t


# ---------------------------------------------------------------- variables

def free_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Const):
        return {t.modality.name} if isinstance(t.modality, Var) else set()
    if isinstance(t, Abs):
        return free_vars(t.body) - {t.binder}
    return free_vars(t.fun) | free_vars(t.arg)


def all_names(t: Term) -> set[str]:
    """Every variable name occurring in ``t``, free or bound."""
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Const):
        return {t.modality.name} if isinstance(t.modality, Var) else set()
    if isinstance(t, Abs):
        return all_names(t.body) | {t.binder}
    return all_names(t.fun) | all_names(t.arg)


def constants(t: Term) -> list[Const]:
    if isinstance(t, Const):
        return [t]
    if isinstance(t, Var):
        return []
    if isinstance(t, Abs):
        return constants(t.body)
    return constants(t.fun) + constants(t.arg)


_SUFFIX = re.compile(r"^(.*?)(\d*)$")


def fresh_name(base: str, avoid: set[str]) -> str:
    """Numeric suffixing: ``y`` becomes ``y1``, ``y2``, ... until unused."""
    stem = _SUFFIX.match(base).group(1) or base
    k = 1
    while f"{stem}{k}" in avoid:
        k += 1
    return f"{stem}{k}"


# ---------------------------------------------------------------- substitution

def substitute(t: Term, v: str, s: Term) -> Term:
    """Capture-avoiding ``t[s/v]``."""
    return _subst(t, v, s, free_vars(s))


def _subst(t: Term, v: str, s: Term, fv_s: set[str]) -> Term:
    if isinstance(t, Var):
        return s if t.name == v else t
    if isinstance(t, Const):
        if isinstance(t.modality, Var) and t.modality.name == v:
            return Const(t.name, t.offline, modality_of(s))
        return t
    if isinstance(t, App):
        f = _subst(t.fun, v, s, fv_s)
        a = _subst(t.arg, v, s, fv_s)
        if f is t.fun and a is t.arg:
            return t
        return App(f, a)
    if t.binder == v:
        return t
    body_fv = free_vars(t.body)
    if v not in body_fv:
        return t
    if t.binder in fv_s:
        new = fresh_name(t.binder, fv_s | body_fv | {v})
        body = _subst(t.body, t.binder, Var(new), {new})
        return Abs(new, _subst(body, v, s, fv_s))
    return Abs(t.binder, _subst(t.body, v, s, fv_s))


def modality_of(s: Term) -> Union[str, Var]:
    """What a modality reference becomes when its binder receives ``s``."""
    if isinstance(s, Var):
        return s
    if isinstance(s, Const):
        return s.name + (".0" if s.offline else "")
    return show(s)


def substitute_many(t: Term, sigma: dict[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    if not sigma:
        return t
    # route through fresh intermediates so the substitutions do not interfere
    avoid = all_names(t) | set(sigma)
    for s in sigma.values():
        avoid |= all_names(s)
    temps = {}
    for v in sigma:
        tmp = fresh_name(v + "_", avoid)
        avoid.add(tmp)
        temps[v] = tmp
        t = substitute(t, v, Var(tmp))
    for v, tmp in temps.items():
        t = substitute(t, tmp, sigma[v])
    return t


# ---------------------------------------------------------------- reduction

def _step(t: Term, trace: Optional[list]) -> Optional[Term]:
    """One leftmost-outermost beta step, or None if ``t`` is normal."""
    if isinstance(t, App):
        if isinstance(t.fun, Abs):
            if trace is not None:
                trace.append((t.fun.binder, t.arg))
            return substitute(t.fun.body, t.fun.binder, t.arg)
        f = _step(t.fun, trace)
        if f is not None:
            return App(f, t.arg)
        a = _step(t.arg, trace)
        if a is not None:
            return App(t.fun, a)
        return None
    if isinstance(t, Abs):
        b = _step(t.body, trace)
        return None if b is None else Abs(t.binder, b)
    return None


def normalize(t: Term, fuel: int = DEFAULT_FUEL, trace: Optional[list] = None) -> Term:
    """Normal-order beta normalization.

    If ``trace`` is a list, every contraction appends ``(binder, argument)``.
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    for _ in range(fuel):
        nxt = _step(t, trace)
        if nxt is None:
            return t
        t = nxt
    if _step(t, None) is None:
        return t
    raise FuelExhausted(t, fuel)


def is_normal(t: Term) -> bool:
    return _step(t, None) is None


# ---------------------------------------------------------------- alpha equivalence

def alpha_key(t: Term, env: tuple = ()) -> tuple:
    """Hashable key equal for exactly the alpha-equivalent terms (de Bruijn)."""
    if isinstance(t, Var):
        for i, name in enumerate(reversed(env)):
            if name == t.name:
                return ("b", i)
        return ("v", t.name)
    if isinstance(t, Const):
        m = t.modality
        if isinstance(m, Var):
            m = alpha_key(m, env)
        return ("c", t.name, t.offline, m)
    if isinstance(t, Abs):
        return ("l", alpha_key(t.body, env + (t.binder,)))
    return ("a", alpha_key(t.fun, env), alpha_key(t.arg, env))


def alpha_eq(t1: Term, t2: Term) -> bool:
    return alpha_key(t1) == alpha_key(t2)


def rename_bound(t: Term, mapping) -> Term:
    """Rename every binder via ``mapping(old_name) -> new_name``.

    The caller guarantees the new names are distinct from each other and
    from the free variables, so no capture check is needed.
    """
    def go(t, env):
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, Const):
            return map_modality(t, lambda n: env.get(n, n))
        if isinstance(t, Abs):
            new = mapping(t.binder)
            return Abs(new, go(t.body, {**env, t.binder: new}))
        return App(go(t.fun, env), go(t.arg, env))
    return go(t, {})


def map_modality(c: Const, f) -> Const:
    """Rename a modality reference with ``f``; literal tags are untouched."""
    if isinstance(c.modality, Var):
        return Const(c.name, c.offline, Var(f(c.modality.name)))
    return c


# ---------------------------------------------------------------- s-expressions

_KEYWORDS = {"lam", "app", "var", "const"}


def parse_term(text: str, bound: Iterable[str] = ()) -> Term:
    """Parse the s-expression syntax.

    A bare symbol is a variable when a ``lam`` (or ``bound``) binds it and a
    constant otherwise; ``name.0`` is an offline constant; ``(var x)`` forces
    a free variable; ``(const name :offline :mod m)`` spells out a constant.
    """
    try:
        form = read_one(text)
    except SexprError as exc:
        raise TermSyntaxError(str(exc)) from exc
    return term_from_sexpr(form, frozenset(bound))


def term_from_sexpr(form, bound: frozenset = frozenset()) -> Term:
    if is_symbol(form):
        name = str(form)
        if name in bound:
            return Var(name)
        if name.endswith(".0") and len(name) > 2:
            return Const(name[:-2], offline=True)
        if name in _KEYWORDS or name.startswith(":"):
            raise TermSyntaxError(f"reserved symbol {name!r} used as a term")
        return Const(name)
    if isinstance(form, str):
        raise TermSyntaxError(f"unexpected string {form!r} in term")
    if not form:
        raise TermSyntaxError("empty application")
    head = form[0]
    if is_symbol(head) and str(head) in _KEYWORDS and str(head) not in bound:
        kw = str(head)
        if kw == "lam":
            if len(form) != 3:
                raise TermSyntaxError("lam takes a binder (or binder list) and a body")
            binders = form[1] if isinstance(form[1], list) else [form[1]]
            if not binders or not all(is_symbol(b) for b in binders):
                raise TermSyntaxError("lam binders must be symbols")
            names = [str(b) for b in binders]
            body = term_from_sexpr(form[2], bound | set(names))
            return lam(names, body)
        if kw == "app":
            if len(form) < 3:
                raise TermSyntaxError("app needs a function and at least one argument")
            parts = [term_from_sexpr(x, bound) for x in form[1:]]
            return app(parts[0], *parts[1:])
        if kw == "var":
            if len(form) != 2 or not is_symbol(form[1]):
                raise TermSyntaxError("(var name)")
            return Var(str(form[1]))
        # const
        if len(form) < 2 or not is_symbol(form[1]):
            raise TermSyntaxError("(const name [:offline] [:mod m])")
        offline, modality = False, None
        rest = list(form[2:])
        while rest:
            opt = str(rest.pop(0))
            if opt == ":offline":
                offline = True
            elif opt == ":mod" and rest:
                m = rest.pop(0)
                if isinstance(m, list):
                    if len(m) != 2 or str(m[0]) != "var" or not is_symbol(m[1]):
                        raise TermSyntaxError("modality is a symbol or (var name)")
                    modality = Var(str(m[1]))
                elif str(m) in bound:
                    modality = Var(str(m))
                else:
                    modality = str(m)
            else:
                raise TermSyntaxError(f"unknown const option {opt!r}")
        return Const(str(form[1]), offline, modality)
    if len(form) < 2:
        raise TermSyntaxError("application needs at least one argument")
    parts = [term_from_sexpr(x, bound) for x in form]
    return app(parts[0], *parts[1:])


def print_term(t: Term, bound: Iterable[str] = ()) -> str:
    """S-expression printer; ``parse_term(print_term(t)) == t`` exactly.

    Names in ``bound`` print as bare symbols, matching ``parse_term(.., bound)``.
    """
    return _pr(t, frozenset(bound))


def _pr(t: Term, bound: frozenset) -> str:
    if isinstance(t, Var):
        plain = t.name in bound and t.name not in _KEYWORDS
        return t.name if plain else f"(var {t.name})"
    if isinstance(t, Const):
        simple = (t.name not in bound and t.name not in _KEYWORDS
                  and not t.name.endswith(".0") and not t.name.startswith(":")
                  and t.modality is None)
        if simple:
            return t.name + (".0" if t.offline else "")
        m = t.modality
        if isinstance(m, Var):
            m = m.name if m.name in bound else f"(var {m.name})"
        elif m is not None and m in bound:
            raise ValueError(f"modality tag {m!r} would read back as a variable")
        opts = (" :offline" if t.offline else "") + (f" :mod {m}" if m else "")
        return f"(const {t.name}{opts})"
    if isinstance(t, Abs):
        return f"(lam {t.binder} {_pr(t.body, bound | {t.binder})})"
    head, args = spine(t)
    return "(" + " ".join(_pr(x, bound) for x in [head] + args) + ")"


def show(t: Term) -> str:
    """Compact lambda notation for humans, e.g. ``λx.λy.pickup x y``."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        s = t.name + (".0" if t.offline else "")
        m = t.modality.name if isinstance(t.modality, Var) else t.modality
        return s + (f"∘{m}" if m else "")
    if isinstance(t, Abs):
        return f"λ{t.binder}.{show(t.body)}"
    head, args = spine(t)
    parts = [_show_atom(head)] + [_show_atom(a) for a in args]
    return " ".join(parts)


def _show_atom(t: Term) -> str:
    s = show(t)
    return s if isinstance(t, (Var, Const)) else f"({s})"
