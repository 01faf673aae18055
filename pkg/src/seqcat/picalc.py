"""Pi-calculus processes with lambda-term leaves: syntax, reduction, runs.

Names are strings. A message may also be a closed lambda term, and an input
binder may then stand for that term inside Ground leaves. Ground leaves are
inert under communication; with a world attached they may *act*, which hands
the term (and its optional condition lists) to the world and becomes 0.
"""

from __future__ import annotations

import random
from collections import Counter
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Protocol, Union

from lark import Lark, Transformer, UnexpectedInput

from .sexpr import SexprError, read_all
from .strips import CondLists, Literal, PlanError, WorldState, conds_from_sexpr, execute, Item
from .categories import Atom
from .terms import (Abs, App, Const, Term, Var, alpha_eq, alpha_key, all_names, free_vars,
                    lam, map_modality, normalize, print_term, show, spine, substitute,
                    substitute_many, term_from_sexpr)
from .sexpr import is_symbol

Value = Union[str, Term]     # a name, or a lambda term sent as a message


# ---------------------------------------------------------------- syntax

@dataclass(frozen=True)
class Nil:
    pass


NIL = Nil()


@dataclass(frozen=True)
class Input:
    chan: Value
    bind: str
    cont: "Process" = NIL


@dataclass(frozen=True)
class Output:
    chan: Value
    msg: Value
    cont: "Process" = NIL


@dataclass(frozen=True)
class Tau:
    cont: "Process" = NIL


@dataclass(frozen=True)
class Sum:
    alts: tuple


@dataclass(frozen=True)
class Par:
    procs: tuple


@dataclass(frozen=True)
class Restrict:
    name: str
    body: "Process"


@dataclass(frozen=True)
class Repl:
    """``!P``; with ``index`` the copies get fresh epochs, with ``limit`` at most that many."""
    body: "Process"
    index: Optional[str] = None
    limit: Optional[int] = None
    epoch: int = 1


@dataclass(frozen=True)
class Ground:
    term: Term
    conds: Optional[CondLists] = None


@dataclass(frozen=True)
class Cond:
    """``if test holds in the world then P else Q``."""
    test: Term
    then: "Process"
    other: "Process"


Process = Union[Nil, Input, Output, Tau, Sum, Par, Restrict, Repl, Ground, Cond]


def par(*ps: Process) -> Process:
    return Par(tuple(ps))


def nu(names: Union[str, Iterable[str]], body: Process) -> Process:
    names = names.split() if isinstance(names, str) else list(names)
    for n in reversed(names):
        body = Restrict(n, body)
    return body


# ---------------------------------------------------------------- names

def _value_names(v: Value) -> set[str]:
    if isinstance(v, str):
        return {v}
    return free_vars(v)


def _as_term(v: Value) -> Term:
    return Var(v) if isinstance(v, str) else v


def _as_value(t: Term) -> Value:
    return t.name if isinstance(t, Var) else t


def free_names(p: Process) -> set[str]:
    if isinstance(p, Nil):
        return set()
    if isinstance(p, Input):
        return _value_names(p.chan) | (free_names(p.cont) - {p.bind})
    if isinstance(p, Output):
        return _value_names(p.chan) | _value_names(p.msg) | free_names(p.cont)
    if isinstance(p, Tau):
        return free_names(p.cont)
    if isinstance(p, (Sum, Par)):
        out = set()
        for q in (p.alts if isinstance(p, Sum) else p.procs):
            out |= free_names(q)
        return out
    if isinstance(p, Restrict):
        return free_names(p.body) - {p.name}
    if isinstance(p, Repl):
        return free_names(p.body)
    if isinstance(p, Ground):
        out = free_vars(p.term)
        if p.conds is not None:
            out |= p.conds.free_vars()
        return out
    if isinstance(p, Cond):
        return free_vars(p.test) | free_names(p.then) | free_names(p.other)
    raise TypeError(p)


def all_process_names(p: Process) -> set[str]:
    """Every name mentioned anywhere, bound or free (used to pick fresh names)."""
    if isinstance(p, Nil):
        return set()
    if isinstance(p, Input):
        return _value_names(p.chan) | {p.bind} | all_process_names(p.cont)
    if isinstance(p, Output):
        return _value_names(p.chan) | _value_names(p.msg) | all_process_names(p.cont)
    if isinstance(p, Tau):
        return all_process_names(p.cont)
    if isinstance(p, (Sum, Par)):
        out = set()
        for q in (p.alts if isinstance(p, Sum) else p.procs):
            out |= all_process_names(q)
        return out
    if isinstance(p, Restrict):
        return {p.name} | all_process_names(p.body)
    if isinstance(p, Repl):
        return all_process_names(p.body)
    if isinstance(p, Ground):
        return all_names(p.term) | (p.conds.free_vars() if p.conds else set())
    if isinstance(p, Cond):
        return all_names(p.test) | all_process_names(p.then) | all_process_names(p.other)
    raise TypeError(p)


def fresh(base: str, avoid: set[str]) -> str:
    stem = base.rstrip("0123456789'") or "n"
    k = 1
    while f"{stem}{k}" in avoid:
        k += 1
    return f"{stem}{k}"


# ---------------------------------------------------------------- substitution

def subst(p: Process, y: str, v: Value) -> Process:
    """Capture-avoiding ``p[v/y]``."""
    return _subst(p, y, v, _value_names(v))


def _sv(x: Value, y: str, v: Value) -> Value:
    if isinstance(x, str):
        return v if x == y else x
    return _as_value(normalize(substitute(x, y, _as_term(v))))


def _sub_term(t: Term, y: str, v: Value) -> Term:
    if y not in free_vars(t):
        return t
    return normalize(substitute(t, y, _as_term(v)))


def _subst(p: Process, y: str, v: Value, fv: set[str]) -> Process:
    if y not in free_names(p):
        return p
    if isinstance(p, Input):
        chan = _sv(p.chan, y, v)
        if p.bind == y:
            return Input(chan, p.bind, p.cont)
        if p.bind in fv:
            b = fresh(p.bind, fv | all_process_names(p.cont) | {y})
            return Input(chan, b, _subst(subst(p.cont, p.bind, b), y, v, fv))
        return Input(chan, p.bind, _subst(p.cont, y, v, fv))
    if isinstance(p, Output):
        return Output(_sv(p.chan, y, v), _sv(p.msg, y, v), _subst(p.cont, y, v, fv))
    if isinstance(p, Tau):
        return Tau(_subst(p.cont, y, v, fv))
    if isinstance(p, Sum):
        return Sum(tuple(_subst(q, y, v, fv) for q in p.alts))
    if isinstance(p, Par):
        return Par(tuple(_subst(q, y, v, fv) for q in p.procs))
    if isinstance(p, Restrict):
        if p.name in fv:
            n = fresh(p.name, fv | all_process_names(p.body) | {y})
            return Restrict(n, _subst(subst(p.body, p.name, n), y, v, fv))
        return Restrict(p.name, _subst(p.body, y, v, fv))
    if isinstance(p, Repl):
        return replace(p, body=_subst(p.body, y, v, fv))
    if isinstance(p, Ground):
        conds = None
        if p.conds is not None:
            conds = p.conds.map_args(lambda a: _sub_term(a, y, v))
        return Ground(_sub_term(p.term, y, v), conds)
    if isinstance(p, Cond):
        return Cond(_sub_term(p.test, y, v), _subst(p.then, y, v, fv),
                    _subst(p.other, y, v, fv))
    return p


def rename(p: Process, mapping: dict[str, str]) -> Process:
    """Rename free names simultaneously (targets must be fresh for ``p``)."""
    for old, new in mapping.items():
        if old != new:
            p = subst(p, old, new)
    return p


# ---------------------------------------------------------------- indexed names

_INDEXED = re.compile(r"^(?P<base>.+)_(?:(?P<plain>[A-Za-z])|\{(?P<idx>[A-Za-z])(?P<off>[+-]\d+)?\})$")


def _instantiate_name(name: str, index: str, epoch: int) -> str:
    m = _INDEXED.match(name)
    if not m:
        return name
    idx = m.group("plain") or m.group("idx")
    if idx != index:
        return name
    off = int(m.group("off") or 0)
    return f"{m.group('base')}_{epoch + off}"


def index_copy(p: Process, index: str, epoch: int) -> Process:
    """The copy ``P[i]``: names ``x_i`` / ``x_{i+k}`` become ``x_<epoch>`` / ``x_<epoch+k>``."""
    names = {n for n in all_process_names(p) if _instantiate_name(n, index, epoch) != n}
    if not names:
        return p
    return _map_all_names(p, lambda n: _instantiate_name(n, index, epoch))


def _map_term_names(t: Term, f) -> Term:
    if isinstance(t, Var):
        return Var(f(t.name))
    if isinstance(t, Abs):
        return Abs(f(t.binder), _map_term_names(t.body, f))
    if isinstance(t, App):
        return App(_map_term_names(t.fun, f), _map_term_names(t.arg, f))
    return map_modality(t, f)


def _map_value(v: Value, f) -> Value:
    return f(v) if isinstance(v, str) else _map_term_names(v, f)


def _map_all_names(p: Process, f) -> Process:
    """Apply ``f`` to every name occurrence, bound or free (a bijective renaming)."""
    if isinstance(p, Input):
        return Input(_map_value(p.chan, f), f(p.bind), _map_all_names(p.cont, f))
    if isinstance(p, Output):
        return Output(_map_value(p.chan, f), _map_value(p.msg, f), _map_all_names(p.cont, f))
    if isinstance(p, Tau):
        return Tau(_map_all_names(p.cont, f))
    if isinstance(p, Sum):
        return Sum(tuple(_map_all_names(q, f) for q in p.alts))
    if isinstance(p, Par):
        return Par(tuple(_map_all_names(q, f) for q in p.procs))
    if isinstance(p, Restrict):
        return Restrict(f(p.name), _map_all_names(p.body, f))
    if isinstance(p, Repl):
        return replace(p, body=_map_all_names(p.body, f))
    if isinstance(p, Ground):
        conds = p.conds.map_args(lambda a: _map_term_names(a, f)) if p.conds else None
        return Ground(_map_term_names(p.term, f), conds)
    if isinstance(p, Cond):
        return Cond(_map_term_names(p.test, f), _map_all_names(p.then, f),
                    _map_all_names(p.other, f))
    return p


# ---------------------------------------------------------------- structural congruence

def canonical(p: Process) -> Process:
    """Normal form modulo the structural laws used here.

    Par and Sum are flattened and sorted, 0 is dropped from both, unused
    restrictions are removed, and a component equal to the body of a plain
    ``!P`` beside it is absorbed (``P | !P`` is ``!P``).
    """
    if isinstance(p, (Nil, Ground)):
        return p
    if isinstance(p, Input):
        return Input(p.chan, p.bind, canonical(p.cont))
    if isinstance(p, Output):
        return Output(p.chan, p.msg, canonical(p.cont))
    if isinstance(p, Tau):
        return Tau(canonical(p.cont))
    if isinstance(p, Cond):
        return Cond(p.test, canonical(p.then), canonical(p.other))
    if isinstance(p, Repl):
        if p.limit is not None and p.limit <= 0:
            return NIL
        body = canonical(p.body)
        if isinstance(body, Nil):
            return NIL
        # epochs only matter for renaming indexed names
        return replace(p, body=body, epoch=p.epoch if p.index is not None else 1)
    if isinstance(p, Restrict):
        body = canonical(p.body)
        if p.name not in free_names(body):
            return body
        return Restrict(p.name, body)
    if isinstance(p, Sum):
        alts = []
        for q in p.alts:
            q = canonical(q)
            alts.extend(q.alts if isinstance(q, Sum) else [q])
        alts = [q for q in alts if not isinstance(q, Nil)]
        if not alts:
            return NIL
        if len(alts) == 1:
            return alts[0]
        return Sum(tuple(sorted(alts, key=_sort_key)))
    if isinstance(p, Par):
        comps = []
        for q in p.procs:
            q = canonical(q)
            comps.extend(q.procs if isinstance(q, Par) else [q])
        comps = [q for q in comps if not isinstance(q, Nil)]
        comps = _absorb(comps)
        if not comps:
            return NIL
        if len(comps) == 1:
            return comps[0]
        return Par(tuple(sorted(comps, key=_sort_key)))
    raise TypeError(p)


def _absorb(comps: list[Process]) -> list[Process]:
    """Drop every full copy of a plain ``!P`` body found beside it."""
    for bang in [q for q in comps if isinstance(q, Repl) and q.index is None and q.limit is None]:
        body = bang.body.procs if isinstance(bang.body, Par) else (bang.body,)
        want = Counter(process_key(q) for q in body)
        while True:
            others = [q for q in comps if q is not bang]
            have = Counter(process_key(q) for q in others)
            if any(have[k] < n for k, n in want.items()):
                break
            left = Counter(want)
            kept = []
            for q in comps:
                k = None if q is bang else process_key(q)
                if k is not None and left[k] > 0:
                    left[k] -= 1
                else:
                    kept.append(q)
            comps = kept
    return comps


def _sort_key(p: Process) -> str:
    return repr(process_key(p))


def process_key(p: Process, env: tuple = ()) -> tuple:
    """Hashable key equal for alpha-equivalent processes (bound names by position)."""
    def nm(n):
        return ("b", env.index(n)) if n in env else ("f", n)

    def val(v):
        if isinstance(v, str):
            return nm(v)
        return ("t", _term_key(v, env))

    if isinstance(p, Nil):
        return ("0",)
    if isinstance(p, Input):
        return ("in", val(p.chan), process_key(p.cont, (p.bind,) + env))
    if isinstance(p, Output):
        return ("out", val(p.chan), val(p.msg), process_key(p.cont, env))
    if isinstance(p, Tau):
        return ("tau", process_key(p.cont, env))
    if isinstance(p, Sum):
        return ("sum",) + tuple(process_key(q, env) for q in p.alts)
    if isinstance(p, Par):
        return ("par",) + tuple(process_key(q, env) for q in p.procs)
    if isinstance(p, Restrict):
        return ("nu", process_key(p.body, (p.name,) + env))
    if isinstance(p, Repl):
        return ("repl", p.index, p.limit, p.epoch, process_key(p.body, env))
    if isinstance(p, Ground):
        ck = None
        if p.conds is not None:
            ck = tuple(tuple((l.functor,) + tuple(_term_key(a, env) for a in l.args) for l in lst)
                       for lst in (p.conds.pre, p.conds.add, p.conds.dele))
        return ("ground", _term_key(p.term, env), ck)
    if isinstance(p, Cond):
        return ("cond", _term_key(p.test, env), process_key(p.then, env),
                process_key(p.other, env))
    raise TypeError(p)


def _term_key(t: Term, env: tuple) -> tuple:
    hit = {n: Var(f"#{env.index(n)}") for n in free_vars(t) if n in env}
    return alpha_key(substitute_many(t, hit) if hit else t)


def congruent(p: Process, q: Process) -> bool:
    return process_key(canonical(p)) == process_key(canonical(q))


# ---------------------------------------------------------------- worlds

class World(Protocol):
    def holds(self, test: Term) -> bool: ...
    def enact(self, term: Term, conds: Optional[CondLists]) -> "World": ...
    def key(self) -> object: ...


class Blocked(Exception):
    """Raised by a world that refuses to enact a ground leaf."""


@dataclass(frozen=True)
class RecordingWorld:
    """Holds a fixed set of facts and records every enacted term, in order."""
    facts: frozenset = frozenset()
    log: tuple = ()

    def holds(self, test: Term) -> bool:
        return alpha_key(test) in {alpha_key(f) for f in self.facts}

    def enact(self, term: Term, conds: Optional[CondLists]) -> "RecordingWorld":
        return replace(self, log=self.log + (term,))

    def key(self):
        return (frozenset(alpha_key(f) for f in self.facts),
                tuple(sorted(repr(alpha_key(t)) for t in self.log)))


def term_literal(t: Term) -> Literal:
    head, args = spine(t)
    if not isinstance(head, Const):
        raise ValueError(f"not a literal: {show(t)}")
    return Literal(head.name, tuple(args))


def _names_as_constants(t: Term, names: Optional[set] = None) -> Term:
    """Free channel names inside a leaf denote individuals of the world."""
    names = free_vars(t) if names is None else names & free_vars(t)
    return substitute_many(t, {n: Const(n) for n in names}) if names else t


@dataclass(frozen=True)
class StripsWorld:
    """A STRIPS world: tests are literal lookups; leaves with conds execute them.

    A leaf without conds just records its term as a new fact.
    """
    state: WorldState = field(default_factory=WorldState)

    def holds(self, test: Term) -> bool:
        return self.state.holds(term_literal(_names_as_constants(test)))

    def enact(self, term: Term, conds: Optional[CondLists]) -> "StripsWorld":
        names = free_vars(term)
        term = _names_as_constants(term)
        if conds is not None and names:
            conds = conds.map_args(lambda a: _names_as_constants(a, names))
        if conds is None:
            # leading binders are world references: the current one is ``now``
            while isinstance(term, Abs):
                term = substitute(term.body, term.binder, Const("now"))
            return StripsWorld(WorldState(self.state.facts + (term_literal(term),)))
        try:
            return StripsWorld(execute(Item(Atom("S"), term, conds), self.state))
        except PlanError as exc:
            raise Blocked(str(exc)) from None

    def key(self):
        return self.state.as_set()


# ---------------------------------------------------------------- transitions

@dataclass(frozen=True)
class Label:
    """What a step did.

    ``rule`` is comm, tau, cond or act. For comm, ``channel`` is the channel
    and ``subst`` the pair (value, binder); ``extruded`` lists restricted names
    whose scope widened. ``spawned`` is set when a replica was unfolded.
    """
    rule: str
    channel: Optional[Value] = None
    subst: Optional[tuple] = None
    extruded: tuple = ()
    term: Optional[Term] = None
    spawned: bool = False

    def __str__(self):
        if self.rule == "comm":
            v, y = self.subst
            s = f"[{_show_value(v)}/{y}] on channel {_show_value(self.channel)}"
            if self.extruded:
                s += f" (extrudes {', '.join(self.extruded)})"
            return s
        if self.rule == "act":
            return f"act {show(self.term)}"
        if self.rule == "cond":
            return f"cond {show(self.term)} -> {self.channel}"
        return "tau"


def _show_value(v: Value) -> str:
    return v if isinstance(v, str) else show(v)


# internal commitments
@dataclass(frozen=True)
class _In:
    chan: str
    bind: str
    body: Process
    spawned: bool = False


@dataclass(frozen=True)
class _Out:
    chan: str
    msg: Value
    extruded: tuple
    body: Process
    spawned: bool = False


@dataclass(frozen=True)
class _Done:
    label: Label
    body: Process
    world: object


def _commitments(p: Process, world) -> list:
    if isinstance(p, (Nil,)):
        return []
    if isinstance(p, Input):
        return [_In(p.chan, p.bind, p.cont)] if isinstance(p.chan, str) else []
    if isinstance(p, Output):
        return [_Out(p.chan, p.msg, (), p.cont)] if isinstance(p.chan, str) else []
    if isinstance(p, Tau):
        return [_Done(Label("tau"), p.cont, world)]
    if isinstance(p, Ground):
        if world is None:
            return []
        try:
            w2 = world.enact(p.term, p.conds)
        except Blocked:
            return []
        return [_Done(Label("act", term=p.term), NIL, w2)]
    if isinstance(p, Cond):
        if world is None:
            return []
        ok = world.holds(p.test)
        return [_Done(Label("cond", channel="then" if ok else "else", term=p.test),
                      p.then if ok else p.other, world)]
    if isinstance(p, Sum):
        out = []
        for q in p.alts:
            out.extend(_commitments(q, world))
        return out
    if isinstance(p, Restrict):
        return [c for c in (_under_restrict(p.name, c) for c in _commitments(p.body, world)) if c]
    if isinstance(p, Par):
        return _par_commitments(list(p.procs), world)
    if isinstance(p, Repl):
        return _repl_commitments(p, world)
    raise TypeError(p)


def _under_restrict(x: str, c):
    if isinstance(c, _In):
        if c.chan == x:
            return None
        return replace(c, body=Restrict(x, c.body))
    if isinstance(c, _Out):
        if c.chan == x:
            return None
        if x in _value_names(c.msg):
            return replace(c, extruded=c.extruded + (x,))
        return replace(c, body=Restrict(x, c.body))
    return replace(c, body=Restrict(x, c.body))


def _with_rest(c, rest: list[Process], build):
    """Put commitment ``c`` of one component back among ``rest``."""
    rest_names = set()
    for r in rest:
        rest_names |= free_names(r)
    if isinstance(c, _In):
        if c.bind in rest_names:
            b = fresh(c.bind, rest_names | all_process_names(c.body))
            c = replace(c, bind=b, body=subst(c.body, c.bind, b))
        return replace(c, body=build(c.body))
    if isinstance(c, _Out):
        c = _freshen_extruded(c, rest_names)
        return replace(c, body=build(c.body))
    return replace(c, body=build(c.body))


def _freshen_extruded(c: _Out, avoid: set[str]) -> _Out:
    ext, body, msg = [], c.body, c.msg
    for n in c.extruded:
        if n in avoid:
            m = fresh(n, avoid | all_process_names(body) | _value_names(msg) | set(c.extruded))
            body = subst(body, n, m)
            msg = _sv(msg, n, m)
            n = m
        ext.append(n)
    return replace(c, extruded=tuple(ext), body=body, msg=msg)


def _communicate(out: _Out, inp: _In, build_pair, avoid: set[str]):
    """Close an output against an input; ``build_pair(P', Q')`` rebuilds the context."""
    out = _freshen_extruded(out, avoid | free_names(inp.body) | {inp.chan})
    received = subst(inp.body, inp.bind, out.msg)
    body = build_pair(out.body, received)
    for n in reversed(out.extruded):
        body = Restrict(n, body)
    label = Label("comm", out.chan, (out.msg, inp.bind), out.extruded,
                  spawned=out.spawned or inp.spawned)
    return _Done(label, body, None)


def _par_commitments(procs: list[Process], world) -> list:
    out = []
    per = [_commitments(q, world) for q in procs]
    for i, cs in enumerate(per):
        rest = procs[:i] + procs[i + 1:]
        for c in cs:
            out.append(_with_rest(c, rest,
                                  lambda b, i=i: Par(tuple(procs[:i]) + (b,) + tuple(procs[i + 1:]))))
    for i, ci in enumerate(per):
        for j, cj in enumerate(per):
            if i == j:
                continue
            for o in ci:
                if not isinstance(o, _Out):
                    continue
                for n in cj:
                    if not isinstance(n, _In) or n.chan != o.chan:
                        continue
                    others = [q for k, q in enumerate(procs) if k not in (i, j)]
                    avoid = set()
                    for q in others:
                        avoid |= free_names(q)

                    def build(a, b, i=i, j=j):
                        comps = list(procs)
                        comps[i], comps[j] = a, b
                        return Par(tuple(comps))
                    out.append(_communicate(o, n, build, avoid))
    return out


def _spawn(r: Repl, avoid: set[str]) -> tuple[Process, Repl]:
    """One replica plus the remaining replication."""
    body = r.body
    if r.index is not None:
        body = index_copy(body, r.index, r.epoch)
    body = _freshen_bound(body, avoid)
    rest = replace(r, epoch=r.epoch + 1,
                   limit=None if r.limit is None else r.limit - 1)
    return body, rest


def _freshen_bound(p: Process, avoid: set[str]) -> Process:
    """Rename restricted names of a new replica that clash with ``avoid``."""
    if isinstance(p, Restrict):
        if p.name in avoid:
            n = fresh(p.name, avoid | all_process_names(p.body))
            return Restrict(n, _freshen_bound(subst(p.body, p.name, n), avoid | {n}))
        return Restrict(p.name, _freshen_bound(p.body, avoid | {p.name}))
    if isinstance(p, Par):
        return Par(tuple(_freshen_bound(q, avoid) for q in p.procs))
    return p


def _repl_commitments(r: Repl, world) -> list:
    if r.limit is not None and r.limit <= 0:
        return []
    c1, r1 = _spawn(r, free_names(r.body))
    out = []
    for c in _commitments(c1, world):
        c = _with_rest(c, [r1], lambda b: Par((b, r1)))
        out.append(replace(c, spawned=True) if not isinstance(c, _Done)
                   else replace(c, label=replace(c.label, spawned=True)))
    if r1.limit is not None and r1.limit <= 0:
        return out
    c2, r2 = _spawn(r1, free_names(r.body) | all_process_names(c1))
    cs1 = _commitments(c1, world)
    cs2 = _commitments(c2, world)
    for a, b, swap in ((cs1, cs2, False), (cs2, cs1, True)):
        for o in a:
            if not isinstance(o, _Out):
                continue
            for n in b:
                if not isinstance(n, _In) or n.chan != o.chan:
                    continue
                if swap:
                    build = lambda x, y: Par((y, x, r2))
                else:
                    build = lambda x, y: Par((x, y, r2))
                d = _communicate(o, n, build, free_names(r.body))
                out.append(replace(d, label=replace(d.label, spawned=True)))
    return out


@dataclass(frozen=True)
class Move:
    label: Label
    process: Process
    world: object = None


def moves(p: Process, world=None, lazy: bool = True) -> list[Move]:
    """All one-step successors, canonicalized and deduplicated.

    With ``lazy`` a replica is only unfolded when nothing else can happen.
    """
    seen, out = set(), []
    for c in _commitments(canonical(p), world):
        if not isinstance(c, _Done):
            continue
        w = world if c.world is None else c.world
        q = canonical(c.body)
        k = (_label_key(c.label), process_key(q), None if w is None else w.key())
        if k in seen:
            continue
        seen.add(k)
        out.append(Move(c.label, q, w))
    if lazy:
        eager = [m for m in out if not m.label.spawned]
        if eager:
            return eager
    return out


def _label_key(l: Label) -> tuple:
    def v(x):
        return x if isinstance(x, str) or x is None else alpha_key(x)
    sub = None if l.subst is None else (v(l.subst[0]), l.subst[1])
    return (l.rule, v(l.channel), sub, l.extruded,
            None if l.term is None else alpha_key(l.term), l.spawned)


def step(p: Process, world=None, lazy: bool = False) -> list[tuple[Label, Process]]:
    """One-step successors ``(label, process)``; all of them unless ``lazy``."""
    return [(m.label, m.process) for m in moves(p, world, lazy)]


# ---------------------------------------------------------------- runs

@dataclass
class Trace:
    start: Process
    steps: list = field(default_factory=list)   # Move per step
    truncated: bool = False
    world: object = None

    @property
    def final(self) -> Process:
        return self.steps[-1].process if self.steps else canonical(self.start)

    @property
    def final_world(self):
        return self.steps[-1].world if self.steps else self.world

    def labels(self) -> list[Label]:
        return [m.label for m in self.steps]


def run_random(p: Process, seed: int = 0, max_steps: int = 1000, world=None,
               lazy: bool = True, until=None) -> Trace:
    """One trace, deterministic in ``seed``. ``until(process, world)`` stops early."""
    rng = random.Random(seed)
    trace = Trace(p, world=world)
    cur, w = canonical(p), world
    for _ in range(max_steps):
        if until is not None and until(cur, w):
            return trace
        ms = moves(cur, w, lazy)
        if not ms:
            return trace
        m = rng.choice(ms)
        trace.steps.append(m)
        cur, w = m.process, m.world
    if until is None or not until(cur, w):
        trace.truncated = bool(moves(cur, w, lazy))
    return trace


@dataclass
class Node:
    process: Process
    world: object
    children: list = field(default_factory=list)   # (Label, Node)
    truncated: bool = False
    seen_before: bool = False


def explore(p: Process, depth: int = 10, world=None, lazy: bool = True,
            max_states: int = 10_000) -> Node:
    """Tree of reachable states to ``depth``; repeated states are not expanded again."""
    if depth < 1:
        raise ValueError("depth must be positive")
    seen: dict = {}
    root = Node(canonical(p), world)
    frontier = [(root, 0)]
    while frontier:
        node, d = frontier.pop()
        k = (process_key(node.process), None if node.world is None else node.world.key())
        if k in seen:
            node.seen_before = True
            continue
        seen[k] = node
        ms = moves(node.process, node.world, lazy)
        if not ms:
            continue
        if d >= depth or len(seen) >= max_states:
            node.truncated = True
            continue
        for m in ms:
            child = Node(m.process, m.world)
            node.children.append((m.label, child))
            frontier.append((child, d + 1))
    return root


def maximal_traces(root: Node) -> list[list]:
    """Label/state paths from the root to leaves (stuck, truncated or revisited)."""
    out = []

    def go(node, path):
        if not node.children:
            out.append(path)
            return
        for label, child in node.children:
            go(child, path + [(label, child)])
    go(root, [])
    return out


def tree_truncated(root: Node) -> bool:
    stack = [root]
    while stack:
        n = stack.pop()
        if n.truncated:
            return True
        stack.extend(c for _, c in n.children)
    return False


# ---------------------------------------------------------------- analyses

def check_async(p: Process) -> bool:
    """Every output is terminal (its continuation is 0)."""
    if isinstance(p, Output):
        return isinstance(canonical(p.cont), Nil)
    if isinstance(p, (Input, Tau)):
        return check_async(p.cont)
    if isinstance(p, Sum):
        return all(check_async(q) for q in p.alts)
    if isinstance(p, Par):
        return all(check_async(q) for q in p.procs)
    if isinstance(p, (Restrict, Repl)):
        return check_async(p.body)
    if isinstance(p, Cond):
        return check_async(p.then) and check_async(p.other)
    return True


IDENTITY = lam("x", Var("x"))


def _strip_nu(p: Process) -> Process:
    while isinstance(p, Restrict):
        p = p.body
    return p


def _dance_shaped(p: Process) -> bool:
    # !_i nu x_i !( ... ) : an indexed replication over a restricted replication
    return (isinstance(p, Repl) and p.index is not None
            and isinstance(_strip_nu(p.body), Repl))


def _scurry_shaped(p: Process) -> bool:
    # nu x !( ... ) : a plain replication under a restriction
    return isinstance(p, Restrict) and isinstance(_strip_nu(p), Repl) \
        and _strip_nu(p).index is None


def _inputs_on(p: Process) -> set:
    out = set()
    while isinstance(p, (Input, Output, Tau)):
        if isinstance(p, Input) and isinstance(p.chan, str):
            out.add(p.chan)
        p = p.cont
    return out


def _outputs_on(p: Process) -> set:
    out = set()
    while isinstance(p, (Input, Output, Tau)):
        if isinstance(p, Output) and isinstance(p.chan, str):
            out.add(p.chan)
        p = p.cont
    return out


def classify_stance(p: Process, roles: tuple = (0, 1)) -> str:
    """adversary, evasive, deceptive, nondeterministic-choice or none.

    ``roles`` picks the first (acting) and second component of a top-level
    parallel composition.
    """
    p = _strip_nu(p)
    if isinstance(p, Sum) and len(p.alts) == 2:
        a, b = p.alts
        if (_dance_shaped(a) and _scurry_shaped(b)) or (_dance_shaped(b) and _scurry_shaped(a)):
            return "nondeterministic-choice"
        return "none"
    if not isinstance(p, Par):
        return "none"
    try:
        p1, p2 = p.procs[roles[0]], p.procs[roles[1]]
    except IndexError:
        return "none"
    if not isinstance(p1, Output) or not isinstance(p2, Input) or p1.chan != p2.chan:
        return "none"
    if not isinstance(p1.msg, str):
        if not alpha_eq(p1.msg, IDENTITY) and free_vars(p1.msg):
            return "none"
        # the payload carries no name the receiver could use
        if _inputs_on(p1.cont) & _outputs_on(p2.cont):
            return "adversary"
        return "evasive"
    if p1.msg not in free_names(p1.cont):
        return "deceptive"
    return "none"


# ---------------------------------------------------------------- surface syntax

_GRAMMAR = r"""
?start: par
?par: sum ("|" sum)*              -> par
?sum: unary ("+" unary)*          -> sum
?unary: NAME "(" NAME ")" cont     -> input
      | NAME "^" "<" msg ">" cont  -> output
      | "tau" cont                 -> tau
      | "nu" NAME+ unary           -> restrict
      | "!" REPLOPT? unary         -> repl
      | "cond" GROUND unary unary  -> cond
      | "0"                        -> nil
      | GROUND ("." "0")?          -> ground
      | "(" par ")"
cont: ("." unary)?
msg: NAME | GROUND
REPLOPT: /\{[A-Za-z]?(:[0-9]+)?\}/
GROUND: /\[[^\]]*\]/
NAME: /[A-Za-z][A-Za-z0-9']*(_(\{[A-Za-z]([+-][0-9]+)?\}|[A-Za-z0-9]+))?/
COMMENT: /#[^\n]*/
%ignore COMMENT
%ignore /\s+/
"""

# Earley: after ``nu x y`` only a longer lookahead tells ``y(z).P`` from ``y (P)``
_parser = Lark(_GRAMMAR, parser="earley", maybe_placeholders=False)


class ProcessSyntaxError(SyntaxError):
    pass


@dataclass
class _Raw:
    """Parse tree node before names are resolved."""
    kind: str
    args: tuple


class _Build(Transformer):
    def par(self, items):
        return _Raw("par", tuple(items))

    def sum(self, items):
        return _Raw("sum", tuple(items))

    def input(self, items):
        return _Raw("in", (str(items[0]), str(items[1]), items[2]))

    def output(self, items):
        return _Raw("out", (str(items[0]), items[1], items[2]))

    def tau(self, items):
        return _Raw("tau", (items[0],))

    def restrict(self, items):
        return _Raw("nu", (tuple(str(n) for n in items[:-1]), items[-1]))

    def repl(self, items):
        opt = str(items[0]) if len(items) == 2 else "{}"
        inner = opt[1:-1]
        index, _, limit = inner.partition(":")
        return _Raw("repl", (index or None, int(limit) if limit else None, items[-1]))

    def cond(self, items):
        return _Raw("cond", (str(items[0]), items[1], items[2]))

    def nil(self, items):
        return _Raw("nil", ())

    def ground(self, items):
        return _Raw("ground", (str(items[0]),))

    def cont(self, items):
        return items[0] if items else _Raw("nil", ())

    def msg(self, items):
        tok = items[0]
        return ("term", str(tok)) if tok.type == "GROUND" else ("name", str(tok))


def parse_process(text: str) -> Process:
    """Parse the surface syntax.

    ``x(y).P``, ``x^<y>.P`` (message may be ``[term]``), ``tau.P``, ``P + Q``,
    ``nu x y (P)``, ``P | Q``, ``!P``, ``!{i}P``, ``!{i:3}P``, ``!{:3}P``,
    ``cond [test] (P) (Q)``, ``0`` and ``[term]`` leaves. A leaf may carry
    condition clauses after its term: ``[(chop y x) (pre (up y)) (del (up y))]``.
    Inside terms, symbols bound by nu or input, or used as a channel or
    message anywhere, are names; others are constants. ``nu``, ``tau`` and
    ``cond`` are reserved.
    """
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as exc:
        raise ProcessSyntaxError(f"unexpected input at position {exc.pos_in_stream} "
                                 f"in {text!r}") from None
    raw = _Build().transform(tree)
    names = _raw_names(raw)
    if names & _RESERVED:
        raise ProcessSyntaxError(f"reserved word used as a name: {sorted(names & _RESERVED)[0]}")
    return _resolve(raw, frozenset(names))


_RESERVED = frozenset({"nu", "tau", "cond"})


def _raw_names(r: "_Raw") -> set[str]:
    """Channel, message, binder and restricted names anywhere in a parse."""
    out: set[str] = set()
    if r.kind == "in":
        out |= {r.args[0], r.args[1]}
    elif r.kind == "out":
        out.add(r.args[0])
        if r.args[1][0] == "name":
            out.add(r.args[1][1])
    elif r.kind == "nu":
        out |= set(r.args[0])
    for a in r.args:
        if isinstance(a, _Raw):
            out |= _raw_names(a)
    return out


def _ground_parts(text: str, bound: frozenset):
    """``[lam z (fly z)]`` or ``[(fly z) (pre ..) (del ..)]``: a term, then optional clauses."""
    try:
        forms = read_all(text[1:-1])
    except SexprError as exc:
        raise ProcessSyntaxError(f"bad term {text}: {exc}") from None
    clauses: dict = {}
    while forms and _is_clause(forms[-1]) and len(forms) > 1:
        f = forms.pop()
        clauses.setdefault(str(f[0]), [])[:0] = f[1:]
    if not forms:
        raise ProcessSyntaxError("empty term []")
    form = forms[0] if len(forms) == 1 else forms
    try:
        term = normalize(term_from_sexpr(form, bound))
    except ValueError as exc:
        raise ProcessSyntaxError(f"bad term {text}: {exc}") from None
    conds = conds_from_sexpr(clauses, bound) if clauses else None
    return term, conds


def _is_clause(f) -> bool:
    return isinstance(f, list) and bool(f) and is_symbol(f[0]) and str(f[0]) in ("pre", "add", "del")


def _resolve(r: _Raw, bound: frozenset) -> Process:
    k, a = r.kind, r.args
    if k == "nil":
        return NIL
    if k in ("par", "sum") and len(a) == 1:
        return _resolve(a[0], bound)
    if k == "par":
        return Par(tuple(_resolve(x, bound) for x in a))
    if k == "sum":
        return Sum(tuple(_resolve(x, bound) for x in a))
    if k == "in":
        return Input(a[0], a[1], _resolve(a[2], bound | {a[1]}))
    if k == "out":
        kind, text = a[1]
        msg = text if kind == "name" else _as_value(_ground_parts(text, bound)[0])
        return Output(a[0], msg, _resolve(a[2], bound))
    if k == "tau":
        return Tau(_resolve(a[0], bound))
    if k == "nu":
        return nu(a[0], _resolve(a[1], bound | set(a[0])))
    if k == "repl":
        index, limit, body = a
        return Repl(_resolve(body, bound), index, limit)
    if k == "cond":
        test, _ = _ground_parts(a[0], bound)
        return Cond(test, _resolve(a[1], bound), _resolve(a[2], bound))
    if k == "ground":
        term, conds = _ground_parts(a[0], bound)
        return Ground(term, conds)
    raise ValueError(k)


def print_process(p: Process, bound: frozenset = frozenset()) -> str:
    """Surface syntax that parses back to ``p``."""
    def atom(q):
        s = print_process(q, bound)
        return s if isinstance(q, (Nil, Ground)) else f"({s})"

    def val(v, b):
        return v if isinstance(v, str) else f"[{print_term(v, b)}]"

    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Input):
        return f"{val(p.chan, bound)}({p.bind}){_cont(p.cont, bound | {p.bind})}"
    if isinstance(p, Output):
        return f"{val(p.chan, bound)}^<{val(p.msg, bound)}>{_cont(p.cont, bound)}"
    if isinstance(p, Tau):
        return f"tau{_cont(p.cont, bound)}"
    if isinstance(p, Sum):
        return " + ".join(atom(q) if isinstance(q, (Par, Sum)) else print_process(q, bound)
                          for q in p.alts)
    if isinstance(p, Par):
        return " | ".join(atom(q) if isinstance(q, (Par, Sum)) else print_process(q, bound)
                          for q in p.procs)
    if isinstance(p, Restrict):
        names, body = [], p
        while isinstance(body, Restrict):
            names.append(body.name)
            body = body.body
        inner = print_process(body, bound | set(names))
        return f"nu {' '.join(names)} ({inner})"
    if isinstance(p, Repl):
        opt = ""
        if p.index is not None or p.limit is not None:
            opt = "{" + (p.index or "") + (f":{p.limit}" if p.limit is not None else "") + "}"
        return f"!{opt}({print_process(p.body, bound)})"
    if isinstance(p, Ground):
        parts = [print_term(p.term, bound)]
        if p.conds is not None:
            for label, lits in (("pre", p.conds.pre), ("add", p.conds.add), ("del", p.conds.dele)):
                if lits:
                    parts.append(f"({label} " + " ".join(
                        "(" + " ".join([l.functor] + [print_term(x, bound) for x in l.args]) + ")"
                        for l in lits) + ")")
        return "[" + " ".join(parts) + "]"
    if isinstance(p, Cond):
        return (f"cond [{print_term(p.test, bound)}] ({print_process(p.then, bound)}) "
                f"({print_process(p.other, bound)})")
    raise TypeError(p)


def _cont(q: Process, bound) -> str:
    if isinstance(q, Nil):
        return ".0"
    s = print_process(q, bound)
    return f".({s})" if isinstance(q, (Par, Sum)) else f".{s}"


def show_process(p: Process) -> str:
    """Compact human notation: ``x̄⟨a⟩``, ``x(y)``, ``ν x``, leaves in lambda notation."""
    def val(v):
        return v if isinstance(v, str) else f"({show(v)})"

    def group(q):
        s = show_process(q)
        return f"({s})" if isinstance(q, (Par, Sum)) else s

    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Input):
        return f"{val(p.chan)}({p.bind}).{group(p.cont)}"
    if isinstance(p, Output):
        return f"{val(p.chan)}̄⟨{val(p.msg)}⟩.{group(p.cont)}"
    if isinstance(p, Tau):
        return f"τ.{group(p.cont)}"
    if isinstance(p, Sum):
        return " + ".join(group(q) for q in p.alts)
    if isinstance(p, Par):
        return " | ".join(group(q) for q in p.procs)
    if isinstance(p, Restrict):
        return f"ν{p.name} ({show_process(p.body)})"
    if isinstance(p, Repl):
        sub = (p.index or "") + (f"≤{p.limit}" if p.limit is not None else "")
        return f"!{sub}{group(p.body)}"
    if isinstance(p, Ground):
        return show(p.term)
    if isinstance(p, Cond):
        return f"cond ({show(p.test)}) {group(p.then)} {group(p.other)}"
    raise TypeError(p)


def load_process_file(path) -> Process:
    with open(path, encoding="utf-8") as fh:
        return parse_process(fh.read())
