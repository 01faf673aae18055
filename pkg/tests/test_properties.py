"""Randomized laws. Every suite runs at least 1000 cases."""

import time

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from oracles import db_normalize, to_db
from seqcat import picalc
from seqcat.categories import Atom, parse_category
from seqcat.rules import (APPLY, COMPOSE, CROSSED, HARMONIC, INTERCALATE, RAISE_COMBINATOR,
                          SUBCOMPOSE, SUBSTITUTE, RuleDescriptor, combine, schema_for,
                          type_raise)
from seqcat.strips import (CondLists, Item, Literal, PlanError, WorldState, execute, merge,
                           thread)
from seqcat.terms import (Abs, App, Const, FuelExhausted, Var, alpha_eq, free_vars, normalize,
                          substitute)

c = pytest.mark.criterion
MANY = settings(max_examples=1000, deadline=None, database=None,
                suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])

_elapsed = []


@pytest.fixture(autouse=True)
def _clock(request):
    # only the suites counted against the shared time budget
    t0 = time.perf_counter()
    yield
    if request.node.get_closest_marker("criterion"):
        _elapsed.append(time.perf_counter() - t0)


# ---------------------------------------------------------------- terms

NAMES = ["x", "y", "z", "w"]
var = st.sampled_from(NAMES).map(Var)
const = st.sampled_from(["a", "b", "k"]).map(Const)
terms = st.recursive(
    var | const,
    lambda sub: st.one_of(
        st.builds(Abs, st.sampled_from(NAMES), sub),
        st.builds(App, sub, sub)),
    max_leaves=8)


def nf(t, fuel=60):
    try:
        return normalize(t, fuel=fuel)
    except FuelExhausted:
        assume(False)


@c(5)
@MANY
@given(terms)
def test_normalize_idempotent_and_matches_oracle(t):
    n = nf(t)
    assert alpha_eq(normalize(n), n)
    assert db_normalize(to_db(t), fuel=200) == to_db(n)


@MANY
@given(terms, st.sampled_from(NAMES), terms)
def test_substitution_lemma(t, v, s):
    lhs = nf(App(Abs(v, t), s))
    rhs = nf(substitute(t, v, s))
    assert alpha_eq(lhs, rhs)
    assert free_vars(substitute(t, v, s)) <= (free_vars(t) - {v}) | free_vars(s)


# ---------------------------------------------------------------- combinators

closed = terms.map(lambda t: _close(t))


def _close(t):
    for n in sorted(free_vars(t)):
        t = Abs(n, t)
    return t


def _apply(comb, *args):
    for a in args:
        comb = App(comb, a)
    return comb


def R(kind, direction="fwd", harmony=None, z=None):
    return RuleDescriptor(kind, direction, harmony, z)


def _fresh_arg(i):
    return Const(f"arg{i}")


# defining equations, left item first; a, b are the extra arguments
EQUATIONS = [
    (R(COMPOSE, "fwd", HARMONIC), lambda f, g, a, b: App(f, App(g, a)), 1),
    (R(COMPOSE, "back", HARMONIC), lambda g, f, a, b: App(f, App(g, a)), 1),
    (R(SUBSTITUTE, "fwd", HARMONIC), lambda f, g, a, b: App(App(f, a), App(g, a)), 1),
    (R(SUBSTITUTE, "back", CROSSED), lambda g, f, a, b: App(App(f, a), App(g, a)), 1),
    (R(SUBCOMPOSE, "fwd"), lambda f, g, a, b: App(f, Abs("v", App(g, App(a, Var("v"))))), 1),
    (R(INTERCALATE, "fwd", HARMONIC, "/"), lambda f, g, a, b: App(App(f, b), App(g, a)), 2),
    (R(INTERCALATE, "back", HARMONIC, "/"), lambda g, f, a, b: App(App(f, b), App(g, a)), 2),
]


# the same equations through combine(), on constant LFs and concrete categories
CATS = {
    (COMPOSE, "fwd", HARMONIC): ("A/B", "B/C", "A/C"),
    (COMPOSE, "back", HARMONIC): ("B\\C", "A\\B", "A\\C"),
    (SUBSTITUTE, "fwd", HARMONIC): ("(A/B)/C", "B/C", "A/C"),
    (SUBSTITUTE, "back", CROSSED): ("B/C", "(A\\B)/C", "A/C"),
    (SUBCOMPOSE, "fwd", None): ("A/(B\\C)", "B/D", "A/(D\\C)"),
    (INTERCALATE, "fwd", HARMONIC): ("(A/B)/C", "B/D", "(A/C)/D"),
    (INTERCALATE, "back", HARMONIC): ("B\\D", "(A\\B)/C", "(A/C)\\D"),
}

const_names = st.text("fghpq", min_size=1, max_size=3)


def check_combine_matches_equation(eq, fn, gn):
    rule, rhs, extra = eq
    lc, rc, res = CATS[rule.kind, rule.direction, rule.harmony]
    f, g = Const(fn), Const(gn)
    left, right = (Item(parse_category(lc), f), Item(parse_category(rc), g))
    item = combine(left, right, rule, mode="language")
    assert item.category == parse_category(res)
    names = ["p", "q"][:extra]
    a, b = (Var(n) for n in ["p", "q"])
    want = rhs(f, g, a, b)
    for n in reversed(names):
        want = Abs(n, want)
    assert alpha_eq(item.lf, normalize(want))


def check_type_raise_equation(name, target):
    item = type_raise(Item(Atom("T"), Const(name)), Atom(target), "fwd")
    assert alpha_eq(item.lf, Abs("p", App(Var("p"), Const(name))))
    assert item.category == parse_category(f"{target}/({target}\\T)")


def check_combinator_fidelity(eq, f, g):
    rule, rhs, extra = eq
    a, b = _fresh_arg(1), _fresh_arg(2)
    args = [a, b][:extra]
    comb = schema_for(rule).combinator
    lhs = nf(_apply(comb, f, g, *args), fuel=200)
    assert alpha_eq(lhs, nf(rhs(f, g, a, b), fuel=200))


def check_raise_fidelity(a, p):
    assert alpha_eq(nf(_apply(RAISE_COMBINATOR, a, p), fuel=200), nf(App(p, a), fuel=200))


@c(5)
@MANY
@given(st.sampled_from(EQUATIONS), closed, closed, closed, closed,
       st.lists(const_names, min_size=2, max_size=2, unique=True),
       st.sampled_from(["S", "T", "NP"]))
def test_combinators_match_their_equations(eq, f, g, a, p, names, target):
    # the checks that never discard run first, so each law sees every case
    check_combine_matches_equation(eq, *names)
    check_type_raise_equation(names[0], target)
    check_combinator_fidelity(eq, f, g)
    check_raise_fidelity(a, p)


# ---------------------------------------------------------------- execution

ATOMS = ["a", "b", "c"]
ground_lits = st.builds(lambda f, x: Literal(f, (Const(x),)),
                        st.sampled_from(["p", "q", "r"]), st.sampled_from(ATOMS))
pattern_lits = st.builds(lambda f, x: Literal(f, (x,)), st.sampled_from(["p", "q", "r"]),
                         st.sampled_from(ATOMS).map(Const) | st.just(Var("X")))
worlds = st.lists(ground_lits, max_size=6).map(lambda xs: WorldState(tuple(xs)))
cond_lists = st.builds(CondLists, st.lists(pattern_lits, max_size=3).map(tuple),
                       st.lists(pattern_lits, max_size=3).map(tuple),
                       st.lists(pattern_lits, max_size=3).map(tuple))


@c(5)
@MANY
@given(worlds, cond_lists)
def test_execute_frame_and_atomicity(w, conds):
    before = w.as_set()
    item = Item(Atom("S"), Const("act"), conds)
    try:
        after = execute(item, w)
    except PlanError as exc:
        assert exc.world == w
        assert w.as_set() == before
        return
    effects = conds.add + conds.dele
    untouched = [f for f in w.facts + after.facts if not any(_names(l, f) for l in effects)]
    for f in untouched:
        assert w.holds(f) == after.holds(f)


def _names(pattern, fact):
    """Could the effect literal ``pattern`` denote ``fact``?"""
    if pattern.functor != fact.functor:
        return False
    x = pattern.args[0]
    return isinstance(x, Var) or x == fact.args[0]


@MANY
@given(cond_lists, cond_lists, st.sampled_from(["X"]), st.sampled_from(ATOMS))
def test_thread_commutes_with_merge(a, b, v, x):
    sigma = {v: Const(x)}
    assert merge(thread(a, sigma), thread(b, sigma)) == thread(merge(a, b), sigma)


# ---------------------------------------------------------------- processes

CH = ["a", "b", "c"]
BN = ["x", "y"]
chans = st.sampled_from(CH + BN)


def _procs(limit_repl=True):
    leaves = st.just(picalc.NIL) | st.builds(
        lambda n: picalc.Ground(App(Const("mark"), Const(n))), st.sampled_from(["m1", "m2"]))
    def ext(sub):
        return st.one_of(
            st.builds(picalc.Input, chans, st.sampled_from(BN), sub),
            st.builds(picalc.Output, chans, chans, sub),
            st.builds(picalc.Tau, sub),
            st.builds(lambda p, q: picalc.Sum((p, q)), sub, sub),
            st.builds(lambda p, q: picalc.Par((p, q)), sub, sub),
            st.builds(picalc.Restrict, st.sampled_from(["a", "x"]), sub),
            st.builds(lambda p, k: picalc.Repl(p, limit=k), sub, st.integers(1, 2)),
        )
    return st.recursive(leaves, ext, max_leaves=5)


procs = _procs()


def _keyset(pairs):
    return {(_lkey(l), picalc.process_key(picalc.canonical(q))) for l, q in pairs}


def _lkey(l):
    return (l.rule, repr(l.channel), repr(l.subst), l.extruded)


def check_congruence_under_par(p, r):
    succ = _keyset(picalc.step(picalc.par(p, r)))
    for label, q in picalc.step(p):
        assert (_lkey(label), picalc.process_key(picalc.canonical(picalc.par(q, r)))) in succ \
            or _under_alpha(label, picalc.par(q, r), picalc.step(picalc.par(p, r)))


def _under_alpha(label, target, pairs):
    """Same move up to renaming of extruded names."""
    for l, q in pairs:
        if l.rule == label.rule and len(l.extruded) == len(label.extruded) \
                and picalc.congruent(q, target):
            return True
    return False


def check_congruence_under_restrict(p, n):
    succ = picalc.step(picalc.Restrict(n, p))
    keys = _keyset(succ)
    for label, q in picalc.step(p):
        if n in _label_names(label):
            continue
        k = (_lkey(label), picalc.process_key(picalc.canonical(picalc.Restrict(n, q))))
        assert k in keys or _under_alpha(label, picalc.Restrict(n, q), succ)


def _label_names(label):
    out = set(label.extruded)
    for v in (label.channel, label.subst[0] if label.subst else None):
        if isinstance(v, str):
            out.add(v)
        elif v is not None:
            out |= free_vars(v)
    return out


def check_structural_laws(p, q, r):
    P = picalc.par
    assert picalc.congruent(P(p, picalc.NIL), p)
    assert picalc.congruent(P(p, q), P(q, p))
    assert picalc.congruent(P(P(p, q), r), P(p, P(q, r)))
    assert picalc.congruent(picalc.Sum((p, q)), picalc.Sum((q, p)))
    assert picalc.congruent(picalc.Restrict("zz", picalc.NIL), picalc.NIL)
    if "zz" not in picalc.free_names(p):
        assert picalc.congruent(picalc.Restrict("zz", P(p, q)), P(p, picalc.Restrict("zz", q)))
    bang = picalc.Repl(p)
    assert picalc.congruent(P(p, bang), bang)


@c(5)
@MANY
@given(procs, procs, procs, st.sampled_from(["x", "y", "c"]))
def test_congruence_laws(p, q, r, n):
    check_structural_laws(p, q, r)
    check_congruence_under_par(p, r)
    check_congruence_under_restrict(p, n)


def expand(p):
    """Replace every bounded replication by its finite parallel unfolding."""
    if isinstance(p, picalc.Repl) and p.limit is not None:
        body = expand(p.body)
        copies = []
        for j in range(p.limit):
            b = body if p.index is None else picalc.index_copy(body, p.index, p.epoch + j)
            copies.append(b)
        return picalc.Par(tuple(copies)) if copies else picalc.NIL
    if isinstance(p, picalc.Repl):
        return picalc.Repl(expand(p.body), p.index, p.limit, p.epoch)
    if isinstance(p, picalc.Input):
        return picalc.Input(p.chan, p.bind, expand(p.cont))
    if isinstance(p, picalc.Output):
        return picalc.Output(p.chan, p.msg, expand(p.cont))
    if isinstance(p, picalc.Tau):
        return picalc.Tau(expand(p.cont))
    if isinstance(p, picalc.Sum):
        return picalc.Sum(tuple(expand(q) for q in p.alts))
    if isinstance(p, picalc.Par):
        return picalc.Par(tuple(expand(q) for q in p.procs))
    if isinstance(p, picalc.Restrict):
        return picalc.Restrict(p.name, expand(p.body))
    if isinstance(p, picalc.Cond):
        return picalc.Cond(p.test, expand(p.then), expand(p.other))
    return p


def _expanded_keys(pairs):
    return {(l.rule, picalc.process_key(picalc.canonical(expand(q)))) for l, q in pairs}


def check_bounded_replication_unfolds(body, k):
    r = picalc.Repl(body, limit=k)
    direct = _expanded_keys(picalc.step(r))
    unfolded = _expanded_keys(picalc.step(expand(r)))
    assert direct == unfolded
    once = picalc.par(body, picalc.Repl(body, limit=k - 1, epoch=2))
    assert picalc.congruent(expand(once), expand(r))


indexed_bodies = st.builds(
    lambda m: picalc.Restrict("x_i", picalc.par(
        picalc.Output("x_i", "y", picalc.NIL),
        picalc.Input("x_i", "w", picalc.Ground(App(Const(m), Var("w")))))),
    st.sampled_from(["m1", "m2"]))


def check_indexed_replication_steps_are_unfolding_steps(body, k):
    r = picalc.Repl(body, index="i", limit=k)
    unfolded = _expanded_keys(picalc.step(expand(r)))
    assert _expanded_keys(picalc.step(r)) <= unfolded


def check_unbounded_replication_law(body):
    r = picalc.Repl(body)
    assert _keyset(picalc.step(r)) == _keyset(picalc.step(picalc.par(body, r)))


@c(5)
@MANY
@given(procs, indexed_bodies | procs, st.integers(1, 3))
def test_replication_unfolding(body, ibody, k):
    check_bounded_replication_unfolds(body, k)
    check_indexed_replication_steps_are_unfolding_steps(ibody, k)
    check_unbounded_replication_law(body)


@MANY
@given(procs)
def test_name_hygiene(p):
    before = picalc.free_names(p)
    for label, q in picalc.step(p):
        assert picalc.free_names(q) <= before | set(label.extruded)
        assert not (_restricted(q) & picalc.free_names(q))


def _restricted(p):
    if isinstance(p, picalc.Restrict):
        return {p.name} | _restricted(p.body)
    kids = []
    if isinstance(p, (picalc.Input, picalc.Output, picalc.Tau)):
        kids = [p.cont]
    elif isinstance(p, picalc.Sum):
        kids = list(p.alts)
    elif isinstance(p, picalc.Par):
        kids = list(p.procs)
    elif isinstance(p, picalc.Repl):
        kids = [p.body]
    elif isinstance(p, picalc.Cond):
        kids = [p.then, p.other]
    out = set()
    for k in kids:
        out |= _restricted(k)
    return out


def _prefixes(n, leaf):
    for _ in range(n):
        leaf = picalc.Tau(leaf)
    return picalc.Tau(leaf)


@MANY
@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 10_000))
def test_deliberation_takes_one_alternative(n1, n2, seed):
    p1 = _prefixes(n1, picalc.Ground(App(Const("left"), Var("x"))))
    p2 = _prefixes(n2, picalc.Ground(App(Const("right"), Var("x"))))
    p = picalc.Restrict("x", picalc.Sum((p1, p2)))
    tr = picalc.run_random(p, seed=seed, world=picalc.RecordingWorld())
    heads = {_head(t) for t in tr.final_world.log}
    assert len(heads) == 1


def _head(t):
    while isinstance(t, App):
        t = t.fun
    return t.name


# ---------------------------------------------------------------- budget

@c(5)
def test_property_suites_within_budget():
    assert len(_elapsed) >= 5
    print(f"timed suites: {len(_elapsed)}, {sum(_elapsed):.1f}s")
    assert sum(_elapsed) < 30.0, sum(_elapsed)
