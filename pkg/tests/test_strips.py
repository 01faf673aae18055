import pytest

from seqcat.categories import Atom, parse_category
from seqcat.strips import (CondLists, Item, Literal, NotExecutable, PreconditionFailure,
                           UngroundEffect, WorldState, execute, merge, parse_literal,
                           parse_world, thread)
from seqcat.terms import Const, Var


def lits(*texts, variables=""):
    return tuple(parse_literal(x, variables) for x in texts)


def act(pre=(), add=(), dele=(), variables="", category="S"):
    conds = CondLists(lits(*pre, variables=variables), lits(*add, variables=variables),
                      lits(*dele, variables=variables))
    return Item(parse_category(category), Const("act"), conds)


W = parse_world("on(b2,b1)\non(b1,t1)\nclear(b2)\ninhand(john,nil)\n")


def test_world_file_skips_comments_and_blank_lines():
    w = parse_world("# two facts\non(a,b)\n\nclear(a)\n")
    assert len(w) == 2
    assert w.holds(parse_literal("clear(a)"))


def test_literals_parse_nested_terms():
    lit = parse_literal("at(john,dest(y))")
    assert lit.functor == "at"
    assert str(lit) == "at(john,dest(y))"
    assert parse_literal("have(john,F)").args[1] == Var("F")


def test_pre_variables_bind_the_effects():
    after = execute(act(["on(X,b1)"], ["held(X)"], ["on(X,b1)"], variables="X"), W)
    assert after.holds(parse_literal("held(b2)"))
    assert not after.holds(parse_literal("on(b2,b1)"))


def test_negated_precondition():
    with pytest.raises(PreconditionFailure):
        execute(act(["not(clear(b2))"]), W)
    execute(act(["not(clear(b1))"]), W)


def test_delete_then_add_keeps_a_literal_in_both_lists():
    after = execute(act([], ["clear(b2)"], ["clear(b2)"]), W)
    assert after.holds(parse_literal("clear(b2)"))


def test_failure_names_the_literal_and_leaves_the_world_alone():
    with pytest.raises(PreconditionFailure) as exc:
        execute(act(["clear(b1)"], [], ["on(b2,b1)"]), W)
    assert str(exc.value.literal) == "clear(b1)"
    assert exc.value.world == W
    assert W.holds(parse_literal("on(b2,b1)"))


def test_unground_effect_is_an_error():
    with pytest.raises(UngroundEffect):
        execute(act([], ["held(X)"], [], variables="X"), W)


def test_only_sentences_execute():
    with pytest.raises(NotExecutable):
        execute(act(category="S/T"), W)


def test_partial_check_only_tests_ground_preconditions():
    item = act(["clear(X)", "clear(b1)"], variables="X", category="S/T")
    with pytest.raises(PreconditionFailure):
        execute(item, W, check_partial=True)
    ok = act(["clear(X)", "clear(b2)"], variables="X", category="S/T")
    assert execute(ok, W, check_partial=True) == W


def test_world_equality_ignores_order():
    assert parse_world("a\nb\n") == parse_world("b\na\n")


def test_thread_substitutes_everywhere():
    c = CondLists(lits("p(X)", variables="X"), lits("q(X)", variables="X"), ())
    got = thread(c, {"X": Const("a")})
    assert got == CondLists(lits("p(a)"), lits("q(a)"), ())


def test_merge_concatenates_and_drops_duplicates():
    a = CondLists(lits("p(a)"), lits("q(a)"), ())
    b = CondLists(lits("p(a)", "r(a)"), (), lits("s(a)"))
    assert merge(a, b) == CondLists(lits("p(a)", "r(a)"), lits("q(a)"), lits("s(a)"))


def test_literal_rejects_empty_functor():
    with pytest.raises(ValueError):
        Literal("", ())
