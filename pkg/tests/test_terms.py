import pytest
from hypothesis import given, settings, strategies as st

from seqcat.terms import (Abs, App, Const, FuelExhausted, TermSyntaxError, Var, alpha_eq,
                          alpha_key, app, free_vars, is_normal, lam, normalize, parse_term,
                          print_term, show, substitute)


def t(text):
    return parse_term(text)


def test_beta_reduces_to_normal_form():
    assert normalize(t("((lam x (f x x)) a)")) == t("(f a a)")


def test_normal_order_skips_a_diverging_argument():
    omega = t("((lam x (x x)) (lam x (x x)))")
    assert normalize(App(t("(lam x a)"), omega)) == Const("a")


def test_fuel_runs_out_on_omega():
    with pytest.raises(FuelExhausted):
        normalize(t("((lam x (x x)) (lam x (x x)))"), fuel=50)


def test_trace_records_each_contraction():
    steps = []
    normalize(t("((lam x (lam y (f x y))) a b)"), trace=steps)
    assert len(steps) == 2


def test_substitution_avoids_capture():
    term = t("(lam y (f (var x) y))")
    got = substitute(term, "x", Var("y"))
    assert isinstance(got, Abs) and got.binder != "y"
    assert free_vars(got) == {"y"}
    assert alpha_eq(got, t("(lam w (f (var y) w))"))


def test_substitution_stops_at_shadowing_binder():
    term = t("(lam x (f x))")
    assert substitute(term, "x", Const("a")) == term


def test_alpha_equivalence_ignores_binder_names():
    assert alpha_eq(t("(lam x (lam y (f x y)))"), t("(lam a (lam b (f a b)))"))
    assert not alpha_eq(t("(lam x (lam y (f x y)))"), t("(lam a (lam b (f b a)))"))


def test_alpha_key_distinguishes_free_variables_from_constants():
    assert alpha_key(Var("a")) != alpha_key(Const("a"))


def test_offline_marker_round_trips():
    term = t("(study.0 john.0)")
    assert term.fun == Const("study", offline=True)
    assert parse_term(print_term(term)) == term


def test_modality_tag_round_trips():
    term = t("((const angry :mod qi) zhangsan)")
    assert term.fun.modality == "qi"
    assert parse_term(print_term(term)) == term


def test_modality_may_refer_to_a_binder():
    term = t("(lam x (lam y ((const angry :mod x) y)))")
    got = normalize(app(term, Const("qi"), Const("zhangsan")))
    assert got == App(Const("angry", modality="qi"), Const("zhangsan"))


def test_modality_binder_counts_as_a_use():
    term = t("(lam x (const angry :mod x))")
    assert free_vars(term) == set()
    assert free_vars(term.body) == {"x"}


def test_show_uses_lambda_and_dots():
    assert show(t("(lam x (lam y (f x y)))")) == "λx.λy.f x y"


@pytest.mark.parametrize("text", ["(lam x)", "(lam () y)", "(f)", "((", ""])
def test_parse_errors(text):
    with pytest.raises(TermSyntaxError):
        parse_term(text)


def test_lam_and_app_helpers():
    assert lam(["x", "y"], app(Const("f"), Var("x"), Var("y"))) == t("(lam (x y) (f x y))")


names = st.sampled_from(["x", "y", "z"])
terms = st.recursive(
    names.map(Var) | st.sampled_from(["a", "b"]).map(Const),
    lambda sub: st.builds(Abs, names, sub) | st.builds(App, sub, sub),
    max_leaves=6)


@settings(max_examples=300, deadline=None)
@given(terms)
def test_print_parse_round_trip(term):
    back = parse_term(print_term(term))
    assert alpha_eq(back, term)


@settings(max_examples=300, deadline=None)
@given(terms)
def test_normal_forms_are_normal(term):
    try:
        n = normalize(term, fuel=200)
    except FuelExhausted:
        return
    assert is_normal(n)
