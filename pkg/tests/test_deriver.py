import warnings

import pytest
from hypothesis import given, settings, strategies as st

from corpus import CORPUS
from oracles import all_results
from seqcat import cli
from seqcat.categories import Atom
from seqcat.deriver import (ChartLimit, DuplicateExactEntry, UnknownToken, derive,
                            load_lexicon, load_lexicon_file, render, replay, to_json)
from seqcat.rules import combine, combine_all, preset, raise_candidates, type_raise


def lex(name):
    return load_lexicon_file(cli.data_path(name))


@pytest.mark.parametrize("name", ["language", "planning"])
@pytest.mark.parametrize("lexname,sentence", CORPUS)
def test_every_derivation_replays_to_its_item(lexname, sentence, name):
    cfg = preset(name)
    for d in derive(sentence.split(), lex(lexname), cfg, all_derivations=True):
        assert replay(d, cfg).key() == d.item.key()


@pytest.mark.parametrize("lexname,sentence", CORPUS)
def test_only_adjacent_spans_combine(lexname, sentence):
    for d in derive(sentence.split(), lex(lexname), preset("planning"), all_derivations=True):
        for node in d.nodes():
            if len(node.children) == 2:
                left, right = node.children
                assert left.span[0] == node.span[0]
                assert left.span[1] == right.span[0]
                assert right.span[1] == node.span[1]


@pytest.mark.parametrize("lexname,sentence", CORPUS)
def test_one_derivation_per_reading(lexname, sentence):
    tokens, cfg = sentence.split(), preset("planning")
    ds = derive(tokens, lex(lexname), cfg)
    keys = [d.item.key() for d in ds]
    assert len(keys) == len(set(keys))
    every = derive(tokens, lex(lexname), cfg, all_derivations=True)
    assert {d.item.key() for d in every} == set(keys)
    assert len(every) >= len(ds)


def _oracle_keys(tokens, lexicon, cfg):
    found = all_results(tokens, lexicon, cfg, combine, combine_all, type_raise,
                        raise_candidates)
    return {it.key() for it in found}


SHORT = [(lexname, sentence) for lexname, sentence in CORPUS if len(sentence.split()) <= 5]


@pytest.mark.parametrize("name", ["language", "planning"])
@pytest.mark.parametrize("lexname,sentence", SHORT)
def test_chart_finds_every_bracketing_result(lexname, sentence, name):
    tokens, lexicon, cfg = sentence.split(), lex(lexname), preset(name)
    got = {d.item.key() for d in derive(tokens, lexicon, cfg)}
    assert got == _oracle_keys(tokens, lexicon, cfg)


BLOCKS = lex("blocks.lex")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(BLOCKS.forms()), min_size=1, max_size=4))
def test_chart_matches_brute_force_on_random_strings(tokens):
    cfg = preset("planning")
    got = {d.item.key() for d in derive(tokens, BLOCKS, cfg)}
    assert got == _oracle_keys(tokens, BLOCKS, cfg)


def test_unknown_token():
    with pytest.raises(UnknownToken) as exc:
        derive(["John", "sings"], BLOCKS, preset("planning"))
    assert exc.value.form == "sings"


def test_span_and_item_limits():
    with pytest.raises(ChartLimit):
        derive(["John"] * 21, BLOCKS, preset("planning"))
    with pytest.raises(ChartLimit):
        derive("John B2 pick-up".split(), BLOCKS, preset("planning"), item_cap=3)


def test_empty_input_has_no_derivation():
    assert derive([], BLOCKS, preset("planning")) == []


def test_duplicate_entries_warn_and_are_dropped():
    text = '(entry "a" (cat "T") (lf a))\n(entry "a" (cat "T") (lf a))'
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lexicon = load_lexicon(text)
    assert len(lexicon) == 1
    assert any(issubclass(w.category, DuplicateExactEntry) for w in caught)


@pytest.mark.parametrize("text", [
    '(entry "a" (lf a))',
    '(entry "a" (cat "T") (lf a) (colour red))',
    '(entry "a" (cat "T") (lf a)',
])
def test_lexicon_errors(text):
    with pytest.raises(SyntaxError):
        load_lexicon(text)


def test_word_form_may_be_a_bare_symbol():
    assert load_lexicon('(entry a (cat "T") (lf a))').forms() == ["a"]


def test_raise_clause_adds_a_raised_entry():
    lexicon = load_lexicon('(entry "a" (cat "T") (lf a) (raise fwd "S"))')
    cats = sorted(str(e.item.category) for e in lexicon.lookup("a"))
    assert cats == ["S/(S\\T)", "T"]


def test_renderings():
    (d,) = [d for d in derive("John B2 pick-up".split(), BLOCKS, preset("planning"))
            if d.item.category == Atom("S")]
    text = render(d)
    assert text.splitlines()[0].split() == ["John", "B2", "pick-up"]
    assert "apply (<)" in text
    assert render(d, "sexpr").startswith('(node "<"')
    js = to_json(d)
    assert js["category"] == "S"
    assert [c["span"] for c in js["children"]] == [[0, 1], [1, 3]]
    with pytest.raises(ValueError):
        render(d, "svg")
