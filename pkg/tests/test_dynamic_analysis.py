import random

import pytest
from hypothesis import given, settings, strategies as st

from resolvable.dynamic_analysis import (
    PreconditionViolation, ambiguity_site, analyze_trees, find_witness,
    forbid_suggestions, render_record, render_verdict, resolve_word, site_key,
    site_of_verdict, verdict_record, witness_key,
)
from resolvable.forest_parser import Leaf, parse_string, parse_word, words_text
from resolvable.grammar_def import Production, Term, seq

from grammars import E, PLUS, RUNNING, RUNNING_SEQ, RUNNING_SEQ_MARKED, UNIT_CYCLE, syn
from oracles import (
    brute_parse, fewest_pairs, leaves, random_grammar, trees_upto, unique_word,
)


def witnesses(v):
    return [words_text(w) for w in v.witnesses]


def test_running_example_associativity():
    v = resolve_word(RUNNING, "1 + 2 + 3")
    assert v.kind == "resolvable"
    assert witnesses(v) == ["( 1 + 2 ) + 3", "1 + ( 2 + 3 )"]
    assert resolve_word(RUNNING, "1 + 2 * 3").kind == "unambiguous"


def test_list_of_two_is_unresolvable():
    v = resolve_word(RUNNING_SEQ, "[1 ; 2]")
    assert v.kind == "unresolvable"
    assert [t.label for t in v.report.unresolvable] == ["l"]
    assert len(v.report.unresolvable[0].children) == 5
    assert witnesses(v) == ["[ ( 1 ; 2 ) ]"]
    assert resolve_word(RUNNING_SEQ_MARKED, "[1 ; 2]").kind == "unambiguous"


def test_witness_parses_uniquely():
    v = resolve_word(RUNNING, "1 + 2 + 3 + 4")
    assert v.kind == "resolvable"
    for t, w in v.report.resolved.items():
        assert parse_word(RUNNING, w).trees == (t,)


def test_preconditions():
    with pytest.raises(PreconditionViolation, match="unit cycle through E"):
        analyze_trees(UNIT_CYCLE, [])
    bad = PLUS.with_productions([Production("E", "o", seq(Term("("), E()))])
    with pytest.raises(PreconditionViolation, match="unbalanced"):
        analyze_trees(bad, [])


def test_zero_budget_is_inconclusive():
    trees = parse_string(RUNNING, "1+2+3").trees
    rep = analyze_trees(RUNNING, trees, budget_ms=0)
    assert set(rep.inconclusive) == set(trees)
    assert not rep.all_resolved


def test_find_witness_counts_iterations():
    trees = parse_string(RUNNING, "1+2+3").trees
    word, n, seen = find_witness(RUNNING, trees[0], trees)
    assert n >= 1 and set(seen) == {trees[1]}
    assert parse_word(RUNNING, word).trees == (trees[0],)


def test_witness_order_puts_open_paren_first():
    toks = lambda s: tuple(Leaf(c, c) for c in s.split())  # noqa: E731
    words = [toks("1 + ( 2 )"), toks("( 1 ) + 2")]
    assert sorted(words, key=witness_key)[0] == toks("( 1 ) + 2")


def test_render_unresolvable():
    text = "[1 ; 2]"
    v = resolve_word(RUNNING_SEQ, text)
    assert render_verdict(v, "x.txt", text) == "\n".join([
        "Unresolvable ambiguity error with 1 alternative.",
        "Resolvable alternatives:",
        "  [ ( 1 ; 2 ) ]",
        "Unresolvable alternatives:",
        "  l",
        "   - n          x.txt:1:2-3",
        "   - n          x.txt:1:6-7",
    ])
    rec = verdict_record(v, "x.txt", text)
    assert render_record(rec) == render_verdict(v, "x.txt", text)


def test_render_unambiguous_is_tree():
    v = resolve_word(RUNNING, "1*2")
    assert render_verdict(v) == "m(n('1') '*' n('2'))"


def test_sites_and_suggestions():
    d = syn("orc.syn", "arith.syn", "gt.syn")
    text = "42 >x> f(x)"
    v = resolve_word(d, text)
    s = site_of_verdict(d, v)
    assert s == {"key": ["gt", "gt", "seq"],
                 "suggestions": ["forbid gt.left = gt", "forbid gt.right = gt"]}
    v2 = resolve_word(RUNNING_SEQ, "[1;2]")
    assert site_key(ambiguity_site(v2.trees)) == ("l", "l")


def test_site_descends_to_the_difference():
    v = resolve_word(RUNNING, "[7; 1+2+3]")
    subs = ambiguity_site(v.trees)
    assert [t.label for t in subs] == ["a", "a"]
    assert forbid_suggestions(RUNNING, subs[:1], subs[1:]) != []


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_witnesses_are_sound_and_minimal(seed):
    rng = random.Random(seed)
    g = random_grammar(rng, max_nts=2, max_prods=5)
    for t in trees_upto(g, 3, max_leaves=5)[:10]:
        trees = brute_parse(g, leaves(t))
        if len(trees) < 2:
            continue
        rep = analyze_trees(g, trees)
        for u, w in rep.resolved.items():
            assert brute_parse(g, [x.terminal for x in w]) == {u}
            best = unique_word(g, u)
            assert best is not None and len(w) == len(best)
        for u in rep.unresolvable:
            assert unique_word(g, u) is None


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_pair_counting_matches_enumeration(seed):
    g = random_grammar(random.Random(seed), max_nts=2, max_prods=5)
    for t in trees_upto(g, 3, max_leaves=6)[:15]:
        best = unique_word(g, t)
        k = fewest_pairs(g, t)
        assert (best is None) == (k is None)
        if best is not None:
            assert len(best) == len(leaves(t)) + 2 * k
