import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from resolvable.forest_parser import (
    InfiniteAmbiguity, LexError, Leaf, Node, NoParse, TooManyTrees,
    from_nested, parse_string, parse_word, sample_lexeme, semantic, to_functional,
    to_nested, tokenize, trees_of, words_text,
)
from resolvable.grammar_def import LanguageDefinition, Production, Term, Terminal, seq

from grammars import E, PLUS, RUNNING, RUNNING_SEQ, UNIT_CYCLE, syn
from oracles import brute_parse, random_grammar, trees_upto, words_of_tree


def shapes(result):
    return [to_functional(t) for t in result.trees]


def test_running_example_trees():
    assert shapes(parse_string(RUNNING, "1+2+3")) == [
        "a(a(n('1') '+' n('2')) '+' n('3'))",
        "a(n('1') '+' a(n('2') '+' n('3')))",
    ]
    assert shapes(parse_string(RUNNING, "1+2*3")) == ["a(n('1') '+' m(n('2') '*' n('3')))"]
    assert shapes(parse_string(RUNNING, "(1+2)*3")) == ["m(a(n('1') '+' n('2')) '*' n('3'))"]
    assert shapes(parse_string(RUNNING, "((1))")) == ["n('1')"]


def test_list_forms():
    assert shapes(parse_string(RUNNING, "[]")) == ["l('[' ']')"]
    assert shapes(parse_string(RUNNING, "[1;2;3]")) == [
        "l('[' n('1') ';' n('2') ';' n('3') ']')"]
    assert len(parse_string(RUNNING_SEQ, "[1;2]").trees) == 2


def test_keep_groups():
    r = parse_string(RUNNING, "(1)", keep_groups=True)
    assert shapes(r) == ["g('(' n('1') ')')"]
    assert semantic(r.trees[0]) == Node("n", (Leaf("I", "1"),))


def test_spans_and_tokens():
    toks = tokenize(RUNNING, " 12 +3")
    assert [(t.terminal, t.lexeme, t.span) for t in toks] == [
        ("I", "12", (1, 3)), ("+", "+", (4, 5)), ("I", "3", (5, 6))]
    t = parse_word(RUNNING, toks).trees[0]
    assert t.span == (1, 6)
    assert words_text(toks) == "12 + 3"


def test_errors():
    with pytest.raises(LexError) as e:
        tokenize(RUNNING, "1 + x")
    assert e.value.offset == 4
    with pytest.raises(NoParse) as e:
        parse_string(RUNNING, "1 + + 2")
    assert e.value.token.start == 4
    with pytest.raises(NoParse):
        parse_string(RUNNING, "1 +")
    with pytest.raises(InfiniteAmbiguity):
        parse_string(UNIT_CYCLE, "1")
    with pytest.raises(TooManyTrees):
        parse_string(RUNNING, "+".join("1" * 9), limit=10)
    assert trees_of(RUNNING, tokenize(RUNNING, "1 +")) == frozenset()


def test_literal_beats_token_of_equal_length():
    g = LanguageDefinition((
        Production("E", "k", seq(Term("let"), Term("I", literal=False))),
        Production("E", "v", Term("I", literal=False)),
    ), "E", (Terminal("I", "[a-z]+"),))
    assert [t.terminal for t in tokenize(g, "let letx")] == ["let", "I"]


def test_sample_lexeme_avoids_literals():
    g = LanguageDefinition((
        Production("E", "v", Term("I", literal=False)),
        Production("E", "x", seq(Term("x"), E())),
    ), "E", (Terminal("I", "[a-z]+"),))
    assert sample_lexeme(g, "I") != "x"
    assert sample_lexeme(g, "x") == "x"


def test_nested_round_trip():
    for t in parse_string(RUNNING, "[1+2;3*4]").trees:
        assert from_nested(to_nested(t)) == t


def test_dsl_grammar_parses_calls_and_grouping():
    d = syn("arith.syn")
    assert shapes(parse_string(d, "f((x))")) == ["call('f' '(' var('x') ')')"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_parser_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    g = random_grammar(rng, max_nts=3, max_prods=5, marks=rng.random() < 0.5)
    trees = trees_upto(g, 3, max_leaves=6)
    rng.shuffle(trees)
    for t in trees[:6]:
        for w in sorted(words_of_tree(t, 8))[:12]:
            toks = tuple(Leaf(s, s) for s in w)
            want = brute_parse(g, w)
            if len(want) > 64:
                with pytest.raises(TooManyTrees):
                    trees_of(g, toks)
            else:
                assert trees_of(g, toks) == want, w
