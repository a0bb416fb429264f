import itertools

import pytest
from hypothesis import given, settings, strategies as st

from resolvable.forest_parser import Leaf, Node, parse_word
from resolvable.grammar_def import (
    Alt, Eps, LanguageDefinition, NonTerm, Production, Seq, Star, Term, Terminal,
    check_balanced, check_unit_cycles, opt, plus, seq, validate,
)
from resolvable.grammar_gen import (
    dfa_product, finite_language_dfa, gen_abstract, gen_concrete, gen_tree_grammars,
    leaf_symbol, marked_name, minimize, regex_to_dfa,
)

from grammars import E, PLUS, RUNNING, RUNNING_SEQ, TWO_UNITS, UNIT_CYCLE, UNIT_EXAMPLE
from oracles import cfg_words, rhs_words


def codes(defn):
    return sorted(d.code for d in validate(defn))


# -- validation ----------------------------------------------------------------


def test_valid_grammars_have_no_errors():
    for g in (RUNNING, RUNNING_SEQ, UNIT_EXAMPLE, TWO_UNITS, PLUS):
        assert [d for d in validate(g) if d.severity == "error"] == []


def test_duplicate_label():
    g = PLUS.with_productions([Production("E", "p", Term("x"))])
    assert "duplicate-label" in codes(g)


def test_grouping_label_is_reserved_and_never_forbidden():
    g = PLUS.with_productions([Production("E", "g", Term("x"))])
    assert "reserved-label" in codes(g)
    h = LanguageDefinition((Production("E", "p", seq(E("g"), Term("+"), E())),
                            Production("E", "n", Term("x"))), "E")
    assert "forbid-grouping" in codes(h)


def test_unknown_names():
    g = LanguageDefinition((Production("E", "p", seq(NonTerm("F"), Term("I", literal=False))),), "E")
    assert {"unknown-nonterminal", "unknown-token"} <= set(codes(g))
    h = LanguageDefinition((Production("E", "p", Term("x")),), "S")
    assert "unknown-start" in codes(h)


def test_mark_on_wrong_nonterminal_is_a_warning():
    g = LanguageDefinition((
        Production("S", "s", NonTerm("E", frozenset({"t"}))),
        Production("S", "t", Term("y")),
        Production("E", "n", Term("x")),
    ), "S")
    diags = validate(g)
    assert [d.code for d in diags] == ["vacuous-mark"]
    assert diags[0].severity == "warning"


def test_balanced():
    assert check_balanced(RUNNING)
    bad = PLUS.with_productions([Production("E", "o", seq(Term("("), E()))])
    assert not check_balanced(bad)
    good = PLUS.with_productions([Production("E", "c", seq(Term("f"), Term("("), E(), Term(")")))])
    assert check_balanced(good)
    starred = PLUS.with_productions([Production("E", "k", Star(Term("(")))])
    assert not check_balanced(starred)


def test_unit_cycles():
    assert check_unit_cycles(UNIT_CYCLE) == {"E"}
    assert check_unit_cycles(RUNNING) == set()
    via_optional = LanguageDefinition((
        Production("E", "x", seq(E(), opt(Term(";")))),
        Production("E", "n", Term("z")),
    ), "E")
    assert check_unit_cycles(via_optional) == {"E"}


# -- generated grammars ----------------------------------------------------------


def test_abstract_grammar_names_helpers_after_labels():
    cfg = gen_abstract(RUNNING)
    helpers = [n for n in cfg.nonterminals if n.startswith("l_")]
    assert helpers == ["l_1", "l_2"]
    assert ("E", ("[", "l_1", "]")) in cfg.productions


def test_concrete_grammar_has_marked_copies_and_grouping():
    cfg = gen_concrete(RUNNING)
    ea = marked_name("E", frozenset({"a"}))
    assert ea == "E{a}"
    assert ea in cfg.nonterminals
    assert (ea, ("(", "E", ")")) in cfg.productions
    # the marked copy has no rule for the forbidden label
    assert not any(r.lhs == ea and r.label == "a" for r in cfg.rules)


def test_concrete_words_match_parser():
    # every word of the concrete grammar up to length 7 parses, and no other
    cfg = gen_concrete(RUNNING)
    words = cfg_words(cfg, 7)
    alphabet = ["[", "]", ";", "+", "*", "(", ")", "I"]
    for n in range(1, 6):
        for w in itertools.product(alphabet, repeat=n):
            toks = tuple(Leaf(t, "1" if t == "I" else t) for t in w)
            try:
                ok = bool(parse_word(RUNNING, toks).trees)
            except Exception:
                ok = False
            assert ok == (w in words), w


def test_tree_grammars():
    abstract, concrete = gen_tree_grammars(RUNNING)
    n = lambda v: Node("n", (Leaf("I", v),))  # noqa: E731
    add = Node("a", (n("1"), Leaf("+", "+"), n("2")))
    mul = Node("m", (add, Leaf("*", "*"), n("3")))
    assert abstract.accepts(mul)
    assert not concrete.accepts(mul)   # bare addition under multiplication
    grouped = Node("m", (Node("g", (Leaf("(", "("), add, Leaf(")", ")"))), Leaf("*", "*"), n("3")))
    assert concrete.accepts(grouped)


# -- regular expressions to automata ---------------------------------------------


SYMS = [Term("a"), Term("b"), NonTerm("E")]


def rhs_strategy():
    leaf = st.sampled_from(SYMS)
    return st.recursive(
        leaf | st.just(Eps()),
        lambda inner: st.one_of(
            st.lists(inner, min_size=2, max_size=3).map(lambda xs: Seq(tuple(xs))),
            st.lists(inner, min_size=2, max_size=3).map(lambda xs: Alt(tuple(xs))),
            inner.map(Star),
        ),
        max_leaves=6,
    )


ALPHA = tuple(leaf_symbol(s) for s in SYMS)


@settings(max_examples=150, deadline=None)
@given(rhs_strategy())
def test_regex_to_dfa_matches_enumeration(r):
    d = regex_to_dfa(r, ALPHA)
    want = rhs_words(r, 5)
    for n in range(6):
        for w in itertools.product(ALPHA, repeat=n):
            assert d.accepts(w) == (w in want)


@settings(max_examples=80, deadline=None)
@given(rhs_strategy(), rhs_strategy())
def test_equal_languages_give_equal_dfas(r1, r2):
    d = regex_to_dfa(Alt((r1, r2)), ALPHA)
    e = regex_to_dfa(Alt((r2, r1)), ALPHA)
    assert d == e
    assert minimize(d) == d


@settings(max_examples=80, deadline=None)
@given(rhs_strategy(), rhs_strategy())
def test_dfa_product(r1, r2):
    a, b = regex_to_dfa(r1, ALPHA), regex_to_dfa(r2, ALPHA)
    both = dfa_product(a, b, lambda x, y: x and y)
    for n in range(5):
        for w in itertools.product(ALPHA, repeat=n):
            assert both.accepts(w) == (a.accepts(w) and b.accepts(w))


def test_finite_language_dfa():
    words = {(("T", "a"),), (("T", "a"), ("T", "b"))}
    d = finite_language_dfa(words, ALPHA)
    for n in range(4):
        for w in itertools.product(ALPHA, repeat=n):
            assert d.accepts(w) == (w in words)


def test_plus_and_opt():
    d = regex_to_dfa(seq(plus(Term("a")), opt(Term("b"))), ALPHA)
    a, b = ("T", "a"), ("T", "b")
    assert d.accepts((a,)) and d.accepts((a, a, b))
    assert not d.accepts((b,)) and not d.accepts(())
