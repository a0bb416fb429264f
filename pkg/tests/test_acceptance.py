"""Acceptance suite: one test per criterion, each printing one PASS/FAIL line.

The lines go straight to the terminal (not captured), so a plain
``pytest -v`` shows the verdict of every criterion.
"""

import contextlib
import functools
import random
import time

import pytest
from click.testing import CliRunner

from resolvable.cli import main
from resolvable.dynamic_analysis import WitnessMemo, analyze_trees, resolve_word
from resolvable.forest_parser import (
    Leaf, NoParse, TooManyTrees, parse_word, tree_yield,
)
from resolvable.static_analysis import (
    CLOSE, MARKS_ONLY, NO_MARKS_NO_PARENS, OPEN, RESOLVABLE, UNRESOLVABLE,
    build_a_opt, check_static, classify,
)
from resolvable.syncon_dsl import load_grammar
from resolvable.vpda import complement, difference, product, symbol_key, union

from grammars import DATA, UNIT_EXAMPLE
from oracles import (
    bracketings, brute_parse, brute_resolvable, fewest_pairs, leaves, random_grammar,
    random_vpda, states_on_runs, trees_upto, unique_word, vpda_language, well_matched,
    words_of_tree,
)


@pytest.fixture
def report(request, capsys):
    """Yield a context manager that prints the criterion's verdict line."""
    @contextlib.contextmanager
    def criterion(number, title):
        started = time.monotonic()
        try:
            yield
        except BaseException as e:
            with capsys.disabled():
                print(f"\nFAIL criterion {number}: {title} -- {type(e).__name__}: "
                      f"{str(e).splitlines()[0] if str(e) else ''}")
            raise
        with capsys.disabled():
            print(f"\nPASS criterion {number}: {title} "
                  f"({time.monotonic() - started:.1f}s)")
    return criterion


def run_cli(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def within(started, seconds):
    elapsed = time.monotonic() - started
    assert elapsed < seconds, f"took {elapsed:.1f}s, limit {seconds}s"


# -- shared word sources --------------------------------------------------------


LISTS = [DATA / "lists.syn"]
LISTS_SEQ = LISTS + [DATA / "seq.syn"]
ORC = [DATA / "orc.syn", DATA / "arith.syn"]
ORC_GT = ORC + [DATA / "gt.syn"]
ML = [DATA / "miniml.syn"]
ML_PROGRAMS = ["Foo 42", "Foo.f", "[1; 2]"]


def sweep_grammars():
    rng = random.Random(1)
    return [random_grammar(rng, max_nts=4, max_prods=8) for _ in range(100)]


@functools.lru_cache(maxsize=None)
def dynamic_sweep():
    """Ambiguous words of the statically resolvable sweep grammars, with
    their reports.

    Per grammar: every word up to 10 symbols that brackets a tree of depth
    at most 4 is a candidate; the 20 shortest ambiguous ones are analyzed
    plus 10 ambiguous ones drawn at random (seeded by the grammar index).
    Results are ``(grammar, word, trees, report)`` tuples.
    """
    out = []
    for i, g in enumerate(sweep_grammars()):
        if check_static(g).outcome != RESOLVABLE:
            continue
        words = set()
        for t in trees_upto(g, 4, max_leaves=10):
            words.update(bracketings(t, 10))
        order = sorted(words, key=lambda w: (len(w), w))
        extra = random.Random(i).sample(order, min(len(order), 400))
        memo = WitnessMemo()
        for pool, want in ((order, 20), (extra, 10)):
            found = 0
            for w in pool:
                if found == want:
                    break
                try:
                    trees = parse_word(g, [Leaf(s, s) for s in w], limit=256).trees
                except TooManyTrees:
                    continue
                if len(trees) < 2:
                    continue
                found += 1
                out.append((g, w, trees, analyze_trees(g, trees, memo=memo)))
    return out


@functools.lru_cache(maxsize=None)
def program_verdicts():
    """Verdicts of the fixed programs used across the criteria."""
    cases = [(LISTS, "1 + 2 + 3"), (LISTS_SEQ, "[1 ; 2]"), (ORC, "1 + 2 >x> f(x)"),
             (ORC_GT, "42 >x> f(x)")]
    cases += [(ML, p) for p in ML_PROGRAMS]
    cases += [(ML, f.read_text()) for f in sorted((DATA / "corpus").iterdir())]
    out = []
    for paths, text in cases:
        g = load_grammar(paths)
        out.append((g, text, resolve_word(g, text)))
    return out


# -- the criteria ---------------------------------------------------------------


def test_running_example_golden(report, tmp_path):
    with report(1, "running example: associativity witnesses, precedence unambiguous"):
        started = time.monotonic()
        p = tmp_path / "sum.txt"
        p.write_text("1 + 2 + 3")
        r = run_cli("parse", "-g", LISTS[0], p)
        assert r.exit_code == 1
        assert r.output == ("Ambiguity error with 2 alternatives:\n"
                            "  ( 1 + 2 ) + 3\n"
                            "  1 + ( 2 + 3 )\n")
        p.write_text("1 + 2 * 3")
        r = run_cli("parse", "-g", LISTS[0], p)
        assert r.exit_code == 0
        assert r.output == "add(literal('1') '+' mul(literal('2') '*' literal('3')))\n"
        within(started, 1)


def test_list_of_two_unresolvable(report, tmp_path):
    with report(2, "list of two vs sequencing: unresolvable, fixed by marks"):
        started = time.monotonic()
        p = tmp_path / "l.txt"
        p.write_text("[1 ; 2]")
        r = run_cli("parse", "-g", LISTS[0], "-g", DATA / "seq.syn", p)
        assert r.exit_code == 2
        assert r.output == "\n".join([
            "Unresolvable ambiguity error with 1 alternative.",
            "Resolvable alternatives:",
            "  [ ( 1 ; 2 ) ]",
            "Unresolvable alternatives:",
            "  list",
            "   - literal    l.txt:1:2-3",
            "   - literal    l.txt:1:6-7",
        ]) + "\n"
        g = load_grammar(LISTS_SEQ)
        v = resolve_word(g, "[1 ; 2]")
        [bad] = v.report.unresolvable
        assert bad.label == "list" and len(bad.children) == 5
        r = run_cli("parse", "-g", LISTS[0], "-g", DATA / "seq.syn",
                    "-g", DATA / "seqfix.syn", p)
        assert r.exit_code == 0
        assert r.output == "list('[' literal('1') ';' literal('2') ']')\n"
        within(started, 1)


def test_orc_listings(report):
    with report(3, "composed Orc + arithmetic: both listings byte for byte"):
        started = time.monotonic()
        args = [x for g in ORC for x in ("-g", g)]
        r = run_cli("parse", *args, DATA / "sum.orc")
        assert r.exit_code == 1
        assert r.output == ("Ambiguity error with 2 alternatives:\n"
                            "  ( 1 + 2 ) > x > f ( x )\n"
                            "  1 + ( 2 > x > f ( x ) )\n")
        r = run_cli("parse", *args, "-g", DATA / "gt.syn", DATA / "gt.orc")
        assert r.exit_code == 2
        assert r.output == "\n".join([
            "Unresolvable ambiguity error with 2 alternatives.",
            "Resolvable alternatives:",
            "  ( 42 > x ) > f ( x )",
            "  42 > ( x > f ( x ) )",
            "Unresolvable alternatives:",
            "  seq",
            "   - int        gt.orc:1:1-3",
            "   - call       gt.orc:1:8-12",
        ]) + "\n"
        r = run_cli("parse", *args, "-g", DATA / "gt.syn", "-g", DATA / "gtfix.syn",
                    DATA / "gt.orc")
        assert r.exit_code == 0
        assert r.output.startswith("seq(")
        within(started, 1)


def test_mini_ocaml_ambiguity_classes(report):
    # Expected to fail with the shipped grammar: each of these programs has
    # a reading that no parenthesization singles out (see the decision log).
    with report(4, "mini-OCaml: three ambiguity classes reported as resolvable"):
        started = time.monotonic()
        g = load_grammar(ML)
        assert len((DATA / "miniml.syn").read_text().splitlines()) <= 120
        kinds = {}
        for text in ML_PROGRAMS:
            v = resolve_word(g, text)
            assert len(v.trees) >= 2, text
            kinds[text] = v.kind
        within(started, 5)
        assert all(k == "resolvable" for k in kinds.values()), kinds


def test_unit_example_static(report):
    with report(5, "static construction on the unit example"):
        started = time.monotonic()
        a = build_a_opt(UNIT_EXAMPLE)

        def enc(text):
            return tuple(OPEN if c == "[" else CLOSE if c == "]" else c for c in text)

        for w in ("[z]", "[[z]s]", "[[z];]"):
            assert a.accepts(enc(w)), w
        assert not a.accepts(enc("[[z]]"))
        assert len(a.states) == 10
        assert check_static(UNIT_EXAMPLE).outcome == RESOLVABLE
        within(started, 1)


def static_agrees(g):
    """``None`` when the static verdict matches the brute-force oracle,
    else a description of the mismatch.

    The oracle explores trees to depth 4 whose words fit in 12 symbols.  An
    unresolvable tree it finds must make the verdict unresolvable.  A
    resolvable verdict must leave the oracle empty-handed.  An unresolvable
    verdict whose witness lies beyond the oracle's bounds is accepted only
    if that witness is confirmed directly: none of its bracketings parses
    uniquely, and every word of it also parses to the competing tree.
    """
    v = check_static(g)
    ok, bad = brute_resolvable(g, depth=4, max_len=12)
    if not ok:
        return None if v.outcome == UNRESOLVABLE else f"oracle found {bad}, static {v.outcome}"
    if v.outcome == RESOLVABLE:
        return None
    if v.outcome != UNRESOLVABLE:
        return f"static {v.outcome}"
    t, other = v.contained, v.container
    if unique_word(g, t) is not None:
        return f"static witness {t} has an unambiguous word"
    for w in words_of_tree(t, len(leaves(t)) + 4):
        trees = brute_parse(g, w)
        if t in trees and other not in trees:
            return f"{' '.join(w)} parses to {t} but not to {other}"
    return None


def test_static_dynamic_brute_agreement(report):
    with report(6, "100 random grammars: static vs brute force, dynamic U empty"):
        started = time.monotonic()
        grammars = sweep_grammars()
        assert all(classify(g) == NO_MARKS_NO_PARENS for g in grammars)
        assert all(len(g.nonterminals) <= 4 and len(g.productions) <= 8 for g in grammars)
        problems = [(i, msg) for i, g in enumerate(grammars)
                    if (msg := static_agrees(g)) is not None]
        assert not problems, problems
        sweep = dynamic_sweep()
        assert sweep
        for g, w, trees, rep in sweep:
            assert not rep.unresolvable, " ".join(w)
            assert not rep.inconclusive
        within(started, 300)


PART = ({"<"}, {"a", "b"}, {">"})


def test_vpda_algebra(report):
    with report(7, "VPDA operations match set algebra on words up to 10"):
        started = time.monotonic()
        n = 10
        wm = well_matched(*PART, n)
        rng = random.Random(7)
        pairs = [(random_vpda(rng, rng.randint(1, 3)), random_vpda(rng, rng.randint(1, 3)))
                 for _ in range(24)]
        for a, b in pairs:
            la, lb = vpda_language(a, n), vpda_language(b, n)
            assert vpda_language(product(a, b), n) == la & lb
            assert vpda_language(union(a, b), n) == la | lb
            d = difference(a, b)
            ld = vpda_language(d, n)
            assert ld == la - lb
            assert vpda_language(complement(a, PART), n) == wm - la
            t = a.trim()
            assert vpda_language(t, n) == la
            assert t.states - {t.initial} <= states_on_runs(t, n)
            for v, lang in ((a, la), (d, ld)):
                w = v.shortest_word()
                if lang:
                    best = min(lang, key=lambda x: (len(x), [symbol_key(s, v.partition)
                                                             for s in x]))
                    assert w == best
                else:
                    assert w is None or len(w) > n
        within(started, 60)


def marks_only_grammars(count=50, seed=8):
    """Random grammars with marks whose stripped form is statically
    resolvable and that have at least 20 trees to depth 4."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        g = random_grammar(rng, max_nts=3, max_prods=6, marks=True)
        if classify(g) != MARKS_ONLY:
            continue
        if check_static(g.strip_marks()).outcome != RESOLVABLE:
            continue
        trees = trees_upto(g, 4, max_leaves=8)
        if len(trees) >= 20:
            out.append((g, trees))
    return out


def fully_parenthesized(t):
    if isinstance(t, Leaf):
        return [t]
    inner = [x for c in t.children for x in fully_parenthesized(c)]
    return [Leaf("(", "(")] + inner + [Leaf(")", ")")]


def test_full_parenthesization_is_unique(report):
    with report(8, "marked grammars: fully parenthesized words parse uniquely"):
        started = time.monotonic()
        rng = random.Random(9)
        for g, trees in marks_only_grammars():
            for t in rng.sample(trees, 20):
                w = fully_parenthesized(t)
                assert parse_word(g, w).trees == (t,), t
                assert brute_parse(g, [x.terminal for x in w]) == {t}
        within(started, 60)


def witness_problems(g, t, w, plain):
    """Why ``w`` is not a sound and minimal witness of ``t``, or ``None``."""
    if parse_word(g, w).trees != (t,):
        return "does not parse uniquely"
    if plain:
        if brute_parse(g, [x.terminal for x in w]) != {t}:
            return "brute force disagrees"
        k = fewest_pairs(g, t)
        if k is None or len(w) != len(leaves(t)) + 2 * k:
            return f"shortest needs {k} pairs"
        return None
    pair = (Leaf(g.grouping[0], g.grouping[0]), Leaf(g.grouping[1], g.grouping[1]))
    for shorter in bracketings(t, len(w) - 1, word=tree_yield(t), pair=pair):
        try:
            if parse_word(g, shorter).trees == (t,):
                return "a shorter word is unambiguous"
        except (NoParse, TooManyTrees):
            continue
    return None


def test_witnesses_sound_and_minimal(report):
    with report(9, "every witness parses uniquely and is shortest"):
        cases = []
        for g, _, v in program_verdicts():
            if v.report is not None:
                cases += [(g, t, w, False) for t, w in v.report.resolved.items()]
        seen = set()
        for g, _, _, rep in dynamic_sweep():
            for t, w in rep.resolved.items():
                if (id(g), t) not in seen:
                    seen.add((id(g), t))
                    cases.append((g, t, w, True))
        assert len(cases) > 100
        started = time.monotonic()
        # the pair-counting shortcut against full enumeration on a sample
        for g, t, _, _ in [c for c in cases if c[3]][:40]:
            best = unique_word(g, t)
            k = fewest_pairs(g, t)
            assert (best is None) == (k is None)
            assert best is None or len(best) == len(leaves(t)) + 2 * k
        bad = [(str(t), problem) for g, t, w, plain in cases
               if (problem := witness_problems(g, t, w, plain)) is not None]
        assert not bad, bad[:5]
        within(started, 120)
