"""Whole-grammar resolvability for grammars without marks or literal parens.

For that class a grammar is resolvable iff no tree has its word set
contained in another tree's.  We build a VPDA whose runs correspond one to
one with trees and which reads exactly their canonical encodings, and a
second copy that may also insert extra optional pairs anywhere.  A word read
by both automata along different runs exposes two trees where the words of
one are contained in the words of the other.

Grammars with marks are checked with the marks removed: marks can only make
words less ambiguous, so a resolvable verdict carries over.  A positive
finding there is only a hint, which a dynamic check on the offending tree
may confirm.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

from .dynamic_analysis import find_witness
from .encoding import Bracket, encode, render
from .forest_parser import Leaf, Node, NoParse, parse_word, sample_lexeme, tree_yield
from .grammar_def import LanguageDefinition, check_unit_cycles, single_symbol_words
from .grammar_gen import Dfa, dfa_product, finite_language_dfa, regex_to_dfa
from .vpda import Vpda, product

NO_MARKS_NO_PARENS = "NoMarksNoParens"
MARKS_ONLY = "MarksOnly"
UNSUPPORTED = "Unsupported"

RESOLVABLE = "resolvable"
UNRESOLVABLE = "unresolvable"
UNKNOWN = "unknown"

OPEN, CLOSE = Bracket.OPT_OPEN, Bracket.OPT_CLOSE
GAMMA = "γ"


class UnitCycle(ValueError):
    def __init__(self, nonterminals):
        self.nonterminals = sorted(nonterminals)
        super().__init__(
            "infinitely ambiguous (unit cycle through " + ", ".join(self.nonterminals) + ")")


def classify(defn: LanguageDefinition) -> str:
    if defn.uses_grouping_terminals():
        return UNSUPPORTED
    return MARKS_ONLY if defn.has_marks() else NO_MARKS_NO_PARENS


def unit_relation(defn: LanguageDefinition) -> frozenset:
    """Triples ``(N, labels, N2)``: from ``N``, choosing the productions
    ``labels`` in turn, each with a single non-terminal as its whole
    right-hand side, ends at ``N2``."""
    cycles = check_unit_cycles(defn)
    if cycles:
        raise UnitCycle(cycles)
    steps = []
    for p in defn.productions:
        for kind, name in single_symbol_words(p.rhs):
            if kind == "N":
                steps.append((p.lhs, p.label, name))
    rel = {(n, (), n) for n in defn.nonterminals}
    frontier = set(rel)
    while frontier:
        nxt = set()
        for (a, w, b) in frontier:
            for (lhs, label, rhs) in steps:
                if lhs == b:
                    t = (a, w + (label,), rhs)
                    if t not in rel:
                        nxt.add(t)
        rel |= nxt
        frontier = nxt
    return frozenset(rel)


def production_dfas(defn: LanguageDefinition) -> dict:
    """Per label, a minimal DFA for the right-hand side minus the words
    made of one lone non-terminal."""
    out = {}
    for p in defn.productions:
        d = regex_to_dfa(p.rhs)
        singles = [(("N", n),) for k, n in single_symbol_words(p.rhs) if k == "N"]
        if singles:
            d = dfa_product(d, finite_language_dfa(singles, d.alphabet),
                            lambda x, y: x and not y)
        out[p.label] = d
    return out


# -- the encoding automata -----------------------------------------------------


@dataclass
class EncodingAutomaton:
    vpda: Vpda
    dfas: dict
    relation: frozenset


def _live(d: Dfa) -> list:
    return [q for q in range(d.n_states) if q != d.dead]


def build_a_opt(defn: LanguageDefinition) -> Vpda:
    """VPDA over ``[``, ``]`` and terminal names reading exactly the
    canonical encodings of the trees; marks are ignored."""
    return _build(defn).vpda


def _build(defn: LanguageDefinition) -> EncodingAutomaton:
    rel = unit_relation(defn)
    dfas = production_dfas(defn)
    by_lhs = defaultdict(list)
    for p in defn.productions:
        by_lhs[p.lhs].append(p.label)
    rel_from = defaultdict(list)
    for (n, w, n2) in sorted(rel):
        rel_from[n].append((w, n2))

    v = Vpda(calls={OPEN}, returns={CLOSE}, initial="s", accepting={"f"})
    v.add_state("f")
    for label, d in dfas.items():
        for q in _live(d):
            v.add_state((label, q))

    def entries(n):
        """(w, label, initial state) for productions reachable from ``n``."""
        for w, n2 in rel_from[n]:
            for l3 in by_lhs[n2]:
                d = dfas[l3]
                if d.initial != d.dead:
                    yield w, l3, d

    # outermost node
    for w, l3, d in entries(defn.start):
        v.add_call("s", OPEN, (l3, d.initial), ("s", "f", w))
        for qf in d.accepting:
            v.add_return((l3, qf), CLOSE, ("s", "f", w), "f")

    for l1, d1 in dfas.items():
        for p, sym, q in d1.transitions():
            kind, name = sym
            if kind == "T":
                v.add_internal((l1, p), name, (l1, q))
                continue
            for w, l3, d in entries(name):
                g = ((l1, p), (l1, q), w)
                v.add_call((l1, p), OPEN, (l3, d.initial), g)
                for qf in d.accepting:
                    v.add_return((l3, qf), CLOSE, g, (l1, q))
    v.internals.update(defn.terminal_names())
    return EncodingAutomaton(v, dfas, rel)


def build_a_opt_prime(defn: LanguageDefinition) -> Vpda:
    """``build_a_opt`` plus a ``[``/``]`` self-loop pair on a fresh stack
    symbol at every state, so optional pairs can be inserted anywhere."""
    return _pad(build_a_opt(defn))


def _pad(a: Vpda) -> Vpda:
    v = Vpda(a.calls, a.internals, a.returns, a.initial, a.accepting)
    v.states |= a.states
    for kind, q, sym, g, q2 in a.transitions():
        if kind == "call":
            v.add_call(q, sym, q2, g)
        elif kind == "internal":
            v.add_internal(q, sym, q2)
        else:
            v.add_return(q, sym, g, q2)
    for q in a.states:
        v.add_call(q, OPEN, q, GAMMA)
        v.add_return(q, CLOSE, GAMMA, q)
    return v


# -- runs to trees ---------------------------------------------------------------


def tree_of_steps(steps, lexeme=lambda t: t) -> Node:
    """Rebuild a tree from run steps ``(kind, symbol, stack symbol)``.

    A push of ``(p, q, labels)`` entering production ``l`` opens one node
    per label in ``labels`` and then a node ``l``; the matching pop closes
    them all again.
    """
    stack = [[]]
    opened = []
    for kind, sym, g in steps:
        if kind == "call":
            _, _, w = g[:3]
            label = g[3]
            for x in w + (label,):
                stack.append([])
                opened.append(x)
        elif kind == "internal":
            stack[-1].append(Leaf(sym, lexeme(sym)))
        else:
            _, _, w = g[:3]
            for _ in range(len(w) + 1):
                children = stack.pop()
                label = opened.pop()
                stack[-1].append(Node(label, tuple(children)))
    (root,) = stack[0]
    return root


def _steps_of_run(a: Vpda, word, confs, component: int, skip_gamma: bool):
    """Steps of one component of a product run, with the label entered by
    each push attached to its stack symbol."""
    steps = []
    for i, sym in enumerate(word):
        (q, _), stack = confs[i][0], confs[i][1]
        (q2, _), stack2 = confs[i + 1][0], confs[i + 1][1]
        st = q[component]
        st2 = q2[component]
        if sym == OPEN:
            g = stack2[-1][component]
            if g == GAMMA:
                if skip_gamma:
                    continue
            steps.append(("call", sym, g + (st2[0],)))
        elif sym == CLOSE:
            g = stack[-1][component]
            if g == GAMMA and skip_gamma:
                continue
            steps.append(("return", sym, g))
        else:
            steps.append(("internal", sym, None))
    return steps


def _flagged(p: Vpda) -> Vpda:
    """Copy of a product automaton whose states remember whether the run
    has already shown a difference between the two components."""
    def off_state(x):
        return x != p.initial and x[0] != x[1]

    out = Vpda(p.calls, p.internals, p.returns, (p.initial, False))
    todo = [(p.initial, False)]
    seen = set(todo)
    while todo:
        x, b = todo.pop()
        succ = []
        for c, y, g in p.call_out.get(x, ()):
            nb = b or off_state(y) or g[0] != g[1]
            out.add_call((x, b), c, (y, nb), g)
            succ.append((y, nb))
        for a, y in p.int_out.get(x, ()):
            nb = b or off_state(y)
            out.add_internal((x, b), a, (y, nb))
            succ.append((y, nb))
        for r, g, y in p.ret_out.get(x, ()):
            nb = b or off_state(y)
            out.add_return((x, b), r, g, (y, nb))
            succ.append((y, nb))
        for s in succ:
            if s not in seen:
                seen.add(s)
                todo.append(s)
    out.accepting = {(f, True) for f in p.accepting}
    return out


# -- verdicts --------------------------------------------------------------------


@dataclass
class StaticVerdict:
    outcome: str                       # resolvable | unresolvable | unknown
    subclass: str
    message: str = ""
    contained: Optional[Node] = None   # tree whose words are all shared
    container: Optional[Node] = None   # tree that shares all of them
    encodings: tuple = ()              # rendered encodings of the pair

    @property
    def witness(self) -> Optional[tuple]:
        if self.contained is None:
            return None
        return (self.contained, self.container)


def find_subsumption(defn: LanguageDefinition):
    """Pair ``(contained, container)`` of distinct trees with the words of
    the first among the words of the second, or ``None``."""
    a = _build(defn).vpda
    p = product(a, _pad(a)).trim()
    off = any(x != p.initial and x[0] != x[1] for x in p.states)
    off = off or any(g[0] != g[1] for ts in p.call_out.values() for (_, _, g) in ts)
    if not off:
        return None
    flagged = _flagged(p).trim()
    word = flagged.shortest_word()
    confs = flagged.accepting_run(word)
    lex = _lexeme_fn(defn)
    container = tree_of_steps(_steps_of_run(flagged, word, confs, 0, False), lex)
    contained = tree_of_steps(_steps_of_run(flagged, word, confs, 1, True), lex)
    return contained, container


def _lexeme_fn(defn: LanguageDefinition):
    cache = {}

    def lexeme(t):
        if t not in cache:
            cache[t] = sample_lexeme(defn, t)
        return cache[t]
    return lexeme


def check_static(defn: LanguageDefinition, upgrade: bool = True) -> StaticVerdict:
    sub = classify(defn)
    if sub == UNSUPPORTED:
        return StaticVerdict(
            UNKNOWN, sub,
            "the grouping parentheses are also used as ordinary terminals; "
            "use dynamic analysis instead")
    cycles = check_unit_cycles(defn)
    if cycles:
        return StaticVerdict(UNRESOLVABLE, sub, str(UnitCycle(cycles)))
    base = defn.strip_marks() if sub == MARKS_ONLY else defn
    found = find_subsumption(base)
    if found is None:
        return StaticVerdict(RESOLVABLE, sub, "statically resolvable")
    contained, container = found
    encs = (render(encode(base, contained)), render(encode(base, container)))
    if sub == NO_MARKS_NO_PARENS:
        return StaticVerdict(UNRESOLVABLE, sub,
                             "unresolvable: every word of the first tree also parses "
                             "as the second", contained, container, encs)
    msg = "possibly unresolvable once marks are ignored"
    if upgrade and _dynamically_unresolvable(defn, contained):
        return StaticVerdict(UNRESOLVABLE, sub,
                             "unresolvable: the first tree has no unambiguous word",
                             contained, container, encs)
    return StaticVerdict(UNKNOWN, sub, msg, contained, container, encs)


def _dynamically_unresolvable(defn: LanguageDefinition, t: Node) -> bool:
    tokens = tuple(tree_yield(t))
    try:
        trees = parse_word(defn, tokens).trees
    except NoParse:
        return False
    word, _, _ = find_witness(defn, t, trees)
    return word is None


__all__ = [
    "MARKS_ONLY",
    "NO_MARKS_NO_PARENS",
    "UNSUPPORTED",
    "StaticVerdict",
    "UnitCycle",
    "build_a_opt",
    "build_a_opt_prime",
    "check_static",
    "classify",
    "find_subsumption",
    "production_dfas",
    "tree_of_steps",
    "unit_relation",
]
