"""Grammars generated from a language definition.

* ``gen_abstract``      the word grammar with marks ignored
* ``gen_concrete``      one copy of each non-terminal per reachable mark, plus
                        grouping productions ``N_m -> '(' N ')'``
* ``gen_tree_grammars`` the matching unranked tree grammars
* ``regex_to_dfa``      Thompson construction, subset construction, Moore
                        minimisation

Regular right-hand sides are lowered to plain CFG rules with helper
non-terminals named ``<label>_<n>``, where ``n`` counts alternation and star
nodes of the production's regex in preorder, starting at 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .grammar_def import (
    GROUP_LABEL,
    Alt,
    Eps,
    LanguageDefinition,
    NonTerm,
    Rhs,
    Seq,
    Star,
    Term,
    alignments,
    map_leaves,
    render_rhs,
    rhs_leaves,
)


def marked_name(nt: str, mark: frozenset) -> str:
    if not mark:
        return nt
    return f"{nt}{{{','.join(sorted(mark))}}}"


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple
    label: Optional[str] = None  # production label, GROUP_LABEL, or None for helpers

    def __str__(self) -> str:
        body = " ".join(self.rhs) if self.rhs else "ε"
        return f"{self.lhs} -> {body}"


@dataclass(frozen=True)
class Cfg:
    nonterminals: tuple
    terminals: tuple
    rules: tuple
    start: str
    # concrete grammars remember which (non-terminal, mark) each name stands for
    origin: tuple = ()

    @property
    def productions(self) -> set:
        return {(r.lhs, r.rhs) for r in self.rules}

    def rules_for(self, nt: str) -> list:
        return [r for r in self.rules if r.lhs == nt]

    def dump(self) -> str:
        lines = []
        for nt in self.nonterminals:
            alts = [" ".join(r.rhs) if r.rhs else "ε" for r in self.rules_for(nt)]
            lines.append(f"{nt} -> " + " | ".join(alts))
        return "\n".join(lines)


def _lower(label: str, r: Rhs, name_of: Callable[[NonTerm], str]):
    """Lower ``r`` into a symbol sequence plus helper rules."""
    counter = [0]
    helpers: list = []

    def go(node) -> tuple:
        if isinstance(node, Term):
            return (node.name,)
        if isinstance(node, NonTerm):
            return (name_of(node),)
        if isinstance(node, Eps):
            return ()
        if isinstance(node, Seq):
            out: tuple = ()
            for it in node.items:
                out += go(it)
            return out
        counter[0] += 1
        helper = f"{label}_{counter[0]}"
        if isinstance(node, Alt):
            slot = len(helpers)
            helpers.append(None)
            bodies = [go(o) for o in node.options]
            helpers[slot] = [Rule(helper, b) for b in bodies]
        else:
            slot = len(helpers)
            helpers.append(None)
            body = go(node.body)
            helpers[slot] = [Rule(helper, ()), Rule(helper, body + (helper,))]
        return (helper,)

    main = go(r)
    return main, [rule for group in helpers for rule in group]


def _terminals_of(rules, nonterminals) -> tuple:
    nts = set(nonterminals)
    seen: dict = {}
    for r in rules:
        for s in r.rhs:
            if s not in nts:
                seen.setdefault(s)
    return tuple(seen)


def gen_abstract(defn: LanguageDefinition) -> Cfg:
    rules: list = []
    nts: dict = dict.fromkeys(defn.nonterminals)
    for p in defn.productions:
        main, helpers = _lower(p.label, p.rhs, lambda leaf: leaf.name)
        rules.append(Rule(p.lhs, main, p.label))
        rules.extend(helpers)
        for h in helpers:
            nts.setdefault(h.lhs)
    return Cfg(tuple(nts), _terminals_of(rules, nts), tuple(rules), defn.start)


def _reachable_copies(defn: LanguageDefinition) -> list:
    """(non-terminal, mark) pairs reachable from the unmarked start symbol."""
    todo = [(defn.start, frozenset())]
    seen: dict = {}
    while todo:
        nt, mark = todo.pop(0)
        if (nt, mark) in seen:
            continue
        seen[(nt, mark)] = None
        todo.append((nt, frozenset()))
        for p in defn.productions_of(nt):
            if p.label in mark:
                continue
            for leaf in rhs_leaves(p.rhs):
                if isinstance(leaf, NonTerm):
                    todo.append((leaf.name, frozenset(leaf.mark)))
    return list(seen)


def gen_concrete(defn: LanguageDefinition) -> Cfg:
    open_, close = defn.grouping
    copies = _reachable_copies(defn)
    rules: list = []
    nts: dict = {}
    helper_rules: dict = {}
    name = lambda leaf: marked_name(leaf.name, frozenset(leaf.mark))  # noqa: E731
    for nt, mark in copies:
        lhs = marked_name(nt, mark)
        nts.setdefault(lhs, (nt, mark))
        for p in defn.productions_of(nt):
            if p.label in mark:
                continue
            main, helpers = _lower(p.label, p.rhs, name)
            rules.append(Rule(lhs, main, p.label))
            if p.label not in helper_rules:
                helper_rules[p.label] = helpers
        rules.append(Rule(lhs, (open_, nt, close), GROUP_LABEL))
    for helpers in helper_rules.values():
        for h in helpers:
            nts.setdefault(h.lhs, None)
        rules.extend(helpers)
    origin = tuple((k, v) for k, v in nts.items())
    return Cfg(tuple(nts), _terminals_of(rules, nts), tuple(rules),
               defn.start, origin)


# -- tree grammars -------------------------------------------------------------


@dataclass(frozen=True)
class TreeProduction:
    lhs: str
    node: str
    rhs: Rhs  # horizontal language; NonTerm names are tree-grammar non-terminals

    def __str__(self) -> str:
        return f"{self.lhs} -> {self.node}({render_rhs(self.rhs)})"


@dataclass(frozen=True)
class TreeGrammar:
    nonterminals: tuple
    leaf_terminals: tuple
    node_terminals: tuple
    productions: tuple
    start: str

    def accepts(self, tree, nt: Optional[str] = None) -> bool:
        """Membership of a tree (``Node``/``Leaf`` from ``forest_parser``)."""
        memo: dict = {}

        def derives(t, n) -> bool:
            key = (id(t), n)
            if key not in memo:
                memo[key] = False
                memo[key] = any(
                    getattr(t, "label", None) == p.node and _children_fit(p.rhs, t)
                    for p in self.productions
                    if p.lhs == n
                )
            return memo[key]

        def fits(leaf, item) -> bool:
            if isinstance(leaf, Term):
                return not hasattr(item, "label") and item.terminal == leaf.name
            return hasattr(item, "label") and derives(item, leaf.name)

        def _children_fit(rhs, t) -> bool:
            return any(end == len(t.children)
                       for end, _ in alignments(rhs, t.children, fits))

        if not hasattr(tree, "label"):
            return False
        return derives(tree, nt or self.start)


def gen_tree_grammars(defn: LanguageDefinition):
    """``(T_D, T'_D)``: parse trees of the abstract and concrete grammars."""
    unmark = lambda leaf: (  # noqa: E731
        NonTerm(leaf.name, frozenset(), leaf.slot) if isinstance(leaf, NonTerm) else leaf
    )
    plain = tuple(TreeProduction(p.lhs, p.label, map_leaves(p.rhs, unmark))
                  for p in defn.productions)
    leafs = tuple(defn.terminal_names())
    labels = tuple(defn.labels)
    abstract = TreeGrammar(tuple(defn.nonterminals), leafs, labels, plain, defn.start)

    open_, close = defn.grouping
    rename = lambda leaf: (  # noqa: E731
        NonTerm(marked_name(leaf.name, frozenset(leaf.mark)), frozenset(), leaf.slot)
        if isinstance(leaf, NonTerm) else leaf
    )
    prods: list = []
    names: list = []
    for nt, mark in _reachable_copies(defn):
        lhs = marked_name(nt, mark)
        names.append(lhs)
        for p in defn.productions_of(nt):
            if p.label not in mark:
                prods.append(TreeProduction(lhs, p.label, map_leaves(p.rhs, rename)))
        prods.append(TreeProduction(
            lhs, GROUP_LABEL, Seq((Term(open_), NonTerm(nt), Term(close)))))
    leafs2 = tuple(dict.fromkeys(leafs + (open_, close)))
    concrete = TreeGrammar(tuple(names), leafs2, labels + (GROUP_LABEL,),
                           tuple(prods), defn.start)
    return abstract, concrete


# -- regex -> DFA ----------------------------------------------------------------


def leaf_symbol(leaf) -> tuple:
    return ("T", leaf.name) if isinstance(leaf, Term) else ("N", leaf.name)


@dataclass(frozen=True)
class Dfa:
    """Complete DFA over ``alphabet``; states are ``0..n_states-1``, numbered
    breadth-first from the initial state so equal languages give equal
    objects.  ``dead`` is the rejecting sink, if there is one."""

    n_states: int
    alphabet: tuple
    delta: tuple  # delta[state][symbol index]
    initial: int
    accepting: frozenset
    dead: Optional[int]

    def step(self, state: int, sym) -> int:
        return self.delta[state][self.alphabet.index(sym)]

    def accepts(self, word) -> bool:
        q = self.initial
        index = {s: i for i, s in enumerate(self.alphabet)}
        for sym in word:
            if sym not in index:
                return False
            q = self.delta[q][index[sym]]
        return q in self.accepting

    def live_states(self) -> list:
        return [q for q in range(self.n_states) if q != self.dead]

    def transitions(self):
        """Live transitions as ``(state, symbol, target)``."""
        for q in self.live_states():
            for i, sym in enumerate(self.alphabet):
                t = self.delta[q][i]
                if t != self.dead:
                    yield q, sym, t


def _thompson(r: Rhs, symbol_of):
    """NFA as (n_states, start, final, edges) with edges (src, sym|None, dst)."""
    edges: list = []
    count = [0]

    def new() -> int:
        count[0] += 1
        return count[0] - 1

    def build(node):
        s, f = new(), new()
        if isinstance(node, (Term, NonTerm)):
            edges.append((s, symbol_of(node), f))
        elif isinstance(node, Eps):
            edges.append((s, None, f))
        elif isinstance(node, Seq):
            cur = s
            for it in node.items:
                a, b = build(it)
                edges.append((cur, None, a))
                cur = b
            edges.append((cur, None, f))
        elif isinstance(node, Alt):
            for o in node.options:
                a, b = build(o)
                edges.append((s, None, a))
                edges.append((b, None, f))
        else:
            a, b = build(node.body)
            edges.extend([(s, None, a), (b, None, a), (b, None, f), (s, None, f)])
        return s, f

    start, final = build(r)
    return count[0], start, final, edges


def _canonical(alphabet, delta_fn, initial, accepting_fn) -> Dfa:
    """Number reachable states breadth-first and build a complete Dfa."""
    order = {initial: 0}
    queue = [initial]
    rows = []
    i = 0
    while i < len(queue):
        q = queue[i]
        i += 1
        row = []
        for sym in alphabet:
            t = delta_fn(q, sym)
            if t not in order:
                order[t] = len(queue)
                queue.append(t)
            row.append(order[t])
        rows.append(tuple(row))
    acc = frozenset(order[q] for q in queue if accepting_fn(q))
    return Dfa(len(queue), tuple(alphabet), tuple(rows), 0, acc, None)


def _find_dead(d: Dfa) -> Optional[int]:
    for q in range(d.n_states):
        if q not in d.accepting and all(t == q for t in d.delta[q]):
            return q
    return None


def minimize(d: Dfa) -> Dfa:
    """Moore partition refinement followed by canonical renumbering."""
    block = [1 if q in d.accepting else 0 for q in range(d.n_states)]
    while True:
        sigs = {}
        new_block = []
        for q in range(d.n_states):
            sig = (block[q],) + tuple(block[t] for t in d.delta[q])
            new_block.append(sigs.setdefault(sig, len(sigs)))
        if len(sigs) == len(set(block)):
            break
        block = new_block
    reps = {}
    for q in range(d.n_states):
        reps.setdefault(block[q], q)
    out = _canonical(
        d.alphabet,
        lambda b, sym: block[d.delta[reps[b]][d.alphabet.index(sym)]],
        block[d.initial],
        lambda b: reps[b] in d.accepting,
    )
    return Dfa(out.n_states, out.alphabet, out.delta, out.initial,
               out.accepting, _find_dead(out))


def regex_to_dfa(r: Rhs, alphabet=None, symbol_of=leaf_symbol) -> Dfa:
    """Minimal complete DFA for L(r).

    Symbols default to ``("T", name)`` for terminals and ``("N", name)`` for
    non-terminals; ``alphabet`` defaults to the symbols occurring in ``r``.
    """
    if alphabet is None:
        alphabet = list(dict.fromkeys(symbol_of(x) for x in rhs_leaves(r)))
    alphabet = tuple(alphabet)
    n, start, final, edges = _thompson(r, symbol_of)
    eps: dict = {}
    moves: dict = {}
    for a, sym, b in edges:
        if sym is None:
            eps.setdefault(a, []).append(b)
        else:
            moves.setdefault((a, sym), []).append(b)

    def closure(states) -> frozenset:
        out = set(states)
        stack = list(states)
        while stack:
            q = stack.pop()
            for t in eps.get(q, ()):
                if t not in out:
                    out.add(t)
                    stack.append(t)
        return frozenset(out)

    def delta(S, sym):
        return closure([t for q in S for t in moves.get((q, sym), ())])

    raw = _canonical(alphabet, delta, closure([start]), lambda S: final in S)
    return minimize(raw)


def dfa_product(a: Dfa, b: Dfa, accept) -> Dfa:
    """Product of two DFAs over the same alphabet, minimised;
    ``accept(in_a, in_b)`` chooses the boolean combination."""
    assert a.alphabet == b.alphabet
    raw = _canonical(
        a.alphabet,
        lambda q, sym: (a.step(q[0], sym), b.step(q[1], sym)),
        (a.initial, b.initial),
        lambda q: accept(q[0] in a.accepting, q[1] in b.accepting),
    )
    return minimize(raw)


def finite_language_dfa(words, alphabet) -> Dfa:
    """Minimal DFA accepting exactly the given finite set of words."""
    words = {tuple(w) for w in words}
    prefixes = {w[:i] for w in words for i in range(len(w) + 1)}
    sink = ("<sink>",)

    def delta(q, sym):
        if q == sink:
            return sink
        nq = q + (sym,)
        return nq if nq in prefixes else sink

    return minimize(_canonical(tuple(alphabet), delta, (), lambda q: q in words))
