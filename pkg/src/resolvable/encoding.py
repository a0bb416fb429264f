"""Canonical linear encoding of the words of a parse tree.

Every word whose parse contains a tree ``t`` is the yield of ``t`` with some
grouping-paren pairs inserted around node segments.  The encoding is that
yield with one bracket pair per node: an *optional* pair ``[ ]`` stands for
zero or more paren pairs, a *required* pair ``( )`` for exactly one.  A node
gets a required pair when its label is in the mark of the slot it fills,
since it can then only appear there under a grouping node.

Two rewrites bring an encoding into canonical form, so that two trees have
the same word set iff their canonical encodings are equal::

    ( [ x ] )  ->  [ ( x ) ]        [ [ x ] ]  ->  [ x ]
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .forest_parser import Leaf, Node
from .grammar_def import LanguageDefinition, NonTerm, Term, alignments
from .vpda import Vpda


class NotInTreeLanguage(ValueError):
    pass


class Bracket(enum.Enum):
    REQ_OPEN = "("
    REQ_CLOSE = ")"
    OPT_OPEN = "["
    OPT_CLOSE = "]"

    def __repr__(self) -> str:
        return self.value


OPEN = {Bracket.REQ_OPEN: Bracket.REQ_CLOSE, Bracket.OPT_OPEN: Bracket.OPT_CLOSE}
REQ, OPT = "req", "opt"


@dataclass(frozen=True)
class Group:
    """Nested view of a bracket pair; ``body`` holds leaves and groups."""

    kind: str
    body: tuple


# -- slot marks ----------------------------------------------------------------


def _fits(defn: LanguageDefinition):
    def fits(leaf, child) -> bool:
        if isinstance(leaf, Term):
            return isinstance(child, Leaf) and child.terminal == leaf.name
        if isinstance(child, Node):
            try:
                return defn.production(child.label).lhs == leaf.name
            except KeyError:
                return False
        return False
    return fits


def slot_marks(defn: LanguageDefinition, node: Node) -> tuple:
    """For each child of ``node``, the labels forbidden at its slot.

    When the children align with the production in several ways, a label
    counts as forbidden only if every alignment forbids it.
    """
    try:
        prod = defn.production(node.label)
    except KeyError:
        raise NotInTreeLanguage(f"unknown label {node.label!r}") from None
    fits = _fits(defn)
    found = None
    for end, used in alignments(prod.rhs, node.children, fits):
        if end != len(node.children):
            continue
        marks = tuple(u.mark if isinstance(u, NonTerm) else frozenset() for u in used)
        found = marks if found is None else tuple(a & b for a, b in zip(found, marks))
    if found is None:
        raise NotInTreeLanguage(f"children of {node.label!r} do not match its production")
    return found


def child_slots(defn: LanguageDefinition, node: Node) -> tuple:
    """Slot name of each child: the declared name, or ``#k`` for the k-th
    non-terminal occurrence when unnamed; ``None`` for tokens."""
    prod = defn.production(node.label)
    used = None
    for end, leaves in alignments(prod.rhs, node.children, _fits(defn)):
        if end == len(node.children):
            used = leaves
            break
    if used is None:
        raise NotInTreeLanguage(f"children of {node.label!r} do not match its production")
    order = {}
    for leaf in _nonterm_leaves(prod.rhs):
        order.setdefault(id(leaf), len(order) + 1)
    out = []
    for leaf in used:
        if isinstance(leaf, NonTerm):
            out.append(leaf.slot or f"#{order[id(leaf)]}")
        else:
            out.append(None)
    return tuple(out)


def _nonterm_leaves(r):
    from .grammar_def import rhs_leaves
    return [x for x in rhs_leaves(r) if isinstance(x, NonTerm)]


def check_tree(defn: LanguageDefinition, t, nt: str = None) -> None:
    """Raise ``NotInTreeLanguage`` unless ``t`` derives from ``nt``."""
    if isinstance(t, Leaf):
        raise NotInTreeLanguage("a tree must have a node at the root")
    nt = nt or defn.start
    try:
        lhs = defn.production(t.label).lhs
    except KeyError:
        raise NotInTreeLanguage(f"unknown label {t.label!r}") from None
    if lhs != nt:
        raise NotInTreeLanguage(f"{t.label!r} does not derive {nt}")
    slot_marks(defn, t)
    for c in t.children:
        if isinstance(c, Node):
            check_tree(defn, c, defn.production(c.label).lhs)


# -- encoding ------------------------------------------------------------------


def _encode_node(defn, node: Node, forbidden: bool) -> Group:
    marks = slot_marks(defn, node)
    body = []
    for child, mark in zip(node.children, marks):
        if isinstance(child, Leaf):
            body.append(child)
        else:
            body.append(_encode_node(defn, child, child.label in mark))
    inner = Group(OPT, tuple(body))
    return Group(REQ, (inner,)) if forbidden else inner


def canonical_group(g: Group) -> Group:
    """Apply both rewrites innermost first until nothing changes."""
    body = tuple(canonical_group(x) if isinstance(x, Group) else x for x in g.body)
    g = Group(g.kind, body)
    while len(g.body) == 1 and isinstance(g.body[0], Group):
        inner = g.body[0]
        if g.kind == REQ and inner.kind == OPT:
            g = Group(OPT, (canonical_group(Group(REQ, inner.body)),))
        elif g.kind == OPT and inner.kind == OPT:
            g = inner
        else:
            break
    return g


def flatten(g: Group) -> tuple:
    out = []

    def go(x):
        if isinstance(x, Group):
            out.append(Bracket.OPT_OPEN if x.kind == OPT else Bracket.REQ_OPEN)
            for y in x.body:
                go(y)
            out.append(Bracket.OPT_CLOSE if x.kind == OPT else Bracket.REQ_CLOSE)
        else:
            out.append(x)

    go(g)
    return tuple(out)


def nest(symbols: Sequence) -> tuple:
    """Inverse of ``flatten``; returns the top-level sequence."""
    stack = [[]]
    kinds = []
    for s in symbols:
        if s in OPEN:
            stack.append([])
            kinds.append(s)
        elif isinstance(s, Bracket):
            if not kinds or OPEN[kinds[-1]] != s:
                raise ValueError("brackets are not well nested")
            body = stack.pop()
            k = kinds.pop()
            stack[-1].append(Group(OPT if k == Bracket.OPT_OPEN else REQ, tuple(body)))
        else:
            stack[-1].append(s)
    if kinds:
        raise ValueError("brackets are not well nested")
    return tuple(stack[0])


def canonicalize(symbols: Sequence) -> tuple:
    out = []
    for x in nest(symbols):
        out.extend(flatten(canonical_group(x)) if isinstance(x, Group) else (x,))
    return tuple(out)


def encode(defn: LanguageDefinition, t: Node) -> tuple:
    """Canonical linear encoding of ``words(t)`` as a flat symbol tuple."""
    check_tree(defn, t)
    return flatten(canonical_group(_encode_node(defn, t, False)))


def render(symbols: Sequence) -> str:
    """``[[([1]+[2])]*[3]]`` style; leaves print as their lexeme."""
    return "".join(s.value if isinstance(s, Bracket) else s.lexeme for s in symbols)


def denotation(symbols: Sequence, max_pairs: int = 2):
    """Words of an encoding with at most ``max_pairs`` pairs per optional
    bracket.  Brute force, for tests and debugging."""
    def go(items):
        if not items:
            yield ()
            return
        head, rest = items[0], items[1:]
        for h in expand(head):
            for r in go(rest):
                yield h + r

    def expand(x):
        if not isinstance(x, Group):
            yield (x,)
            return
        counts = (1,) if x.kind == REQ else range(max_pairs + 1)
        for body in go(x.body):
            for n in counts:
                yield ("(",) * n + body + (")",) * n

    for w in go(nest(symbols)):
        yield w


# -- automaton -----------------------------------------------------------------


def word_symbol(defn: LanguageDefinition, leaf: Leaf):
    """Alphabet symbol of a token: the grouping spellings are the call and
    return symbols, everything else is an internal ``Leaf``."""
    open_, close = defn.grouping
    if leaf.lexeme == open_ and leaf.terminal == open_:
        return open_
    if leaf.lexeme == close and leaf.terminal == close:
        return close
    return Leaf(leaf.terminal, leaf.lexeme)


def symbol_token(sym) -> Leaf:
    return Leaf(sym, sym) if isinstance(sym, str) else sym


def automaton_of_encoding(defn: LanguageDefinition, symbols: Sequence) -> Vpda:
    """Chain automaton for an encoding.

    An optional pair becomes a self-loop pushing a fresh stack symbol at its
    opening position and one popping it at its closing position.  A required
    pair is a mandatory push/pop of the shared symbol ``"γ"``.  Literal
    grammar parens are leaves of the encoding but call/return symbols of the
    automaton; each matched pair gets its own mandatory stack symbol.
    """
    open_, close = defn.grouping
    v = Vpda(calls={open_}, returns={close})
    state = 0
    v.add_state(state)
    v.initial = state
    opts = []
    lits = []
    fresh = 0
    for s in symbols:
        if s == Bracket.OPT_OPEN:
            fresh += 1
            v.add_call(state, open_, state, fresh)
            opts.append(fresh)
        elif s == Bracket.OPT_CLOSE:
            v.add_return(state, close, opts.pop(), state)
        elif s in (Bracket.REQ_OPEN, Bracket.REQ_CLOSE):
            if s == Bracket.REQ_OPEN:
                v.add_call(state, open_, state + 1, "γ")
            else:
                v.add_return(state, close, "γ", state + 1)
            state += 1
        else:
            sym = word_symbol(defn, s)
            if sym == open_:
                fresh += 1
                lits.append(("lit", fresh))
                v.add_call(state, open_, state + 1, lits[-1])
            elif sym == close:
                if not lits:
                    raise NotInTreeLanguage("unbalanced literal parentheses")
                v.add_return(state, close, lits.pop(), state + 1)
            else:
                v.add_internal(state, sym, state + 1)
            state += 1
    v.accepting = {state}
    return v


def words_automaton(defn: LanguageDefinition, t: Node) -> Vpda:
    """VPDA accepting exactly the words whose parse contains ``t``."""
    return automaton_of_encoding(defn, encode(defn, t))
