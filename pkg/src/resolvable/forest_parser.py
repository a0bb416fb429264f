"""Tokenizer, Earley parser and parse trees.

``parse_word`` runs an Earley recognizer over the concrete grammar (the one
with grouping productions and mark-restricted copies), then unpacks the
chart into trees.  Grouping nodes are dropped during unpacking, so the
result is directly the set of semantic trees; identical trees reached
through different parenthesizations collapse into one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .grammar_def import GROUP_LABEL, LanguageDefinition, check_unit_cycles
from .grammar_gen import Cfg, gen_concrete

DEFAULT_TREE_LIMIT = 64


class ParseError(Exception):
    pass


class LexError(ParseError):
    def __init__(self, offset: int, text: str = ""):
        self.offset = offset
        ch = text[offset:offset + 1]
        super().__init__(f"no token matches {ch!r} at offset {offset}")


class NoParse(ParseError):
    def __init__(self, position: int, token: Optional["Token"] = None):
        self.position = position
        self.token = token
        if token is None:
            msg = "unexpected end of input"
        else:
            msg = f"unexpected {token.lexeme!r} at offset {token.start}"
        super().__init__(msg)


class InfiniteAmbiguity(ParseError):
    def __init__(self, nonterminals):
        self.nonterminals = sorted(nonterminals)
        super().__init__(
            "infinitely ambiguous (unit cycle through "
            + ", ".join(self.nonterminals) + ")")


class TooManyTrees(ParseError):
    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        super().__init__(f"more than {limit} parse trees (at least {count})")


# -- trees ---------------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    terminal: str
    lexeme: str
    span: Optional[tuple] = field(default=None, compare=False, hash=False)

    @property
    def start(self):
        return self.span[0] if self.span else None

    @property
    def end(self):
        return self.span[1] if self.span else None


Token = Leaf  # a token is a leaf that has not been placed in a tree yet


@dataclass(frozen=True)
class Node:
    label: str
    children: tuple = ()

    @property
    def span(self) -> Optional[tuple]:
        leaves = list(tree_yield(self))
        if not leaves or leaves[0].span is None or leaves[-1].span is None:
            return None
        return (leaves[0].span[0], leaves[-1].span[1])

    def __str__(self) -> str:
        return to_functional(self)


def tree_yield(t) -> Iterable[Leaf]:
    if isinstance(t, Leaf):
        yield t
        return
    for c in t.children:
        yield from tree_yield(c)


def yield_word(t) -> list:
    return list(tree_yield(t))


def semantic(t):
    """Remove grouping nodes, keeping the grouped subtree."""
    if isinstance(t, Leaf):
        return t
    if t.label == GROUP_LABEL:
        return semantic(t.children[1])
    return Node(t.label, tuple(semantic(c) for c in t.children))


def tree_size(t) -> int:
    if isinstance(t, Leaf):
        return 0
    return 1 + sum(tree_size(c) for c in t.children)


def tree_depth(t) -> int:
    if isinstance(t, Leaf):
        return 0
    return 1 + max((tree_depth(c) for c in t.children), default=0)


def tree_key(t) -> tuple:
    """Preorder (label, arity) sequence; total order used for output."""
    out = []

    def go(x):
        if isinstance(x, Leaf):
            out.append(("'" + x.lexeme, 0))
        else:
            out.append((x.label, len(x.children)))
            for c in x.children:
                go(c)

    go(t)
    return tuple(out)


def sort_trees(trees) -> list:
    return sorted(trees, key=tree_key)


def _quote(s: str) -> str:
    return "'" + s.replace("\\", "\\\\").replace("'", "\\'") + "'"


def to_functional(t) -> str:
    """``m(a(n('1') '+' n('2')) '*' n('3'))``"""
    if isinstance(t, Leaf):
        return _quote(t.lexeme)
    return f"{t.label}(" + " ".join(to_functional(c) for c in t.children) + ")"


def to_nested(t):
    """Nodes become ``[label, [children]]``, leaves ``[terminal, lexeme]``."""
    if isinstance(t, Leaf):
        return [t.terminal, t.lexeme]
    return [t.label, [to_nested(c) for c in t.children]]


def from_nested(data):
    head, rest = data
    if isinstance(rest, str):
        return Leaf(head, rest)
    return Node(head, tuple(from_nested(c) for c in rest))


def words_text(word: Sequence[Leaf]) -> str:
    return " ".join(tok.lexeme for tok in word)


# -- tokenizer ---------------------------------------------------------------

_POSIX = {
    "lower": "a-z",
    "upper": "A-Z",
    "digit": "0-9",
    "alpha": "A-Za-z",
    "alnum": "A-Za-z0-9",
    "word": "A-Za-z0-9_",
    "space": r" \t\n\r\f\v",
    "xdigit": "0-9A-Fa-f",
    "punct": r"!-/:-@\[-`{-~",
}


def posix_to_python(pattern: str) -> str:
    """Translate POSIX bracket classes such as ``[[:lower:]]``."""
    def sub(m):
        name = m.group(1)
        if name not in _POSIX:
            raise ValueError(f"unknown character class [:{name}:]")
        return _POSIX[name]

    return re.sub(r"\[:([a-z]+):\]", sub, pattern)


@lru_cache(maxsize=None)
def _lexer_tables(defn: LanguageDefinition):
    literals = sorted(defn.literals(), key=lambda s: (-len(s), s))
    classes = [(t.name, re.compile(posix_to_python(t.pattern)))
               for t in sorted(defn.tokens, key=lambda t: t.name)]
    return literals, classes


def tokenize(defn: LanguageDefinition, text: str) -> list:
    """Maximal munch; on equal length a literal beats a token class."""
    literals, classes = _lexer_tables(defn)
    out = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            return out
        best_len, best_term = 0, None
        for lit in literals:
            if text.startswith(lit, pos):
                best_len, best_term = len(lit), lit
                break  # sorted longest first
        for name, rx in classes:
            m = rx.match(text, pos)
            if m and m.end() - pos > best_len:
                best_len, best_term = m.end() - pos, name
        if best_term is None or best_len == 0:
            raise LexError(pos, text)
        out.append(Leaf(best_term, text[pos:pos + best_len], (pos, pos + best_len)))
        pos += best_len


def sample_lexeme(defn: LanguageDefinition, terminal: str) -> str:
    """A short spelling for ``terminal``: the literal itself, or a small
    string matched by the token class and not claimed by a literal."""
    cls = defn.token_class(terminal)
    if cls is None:
        return terminal
    rx = re.compile(posix_to_python(cls.pattern))
    literals = set(defn.literals())
    candidates = ["1", "x", "a", "f", "X", "A", "Foo", "0", "42", "_", "z", "y", "b"]
    candidates += [c + d for c in "xyzabcXYZABC" for d in "0123456789xyz"]
    for c in candidates:
        if rx.fullmatch(c) and c not in literals:
            return c
    raise ValueError(f"cannot find a sample lexeme for token {terminal}")


# -- Earley --------------------------------------------------------------------


class _Grammar:
    def __init__(self, defn: LanguageDefinition):
        self.defn = defn
        self.cfg: Cfg = gen_concrete(defn)
        self.rules = self.cfg.rules
        self.nts = set(self.cfg.nonterminals)
        self.by_lhs: dict = {}
        for i, r in enumerate(self.rules):
            self.by_lhs.setdefault(r.lhs, []).append(i)
        self.nullable = self._nullable()
        self.cycles = check_unit_cycles(defn)
        self.origin = dict(self.cfg.origin)

    def _nullable(self) -> set:
        out: set = set()
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                if r.lhs not in out and all(s in out for s in r.rhs):
                    out.add(r.lhs)
                    changed = True
        return out


@lru_cache(maxsize=64)
def _grammar(defn: LanguageDefinition) -> _Grammar:
    return _Grammar(defn)


def _recognize(g: _Grammar, terms: Sequence[str]):
    n = len(terms)
    rules = g.rules
    chart = [dict() for _ in range(n + 1)]
    waiting = [dict() for _ in range(n + 1)]
    complete = [set() for _ in range(n + 1)]

    def add(i, item):
        if item in chart[i]:
            return
        chart[i][item] = None
        r, d, _ = item
        rhs = rules[r].rhs
        if d < len(rhs):
            waiting[i].setdefault(rhs[d], []).append(item)

    for r in g.by_lhs.get(g.cfg.start, []):
        add(0, (r, 0, 0))
    for i in range(n + 1):
        agenda = list(chart[i])
        k = 0
        while True:
            if k == len(agenda):
                if len(agenda) == len(chart[i]):
                    break
                agenda = list(chart[i])
            item = agenda[k]
            k += 1
            r, d, o = item
            rhs = rules[r].rhs
            if d < len(rhs):
                sym = rhs[d]
                if sym in g.nts:
                    for r2 in g.by_lhs.get(sym, []):
                        add(i, (r2, 0, i))
                    if sym in g.nullable:
                        add(i, (r, d + 1, o))
                elif i < n and terms[i] == sym:
                    add(i + 1, (r, d + 1, o))
            else:
                lhs = rules[r].lhs
                complete[i].add((lhs, o))
                for (r3, d3, o3) in list(waiting[o].get(lhs, [])):
                    add(i, (r3, d3 + 1, o3))
    return chart, complete


class _Unpacker:
    def __init__(self, g: _Grammar, tokens, chart, complete, limit, keep_groups):
        self.g = g
        self.tokens = tokens
        self.chart = chart
        self.complete = complete
        self.limit = limit
        self.cap = max(limit, 1) * 64
        self.keep_groups = keep_groups
        self.memo: dict = {}
        self.seq_memo: dict = {}
        self.active: set = set()

    def derive(self, sym, i, j) -> list:
        key = (sym, i, j)
        if key in self.memo:
            return self.memo[key]
        if key in self.active:
            origin = self.g.origin.get(sym)
            if origin is not None:
                raise InfiniteAmbiguity({origin[0]})
            return []  # a helper looping on the empty word adds nothing new
        self.active.add(key)
        out: dict = {}
        for r in self.g.by_lhs.get(sym, []):
            rule = self.g.rules[r]
            if (r, len(rule.rhs), i) not in self.chart[j]:
                continue
            for parts in self.seqs(r, len(rule.rhs), i, j):
                out[self._build(rule, parts)] = None
                if len(out) > self.cap or (rule.label is not None and len(out) > self.limit):
                    raise TooManyTrees(len(out), self.limit)
        self.active.discard(key)
        self.memo[key] = list(out)
        return self.memo[key]

    def _build(self, rule, parts):
        flat = []
        for p in parts:
            if isinstance(p, tuple):
                flat.extend(p)
            else:
                flat.append(p)
        if rule.label is None:
            return tuple(flat)
        if rule.label == GROUP_LABEL:
            return Node(GROUP_LABEL, tuple(flat)) if self.keep_groups else flat[1]
        return Node(rule.label, tuple(flat))

    def seqs(self, r, k, i, j) -> list:
        key = (r, k, i, j)
        if key in self.seq_memo:
            return self.seq_memo[key]
        if k == 0:
            res = [()] if i == j else []
            self.seq_memo[key] = res
            return res
        sym = self.g.rules[r].rhs[k - 1]
        res: dict = {}
        for p in range(i, j + 1):
            if (r, k - 1, i) not in self.chart[p]:
                continue
            if sym in self.g.nts:
                if (sym, p) not in self.complete[j]:
                    continue
                vals = self.derive(sym, p, j)
            else:
                if p + 1 != j or self.tokens[p].terminal != sym:
                    continue
                vals = [self.tokens[p]]
            if not vals:
                continue
            for prefix in self.seqs(r, k - 1, i, p):
                for v in vals:
                    res[prefix + (v,)] = None
                    if len(res) > self.cap:
                        raise TooManyTrees(len(res), self.limit)
        self.seq_memo[key] = list(res)
        return self.seq_memo[key]


@dataclass(frozen=True)
class ParseResult:
    word: tuple
    trees: tuple

    @property
    def ambiguous(self) -> bool:
        return len(self.trees) > 1


def parse_word(defn: LanguageDefinition, tokens, limit: int = DEFAULT_TREE_LIMIT,
               keep_groups: bool = False) -> ParseResult:
    """All semantic trees whose yield is ``tokens`` (sorted canonically).

    With ``keep_groups`` the raw concrete trees, grouping nodes included,
    are returned instead.
    """
    g = _grammar(defn)
    if g.cycles:
        raise InfiniteAmbiguity(g.cycles)
    tokens = tuple(tokens)
    terms = [t.terminal for t in tokens]
    chart, complete = _recognize(g, terms)
    n = len(tokens)
    if (g.cfg.start, 0) not in complete[n]:
        last = max(i for i in range(n + 1) if chart[i])
        # the furthest chart still alive tells where the input stopped fitting
        bad = tokens[last] if last < n else None
        raise NoParse(last, bad)
    unpack = _Unpacker(g, tokens, chart, complete, limit, keep_groups)
    trees = unpack.derive(g.cfg.start, 0, n)
    if len(trees) > limit:
        raise TooManyTrees(len(trees), limit)
    return ParseResult(tokens, tuple(sort_trees(trees)))


def parse_string(defn: LanguageDefinition, text: str, **kw) -> ParseResult:
    return parse_word(defn, tokenize(defn, text), **kw)


def trees_of(defn: LanguageDefinition, tokens) -> frozenset:
    """``parse(w)`` as a set; empty when the word is not in the language."""
    try:
        return frozenset(parse_word(defn, tokens).trees)
    except NoParse:
        return frozenset()
