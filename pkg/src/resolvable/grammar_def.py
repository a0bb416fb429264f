"""Language definitions: labelled productions whose right-hand sides are
regular expressions over terminals and *marked* non-terminals.

A mark is the set of production labels that may not appear as the immediate
child at that non-terminal occurrence.  Grouping parentheses are not part of
the productions; they are injected later by ``grammar_gen`` and are never
forbidden by a mark.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

GROUP_LABEL = "g"


@dataclass(frozen=True)
class Location:
    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


@dataclass(frozen=True)
class Terminal:
    """A token class declared with a character regex."""

    name: str
    pattern: str


# -- right-hand side regular expressions -------------------------------------


@dataclass(frozen=True)
class Term:
    name: str
    literal: bool = True
    slot: Optional[str] = None


@dataclass(frozen=True)
class NonTerm:
    name: str
    mark: frozenset = frozenset()
    slot: Optional[str] = None


@dataclass(frozen=True)
class Seq:
    items: tuple


@dataclass(frozen=True)
class Alt:
    options: tuple


@dataclass(frozen=True)
class Eps:
    pass


@dataclass(frozen=True)
class Star:
    body: "Rhs"


Rhs = Union[Term, NonTerm, Seq, Alt, Eps, Star]


def seq(*items: Rhs) -> Rhs:
    flat = []
    for it in items:
        if isinstance(it, Seq):
            flat.extend(it.items)
        elif not isinstance(it, Eps):
            flat.append(it)
    if not flat:
        return Eps()
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


def alt(*options: Rhs) -> Rhs:
    if len(options) == 1:
        return options[0]
    return Alt(tuple(options))


def opt(r: Rhs) -> Rhs:
    return Alt((r, Eps()))


def plus(r: Rhs) -> Rhs:
    return seq(r, Star(r))


def rhs_leaves(r: Rhs) -> Iterator[Union[Term, NonTerm]]:
    if isinstance(r, (Term, NonTerm)):
        yield r
    elif isinstance(r, Seq):
        for it in r.items:
            yield from rhs_leaves(it)
    elif isinstance(r, Alt):
        for it in r.options:
            yield from rhs_leaves(it)
    elif isinstance(r, Star):
        yield from rhs_leaves(r.body)


def map_leaves(r: Rhs, fn) -> Rhs:
    if isinstance(r, (Term, NonTerm)):
        return fn(r)
    if isinstance(r, Seq):
        return Seq(tuple(map_leaves(it, fn) for it in r.items))
    if isinstance(r, Alt):
        return Alt(tuple(map_leaves(it, fn) for it in r.options))
    if isinstance(r, Star):
        return Star(map_leaves(r.body, fn))
    return r


def nullable(r: Rhs) -> bool:
    if isinstance(r, (Eps, Star)):
        return True
    if isinstance(r, Seq):
        return all(nullable(it) for it in r.items)
    if isinstance(r, Alt):
        return any(nullable(it) for it in r.options)
    return False


def single_symbol_words(r: Rhs) -> set:
    """Symbols ``x`` such that the one-symbol word ``x`` is in L(r).

    Terminals come back as ``("T", name)`` and non-terminals as
    ``("N", name)``.
    """
    if isinstance(r, Term):
        return {("T", r.name)}
    if isinstance(r, NonTerm):
        return {("N", r.name)}
    if isinstance(r, Eps):
        return set()
    if isinstance(r, Star):
        return single_symbol_words(r.body)
    if isinstance(r, Alt):
        out: set = set()
        for it in r.options:
            out |= single_symbol_words(it)
        return out
    # sequence: exactly one item contributes a symbol, all others vanish
    out = set()
    items = r.items
    for i, it in enumerate(items):
        if all(nullable(o) for j, o in enumerate(items) if j != i):
            out |= single_symbol_words(it)
    return out


def render_rhs(r: Rhs) -> str:
    """Compact human rendering, e.g. ``'[' (E (';' E)* | ε) ']'``."""
    if isinstance(r, Term):
        return repr(r.name) if r.literal else r.name
    if isinstance(r, NonTerm):
        if r.mark:
            return f"{r.name}{{{','.join(sorted(r.mark))}}}"
        return r.name
    if isinstance(r, Eps):
        return "ε"
    if isinstance(r, Star):
        inner = render_rhs(r.body)
        if isinstance(r.body, (Seq, Alt)):
            inner = f"({inner})"
        return inner + "*"
    if isinstance(r, Alt):
        return " | ".join(render_rhs(o) for o in r.options)
    parts = []
    for it in r.items:
        s = render_rhs(it)
        parts.append(f"({s})" if isinstance(it, Alt) else s)
    return " ".join(parts)


# -- productions and definitions ---------------------------------------------


@dataclass(frozen=True)
class Production:
    lhs: str
    label: str
    rhs: Rhs
    loc: Optional[Location] = field(default=None, compare=False, hash=False)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning" | "info"
    code: str
    message: str
    loc: Optional[Location] = None

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc else ""
        return f"{where}{self.severity}: {self.message} [{self.code}]"


@dataclass(frozen=True)
class LanguageDefinition:
    productions: tuple
    start: str
    tokens: tuple = ()
    grouping: tuple = ("(", ")")

    def __post_init__(self):
        object.__setattr__(self, "productions", tuple(self.productions))
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "grouping", tuple(self.grouping))

    @property
    def nonterminals(self) -> list:
        seen = dict.fromkeys(p.lhs for p in self.productions)
        return list(seen)

    @property
    def labels(self) -> list:
        return [p.label for p in self.productions]

    def production(self, label: str) -> Production:
        for p in self.productions:
            if p.label == label:
                return p
        raise KeyError(label)

    def productions_of(self, nt: str) -> list:
        return [p for p in self.productions if p.lhs == nt]

    def token_class(self, name: str) -> Optional[Terminal]:
        for t in self.tokens:
            if t.name == name:
                return t
        return None

    def literals(self) -> list:
        """Literal spellings used in productions, plus the grouping pair."""
        out = dict.fromkeys(self.grouping)
        for p in self.productions:
            for leaf in rhs_leaves(p.rhs):
                if isinstance(leaf, Term) and leaf.literal:
                    out.setdefault(leaf.name)
        return list(out)

    def terminal_names(self) -> list:
        out: dict = {}
        for p in self.productions:
            for leaf in rhs_leaves(p.rhs):
                if isinstance(leaf, Term):
                    out.setdefault(leaf.name)
        return list(out)

    def has_marks(self) -> bool:
        return any(
            isinstance(leaf, NonTerm) and leaf.mark
            for p in self.productions
            for leaf in rhs_leaves(p.rhs)
        )

    def uses_grouping_terminals(self) -> bool:
        paren = set(self.grouping)
        return any(
            isinstance(leaf, Term) and leaf.literal and leaf.name in paren
            for p in self.productions
            for leaf in rhs_leaves(p.rhs)
        )

    def strip_marks(self) -> "LanguageDefinition":
        def drop(leaf):
            if isinstance(leaf, NonTerm) and leaf.mark:
                return NonTerm(leaf.name, frozenset(), leaf.slot)
            return leaf

        prods = tuple(
            Production(p.lhs, p.label, map_leaves(p.rhs, drop), p.loc)
            for p in self.productions
        )
        return LanguageDefinition(prods, self.start, self.tokens, self.grouping)

    def with_productions(self, extra: Iterable[Production]) -> "LanguageDefinition":
        return LanguageDefinition(
            self.productions + tuple(extra), self.start, self.tokens, self.grouping
        )


# -- checks ------------------------------------------------------------------


def validate(defn: LanguageDefinition) -> list:
    """Return one diagnostic per violated well-formedness rule."""
    diags: list = []
    lhs = set(defn.nonterminals)
    seen_labels: dict = {}
    for p in defn.productions:
        if p.label in seen_labels:
            diags.append(Diagnostic(
                "error", "duplicate-label",
                f"label '{p.label}' is used by more than one production", p.loc))
        seen_labels.setdefault(p.label, p)
        if p.label == GROUP_LABEL:
            diags.append(Diagnostic(
                "error", "reserved-label",
                f"label '{GROUP_LABEL}' is reserved for grouping", p.loc))

    if defn.start not in lhs:
        diags.append(Diagnostic(
            "error", "unknown-start", f"start symbol '{defn.start}' has no productions"))

    token_names: set = set()
    for t in defn.tokens:
        if t.name in token_names:
            diags.append(Diagnostic(
                "error", "duplicate-token", f"token '{t.name}' is declared twice"))
        token_names.add(t.name)

    for p in defn.productions:
        for leaf in rhs_leaves(p.rhs):
            if isinstance(leaf, NonTerm):
                if leaf.name not in lhs:
                    diags.append(Diagnostic(
                        "error", "unknown-nonterminal",
                        f"production '{p.label}' refers to undefined non-terminal "
                        f"'{leaf.name}'", p.loc))
                for lab in sorted(leaf.mark):
                    if lab == GROUP_LABEL:
                        diags.append(Diagnostic(
                            "error", "forbid-grouping",
                            f"production '{p.label}' tries to forbid grouping; "
                            "grouping parentheses are always allowed", p.loc))
                    elif lab not in seen_labels:
                        diags.append(Diagnostic(
                            "error", "unknown-label",
                            f"mark in production '{p.label}' names unknown label "
                            f"'{lab}'", p.loc))
                    elif seen_labels[lab].lhs != leaf.name:
                        diags.append(Diagnostic(
                            "warning", "vacuous-mark",
                            f"mark in production '{p.label}' forbids '{lab}', which "
                            f"does not produce '{leaf.name}'", p.loc))
            elif leaf.literal:
                if not leaf.name:
                    diags.append(Diagnostic(
                        "error", "empty-literal",
                        f"production '{p.label}' has an empty literal", p.loc))
            elif leaf.name not in token_names:
                diags.append(Diagnostic(
                    "error", "unknown-token",
                    f"production '{p.label}' refers to undeclared token "
                    f"'{leaf.name}'", p.loc))

    terminals = set(defn.terminal_names()) | token_names
    for name in sorted(terminals & lhs):
        diags.append(Diagnostic(
            "error", "name-clash", f"'{name}' is both a terminal and a non-terminal"))
    for name in sorted(set(seen_labels) & (lhs | token_names)):
        diags.append(Diagnostic(
            "error", "name-clash", f"label '{name}' clashes with a symbol name"))
    literal_names = {
        leaf.name for p in defn.productions for leaf in rhs_leaves(p.rhs)
        if isinstance(leaf, Term) and leaf.literal
    }
    for name in sorted(literal_names & token_names):
        diags.append(Diagnostic(
            "error", "name-clash", f"literal '{name}' clashes with a token class"))
    open_, close = defn.grouping
    if not open_ or not close or open_ == close:
        diags.append(Diagnostic(
            "error", "bad-grouping", "grouping needs two distinct non-empty spellings"))
    return diags


def _paren_effect(r: Rhs, open_: str, close: str):
    """(minimum prefix depth, net depth) over all words of ``r``; ``None``
    when different words disagree on the net depth."""
    if isinstance(r, Term):
        if r.literal and r.name == open_:
            return (0, 1)
        if r.literal and r.name == close:
            return (-1, -1)
        return (0, 0)
    if isinstance(r, (NonTerm, Eps)):
        return (0, 0)
    if isinstance(r, Seq):
        lo, net = 0, 0
        for it in r.items:
            eff = _paren_effect(it, open_, close)
            if eff is None:
                return None
            lo = min(lo, net + eff[0])
            net += eff[1]
        return (lo, net)
    if isinstance(r, Alt):
        effs = [_paren_effect(o, open_, close) for o in r.options]
        if any(e is None for e in effs) or len({e[1] for e in effs}) != 1:
            return None
        return (min(e[0] for e in effs), effs[0][1])
    # star: repetition only keeps a bounded depth when the body is net zero
    eff = _paren_effect(r.body, open_, close)
    if eff is None or eff[1] != 0:
        return None
    return (min(0, eff[0]), 0)


def rhs_balanced(r: Rhs, open_: str = "(", close: str = ")") -> bool:
    eff = _paren_effect(r, open_, close)
    return eff is not None and eff[1] == 0 and eff[0] >= 0


def check_balanced(defn: LanguageDefinition) -> bool:
    """True iff every right-hand side only produces balanced uses of the
    grouping spellings."""
    open_, close = defn.grouping
    return all(rhs_balanced(p.rhs, open_, close) for p in defn.productions)


def unit_edges(defn: LanguageDefinition) -> dict:
    """``N -> {(label, N')}`` whenever production ``label`` of N accepts the
    single-symbol word N'."""
    edges: dict = {nt: set() for nt in defn.nonterminals}
    for p in defn.productions:
        for kind, name in single_symbol_words(p.rhs):
            if kind == "N":
                edges.setdefault(p.lhs, set()).add((p.label, name))
    return edges


def check_unit_cycles(defn: LanguageDefinition) -> set:
    """Non-terminals that can derive themselves through unit steps alone."""
    succ = {n: {t for _, t in es} for n, es in unit_edges(defn).items()}
    on_cycle = set()
    for start in succ:
        stack = list(succ[start])
        seen: set = set()
        while stack:
            n = stack.pop()
            if n == start:
                on_cycle.add(start)
                break
            if n in seen:
                continue
            seen.add(n)
            stack.extend(succ.get(n, ()))
    return on_cycle


def alignments(r: Rhs, seq: tuple, fits, start: int = 0):
    """Ways to match a prefix of ``seq[start:]`` against ``r``.

    ``fits(leaf, item)`` decides whether a regex leaf accepts one sequence
    item.  Yields ``(end, leaves)`` where ``leaves`` lists the regex leaf
    used for each consumed item.
    """
    if isinstance(r, (Term, NonTerm)):
        if start < len(seq) and fits(r, seq[start]):
            yield start + 1, (r,)
    elif isinstance(r, Eps):
        yield start, ()
    elif isinstance(r, Alt):
        for o in r.options:
            yield from alignments(o, seq, fits, start)
    elif isinstance(r, Seq):
        def go(k, pos, acc):
            if k == len(r.items):
                yield pos, acc
                return
            for end, used in alignments(r.items[k], seq, fits, pos):
                yield from go(k + 1, end, acc + used)
        yield from go(0, start, ())
    else:  # star
        yield start, ()
        for end, used in alignments(r.body, seq, fits, start):
            if end > start:
                for end2, used2 in alignments(r, seq, fits, end):
                    yield end2, used + used2


def full_alignment(r: Rhs, seq: tuple, fits):
    """First alignment consuming all of ``seq``, or ``None``."""
    for end, used in alignments(r, seq, fits):
        if end == len(seq):
            return used
    return None
