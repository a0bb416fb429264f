"""Per-word resolvability.

For each tree ``t`` of an ambiguous word we look for a shortest word that
parses to ``t`` alone.  Candidates come from the automaton for the words of
``t`` minus the words of every competing tree found so far; each candidate
is reparsed, and any new competitor it reveals is subtracted in turn.  When
the difference becomes empty, ``t`` cannot be written unambiguously.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .encoding import symbol_token, words_automaton
from .forest_parser import Node, NoParse, parse_word, sort_trees, tokenize, words_text
from .grammar_def import LanguageDefinition, check_balanced, check_unit_cycles
from .vpda import difference, union_all


class PreconditionViolation(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class DynamicReport:
    resolved: dict                     # tree -> witness token tuple
    unresolvable: tuple                # trees with no unambiguous word
    inconclusive: tuple = ()           # trees left open by the budget
    stats: dict = field(default_factory=dict)

    @property
    def all_resolved(self) -> bool:
        return not self.unresolvable and not self.inconclusive


def check_preconditions(defn: LanguageDefinition) -> None:
    if not check_balanced(defn):
        raise PreconditionViolation("some production admits unbalanced grouping parentheses")
    cycles = check_unit_cycles(defn)
    if cycles:
        raise PreconditionViolation(
            "infinitely ambiguous (unit cycle through " + ", ".join(sorted(cycles)) + ")")


def _parse_set(defn, tokens) -> frozenset:
    try:
        return frozenset(parse_word(defn, tokens).trees)
    except NoParse:
        return frozenset()


def find_witness(defn: LanguageDefinition, t: Node, others, deadline=None, cache=None):
    """Shortest word parsing only to ``t``, or ``None``.

    Returns ``(word, iterations, competitors)``.  ``cache`` maps trees to
    their word automata and may be shared between calls.
    """
    cache = {} if cache is None else cache

    def automaton(u):
        if u not in cache:
            cache[u] = words_automaton(defn, u)
        return cache[u]

    diff = automaton(t)
    seen = set(others) - {t}
    pending = set(seen)
    iterations = 0
    while True:
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded()
        iterations += 1
        if pending:
            rest = union_all([automaton(c) for c in sort_trees(pending)])
            diff = difference(diff, rest).trim()
            pending = set()
        word = diff.shortest_word()
        if word is None:
            return None, iterations, seen
        tokens = tuple(symbol_token(s) for s in word)
        trees = _parse_set(defn, tokens)
        if trees == {t}:
            return tokens, iterations, seen
        new = trees - {t} - seen
        if not new:
            # cannot happen for a word of t outside every competitor's words
            raise AssertionError(f"no new competitor for {words_text(tokens)}")
        seen |= new
        pending = new


@dataclass
class WitnessMemo:
    """Per-grammar results that can be shared between calls.

    The witness of a tree is the least unambiguous word of the tree no
    matter which competitors the search starts from, because refining only
    removes words that parse to some other tree.  So results may be reused
    across words of the same grammar (never across grammars).
    """
    automata: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)   # tree -> (word, iterations)


def analyze_trees(defn: LanguageDefinition, trees, budget_ms: Optional[float] = None,
                  memo: Optional[WitnessMemo] = None) -> DynamicReport:
    """Split ``trees`` into those with a minimal unambiguous witness and
    those without one."""
    check_preconditions(defn)
    memo = WitnessMemo() if memo is None else memo
    trees = sort_trees(set(trees))
    deadline = None if budget_ms is None else time.monotonic() + budget_ms / 1000.0
    started = time.monotonic()
    resolved, unresolvable, inconclusive = {}, [], []
    iters = {}
    for t in trees:
        if t not in memo.witnesses:
            try:
                word, n, _ = find_witness(defn, t, trees, deadline, memo.automata)
            except BudgetExceeded:
                inconclusive.append(t)
                continue
            memo.witnesses[t] = (word, n)
        word, n = memo.witnesses[t]
        iters[t] = n
        if word is None:
            unresolvable.append(t)
        else:
            resolved[t] = word
    stats = {"iterations": iters, "elapsed": time.monotonic() - started}
    return DynamicReport(resolved, tuple(unresolvable), tuple(inconclusive), stats)


# -- verdicts ------------------------------------------------------------------


@dataclass
class WordVerdict:
    kind: str           # unambiguous | resolvable | unresolvable | inconclusive
    word: tuple
    trees: tuple
    report: Optional[DynamicReport] = None
    grouping: tuple = ("(", ")")

    @property
    def witnesses(self) -> list:
        """Witness words of the resolvable trees, in output order."""
        if self.report is None:
            return []
        words = list(self.report.resolved.values())
        return sorted(words, key=lambda w: witness_key(w, self.grouping))


def witness_key(word, grouping=("(", ")")) -> tuple:
    """Order witnesses token by token with the grouping open paren first."""
    out = []
    for tok in word:
        if tok.lexeme == grouping[0]:
            out.append((0, ""))
        elif tok.lexeme == grouping[1]:
            out.append((2, ""))
        else:
            out.append((1, tok.lexeme))
    return tuple(out)


def resolve_word(defn: LanguageDefinition, text_or_tokens, budget_ms=None) -> WordVerdict:
    if isinstance(text_or_tokens, str):
        tokens = tuple(tokenize(defn, text_or_tokens))
    else:
        tokens = tuple(text_or_tokens)
    result = parse_word(defn, tokens)
    if len(result.trees) == 1:
        return WordVerdict("unambiguous", tokens, result.trees, None, defn.grouping)
    report = analyze_trees(defn, result.trees, budget_ms)
    if report.unresolvable:
        kind = "unresolvable"
    elif report.inconclusive:
        kind = "inconclusive"
    else:
        kind = "resolvable"
    return WordVerdict(kind, tokens, result.trees, report, defn.grouping)


# -- ambiguity sites -----------------------------------------------------------


def ambiguity_site(trees) -> list:
    """Descend while the trees agree everywhere but in one child; returns
    one subtree per input tree, in input order."""
    cur = list(trees)
    while True:
        first = cur[0]
        if not all(isinstance(t, Node) and t.label == first.label
                   and len(t.children) == len(first.children) for t in cur):
            return cur
        differ = [i for i in range(len(first.children))
                  if any(t.children[i] != first.children[i] for t in cur)]
        if len(differ) != 1:
            return cur
        cur = [t.children[differ[0]] for t in cur]


def site_key(subtrees) -> tuple:
    """Sorted multiset of the root labels of the distinct competing subtrees."""
    distinct = {t for t in subtrees}
    return tuple(sorted(getattr(t, "label", "") for t in distinct))


def _node_spans(t) -> set:
    out = set()
    if isinstance(t, Node):
        out.add(t.span)
        for c in t.children:
            out |= _node_spans(c)
    return out


def forbid_suggestions(defn: LanguageDefinition, keep, others) -> list:
    """``forbid`` lines removing each tree in ``others``: a root-level edge
    whose child segment is not a node in any tree of ``keep``."""
    from .encoding import child_slots
    kept = set()
    for k in keep:
        kept |= _node_spans(k)
    out = set()
    for t in others:
        if not isinstance(t, Node):
            continue
        for c, slot in zip(t.children, child_slots(defn, t)):
            if isinstance(c, Node) and c.span not in kept:
                out.add(f"forbid {t.label}.{slot} = {c.label}")
    return sorted(out)


def site_of_verdict(defn: LanguageDefinition, v: WordVerdict) -> dict:
    """Site key and fix suggestions for an ambiguous verdict."""
    subs = ambiguity_site(v.trees)
    by_tree = dict(zip(v.trees, subs))
    stuck = set(v.report.unresolvable) | set(v.report.inconclusive) if v.report else set()
    keep = [by_tree[t] for t in v.trees if t in stuck]
    rest = [by_tree[t] for t in v.trees if t not in stuck]
    if not keep:
        # every reading is writable; suggest removing all but the first
        keep, rest = rest[:1], rest[1:]
    return {"key": list(site_key(subs)), "suggestions": forbid_suggestions(defn, keep, rest)}


# -- rendering -----------------------------------------------------------------


def line_col(text: str, offset: int) -> tuple:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def tree_summary(t: Node, filename: str, text: str) -> dict:
    """Root label plus the child subtrees with their source spans."""
    children = []
    for c in t.children:
        if not isinstance(c, Node):
            continue
        span = c.span
        where = None
        if span is not None:
            line, col = line_col(text, span[0])
            _, end_col = line_col(text, span[1] - 1)
            where = f"{filename}:{line}:{col}-{end_col + 1}"
        children.append({"label": c.label, "span": where})
    return {"label": t.label, "tree": str(t), "children": children}


def verdict_record(v: WordVerdict, filename: str = "<input>", text: str = "") -> dict:
    """Plain-data form of a verdict; ``render_record`` turns it into text."""
    rec = {"file": filename, "kind": v.kind, "tokens": words_text(v.word)}
    if v.kind == "unambiguous":
        rec["tree"] = str(v.trees[0])
        return rec
    rec["trees"] = len(v.trees)
    rec["resolvable"] = [words_text(w) for w in v.witnesses]
    if v.kind != "resolvable":
        rec["unresolvable"] = [tree_summary(t, filename, text) for t in v.report.unresolvable]
        rec["inconclusive"] = [tree_summary(t, filename, text) for t in v.report.inconclusive]
    return rec


def _summary_lines(s: dict) -> list:
    lines = [f"  {s['label']}"]
    for c in s["children"]:
        if c["span"] is None:
            lines.append(f"   - {c['label']}")
        else:
            lines.append(f"   - {c['label']:<10} {c['span']}")
    return lines


def render_record(rec: dict) -> str:
    kind = rec["kind"]
    if kind == "unambiguous":
        return rec["tree"]
    ws = rec["resolvable"]
    if kind == "resolvable":
        return "\n".join([f"Ambiguity error with {len(ws)} alternatives:"]
                         + [f"  {w}" for w in ws])
    n = len(ws)
    noun = "alternative" if n == 1 else "alternatives"
    head = "Unresolvable" if kind == "unresolvable" else "Inconclusive"
    lines = [f"{head} ambiguity error with {n} {noun}.", "Resolvable alternatives:"]
    lines += [f"  {w}" for w in ws]
    for title, key in (("Unresolvable", "unresolvable"), ("Inconclusive", "inconclusive")):
        if rec.get(key):
            lines.append(f"{title} alternatives:")
            for s in rec[key]:
                lines += _summary_lines(s)
    return "\n".join(lines)


def render_verdict(v: WordVerdict, filename: str = "<input>", text: str = "") -> str:
    """Human-readable verdict in the style of a compiler error."""
    return render_record(verdict_record(v, filename, text))


__all__ = [
    "BudgetExceeded",
    "DynamicReport",
    "PreconditionViolation",
    "WitnessMemo",
    "WordVerdict",
    "ambiguity_site",
    "analyze_trees",
    "forbid_suggestions",
    "site_key",
    "site_of_verdict",
    "find_witness",
    "render_record",
    "render_verdict",
    "verdict_record",
    "resolve_word",
]
