"""The ``.syn`` syntax-definition language.

A file is a list of declarations::

    type Exp
    grouping "(" Exp ")"
    token Integer = "[0-9]+"
    syncon list: Exp = "[" (head:Exp (";" tail:Exp)*)? "]"
    infix add: Exp = "+"            // also infixl, infixr, prefix, postfix
    precedence { mul; add sub; }    // earlier groups bind tighter
    forbid mul.left = add sub       // one or more labels
    start Exp

Right-hand sides are regular expressions over ``"literal"`` strings, token
names and type names, with ``|``, ``?``, ``*``, ``+`` and parentheses; a
symbol may be given a slot name as in ``head:Exp``.  Infix operators get
the slots ``left`` and ``right``, prefix ones ``right`` and postfix ones
``left``.  ``forbid a.s = b c`` puts ``b`` and ``c`` in the mark of every occurrence in
slot ``s`` of ``a``; a slot written ``#k`` is the k-th non-terminal
occurrence, counted from 1.

Several files compose by taking the union of their declarations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .grammar_def import (
    Alt,
    Eps,
    LanguageDefinition,
    Location,
    NonTerm,
    Production,
    Seq,
    Star,
    Term,
    Terminal,
    alt,
    map_leaves,
    opt,
    plus,
    rhs_leaves,
    seq,
)


class DslError(ValueError):
    def __init__(self, message: str, loc: Optional[Location] = None):
        self.loc = loc
        self.bare = message
        super().__init__(f"{loc}: {message}" if loc else message)


class DslSyntaxError(DslError):
    pass


class DuplicateLabel(DslError):
    pass


class UnknownLabel(DslError):
    pass


class UnknownName(DslError):
    pass


KEYWORDS = {"type", "grouping", "token", "syncon", "infix", "infixl", "infixr",
            "prefix", "postfix", "precedence", "forbid", "start"}
OPERATOR_KINDS = {"infix", "infixl", "infixr", "prefix", "postfix"}


# -- declarations ----------------------------------------------------------------


@dataclass(frozen=True)
class TypeDecl:
    name: str
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class TokenDecl:
    name: str
    pattern: str
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class GroupingDecl:
    open: str
    type: str
    close: str
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class SynconDecl:
    label: str
    type: str
    rhs: object          # regex with unresolved ``Sym`` leaves
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class OperatorDecl:
    fixity: str          # infix | infixl | infixr | prefix | postfix
    label: str
    type: str
    rhs: object
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class PrecedenceDecl:
    groups: tuple        # tuple of tuples of labels, tightest first
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class ForbidDecl:
    label: str
    slot: str
    forbidden: str
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class StartDecl:
    type: str
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class Sym:
    """A name in a right-hand side before we know if it is a type or a token."""

    name: str
    slot: Optional[str] = None
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass
class DslFile:
    declarations: list
    path: str = "<input>"


# -- lexer -----------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<slotnum>\#[0-9]+)
  | (?P<punct>[:={};()?*+|.])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    loc: Location


def _unquote(s: str) -> str:
    body = s[1:-1]
    return re.sub(r'\\(["\\])', r"\1", body)


def _lex(source: str, path: str) -> list:
    out = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        loc = Location(path, line, pos - line_start + 1)
        if not m:
            raise DslSyntaxError(f"unexpected character {source[pos]!r}", loc)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            out.append(_Tok(kind, text, loc))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = m.start() + text.rfind("\n") + 1
        pos = m.end()
    out.append(_Tok("eof", "", Location(path, line, pos - line_start + 1)))
    return out


# -- parser ----------------------------------------------------------------------


class _Parser:
    def __init__(self, toks: list):
        self.toks = toks
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str, text: Optional[str] = None) -> _Tok:
        t = self.cur
        if t.kind != kind or (text is not None and t.text != text):
            want = repr(text) if text else kind
            got = repr(t.text) if t.text else "end of file"
            raise DslSyntaxError(f"expected {want}, found {got}", t.loc)
        return self.next()

    def ident(self, what: str = "identifier") -> _Tok:
        t = self.cur
        if t.kind != "ident" or t.text in KEYWORDS:
            got = repr(t.text) if t.text else "end of file"
            raise DslSyntaxError(f"expected {what}, found {got}", t.loc)
        return self.next()

    def at(self, text: str) -> bool:
        return self.cur.kind in ("punct", "ident") and self.cur.text == text

    # declarations

    def file(self) -> list:
        out = []
        while self.cur.kind != "eof":
            d = self.decl()
            out.extend(d if isinstance(d, list) else [d])
        return out

    def decl(self):
        t = self.cur
        if t.kind != "ident" or t.text not in KEYWORDS:
            raise DslSyntaxError(f"expected a declaration, found {t.text!r}", t.loc)
        kw = self.next().text
        if kw == "type":
            return TypeDecl(self.ident("type name").text, t.loc)
        if kw == "start":
            return StartDecl(self.ident("type name").text, t.loc)
        if kw == "token":
            name = self.ident("token name").text
            self.expect("punct", "=")
            return TokenDecl(name, _unquote(self.expect("string").text), t.loc)
        if kw == "grouping":
            o = _unquote(self.expect("string").text)
            ty = self.ident("type name").text
            c = _unquote(self.expect("string").text)
            return GroupingDecl(o, ty, c, t.loc)
        if kw == "precedence":
            return self.precedence(t.loc)
        if kw == "forbid":
            label = self.ident("label").text
            self.expect("punct", ".")
            if self.cur.kind == "slotnum":
                slot = self.next().text
            else:
                slot = self.ident("slot name").text
            self.expect("punct", "=")
            banned = [self.ident("label").text]
            while self.cur.kind == "ident" and self.cur.text not in KEYWORDS:
                banned.append(self.next().text)
            return [ForbidDecl(label, slot, b, t.loc) for b in banned]
        label = self.ident("label").text
        self.expect("punct", ":")
        ty = self.ident("type name").text
        self.expect("punct", "=")
        rhs = self.regex()
        if kw == "syncon":
            return SynconDecl(label, ty, rhs, t.loc)
        return OperatorDecl(kw, label, ty, rhs, t.loc)

    def precedence(self, loc) -> PrecedenceDecl:
        self.expect("punct", "{")
        groups = []
        cur = []
        while not self.at("}"):
            if self.at(";"):
                self.next()
                if cur:
                    groups.append(tuple(cur))
                cur = []
                continue
            cur.append(self.ident("operator label").text)
        self.expect("punct", "}")
        if cur:
            groups.append(tuple(cur))
        return PrecedenceDecl(tuple(groups), loc)

    # right-hand sides

    def regex(self):
        options = [self.sequence()]
        while self.at("|"):
            self.next()
            options.append(self.sequence())
        return alt(*options) if len(options) > 1 else options[0]

    def starts_atom(self) -> bool:
        t = self.cur
        if t.kind == "string":
            return True
        if t.kind == "punct":
            return t.text == "("
        return t.kind == "ident" and t.text not in KEYWORDS

    def sequence(self):
        items = []
        while self.starts_atom():
            items.append(self.postfix())
        if not items:
            if self.at("|") or self.at(")") or self.cur.kind == "eof" or (
                    self.cur.kind == "ident" and self.cur.text in KEYWORDS):
                return Eps()
            raise DslSyntaxError(f"unexpected {self.cur.text!r} in right-hand side", self.cur.loc)
        return seq(*items)

    def postfix(self):
        r = self.atom()
        while self.at("?") or self.at("*") or self.at("+"):
            op = self.next().text
            r = opt(r) if op == "?" else Star(r) if op == "*" else plus(r)
        return r

    def atom(self):
        t = self.cur
        if t.kind == "string":
            self.next()
            text = _unquote(t.text)
            if not text:
                raise DslSyntaxError("empty literal", t.loc)
            return Term(text)
        if t.kind == "punct" and t.text == "(":
            self.next()
            if self.at(")"):
                self.next()
                return Eps()
            r = self.regex()
            self.expect("punct", ")")
            return r
        name = self.ident("symbol").text
        if self.at(":"):
            self.next()
            target = self.cur
            if target.kind == "string":
                self.next()
                return Term(_unquote(target.text), slot=name)
            return Sym(self.ident("type or token name").text, name, t.loc)
        return Sym(name, None, t.loc)


def parse_dsl(source: str, path: str = "<input>") -> DslFile:
    return DslFile(_Parser(_lex(source, path)).file(), path)


# -- elaboration -----------------------------------------------------------------


def _resolve(r, types: set, tokens: set):
    def fix(leaf):
        if not isinstance(leaf, Sym):
            return leaf
        if leaf.name in types:
            return NonTerm(leaf.name, frozenset(), leaf.slot)
        if leaf.name in tokens:
            return Term(leaf.name, literal=False, slot=leaf.slot)
        raise UnknownName(f"unknown type or token {leaf.name!r}", leaf.loc)
    return _map_syms(r, fix)


def _map_syms(r, fn):
    if isinstance(r, (Sym, Term, NonTerm)):
        return fn(r)
    if isinstance(r, Seq):
        return Seq(tuple(_map_syms(x, fn) for x in r.items))
    if isinstance(r, Alt):
        return Alt(tuple(_map_syms(x, fn) for x in r.options))
    if isinstance(r, Star):
        return Star(_map_syms(r.body, fn))
    return r


def _operator_rhs(d: OperatorDecl, middle):
    left = NonTerm(d.type, frozenset(), "left")
    right = NonTerm(d.type, frozenset(), "right")
    if d.fixity == "prefix":
        return seq(middle, right)
    if d.fixity == "postfix":
        return seq(left, middle)
    return seq(left, middle, right)


def _slots_of(fixity: str) -> tuple:
    if fixity == "prefix":
        return ("right",)
    if fixity == "postfix":
        return ("left",)
    return ("left", "right")


def _add_mark(r, slot: str, label: str):
    """Add ``label`` to the mark of the non-terminals in ``slot``."""
    counter = [0]
    hit = [False]

    def fix(leaf):
        if isinstance(leaf, NonTerm):
            counter[0] += 1
            if leaf.slot == slot or slot == f"#{counter[0]}":
                hit[0] = True
                return NonTerm(leaf.name, leaf.mark | {label}, leaf.slot)
        return leaf

    out = map_leaves(r, fix)
    return out, hit[0]


def elaborate(files) -> LanguageDefinition:
    """Compose the given files into one language definition."""
    if isinstance(files, DslFile):
        files = [files]
    decls = [d for f in files for d in f.declarations]

    types: dict = {}
    tokens: dict = {}
    groupings: dict = {}
    starts: dict = {}
    prods: dict = {}         # label -> (decl, type, rhs)
    fixity: dict = {}
    for d in decls:
        if isinstance(d, TypeDecl):
            types.setdefault(d.name, d)
        elif isinstance(d, StartDecl):
            starts.setdefault(d.type, d)
        elif isinstance(d, TokenDecl):
            old = tokens.get(d.name)
            if old is not None and old.pattern != d.pattern:
                raise DslError(f"token {d.name} declared with two different patterns", d.loc)
            tokens.setdefault(d.name, d)
        elif isinstance(d, GroupingDecl):
            groupings.setdefault((d.open, d.close), d)
        elif isinstance(d, (SynconDecl, OperatorDecl)):
            if d.label in prods:
                first = prods[d.label][0].loc
                raise DuplicateLabel(f"label {d.label} is already declared"
                                     + (f" at {first}" if first else ""), d.loc)
            prods[d.label] = (d,)
            if isinstance(d, OperatorDecl):
                fixity[d.label] = d.fixity

    clash = set(types) & set(tokens)
    if clash:
        name = sorted(clash)[0]
        raise DslError(f"{name} is declared both as a type and as a token", tokens[name].loc)
    for g in groupings.values():
        if g.type not in types:
            raise UnknownName(f"unknown type {g.type!r}", g.loc)
    if len(groupings) > 1:
        g = sorted(groupings.values(), key=lambda x: (x.open, x.close))[1]
        raise DslError("only one grouping pair is supported", g.loc)
    grouping = next(iter(groupings), ("(", ")"))

    rhs_of: dict = {}
    type_of: dict = {}
    for label, (d,) in prods.items():
        if d.type not in types:
            raise UnknownName(f"unknown type {d.type!r}", d.loc)
        body = _resolve(d.rhs, set(types), set(tokens))
        if isinstance(d, OperatorDecl):
            body = _operator_rhs(d, body)
        rhs_of[label] = body
        type_of[label] = d.type

    def need(label, loc):
        if label not in prods:
            raise UnknownLabel(f"unknown label {label!r}", loc)

    def forbid(label, slot, other, loc):
        new, hit = _add_mark(rhs_of[label], slot, other)
        if not hit:
            raise UnknownLabel(f"{label} has no slot {slot!r}", loc)
        rhs_of[label] = new

    # precedence and associativity become marks
    group_of: dict = {}
    for d in decls:
        if not isinstance(d, PrecedenceDecl):
            continue
        for gi, group in enumerate(d.groups):
            for label in group:
                need(label, d.loc)
                if label not in fixity:
                    raise UnknownLabel(f"{label} is not an operator", d.loc)
                group_of.setdefault(label, (id(d), gi))
        for gi, group in enumerate(d.groups):
            for hi in group:
                for lower in d.groups[gi + 1:]:
                    for lo in lower:
                        if type_of[lo] != type_of[hi]:
                            continue
                        for slot in _slots_of(fixity[hi]):
                            forbid(hi, slot, lo, d.loc)
    for label, fx in fixity.items():
        if fx not in ("infixl", "infixr"):
            continue
        peers = [x for x, g in group_of.items()
                 if label in group_of and g == group_of[label] and fixity[x] == fx]
        peers = sorted(set(peers) | {label})
        slot = "right" if fx == "infixl" else "left"
        for other in peers:
            if type_of[other] == type_of[label]:
                forbid(label, slot, other, prods[label][0].loc)
    for d in decls:
        if isinstance(d, ForbidDecl):
            need(d.label, d.loc)
            need(d.forbidden, d.loc)
            forbid(d.label, d.slot, d.forbidden, d.loc)

    if len(starts) > 1:
        raise DslError("more than one start type", sorted(starts.values(), key=str)[1].loc)
    if starts:
        start = next(iter(starts))
        if start not in types:
            raise UnknownName(f"unknown type {start!r}", starts[start].loc)
    elif len(types) == 1:
        start = next(iter(types))
    elif not types:
        start = ""
    else:
        raise DslError("several types are declared; add a start declaration")

    productions = tuple(
        Production(type_of[label], label, rhs_of[label], prods[label][0].loc)
        for label in sorted(prods)
    )
    toks = tuple(Terminal(n, tokens[n].pattern) for n in sorted(tokens))
    return LanguageDefinition(productions, start, toks, grouping)


def load_grammar(paths) -> LanguageDefinition:
    if isinstance(paths, (str, Path)):
        paths = [paths]
    files = []
    for p in paths:
        p = Path(p)
        files.append(parse_dsl(p.read_text(encoding="utf-8"), p.name))
    return elaborate(files)


# -- printing --------------------------------------------------------------------


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _print_rhs(r, prec: int = 0) -> str:
    if isinstance(r, Term):
        base = _quote(r.name) if r.literal else r.name
        return f"{r.slot}:{base}" if r.slot else base
    if isinstance(r, NonTerm):
        return f"{r.slot}:{r.name}" if r.slot else r.name
    if isinstance(r, Eps):
        return "()"
    if isinstance(r, Star):
        return _print_rhs(r.body, 2) + "*"
    if isinstance(r, Seq):
        text = " ".join(_print_rhs(x, 1) for x in r.items)
        return f"({text})" if prec > 1 else text
    text = " | ".join(_print_rhs(x, 0) for x in r.options)
    return f"({text})" if prec > 0 else text


def pretty_print(defn: LanguageDefinition) -> str:
    """DSL text that elaborates back to ``defn``; marks become ``forbid``
    lines naming slots, or ``#k`` positions for unnamed occurrences."""
    lines = []
    types = sorted(set(defn.nonterminals) | ({defn.start} if defn.start else set()))
    for t in types:
        lines.append(f"type {t}")
    if len(types) > 1:
        lines.append(f"start {defn.start}")
    if types:
        lines.append(f"grouping {_quote(defn.grouping[0])} {defn.start} {_quote(defn.grouping[1])}")
    for tok in sorted(defn.tokens, key=lambda t: t.name):
        lines.append(f"token {tok.name} = {_quote(tok.pattern)}")
    forbids = []
    for p in sorted(defn.productions, key=lambda p: p.label):
        def strip(leaf):
            if isinstance(leaf, NonTerm):
                return NonTerm(leaf.name, frozenset(), leaf.slot)
            return leaf
        lines.append(f"syncon {p.label}: {p.lhs} = {_print_rhs(map_leaves(p.rhs, strip))}")
        nts = [x for x in rhs_leaves(p.rhs) if isinstance(x, NonTerm)]
        for k, leaf in enumerate(nts, 1):
            named = leaf.slot and sum(1 for x in nts if x.slot == leaf.slot) == 1
            slot = leaf.slot if named else f"#{k}"
            for lab in sorted(leaf.mark):
                forbids.append(f"forbid {p.label}.{slot} = {lab}")
    return "\n".join(lines + list(dict.fromkeys(forbids))) + "\n"


__all__ = [
    "DslError",
    "DslFile",
    "DslSyntaxError",
    "DuplicateLabel",
    "UnknownLabel",
    "UnknownName",
    "elaborate",
    "load_grammar",
    "parse_dsl",
    "pretty_print",
]
