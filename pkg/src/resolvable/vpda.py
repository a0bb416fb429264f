"""Visibly pushdown automata.

The input alphabet is split into call symbols (always push), return
symbols (always pop) and internal symbols (leave the stack alone).  A word
is accepted when some run ends in an accepting state with an empty stack,
so words with unmatched calls or returns are never accepted.

Reachability is computed over *summaries*: ``q`` is in ``reach[p]`` when a
well-matched word leads from ``p`` to ``q`` with the stack back where it
started.  Emptiness, trimming and shortest words are all built on that.
"""

from __future__ import annotations

import itertools
from collections import defaultdict, deque
from typing import Iterable, Optional, Sequence

DEFAULT_MAX_STATES = 10**6


class PartitionMismatch(ValueError):
    pass


class SizeLimitExceeded(RuntimeError):
    pass


def symbol_key(sym, partition) -> tuple:
    """Total order on symbols: calls, then internals, then returns."""
    calls, internals, returns = partition
    text = getattr(sym, "lexeme", None)
    sub = (text, getattr(sym, "terminal", "")) if text is not None else (str(sym), "")
    if sym in calls:
        return (0,) + sub
    if sym in returns:
        return (2,) + sub
    return (1,) + sub


class Vpda:
    def __init__(self, calls: Iterable = (), internals: Iterable = (),
                 returns: Iterable = (), initial=None, accepting: Iterable = ()):
        self.calls = set(calls)
        self.internals = set(internals)
        self.returns = set(returns)
        if (self.calls & self.internals or self.calls & self.returns
                or self.internals & self.returns):
            raise PartitionMismatch("alphabet classes overlap")
        self.states: set = set()
        self.initial = initial
        self.accepting = set(accepting)
        self.call_out: dict = defaultdict(set)    # q -> {(c, q2, g)}
        self.int_out: dict = defaultdict(set)     # q -> {(a, q2)}
        self.ret_out: dict = defaultdict(set)     # q -> {(r, g, q2)}
        if initial is not None:
            self.states.add(initial)
        self.states.update(self.accepting)

    # -- construction --

    def add_state(self, q) -> None:
        self.states.add(q)

    def add_call(self, q, c, q2, g) -> None:
        self._classify(c, self.calls)
        self.states.update((q, q2))
        self.call_out[q].add((c, q2, g))

    def add_internal(self, q, a, q2) -> None:
        self._classify(a, self.internals)
        self.states.update((q, q2))
        self.int_out[q].add((a, q2))

    def add_return(self, q, r, g, q2) -> None:
        self._classify(r, self.returns)
        self.states.update((q, q2))
        self.ret_out[q].add((r, g, q2))

    def _classify(self, sym, cls: set) -> None:
        for other in (self.calls, self.internals, self.returns):
            if other is not cls and sym in other:
                raise PartitionMismatch(f"symbol {sym!r} is already in another class")
        cls.add(sym)

    # -- inspection --

    @property
    def partition(self) -> tuple:
        return (frozenset(self.calls), frozenset(self.internals), frozenset(self.returns))

    @property
    def alphabet(self) -> list:
        syms = self.calls | self.internals | self.returns
        return sorted(syms, key=lambda s: symbol_key(s, self.partition))

    @property
    def stack_symbols(self) -> set:
        out = {g for ts in self.call_out.values() for (_, _, g) in ts}
        out |= {g for ts in self.ret_out.values() for (_, g, _) in ts}
        return out

    def transitions(self):
        """All transitions as ``(kind, q, symbol, stack symbol, q2)``."""
        for q in self.call_out:
            for c, q2, g in self.call_out[q]:
                yield ("call", q, c, g, q2)
        for q in self.int_out:
            for a, q2 in self.int_out[q]:
                yield ("internal", q, a, None, q2)
        for q in self.ret_out:
            for r, g, q2 in self.ret_out[q]:
                yield ("return", q, r, g, q2)

    def num_transitions(self) -> int:
        return sum(1 for _ in self.transitions())

    def step(self, configs: set, sym) -> set:
        out = set()
        for q, stack in configs:
            if sym in self.calls:
                for c, q2, g in self.call_out.get(q, ()):
                    if c == sym:
                        out.add((q2, stack + (g,)))
            elif sym in self.returns:
                if not stack:
                    continue
                for r, g, q2 in self.ret_out.get(q, ()):
                    if r == sym and g == stack[-1]:
                        out.add((q2, stack[:-1]))
            else:
                for a, q2 in self.int_out.get(q, ()):
                    if a == sym:
                        out.add((q2, stack))
        return out

    def accepts(self, word: Sequence) -> bool:
        if self.initial is None:
            return False
        configs = {(self.initial, ())}
        for sym in word:
            configs = self.step(configs, sym)
            if not configs:
                return False
        return any(q in self.accepting and not stack for q, stack in configs)

    def accepting_run(self, word: Sequence) -> Optional[list]:
        """Configurations ``(state, stack)`` of one accepting run, if any."""
        if self.initial is None:
            return None
        layers = [{(self.initial, ()): None}]
        for sym in word:
            nxt: dict = {}
            # sorted so the chosen run does not depend on hash order
            for conf in sorted(layers[-1], key=repr):
                for conf2 in sorted(self.step({conf}, sym), key=repr):
                    nxt.setdefault(conf2, conf)
            if not nxt:
                return None
            layers.append(nxt)
        end = next((c for c in sorted(layers[-1], key=repr)
                    if c[0] in self.accepting and not c[1]), None)
        if end is None:
            return None
        run = [end]
        for layer in reversed(layers[1:]):
            run.append(layer[run[-1]])
        run.reverse()
        return run

    # -- summaries --

    def reach(self) -> dict:
        """``reach[p]``: states reachable from ``p`` by well-matched words."""
        R: dict = {p: {p} for p in self.states}
        # callers[q1]: (p, g) such that p' in R[p] called into q1 pushing g
        callers: dict = defaultdict(set)
        work = deque((p, p) for p in self.states)
        while work:
            p, q = work.popleft()
            new = []
            for a, q2 in self.int_out.get(q, ()):
                new.append((p, q2))
            for c, q1, g in self.call_out.get(q, ()):
                if (p, g) not in callers[q1]:
                    callers[q1].add((p, g))
                    for q2 in list(R[q1]):
                        for r, g2, q3 in self.ret_out.get(q2, ()):
                            if g2 == g:
                                new.append((p, q3))
            for r, g, q3 in self.ret_out.get(q, ()):
                for p0, g0 in list(callers.get(p, ())):
                    if g0 == g:
                        new.append((p0, q3))
            for x, y in new:
                if y not in R[x]:
                    R[x].add(y)
                    work.append((x, y))
        return R

    def is_empty(self) -> bool:
        if self.initial is None:
            return True
        return not (self.reach()[self.initial] & self.accepting)

    def trim(self) -> "Vpda":
        """Keep only states and transitions on some accepting run."""
        out = Vpda(self.calls, self.internals, self.returns)
        if self.initial is None:
            return out
        R = self.reach()
        ctx_seen = set()
        work = deque()
        for f in R[self.initial] & self.accepting:
            work.append((self.initial, f))
        useful_states = set()
        while work:
            e, x = work.popleft()
            if (e, x) in ctx_seen:
                continue
            ctx_seen.add((e, x))
            for q in R[e]:
                if x not in R[q]:
                    continue
                useful_states.add(q)
                for a, q2 in self.int_out.get(q, ()):
                    if x in R[q2]:
                        out.add_internal(q, a, q2)
                for c, q1, g in self.call_out.get(q, ()):
                    for q2 in R[q1]:
                        for r, g2, q3 in self.ret_out.get(q2, ()):
                            if g2 == g and x in R[q3]:
                                out.add_call(q, c, q1, g)
                                out.add_return(q2, r, g, q3)
                                work.append((q1, q2))
        out.states |= useful_states | {self.initial}
        out.initial = self.initial
        out.accepting = self.accepting & useful_states
        return out

    # -- shortest words --

    def shortest_word(self) -> Optional[tuple]:
        """A shortest accepted word, least in ``symbol_key`` order among
        words of that length; ``None`` when the language is empty."""
        if self.is_empty():
            return None
        a = self.trim()
        part = a.partition
        key = {s: symbol_key(s, part) for s in a.alphabet}
        # best[n][(p, q)] = least well-matched word of length n from p to q
        entries = {a.initial} | {q1 for ts in a.call_out.values() for (_, q1, _) in ts}
        best: list = [{(p, p): () for p in entries}]
        by_src: list = [defaultdict(list)]
        for (p, q), w in best[0].items():
            by_src[0][p].append((q, w))

        def better(old, new):
            return old is None or [key[s] for s in new] < [key[s] for s in old]

        n = 0
        while True:
            hits = [best[n][(a.initial, f)] for f in a.accepting if (a.initial, f) in best[n]]
            if hits:
                return min(hits, key=lambda w: [key[s] for s in w])
            n += 1
            level: dict = {}
            if n >= 1:
                for (p, q), w in best[n - 1].items():
                    for sym, q2 in a.int_out.get(q, ()):
                        cand = w + (sym,)
                        if better(level.get((p, q2)), cand):
                            level[(p, q2)] = cand
            for k in range(0, n - 1):
                inner_len = n - 2 - k
                for (p, qc), u in best[k].items():
                    for c, q1, g in a.call_out.get(qc, ()):
                        for q2, v in by_src[inner_len].get(q1, ()):
                            for r, g2, q3 in a.ret_out.get(q2, ()):
                                if g2 != g:
                                    continue
                                cand = u + (c,) + v + (r,)
                                if better(level.get((p, q3)), cand):
                                    level[(p, q3)] = cand
            best.append(level)
            idx = defaultdict(list)
            for (p, q), w in level.items():
                idx[p].append((q, w))
            by_src.append(idx)

    # -- export --

    def to_dot(self) -> str:
        ids = {q: i for i, q in enumerate(sorted(self.states, key=repr))}
        lines = ["digraph vpda {", "  rankdir=LR;"]
        for q, i in ids.items():
            shape = "doublecircle" if q in self.accepting else "circle"
            lines.append(f'  {i} [shape={shape}, label="{_esc(q)}"];')
        if self.initial is not None:
            lines.append("  start [shape=point];")
            lines.append(f"  start -> {ids[self.initial]};")
        for kind, q, sym, g, q2 in sorted(self.transitions(), key=repr):
            text = _sym_text(sym)
            if kind == "call":
                text += f" +{_esc(g)}"
            elif kind == "return":
                text += f" -{_esc(g)}"
            lines.append(f'  {ids[q]} -> {ids[q2]} [label="{text}"];')
        lines.append("}")
        return "\n".join(lines)


def _sym_text(sym) -> str:
    return _esc(getattr(sym, "lexeme", sym))


def _esc(x) -> str:
    return str(x).replace("\\", "\\\\").replace('"', '\\"')


# -- algebra -------------------------------------------------------------------


def joint_partition(a: Vpda, b: Vpda) -> tuple:
    calls = a.calls | b.calls
    internals = a.internals | b.internals
    returns = a.returns | b.returns
    if calls & internals or calls & returns or internals & returns:
        raise PartitionMismatch("the automata classify some symbol differently")
    return calls, internals, returns


def product(a: Vpda, b: Vpda) -> Vpda:
    """Intersection; only pairs reachable while ignoring the stack are built."""
    out = Vpda(*joint_partition(a, b))
    if a.initial is None or b.initial is None:
        return out
    init = (a.initial, b.initial)
    out.initial = init
    out.add_state(init)
    seen = {init}
    work = deque([init])
    while work:
        p, q = work.popleft()
        succ = []
        for c, p2, g1 in a.call_out.get(p, ()):
            for c2, q2, g2 in b.call_out.get(q, ()):
                if c == c2:
                    out.add_call((p, q), c, (p2, q2), (g1, g2))
                    succ.append((p2, q2))
        for s, p2 in a.int_out.get(p, ()):
            for s2, q2 in b.int_out.get(q, ()):
                if s == s2:
                    out.add_internal((p, q), s, (p2, q2))
                    succ.append((p2, q2))
        for r, g1, p2 in a.ret_out.get(p, ()):
            for r2, g2, q2 in b.ret_out.get(q, ()):
                if r == r2:
                    out.add_return((p, q), r, (g1, g2), (p2, q2))
                    succ.append((p2, q2))
        for s in succ:
            if s not in seen:
                seen.add(s)
                work.append(s)
        if p in a.accepting and q in b.accepting:
            out.accepting.add((p, q))
    return out


def union(a: Vpda, b: Vpda) -> Vpda:
    """Disjoint union with a fresh initial state."""
    return _disjoint_union([a, b])


def union_all(automata: Sequence[Vpda]) -> Optional[Vpda]:
    if not automata:
        return None
    if len(automata) == 1:
        return automata[0]
    return _disjoint_union(automata)


def _disjoint_union(automata: Sequence[Vpda]) -> Vpda:
    calls, internals, returns = set(), set(), set()
    for m in automata:
        calls, internals, returns = joint_partition(
            Vpda(calls, internals, returns), Vpda(m.calls, m.internals, m.returns))
    out = Vpda(calls, internals, returns)
    init = ("∪",)
    out.initial = init
    out.add_state(init)
    for tag, m in enumerate(automata):
        if m.initial is None:
            continue
        for q in m.states:
            out.add_state((tag, q))
        for kind, q, sym, g, q2 in m.transitions():
            sources = [(tag, q)] + ([init] if q == m.initial and kind != "return" else [])
            for src in sources:
                if kind == "call":
                    out.add_call(src, sym, (tag, q2), (tag, g))
                elif kind == "internal":
                    out.add_internal(src, sym, (tag, q2))
                else:
                    out.add_return(src, sym, (tag, g), (tag, q2))
        out.accepting |= {(tag, q) for q in m.accepting}
        if m.initial in m.accepting:
            out.accepting.add(init)
    return out


def _call_target(a: Vpda, pairs, c):
    nxt = set()
    for _, q1 in pairs:
        for c2, q2, g in a.call_out.get(q1, ()):
            if c2 == c:
                nxt.add(((q1, g), q2))
    return (frozenset(nxt), False)


def _int_target(a: Vpda, pairs, s, top):
    nxt = set()
    for e, q in pairs:
        for s2, q2 in a.int_out.get(q, ()):
            if s2 == s:
                nxt.add((e, q2))
    return (frozenset(nxt), top)


def _ret_target(a: Vpda, pairs, r, below):
    bpairs, btop = below
    by_q1 = defaultdict(set)
    for e, q1 in bpairs:
        by_q1[q1].add(e)
    nxt = set()
    for entry, q in pairs:
        if entry is None:
            continue
        q1, g = entry
        for r2, g2, q3 in a.ret_out.get(q, ()):
            if r2 == r and g2 == g:
                for e in by_q1.get(q1, ()):
                    nxt.add((e, q3))
    return (frozenset(nxt), btop)


def _accepts_outside(a: Vpda, d) -> bool:
    pairs, top = d
    return top and any(e is None and s in a.accepting for e, s in pairs)


def determinize(a: Vpda, partition=None, max_states: int = DEFAULT_MAX_STATES):
    """Deterministic automaton for ``a`` over ``partition``.

    A state is ``(pairs, top)``: ``pairs`` holds ``(entry, q)`` where
    ``entry`` is ``None`` at the outermost level and otherwise the
    ``(caller state, pushed symbol)`` of the innermost open call; ``top``
    says whether the stack is empty.  Calls push the current state.
    Accepting states are the top-level ones holding an accepting state of
    ``a`` outside any call.
    """
    calls, internals, returns = partition or (a.calls, a.internals, a.returns)
    out = Vpda(calls, internals, returns)
    init = (frozenset({(None, a.initial)}) if a.initial is not None else frozenset(), True)
    out.initial = init
    tops: dict = defaultdict(set)      # det state -> possible stack tops
    inherit: dict = defaultdict(set)   # X -> states whose tops include tops[X]
    work: deque = deque()
    queued: set = set()

    def grow(d, syms) -> None:
        out.add_state(d)  # add_* may have added it already
        if len(out.states) > max_states:
            raise SizeLimitExceeded(f"determinization exceeded {max_states} states")
        if not syms <= tops[d]:
            tops[d] |= syms
            if d not in queued:
                queued.add(d)
                work.append(d)

    grow(init, {None})
    while work:
        d = work.popleft()
        queued.discard(d)
        pairs, top = d
        for c in calls:
            d2 = _call_target(a, pairs, c)
            out.add_call(d, c, d2, d)
            grow(d2, {d})
        for s in internals:
            d2 = _int_target(a, pairs, s, top)
            out.add_internal(d, s, d2)
            grow(d2, set(tops[d]))
        if not top:
            for below in list(tops[d]):
                if below is None:
                    continue
                for r in returns:
                    d3 = _ret_target(a, pairs, r, below)
                    out.add_return(d, r, below, d3)
                    inherit[below].add(d3)
                    grow(d3, set(tops[below]))
        for y in list(inherit[d]):
            grow(y, set(tops[d]))
    out.accepting = {q for q in out.states if _accepts_outside(a, q)}
    return out


def complement(a: Vpda, partition=None, max_states: int = DEFAULT_MAX_STATES) -> Vpda:
    """Well-matched words over ``partition`` that ``a`` rejects."""
    d = determinize(a, partition, max_states)
    d.accepting = {q for q in d.states if q[1] and not _accepts_outside(a, q)}
    return d


def difference(a: Vpda, b: Vpda, max_states: int = DEFAULT_MAX_STATES) -> Vpda:
    """Words of ``a`` that ``b`` rejects.

    Same as ``product(a, complement(b))``, but the subset construction for
    ``b`` runs in lockstep with ``a``, so only subsets reachable on words
    ``a`` can read are built.  A state is ``(p, d)`` with ``p`` a state of
    ``a`` and ``d`` a determinized state of ``b``; a call pushes the
    symbol of ``a`` together with the calling product state.
    """
    out = Vpda(*joint_partition(a, b))
    if a.initial is None:
        return out
    dinit = (frozenset({(None, b.initial)}) if b.initial is not None else frozenset(), True)
    init = (a.initial, dinit)
    out.initial = init
    tops: dict = defaultdict(set)      # product state -> possible stack tops
    inherit: dict = defaultdict(set)
    work: deque = deque()
    queued: set = set()

    def grow(x, syms) -> None:
        out.add_state(x)
        if len(out.states) > max_states:
            raise SizeLimitExceeded(f"difference exceeded {max_states} states")
        if not syms <= tops[x]:
            tops[x] |= syms
            if x not in queued:
                queued.add(x)
                work.append(x)

    memo: dict = {}

    def cached(fn, *args):
        key = (fn, args)
        if key not in memo:
            memo[key] = fn(b, *args)
        return memo[key]

    grow(init, {None})
    while work:
        x = work.popleft()
        queued.discard(x)
        p, d = x
        pairs, top = d
        for c, p2, g in a.call_out.get(p, ()):
            y = (p2, cached(_call_target, pairs, c))
            out.add_call(x, c, y, (g, x))
            grow(y, {(g, x)})
        for s, p2 in a.int_out.get(p, ()):
            y = (p2, cached(_int_target, pairs, s, top))
            out.add_internal(x, s, y)
            grow(y, set(tops[x]))
        if not top:
            for sym in list(tops[x]):
                if sym is None:
                    continue
                pushed, below = sym
                for r, g, p3 in a.ret_out.get(p, ()):
                    if g != pushed:
                        continue
                    y = (p3, cached(_ret_target, pairs, r, below[1]))
                    out.add_return(x, r, sym, y)
                    inherit[below].add(y)
                    grow(y, set(tops[below]))
        for y in list(inherit[x]):
            grow(y, set(tops[x]))
    out.accepting = {
        (p, d) for p, d in out.states
        if p in a.accepting and d[1] and not _accepts_outside(b, d)
    }
    return out


def words_upto(a: Vpda, n: int) -> set:
    """Accepted words of length at most ``n`` (configuration search)."""
    out = set()
    if a.initial is None:
        return out
    alphabet = a.alphabet
    layer = {(): {(a.initial, ())}}
    for length in range(n + 1):
        nxt = {}
        for w, configs in layer.items():
            if any(q in a.accepting and not st for q, st in configs):
                out.add(w)
            if length == n:
                continue
            for s in alphabet:
                c2 = a.step(configs, s)
                c2 = {c for c in c2 if len(c[1]) <= n - length - 1}
                if c2:
                    nxt[w + (s,)] = c2
        layer = nxt
    return out


def all_words(alphabet: Sequence, n: int):
    for k in range(n + 1):
        yield from itertools.product(alphabet, repeat=k)
