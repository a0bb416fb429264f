"""Parsing and ambiguity analysis for syntax definitions that are allowed
to be ambiguous, as long as every parse tree can still be written down
unambiguously with enough grouping parentheses.

The pieces, bottom up:

* ``grammar_def``      labelled productions with marks (forbidden children)
* ``grammar_gen``      abstract/concrete CFGs, tree grammars, regex -> DFA
* ``forest_parser``    tokenizer, Earley parser, parse trees
* ``encoding``         canonical linear encoding of the words of a tree
* ``vpda``             visibly pushdown automata and their algebra
* ``dynamic_analysis`` per-word resolvability with minimal witnesses
* ``static_analysis``  per-grammar resolvability for a decidable subclass
* ``syncon_dsl``       the ``.syn`` frontend
* ``cli``              ``check`` / ``parse`` / ``analyze``
"""

from .grammar_def import (
    Alt,
    Diagnostic,
    Eps,
    LanguageDefinition,
    NonTerm,
    Production,
    Seq,
    Star,
    Term,
    Terminal,
    check_balanced,
    check_unit_cycles,
    validate,
)
from .forest_parser import Leaf, Node, parse_string, parse_word, tokenize
from .dynamic_analysis import analyze_trees, resolve_word
from .static_analysis import check_static, classify
from .syncon_dsl import elaborate, load_grammar, parse_dsl

__all__ = [
    "Alt",
    "Diagnostic",
    "Eps",
    "LanguageDefinition",
    "Leaf",
    "Node",
    "NonTerm",
    "Production",
    "Seq",
    "Star",
    "Term",
    "Terminal",
    "analyze_trees",
    "check_balanced",
    "check_static",
    "check_unit_cycles",
    "classify",
    "elaborate",
    "load_grammar",
    "parse_dsl",
    "parse_string",
    "parse_word",
    "resolve_word",
    "tokenize",
    "validate",
]
