"""Weighted tree grammars with subtree equality and inequality
constraints over pluggable commutative semirings."""

from .errors import WtgcError
from .grammar import Production, Wtgc, classify, eq_restriction
from .semantics import derivations, evaluate, state_weight
from .semiring import (
    ARCTIC,
    BOOLEAN,
    NATURAL,
    TROPICAL,
    IntegersMod,
    semiring_from_name,
    support_hom,
)
from .syntax import parse_grammar, parse_hom, parse_term, serialize_grammar
from .trees import RankedAlphabet, Tree, leaf

__all__ = [
    "ARCTIC",
    "BOOLEAN",
    "IntegersMod",
    "NATURAL",
    "Production",
    "RankedAlphabet",
    "TROPICAL",
    "Tree",
    "Wtgc",
    "WtgcError",
    "classify",
    "derivations",
    "eq_restriction",
    "evaluate",
    "leaf",
    "parse_grammar",
    "parse_hom",
    "parse_term",
    "semiring_from_name",
    "serialize_grammar",
    "state_weight",
    "support_hom",
]
