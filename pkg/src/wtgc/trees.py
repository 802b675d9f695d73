"""Ranked alphabets, finite ordered trees, positions and constraints.

Positions are tuples of 1-based child indices; the empty tuple is the
root.  In files and diagnostics a position prints as dot-separated
integers (``1.1``, ``2``) with ``e`` for the root, since juxtaposed
digits are ambiguous above rank 9.

Labels are plain strings.  Names matching ``x1, x2, ...`` are reserved
for substitution variables; whether another label is an alphabet symbol
or a nonterminal is decided by the surrounding grammar.
"""

from __future__ import annotations

import itertools
import re

from .errors import InvalidPositionError, TreeError

Position = tuple

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_'#\[\];.:*]*")
_VAR_RE = re.compile(r"x[1-9][0-9]*\Z")


def is_variable(label: str) -> bool:
    return bool(_VAR_RE.match(label))


def variable(i: int) -> str:
    return f"x{i}"


def valid_name(label: str) -> bool:
    return bool(NAME_RE.fullmatch(label))


class RankedAlphabet:
    """Finite map from symbol names to ranks."""

    __slots__ = ("_items", "_ranks")

    def __init__(self, symbols):
        items = tuple(sorted(dict(symbols).items()))
        for name, rank in items:
            if not valid_name(name) or is_variable(name):
                raise TreeError(f"bad symbol name {name!r}")
            if not isinstance(rank, int) or rank < 0:
                raise TreeError(f"bad rank for {name!r}")
        self._items = items
        self._ranks = dict(items)

    def rank(self, name: str) -> int:
        try:
            return self._ranks[name]
        except KeyError:
            raise TreeError(f"unknown symbol {name!r}") from None

    def symbols(self):
        return self._items

    def names(self):
        return tuple(name for name, _ in self._items)

    def max_rank(self) -> int:
        return max((rank for _, rank in self._items), default=0)

    def __contains__(self, name):
        return name in self._ranks

    def __iter__(self):
        return iter(self.names())

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        return isinstance(other, RankedAlphabet) and self._items == other._items

    def __hash__(self):
        return hash(self._items)

    def __repr__(self):
        inner = " ".join(f"{n}:{r}" for n, r in self._items)
        return f"<alphabet {inner}>"


class Tree:
    """An immutable ordered tree with cached hash, size and height.

    Equality is structural; the height convention is max |w| over
    positions, so a single node has height 0.
    """

    __slots__ = ("label", "children", "size", "height", "_hash")

    def __init__(self, label: str, children=()):
        self.label = label
        self.children = tuple(children)
        size = 1
        height = 0
        for c in self.children:
            size += c.size
            if c.height + 1 > height:
                height = c.height + 1
        self.size = size
        self.height = height
        self._hash = hash((label, tuple(c._hash for c in self.children)))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Tree):
            return NotImplemented
        if self._hash != other._hash or self.label != other.label:
            return False
        if len(self.children) != len(other.children):
            return False
        return all(a == b for a, b in zip(self.children, other.children))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Tree({term_str(self)!r})"


def leaf(label: str) -> Tree:
    return Tree(label)


def term_str(t: Tree) -> str:
    if not t.children:
        return t.label
    return f"{t.label}({','.join(term_str(c) for c in t.children)})"


def pos_str(w: Position) -> str:
    return "e" if not w else ".".join(str(i) for i in w)


def parse_pos(text: str) -> Position:
    if text == "e":
        return ()
    try:
        parts = tuple(int(p) for p in text.split("."))
    except ValueError:
        raise InvalidPositionError(f"bad position {text!r}") from None
    if any(p < 1 for p in parts):
        raise InvalidPositionError(f"bad position {text!r}")
    return parts


def positions(t: Tree) -> list[Position]:
    """All positions of t, in depth-first left-to-right order."""
    out = []

    def walk(node, prefix):
        out.append(prefix)
        for i, c in enumerate(node.children, start=1):
            walk(c, prefix + (i,))

    walk(t, ())
    return out


def subtree_or_none(t: Tree, w: Position):
    node = t
    for i in w:
        if i < 1 or i > len(node.children):
            return None
        node = node.children[i - 1]
    return node


def subtree(t: Tree, w: Position) -> Tree:
    node = subtree_or_none(t, w)
    if node is None:
        raise InvalidPositionError(f"position {pos_str(w)} not in tree")
    return node


def replace(t: Tree, u: Tree, w: Position) -> Tree:
    """The substitution of u into t at w."""
    if not w:
        return u
    i = w[0]
    if i < 1 or i > len(t.children):
        raise InvalidPositionError(f"position {pos_str(w)} not in tree")
    children = list(t.children)
    children[i - 1] = replace(children[i - 1], u, w[1:])
    return Tree(t.label, children)


def substitute(t: Tree, theta: dict) -> Tree:
    """Simultaneous substitution; labels outside theta stay fixed."""
    if not t.children:
        return theta.get(t.label, t)
    return Tree(t.label, [substitute(c, theta) for c in t.children])


def yield_of(t: Tree, keep=is_variable) -> tuple[str, ...]:
    """Left-to-right sequence of the indexed leaves (variables by default)."""
    if not t.children:
        return (t.label,) if keep(t.label) else ()
    out = []
    for c in t.children:
        out.extend(yield_of(c, keep))
    return tuple(out)


def height_and_size(t: Tree) -> tuple[int, int]:
    return t.height, t.size


def satisfies(t: Tree, constraint) -> bool:
    """True iff both positions exist in t and address equal subtrees."""
    v, w = constraint
    a = subtree_or_none(t, v)
    if a is None:
        return False
    b = subtree_or_none(t, w)
    return b is not None and a == b


def satisfies_all(t: Tree, constraints) -> bool:
    return all(satisfies(t, c) for c in constraints)


def dissatisfies_all(t: Tree, constraints) -> bool:
    """Every single pair dissatisfied; strictly stronger than not
    satisfying the whole set."""
    return all(not satisfies(t, c) for c in constraints)


_POS_INF = float("inf")


def leftmost_key(w: Position):
    """Sort key realizing the derivation order: lexicographic with
    prefixes larger, so the root is the largest position."""
    return w + (_POS_INF,)


def _compositions(total: int, parts: int):
    """All ways to write total as an ordered sum of `parts` positive ints."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


_ENUM_CACHE: dict[RankedAlphabet, list] = {}


def trees_of_size(alphabet: RankedAlphabet, size: int) -> tuple[Tree, ...]:
    """All trees over the alphabet with exactly `size` nodes, sorted by
    their serialized form."""
    buckets = _ENUM_CACHE.setdefault(alphabet, [()])
    while len(buckets) <= size:
        n = len(buckets)
        bucket = []
        for name, rank in alphabet.symbols():
            if rank == 0:
                if n == 1:
                    bucket.append(Tree(name))
                continue
            for split in _compositions(n - 1, rank):
                for combo in itertools.product(*(buckets[s] for s in split)):
                    bucket.append(Tree(name, combo))
        bucket.sort(key=term_str)
        buckets.append(tuple(bucket))
    return buckets[size]


def enumerate_trees(alphabet: RankedAlphabet, max_size: int):
    """All trees of size <= max_size, by size then serialized form."""
    for n in range(1, max_size + 1):
        yield from trees_of_size(alphabet, n)
