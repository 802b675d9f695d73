"""Both semantics of a WTGc and the bridges between them.

`derivations` enumerates complete left-most derivations exactly as the
recursive decomposition prescribes: match a production whose decomposed
context is a prefix of the tree, check the constraints on the subtree
being matched, recurse on the cut-out subtrees.  `state_weight` is the
memoized initial-algebra weight map; summing derivation weights must
agree with it, which the test suite uses as the master oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import GrammarError
from .grammar import Wtgc
from .trees import (
    Position,
    Tree,
    dissatisfies_all,
    enumerate_trees,
    is_variable,
    leaf,
    leftmost_key,
    replace,
    satisfies_all,
    subtree,
    subtree_or_none,
)


@dataclass(frozen=True)
class Derivation:
    """A sequence of (production, position) steps for a fixed input tree.

    The input tree is part of the identity: constraints are checked on
    subtrees of the original input, so the same step list is meaningless
    for any other tree.
    """

    steps: tuple
    input: Tree
    target: str | None

    def __len__(self):
        return len(self.steps)


def _match(context: Tree, t: Tree, out: list) -> bool:
    """Match a decomposed context against t, collecting the subtrees cut
    out at the variable positions in index order."""
    if not context.children and is_variable(context.label):
        out.append(t)
        return True
    if context.label != t.label or len(context.children) != len(t.children):
        return False
    return all(_match(c, s, out) for c, s in zip(context.children, t.children))


def _derive(g: Wtgc, t: Tree, q: str, memo: dict) -> tuple:
    """Step lists (relative to t) of all complete left-most derivations
    of t to q."""
    key = (q, t)
    if key in memo:
        return memo[key]
    result = []
    for p, dec in g.matchers(q, t.label):
        subs: list[Tree] = []
        if not _match(dec.context, t, subs):
            continue
        if not satisfies_all(t, p.eq) or not dissatisfies_all(t, p.ineq):
            continue
        child_steps = [_derive(g, sub, state, memo)
                       for sub, state in zip(subs, dec.states)]
        if any(not options for options in child_steps):
            continue
        for combo in itertools.product(*child_steps):
            steps = []
            for w, block in zip(dec.positions, combo):
                steps.extend((pp, w + ww) for pp, ww in block)
            steps.append((p, ()))
            result.append(tuple(steps))
    memo[key] = tuple(result)
    return memo[key]


def derivations(g: Wtgc, t: Tree, q: str) -> list[Derivation]:
    """All complete left-most derivations of g for t to q."""
    memo = g._cache.setdefault("derivations", {})
    return [Derivation(steps, t, q) for steps in _derive(g, t, q, memo)]


def derivation_weight(g: Wtgc, d: Derivation):
    """Product of the step weights in the grammar's semiring."""
    s = g.semiring
    total = s.one
    for p, _ in d.steps:
        g.prod_id(p)  # raises on foreign productions
        total = s.mul(total, p.weight)
    return total


def replay_derivation(g: Wtgc, d: Derivation) -> bool:
    """Re-run a derivation step by step against its input tree.

    Checks the sentential-form rewriting, the constraint relativization
    to the original input, the left-most step order, and the final
    nonterminal.  This is deliberately independent of `derivations`.
    """
    t = d.input
    form = t
    previous = None
    for p, w in d.steps:
        try:
            g.prod_id(p)
        except GrammarError:
            return False
        if previous is not None and leftmost_key(w) <= leftmost_key(previous):
            return False
        previous = w
        at = subtree_or_none(form, w)
        if at is None or at != p.lhs:
            return False
        checked = subtree_or_none(t, w)
        if checked is None:
            return False
        if not satisfies_all(checked, p.eq):
            return False
        if not dissatisfies_all(checked, p.ineq):
            return False
        form = replace(form, leaf(p.target), w)
    return form == leaf(d.target)


def state_weight(g: Wtgc, q: str, t: Tree):
    """The initial-algebra weight of t at nonterminal q."""
    memo = g._cache.setdefault("state_weight", {})
    return _state_weight(g, q, t, memo)


def _state_weight(g: Wtgc, q: str, t: Tree, memo: dict):
    key = (q, t)
    if key in memo:
        return memo[key]
    s = g.semiring
    total = s.zero
    for p, dec in g.matchers(q, t.label):
        subs: list[Tree] = []
        if not _match(dec.context, t, subs):
            continue
        if not satisfies_all(t, p.eq) or not dissatisfies_all(t, p.ineq):
            continue
        weight = p.weight
        for sub, state in zip(subs, dec.states):
            weight = s.mul(weight, _state_weight(g, state, sub, memo))
            if weight == s.zero:
                break
        total = s.add(total, weight)
    memo[key] = total
    return total


def evaluate(g: Wtgc, t: Tree):
    """The weight the grammar assigns to t: sum of F_q * wt_q(t)."""
    s = g.semiring
    total = s.zero
    for q in g.final_support():
        total = s.add(total, s.mul(g.final[q], state_weight(g, q, t)))
    return total


def incorporated(d: Derivation, w: Position) -> Derivation:
    """The derivation for the subtree at w hidden inside d: the steps at
    or below w, with the prefix stripped."""
    sub = subtree(d.input, w)
    n = len(w)
    steps = tuple((p, pos[n:]) for p, pos in d.steps if pos[:n] == w)
    target = None
    if steps and steps[-1][1] == ():
        target = steps[-1][0].target
    return Derivation(steps, sub, target)


def check_unambiguous_upto(g: Wtgc, max_size: int):
    """First tree (size order, then serialized form) carrying more than
    one complete left-most derivation to the final support, if any."""
    supp = g.final_support()
    for t in enumerate_trees(g.alphabet, max_size):
        count = 0
        for q in supp:
            count += len(derivations(g, t, q))
            if count > 1:
                return t
    return None
