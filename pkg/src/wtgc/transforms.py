"""Grammar-to-grammar constructions.

Everything here is a pure function from grammars to grammars: lhs
normalization, Boolean final weights, elimination of zero-weight
derivations, support extraction, constraint determination, disjoint
union, Hadamard product, the powerset disambiguation, support
restriction/complement, and relabeling of eq-restricted grammars.
Each construction is paired with a bounded evaluation oracle in the
test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import TransformError
from .grammar import (
    Production,
    Wtgc,
    classify,
    eq_restriction,
    fresh_name,
    rename_nonterminals,
)
from .semiring import BOOLEAN, Semiring, SemiringHom, support_hom
from .trees import (
    RankedAlphabet,
    Tree,
    dissatisfies_all,
    leaf,
    satisfies_all,
    term_str,
    trees_of_size,
)


def _mangle(t: Tree) -> str:
    """Serialized tree as a nonterminal-safe name."""
    return (term_str(t).replace("(", "[").replace(")", "]")
            .replace(",", ";"))


# -- normalization ---------------------------------------------------------


def normalize(g: Wtgc) -> Wtgc:
    """Equivalent WTAc: every lhs becomes sigma(q1...qk) by abbreviating
    proper subtrees with fresh nonterminals named after them.  Already
    normalized grammars come back unchanged."""
    cls = classify(g)
    if cls.normalized:
        return g
    s = g.semiring
    nonterminals = set(g.nonterminals)
    final = dict(g.final)
    productions = set(g.productions)
    names: dict[Tree, str] = {}
    taken = nonterminals | set(g.alphabet.names())

    def abbreviation(sub: Tree) -> str:
        if sub not in names:
            name = fresh_name(_mangle(sub), taken)
            names[sub] = name
            taken.add(name)
            nonterminals.add(name)
            final[name] = s.zero
        return names[sub]

    while True:
        worklist = sorted(
            (p for p in productions
             if not all(c.label in nonterminals and not c.children
                        for c in p.lhs.children)),
            key=lambda p: term_str(p.lhs))
        if not worklist:
            break
        p = worklist[0]
        children = []
        for sub in p.lhs.children:
            if sub.label in nonterminals and not sub.children:
                children.append(sub)
                continue
            name = abbreviation(sub)
            productions.add(Production(sub, name, s.one))
            children.append(leaf(name))
        productions.remove(p)
        productions.add(Production(Tree(p.lhs.label, children), p.target,
                                   p.weight, p.eq, p.ineq))
    return Wtgc(nonterminals, g.alphabet, final, productions, s)


def boolean_finals(g: Wtgc) -> Wtgc:
    """Equivalent grammar with final weights in {0, 1}: accepting copies
    of the final-supported nonterminals pre-apply the final weight."""
    s = g.semiring
    nonterminals = set(g.nonterminals)
    taken = nonterminals | set(g.alphabet.names())
    copies = {}
    for q in g.final_support():
        copies[q] = fresh_name(q + "#f", taken)
        taken.add(copies[q])
        nonterminals.add(copies[q])
    productions = set(g.productions)
    for p in g.productions:
        if p.target in copies:
            weight = s.mul(p.weight, g.final[p.target])
            if weight != s.zero:
                productions.add(Production(p.lhs, copies[p.target], weight,
                                           p.eq, p.ineq))
    final = {q: s.zero for q in g.nonterminals}
    final.update({c: s.one for c in copies.values()})
    return Wtgc(nonterminals, g.alphabet, final, productions, s)


# -- elimination of zero-weight derivations --------------------------------


@dataclass(frozen=True)
class DicksonVector:
    """Capped exponent profile of the non-unit production weights.

    Addition is entrywise and saturates at the cap; by upward closure of
    the zero set of the induced monoid map, saturation never turns a
    zero product into a nonzero one.
    """

    exponents: tuple[int, ...]
    cap: int

    def oplus(self, other: "DicksonVector") -> "DicksonVector":
        return DicksonVector(
            tuple(min(a + b, self.cap)
                  for a, b in zip(self.exponents, other.exponents)),
            self.cap)


def _zero_setup(g: Wtgc):
    s = g.semiring
    weights = sorted({p.weight for p in g.productions if p.weight != s.one},
                     key=s.format)
    if s.zero_divisor_free:
        # products of nonzero elements stay nonzero, so any cap is sound
        cap = 0
    else:
        cap = max((sum(s.power_profile(w)) for w in weights), default=0)
    index = {w: i for i, w in enumerate(weights)}

    def unit(weight) -> DicksonVector:
        exps = [0] * len(weights)
        if weight in index:
            exps[index[weight]] = min(1, cap)
        return DicksonVector(tuple(exps), cap)

    def value(vec: DicksonVector):
        return s.prod(s.power(w, e) for w, e in zip(weights, vec.exponents))

    zero_vec = DicksonVector((0,) * len(weights), cap)
    return unit, value, zero_vec


def eliminate_zero_derivations(g: Wtgc) -> Wtgc:
    """Equivalent grammar in which every complete derivation has nonzero
    weight.

    Nonterminals are pairs of an original nonterminal and a capped
    exponent vector over the non-unit production weights; combinations
    whose tracked product hits zero are never created.  Only pairs
    reachable bottom-up are materialized, which also keeps the sink of
    an eq-restricted input a sink.
    """
    s = g.semiring
    unit, value, _ = _zero_setup(g)
    value_cache: dict[DicksonVector, object] = {}

    def nonzero(vec):
        if vec not in value_cache:
            value_cache[vec] = value(vec)
        return value_cache[vec] != s.zero

    taken = set(g.alphabet.names())
    names: dict[tuple, str] = {}

    def name_of(q: str, vec: DicksonVector) -> str:
        key = (q, vec)
        if key not in names:
            base = f"{q}#[{'.'.join(str(e) for e in vec.exponents)}]"
            names[key] = fresh_name(base, taken)
            taken.add(names[key])
        return names[key]

    decs = {p: g.decompose(p) for p in g.productions}
    vectors: dict[str, list[DicksonVector]] = {q: [] for q in g.nonterminals}
    productions = set()
    done = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            dec = decs[p]
            pools = [vectors[state] for state in dec.states]
            if any(not pool for pool in pools):
                continue
            for combo in itertools.product(*[tuple(pool) for pool in pools]):
                key = (p, combo)
                if key in done:
                    continue
                done.add(key)
                changed = True
                vec = unit(p.weight)
                for child in combo:
                    vec = vec.oplus(child)
                if not nonzero(vec):
                    continue
                if vec not in vectors[p.target]:
                    vectors[p.target].append(vec)
                lhs = p.lhs
                for state, child, w in zip(dec.states, combo, dec.positions):
                    lhs = _relabel_leaf(lhs, w, name_of(state, child))
                productions.add(Production(lhs, name_of(p.target, vec),
                                           p.weight, p.eq, p.ineq))
    nonterminals = set()
    final = {}
    for q, vecs in vectors.items():
        for vec in vecs:
            name = name_of(q, vec)
            nonterminals.add(name)
            final[name] = g.final[q]
    return Wtgc(nonterminals, g.alphabet, final, productions, s)


def _relabel_leaf(t: Tree, w, new_label: str) -> Tree:
    if not w:
        return leaf(new_label)
    children = list(t.children)
    children[w[0] - 1] = _relabel_leaf(children[w[0] - 1], w[1:], new_label)
    return Tree(t.label, children)


# -- support ----------------------------------------------------------------


def support_grammar(g: Wtgc) -> Wtgc:
    """A Boolean grammar whose evaluation is 1 exactly on the support of
    g; requires a zero-sum free semiring."""
    s = g.semiring
    if not s.zero_sum_free:
        raise TransformError(f"{s.name} is not zero-sum free")
    h = eliminate_zero_derivations(boolean_finals(g))
    productions = {Production(p.lhs, p.target, 1, p.eq, p.ineq)
                   for p in h.productions}
    final = {q: 1 if h.final[q] != s.zero else 0 for q in h.nonterminals}
    return Wtgc(h.nonterminals, h.alphabet, final, productions, BOOLEAN)


# -- constraint determination and products ----------------------------------


def constraint_determine(g: Wtgc) -> Wtgc:
    """Equivalent WTAc in which no two productions differ only in their
    constraint sets: the target of each production is annotated with the
    production's identity and child annotations are expanded."""
    if not classify(g).normalized:
        raise TransformError("constraint determination needs a WTAc")
    s = g.semiring
    pairs = [(q, p) for q in sorted(g.nonterminals) for p in g.productions]
    taken = set(g.alphabet.names())
    names = {}
    for q, p in pairs:
        names[(q, p)] = fresh_name(f"{q}#{g.prod_id(p)}", taken)
        taken.add(names[(q, p)])
    productions = set()
    for p in g.productions:
        dec = g.decompose(p)
        choices = [[names[(state, rho)] for rho in g.productions]
                   for state in dec.states]
        for combo in itertools.product(*choices):
            lhs = Tree(p.lhs.label, [leaf(name) for name in combo])
            productions.add(Production(lhs, names[(p.target, p)], p.weight,
                                       p.eq, p.ineq))
    final = {names[(q, p)]: g.final[q] for q, p in pairs}
    return Wtgc(set(names.values()), g.alphabet, final, productions, s)


def disjoint_union(g: Wtgc, g2: Wtgc) -> Wtgc:
    """Pointwise semiring sum of the two weighted tree languages."""
    _check_compatible(g, g2)
    s = g.semiring
    rename = {}
    nonterminals = set(g.nonterminals)
    taken = nonterminals | set(g.alphabet.names())
    for q in sorted(g2.nonterminals):
        rename[q] = fresh_name(q, taken)
        taken.add(rename[q])
        nonterminals.add(rename[q])
    productions = set(g.productions)
    for p in g2.productions:
        productions.add(Production(rename_nonterminals(p.lhs, rename),
                                   rename[p.target], p.weight, p.eq, p.ineq))
    final = dict(g.final)
    final.update({rename[q]: w for q, w in g2.final.items()})
    return Wtgc(nonterminals, g.alphabet, final, productions, s)


def hadamard(g: Wtgc, g2: Wtgc) -> Wtgc:
    """Pointwise semiring product, via the pair construction on
    constraint-determined WTAc (inputs are normalized and determined on
    demand)."""
    _check_compatible(g, g2)
    s = g.semiring
    a = _determined(g)
    b = _determined(g2)
    pair = {}
    taken = set(g.alphabet.names())
    for x in sorted(a.nonterminals):
        for y in sorted(b.nonterminals):
            pair[(x, y)] = fresh_name(f"{x}*{y}", taken)
            taken.add(pair[(x, y)])
    productions = set()
    by_symbol = {}
    for p2 in b.productions:
        by_symbol.setdefault(p2.lhs.label, []).append(p2)
    for p in a.productions:
        dec = a.decompose(p)
        for p2 in by_symbol.get(p.lhs.label, ()):
            weight = s.mul(p.weight, p2.weight)
            if weight == s.zero:
                continue
            dec2 = b.decompose(p2)
            lhs = Tree(p.lhs.label,
                       [leaf(pair[(x, y)])
                        for x, y in zip(dec.states, dec2.states)])
            productions.add(Production(lhs, pair[(p.target, p2.target)],
                                       weight, p.eq | p2.eq,
                                       p.ineq | p2.ineq))
    final = {pair[(x, y)]: s.mul(a.final[x], b.final[y])
             for x in a.nonterminals for y in b.nonterminals}
    return Wtgc(set(pair.values()), g.alphabet, final, productions, s)


def _determined(g: Wtgc) -> Wtgc:
    cls = classify(g)
    if not cls.normalized:
        g = normalize(g)
        cls = classify(g)
    if not cls.constraint_determined:
        g = constraint_determine(g)
    return g


def _check_compatible(g: Wtgc, g2: Wtgc):
    if g.semiring != g2.semiring:
        raise TransformError("semiring mismatch")
    if g.alphabet != g2.alphabet:
        raise TransformError("alphabet mismatch")


# -- disambiguation ----------------------------------------------------------


@dataclass(frozen=True)
class PowersetState:
    """A total map from the input grammar's nonterminals into the target
    semiring, stored as values aligned with the sorted nonterminals."""

    values: tuple

    def get(self, order: tuple, q: str):
        return self.values[order.index(q)]


def _state_name(state: PowersetState, order: tuple, target: Semiring) -> str:
    if target is BOOLEAN or target.name == "boolean":
        members = [q for q, v in zip(order, state.values) if v == 1]
        return f"set[{'.'.join(members)}]"
    inner = ".".join(f"{q}:{target.format(v)}"
                     for q, v in zip(order, state.values))
    return f"phi[{inner}]"


def disambiguate(g: Wtgc, hom: SemiringHom, state_cap: int = 1_000_000,
                 prune_unsat: int | None = None) -> Wtgc:
    """The powerset WTAc over the homomorphism's finite target.

    States are the reachable vectors of per-nonterminal image weights;
    for every symbol the constraints appearing on that symbol are split
    into every (satisfied, dissatisfied) bipartition, which makes the
    result unambiguous.  All production weights are the target's one.
    With `prune_unsat` set, splits not satisfiable by any tree of at
    most that size rooted in the symbol are dropped.
    """
    if not classify(g).normalized:
        raise TransformError("disambiguation needs a WTAc")
    if hom.source != g.semiring:
        raise TransformError("homomorphism source mismatch")
    target = hom.target
    if not target.finite:
        raise TransformError(f"{target.name} is not finite")

    order = tuple(sorted(g.nonterminals))
    by_symbol: dict[str, list] = {name: [] for name in g.alphabet.names()}
    collected: dict[str, set] = {name: set() for name in g.alphabet.names()}
    for p in g.productions:
        by_symbol[p.lhs.label].append((p, g.decompose(p)))
        collected[p.lhs.label].update(p.eq)
        collected[p.lhs.label].update(p.ineq)
    universe = {name: sorted(pairs) for name, pairs in collected.items()}

    splits = {}
    for name, pairs in universe.items():
        options = []
        for chosen in range(1 << len(pairs)):
            eq = frozenset(pairs[i] for i in range(len(pairs))
                           if chosen >> i & 1)
            ineq = frozenset(pairs) - eq
            if prune_unsat is not None and not _split_satisfiable(
                    g.alphabet, name, eq, ineq, prune_unsat):
                continue
            options.append((eq, ineq))
        splits[name] = options

    states: dict[PowersetState, str] = {}
    taken = set(g.alphabet.names())

    def register(state: PowersetState) -> str:
        if state not in states:
            if len(states) >= state_cap:
                raise TransformError(
                    f"powerset construction exceeded {state_cap} states")
            states[state] = fresh_name(_state_name(state, order, target),
                                       taken)
            taken.add(states[state])
        return states[state]

    productions = set()
    done = set()
    changed = True
    while changed:
        changed = False
        current = sorted(states, key=states.get)
        for name, rank in g.alphabet.symbols():
            for combo in itertools.product(current, repeat=rank):
                for eq, ineq in splits[name]:
                    key = (name, combo, eq, ineq)
                    if key in done:
                        continue
                    done.add(key)
                    changed = True
                    values = []
                    for q in order:
                        total = target.zero
                        for p, dec in by_symbol[name]:
                            if p.target != q or not p.eq <= eq \
                                    or not p.ineq <= ineq:
                                continue
                            term = hom(p.weight)
                            for child, state in zip(combo, dec.states):
                                term = target.mul(term,
                                                  child.get(order, state))
                            total = target.add(total, term)
                        values.append(total)
                    result = register(PowersetState(tuple(values)))
                    lhs = Tree(name, [leaf(states[c]) for c in combo])
                    productions.add(
                        Production(lhs, result, target.one, eq, ineq))
    final = {}
    for state, sname in states.items():
        total = target.zero
        for q in order:
            total = target.add(
                total, target.mul(hom(g.final[q]), state.get(order, q)))
        final[sname] = total
    return Wtgc(set(states.values()), g.alphabet, final, productions, target)


def _split_satisfiable(alphabet, name, eq, ineq, bound) -> bool:
    for size in range(1, bound + 1):
        for t in trees_of_size(alphabet, size):
            if t.label != name:
                continue
            if satisfies_all(t, eq) and dissatisfies_all(t, ineq):
                return True
    return False


def support_automaton(g: Wtgc) -> Wtgc:
    """An unambiguous Boolean WTAc recognizing the support of g; needs a
    zero-sum free and zero-divisor free semiring."""
    s = g.semiring
    hom = support_hom(s)  # rejects descriptors lacking either flag
    prepared = eliminate_zero_derivations(boolean_finals(normalize(g)))
    return disambiguate(prepared, hom)


def complement_support(g: Wtgc) -> Wtgc:
    """Flip the final set of the (complete) unambiguous support
    automaton; recognizes the complement of the support."""
    aut = support_automaton(g)
    final = {q: 1 if aut.final[q] == 0 else 0 for q in aut.nonterminals}
    return Wtgc(aut.nonterminals, aut.alphabet, final, aut.productions,
                BOOLEAN)


def lift_boolean(g: Wtgc, s: Semiring) -> Wtgc:
    """Reinterpret a Boolean grammar in another semiring by 0 -> 0,
    1 -> 1 on weights and finals."""
    if g.semiring != BOOLEAN:
        raise TransformError("can only lift Boolean grammars")
    productions = {Production(p.lhs, p.target, s.one, p.eq, p.ineq)
                   for p in g.productions if p.weight == 1}
    final = {q: s.one if g.final[q] == 1 else s.zero
             for q in g.nonterminals}
    return Wtgc(g.nonterminals, g.alphabet, final, productions, s)


def restrict_support(g: Wtgc, g2: Wtgc) -> Wtgc:
    """The weighted language of g restricted to the support of g2:
    evaluates to g's weight inside supp(g2) and to zero outside."""
    _check_compatible(g, g2)
    return hadamard(g, lift_boolean(support_automaton(g2), g.semiring))


# -- relabeling --------------------------------------------------------------


def relabel(g: Wtgc, pi: dict[str, str],
            target_alphabet: RankedAlphabet | None = None) -> Wtgc:
    """Apply a rank-preserving symbol map to an eq-restricted positive
    classic grammar; productions that collide after relabeling have
    their weights summed, and the sink productions are regenerated over
    the target alphabet."""
    er = eq_restriction(g)
    if er is None:
        raise TransformError("relabeling needs an eq-restricted grammar")
    s = g.semiring
    ranks = {}
    for name, rank in g.alphabet.symbols():
        if name not in pi:
            raise TransformError(f"relabeling undefined on {name!r}")
        if ranks.setdefault(pi[name], rank) != rank:
            raise TransformError(f"rank mismatch at {pi[name]!r}")
    if target_alphabet is None:
        target_alphabet = RankedAlphabet(ranks)
    else:
        for name, rank in ranks.items():
            if name not in target_alphabet \
                    or target_alphabet.rank(name) != rank:
                raise TransformError(f"rank mismatch at {name!r}")

    def relabel_tree(t: Tree) -> Tree:
        if not t.children and t.label in g.nonterminals:
            return t
        return Tree(pi[t.label], [relabel_tree(c) for c in t.children])

    collected: dict[tuple, object] = {}
    for p in g.productions:
        if p.target == er.sink:
            continue
        key = (relabel_tree(p.lhs), p.target, p.eq)
        collected[key] = s.add(collected.get(key, s.zero), p.weight)
    productions = {Production(lhs, target, weight, eq)
                   for (lhs, target, eq), weight in collected.items()
                   if weight != s.zero}
    for name, rank in target_alphabet.symbols():
        productions.add(Production(Tree(name, [leaf(er.sink)] * rank),
                                   er.sink, s.one))
    return Wtgc(g.nonterminals, target_alphabet, g.final, productions, s)
