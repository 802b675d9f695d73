import pytest

from conftest import gammas, t
from wtgc.errors import TransformError
from wtgc.grammar import (
    Production,
    Wtgc,
    classify,
    eq_restriction,
    production_str,
)
from wtgc.homomorphism import hom_image_stage_one
from wtgc.semantics import (
    check_unambiguous_upto,
    derivation_weight,
    derivations,
    evaluate,
    state_weight,
)
from wtgc.semiring import ARCTIC, BOOLEAN, NATURAL, support_hom
from wtgc.transforms import (
    boolean_finals,
    complement_support,
    constraint_determine,
    disambiguate,
    disjoint_union,
    eliminate_zero_derivations,
    hadamard,
    normalize,
    relabel,
    restrict_support,
    support_automaton,
    support_grammar,
)
from wtgc.trees import RankedAlphabet, enumerate_trees, leaf, term_str

ALPHA = leaf("alpha")


def assert_equivalent(g, h, size):
    for tree in enumerate_trees(g.alphabet, size):
        assert evaluate(g, tree) == evaluate(h, tree), term_str(tree)


def prods(g):
    return {production_str(p, g.semiring) for p in g.productions}


# -- normalize ---------------------------------------------------------------


def test_normalize_example1_structure(fx1):
    out = normalize(fx1)
    assert classify(out).normalized
    assert classify(out).positive
    assert not classify(out).classic  # the constraint now reaches below
    assert prods(out) == {
        "alpha -> q @ 0",
        "gamma(q) -> q @ 1",
        "gamma(q) -> gamma[q] @ 0",  # fresh abbreviation, weight one
        "sigma(gamma[q],q) -> q' [eq 1.1=2] @ 1",
    }


def test_normalize_idempotent(fx3):
    assert normalize(fx3) is fx3


def test_normalize_equivalent(fx1, fx4, fx5):
    for g in (fx1, fx4, fx5):
        assert_equivalent(g, normalize(g), 8)


# -- boolean finals ----------------------------------------------------------


def test_boolean_finals_flags_and_equivalence(fx1, fx3, fx6):
    for g in (fx1, fx3, fx6):
        out = boolean_finals(g)
        cls_in, cls_out = classify(g), classify(out)
        assert cls_out.boolean_final
        assert cls_out.normalized == cls_in.normalized
        assert cls_out.positive == cls_in.positive
        assert cls_out.classic == cls_in.classic
        assert_equivalent(g, out, 8)


def test_boolean_finals_all_zero():
    alphabet = RankedAlphabet({"alpha": 0})
    g = Wtgc({"q"}, alphabet, {}, [Production(ALPHA, "q", 1)], NATURAL)
    out = boolean_finals(g)
    assert evaluate(out, ALPHA) == 0


# -- zero-derivation elimination ---------------------------------------------


def test_eliminate_zero_trivial_copy(fx1):
    out = eliminate_zero_derivations(fx1)
    # zero-divisor free: the cap collapses and each nonterminal gets one
    # trivial vector
    assert len(out.nonterminals) == len(fx1.nonterminals)
    assert len(out.productions) == len(fx1.productions)
    assert_equivalent(fx1, out, 8)


def test_eliminate_zero_prunes_zero_divisors(fx6):
    out = eliminate_zero_derivations(fx6)
    assert_equivalent(fx6, out, 8)
    zero = out.semiring.zero
    for tree in enumerate_trees(out.alphabet, 8):
        for q in sorted(out.nonterminals):
            for d in derivations(out, tree, q):
                assert derivation_weight(out, d) != zero
    # the input does have complete derivations of weight zero
    witness = gammas(2, ALPHA)
    ds = derivations(fx6, witness, "q")
    assert ds and all(derivation_weight(fx6, d) == 0 for d in ds)


def test_eliminate_zero_preserves_flags(fx6):
    out = eliminate_zero_derivations(boolean_finals(fx6))
    cls = classify(out)
    assert cls.normalized and cls.positive and cls.classic
    assert cls.boolean_final


def test_eliminate_zero_preserves_eq_restriction(fx4):
    out = eliminate_zero_derivations(fx4)
    assert eq_restriction(out) is not None


# -- support -----------------------------------------------------------------


def test_support_grammar_example1(fx1):
    out = support_grammar(fx1)
    assert out.semiring == BOOLEAN
    for tree in enumerate_trees(fx1.alphabet, 8):
        member = evaluate(fx1, tree) != fx1.semiring.zero
        assert evaluate(out, tree) == (1 if member else 0)


def test_support_grammar_needs_zero_sum_freeness(fx6):
    with pytest.raises(TransformError, match="not zero-sum free"):
        support_grammar(fx6)


# -- constraint determination ------------------------------------------------


def test_constraint_determine(fx2g, fx3):
    for g in (fx2g, fx3):
        out = constraint_determine(g)
        assert classify(out).constraint_determined
        assert_equivalent(g, out, 7)
        c = len(g.productions)
        r = g.alphabet.max_rank()
        assert len(out.productions) <= c ** (r + 1)


def test_constraint_determine_splits_twins():
    alphabet = RankedAlphabet({"alpha": 0, "sigma": 2})
    twins = Wtgc(
        {"q"}, alphabet, {"q": 1},
        [Production(ALPHA, "q", 1),
         Production(t("sigma", leaf("q"), leaf("q")), "q", 1,
                    [((1,), (2,))]),
         Production(t("sigma", leaf("q"), leaf("q")), "q", 1)],
        NATURAL)
    assert not classify(twins).constraint_determined
    out = constraint_determine(twins)
    assert classify(out).constraint_determined
    assert_equivalent(twins, out, 7)


def test_constraint_determine_rejects_unnormalized(fx1):
    with pytest.raises(TransformError):
        constraint_determine(fx1)


# -- union and product -------------------------------------------------------


def test_disjoint_union_example(fx2g, fx2gp):
    u = disjoint_union(fx2g, fx2gp)
    tree = t("sigma", gammas(1, ALPHA), gammas(1, ALPHA))
    assert evaluate(u, tree) == 4  # max(4, 3)
    for tree in enumerate_trees(fx2g.alphabet, 8):
        assert evaluate(u, tree) == fx2g.semiring.add(
            evaluate(fx2g, tree), evaluate(fx2gp, tree))


def test_union_with_empty_grammar(fx2g):
    empty = Wtgc(set(), fx2g.alphabet, {}, [], ARCTIC)
    assert_equivalent(fx2g, disjoint_union(fx2g, empty), 8)


def test_hadamard_example(fx2g, fx2gp):
    prod = hadamard(fx2g, fx2gp)
    tree = t("sigma", gammas(1, ALPHA), gammas(1, ALPHA))
    assert evaluate(prod, tree) == 7  # 3*|gammas| + |sigmas|
    # the example's single-pair-state product grammar
    assert prods(prod) == {
        "alpha -> q*z @ 0",
        "gamma(q*z) -> q*z [ne 1.1=1.2] @ 3",
        "sigma(q*z,q*z) -> q*z [eq 1=2] @ 1",
    }
    assert classify(prod).positive is False
    for tree in enumerate_trees(fx2g.alphabet, 9):
        assert evaluate(prod, tree) == fx2g.semiring.mul(
            evaluate(fx2g, tree), evaluate(fx2gp, tree))


def test_hadamard_with_all_one_automaton(fx2g):
    alphabet = fx2g.alphabet
    everything = Wtgc(
        {"u"}, alphabet, {"u": 0},
        [Production(ALPHA, "u", 0),
         Production(t("gamma", leaf("u")), "u", 0),
         Production(t("sigma", leaf("u"), leaf("u")), "u", 0)],
        ARCTIC)
    assert_equivalent(fx2g, hadamard(fx2g, everything), 7)


def test_hadamard_preserves_positive_and_classic(fx2g):
    out = hadamard(fx2g, fx2g)
    cls = classify(out)
    assert cls.positive and cls.classic


def test_hadamard_rejects_mismatch(fx2g, fx4):
    with pytest.raises(TransformError):
        hadamard(fx2g, fx4)


def test_hadamard_normalizes_on_demand(fx1, fx2g):
    out = hadamard(fx1, fx2g)
    for tree in enumerate_trees(fx1.alphabet, 7):
        assert evaluate(out, tree) == ARCTIC.mul(
            evaluate(fx1, tree), evaluate(fx2g, tree))


# -- disambiguation ----------------------------------------------------------


@pytest.fixture(scope="module")
def fx2_union(fx2g, fx2gp):
    return disjoint_union(fx2g, fx2gp)


@pytest.fixture(scope="module")
def fx2_disambiguated(fx2_union):
    return disambiguate(fx2_union, support_hom(ARCTIC))


def test_disambiguate_matches_example_table(fx2_disambiguated):
    out = fx2_disambiguated
    full = "set[q.z]"

    def name(members):
        return "set[" + ".".join(sorted(members)) + "]"

    seen_states = {n for n in out.nonterminals}
    assert full in seen_states
    for p in out.productions:
        members = []
        for child in p.lhs.children:
            assert child.label in seen_states
            members.append(set(child.label[4:-1].split(".")) - {""})
        target = set(p.target[4:-1].split(".")) - {""}
        assert p.weight == 1
        if p.lhs.label == "alpha":
            assert p.target == full and not p.eq and not p.ineq
        elif p.lhs.label == "gamma":
            pair = ((1, 1), (1, 2))
            if p.eq:
                assert p.eq == frozenset([pair]) and not p.ineq
                assert target == members[0] & {"q"}
            else:
                assert p.ineq == frozenset([pair])
                assert target == members[0]
        else:
            pair = ((1,), (2,))
            if p.eq:
                assert p.eq == frozenset([pair]) and not p.ineq
                assert target == members[0] & members[1]
            else:
                assert p.ineq == frozenset([pair])
                assert target == members[0] & members[1] & {"z"}
    for q in out.nonterminals:
        members = set(q[4:-1].split(".")) - {""}
        assert out.final[q] == (1 if members else 0)


def test_disambiguate_unambiguous_and_correct(fx2_union, fx2_disambiguated):
    h = support_hom(ARCTIC)
    assert check_unambiguous_upto(fx2_disambiguated, 8) is None
    for tree in enumerate_trees(fx2_union.alphabet, 7):
        assert evaluate(fx2_disambiguated, tree) \
            == h(evaluate(fx2_union, tree))


def test_disambiguate_state_vector_invariant(fx2_union, fx2_disambiguated):
    h = support_hom(ARCTIC)
    order = sorted(fx2_union.nonterminals)
    for tree in enumerate_trees(fx2_union.alphabet, 6):
        per_state = {q: derivations(fx2_disambiguated, tree, q)
                     for q in sorted(fx2_disambiguated.nonterminals)}
        # every tree has exactly one complete left-most derivation overall
        assert sum(len(ds) for ds in per_state.values()) == 1
        (hit,) = [q for q, ds in per_state.items() if ds]
        members = set(hit[4:-1].split(".")) - {""}
        expected = {q for q in order
                    if h(state_weight(fx2_union, q, tree)) == 1}
        assert members == expected


def test_disambiguate_equal_arms_reach_full_state(fx2_union,
                                                  fx2_disambiguated):
    tree = t("sigma", gammas(1, ALPHA), gammas(1, ALPHA))
    hits = [q for q in sorted(fx2_disambiguated.nonterminals)
            if derivations(fx2_disambiguated, tree, q)]
    assert hits == ["set[q.z]"]
    assert fx2_disambiguated.final["set[q.z]"] == 1
    assert evaluate(fx2_disambiguated, tree) == 1


def test_disambiguate_rejects_infinite_target(fx2_union):
    from wtgc.semiring import SemiringHom

    raw = SemiringHom(ARCTIC, NATURAL, lambda a: 0)
    with pytest.raises(TransformError):
        disambiguate(fx2_union, raw)


def test_disambiguate_identity_over_finite_semiring(fx6):
    # over a finite semiring the identity map yields an equivalent
    # unambiguous automaton
    from wtgc.semiring import identity_hom

    out = disambiguate(fx6, identity_hom(fx6.semiring))
    assert check_unambiguous_upto(out, 7) is None
    for tree in enumerate_trees(fx6.alphabet, 7):
        assert evaluate(out, tree) == evaluate(fx6, tree)


def test_disambiguate_prune_unsat(fx2_union):
    pruned = disambiguate(fx2_union, support_hom(ARCTIC), prune_unsat=5)
    full = disambiguate(fx2_union, support_hom(ARCTIC))
    # pruning may only drop productions, never change the semantics
    assert prods(pruned) <= prods(full)
    for tree in enumerate_trees(fx2_union.alphabet, 6):
        assert evaluate(pruned, tree) == evaluate(full, tree)


# -- support automaton, complement, restriction ------------------------------


def test_support_automaton_example1(fx1):
    aut = support_automaton(fx1)
    assert check_unambiguous_upto(aut, 9) is None
    for tree in enumerate_trees(fx1.alphabet, 8):
        member = evaluate(fx1, tree) != fx1.semiring.zero
        assert evaluate(aut, tree) == (1 if member else 0)


def test_support_automaton_empty_grammar():
    alphabet = RankedAlphabet({"alpha": 0, "gamma": 1})
    g = Wtgc({"q"}, alphabet, {}, [Production(ALPHA, "q", 1)], NATURAL)
    aut = support_automaton(g)
    for tree in enumerate_trees(alphabet, 5):
        assert evaluate(aut, tree) == 0


def test_complement_support(fx1):
    comp = complement_support(fx1)
    assert evaluate(comp, t("sigma", ALPHA, ALPHA)) == 1
    aut = support_automaton(fx1)
    for tree in enumerate_trees(fx1.alphabet, 8):
        assert evaluate(comp, tree) == 1 - evaluate(aut, tree)
    # double complement: flipping the final set again restores membership
    twice = Wtgc(comp.nonterminals, comp.alphabet,
                 {q: 1 - comp.final[q] for q in comp.nonterminals},
                 comp.productions, BOOLEAN)
    for tree in enumerate_trees(fx1.alphabet, 7):
        assert evaluate(twice, tree) == evaluate(aut, tree)


def test_restrict_support_example(fx2g, fx2gp):
    restricted = restrict_support(fx2g, fx2gp)
    tree = t("sigma", gammas(1, ALPHA), gammas(1, ALPHA))
    assert evaluate(restricted, tree) == 4
    outside = t("gamma", t("sigma", ALPHA, ALPHA))  # violates fx2gp
    assert evaluate(fx2gp, outside) == ARCTIC.zero
    assert evaluate(restricted, outside) == ARCTIC.zero
    for tree in enumerate_trees(fx2g.alphabet, 9):
        inside = evaluate(fx2gp, tree) != ARCTIC.zero
        expected = evaluate(fx2g, tree) if inside else ARCTIC.zero
        assert evaluate(restricted, tree) == expected


# -- relabeling ---------------------------------------------------------------


def test_relabel_collapses_annotations(fx3, fx3_hom):
    stage_one = hom_image_stage_one(fx3, fx3_hom)
    pi = {name: name.split("#", 1)[0]
          for name in stage_one.alphabet.names()}
    out = relabel(stage_one, pi, target_alphabet=fx3_hom.target)
    weights = {production_str(p, out.semiring): p.weight
               for p in out.productions}
    assert weights["gamma(q) -> q @ 3"] == 3  # 2 + 1


def test_relabel_identity(fx4):
    pi = {name: name for name in fx4.alphabet.names()}
    out = relabel(fx4, pi)
    assert_equivalent(fx4, out, 7)


def test_relabel_preimage_sum_oracle(fx4):
    pi = {"a": "a", "g": "g", "f": "g"}
    out = relabel(fx4, pi)
    import itertools

    from wtgc.trees import Tree

    sources = {}
    for name in fx4.alphabet.names():
        sources.setdefault(pi[name], []).append(name)

    def preimages(u):
        options = [list(preimages(c)) for c in u.children]
        for name in sources.get(u.label, ()):
            for combo in itertools.product(*options):
                yield Tree(name, combo)

    for u in enumerate_trees(out.alphabet, 9):
        expected = NATURAL.sum(evaluate(fx4, x) for x in preimages(u))
        assert evaluate(out, u) == expected


def test_relabel_requires_eq_restriction(fx1):
    with pytest.raises(TransformError):
        relabel(fx1, {"alpha": "alpha", "gamma": "gamma", "sigma": "sigma"})


def test_relabel_rejects_rank_clash(fx4):
    with pytest.raises(TransformError, match="rank mismatch"):
        relabel(fx4, {"a": "x", "g": "x", "f": "x"})


def test_fresh_names_avoid_adversarial_symbols():
    # a symbol spelled like a generated nonterminal must not collide
    alphabet = RankedAlphabet({"alpha": 0, "q#f": 0, "q#[]": 0})
    g = Wtgc({"q"}, alphabet, {"q": 2},
             [Production(ALPHA, "q", 2),
              Production(leaf("q#f"), "q", 3),
              Production(leaf("q#[]"), "q", 1)],
             NATURAL)
    for out in (boolean_finals(g), eliminate_zero_derivations(g),
                constraint_determine(g), disjoint_union(g, g),
                hadamard(g, g)):
        assert not (out.nonterminals & set(out.alphabet.names()))
    assert_equivalent(g, boolean_finals(g), 3)
    assert_equivalent(g, eliminate_zero_derivations(g), 3)
