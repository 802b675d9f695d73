import pytest

from conftest import t
from wtgc.errors import PumpError
from wtgc.grammar import Production, Wtgc, eq_restriction
from wtgc.pumping import (
    SubstitutionSite,
    ensure_nonbot_child,
    grammar_height,
    pump,
    separation_family,
    substitute_derivation,
)
from wtgc.semantics import (
    derivation_weight,
    derivations,
    evaluate,
    replay_derivation,
)
from wtgc.semiring import NATURAL
from wtgc.syntax import parse_term
from wtgc.transforms import eliminate_zero_derivations
from wtgc.trees import (
    RankedAlphabet,
    Tree,
    enumerate_trees,
    leaf,
    subtree,
    term_str,
)

BASE_TREE = "f(g(a,a),f(a,g(a,a)))"
FIG7_TREE = "f(g(g(a,a),g(a,a)),f(a,g(g(a,a),g(a,a))))"


@pytest.fixture
def fx4_site(fx4):
    base = parse_term(BASE_TREE, fx4.alphabet)
    (d,) = derivations(fx4, base, "q")
    donor = parse_term("g(a,a)", fx4.alphabet)
    (dp,) = derivations(fx4, donor, "q")
    return SubstitutionSite(fx4, base, d, donor, dp, (1, 1))


def test_substitution_reproduces_figure_tree(fx4, fx4_site):
    new_tree, new_d = substitute_derivation(fx4_site)
    assert term_str(new_tree) == FIG7_TREE
    assert new_d.target == "q"
    assert replay_derivation(fx4, new_d)
    assert evaluate(fx4, new_tree) == 1


def test_substitution_step_list(fx4, fx4_site):
    _, new_d = substitute_derivation(fx4_site)
    got = [(fx4.prod_id(p), w) for p, w in new_d.steps]
    # canonical ids: p1 = a->bot, p2 = a->q, p4 = f(q,f(q,bot))->q,
    # p5 = g(bot,bot)->bot, p6 = g(q,bot)->q
    assert got == [
        ("p2", (1, 1, 1)), ("p1", (1, 1, 2)), ("p6", (1, 1)),
        ("p1", (1, 2, 1)), ("p1", (1, 2, 2)), ("p5", (1, 2)), ("p6", (1,)),
        ("p2", (2, 1)),
        ("p1", (2, 2, 1, 1)), ("p1", (2, 2, 1, 2)), ("p5", (2, 2, 1)),
        ("p1", (2, 2, 2, 1)), ("p1", (2, 2, 2, 2)), ("p5", (2, 2, 2)),
        ("p5", (2, 2)), ("p4", ()),
    ]


def test_substitution_at_root_returns_donor(fx4, fx4_site):
    site = SubstitutionSite(fx4, fx4_site.base_tree,
                            fx4_site.base_derivation, fx4_site.donor_tree,
                            fx4_site.donor_derivation, ())
    new_tree, new_d = substitute_derivation(site)
    assert new_tree == fx4_site.donor_tree
    assert new_d.steps == fx4_site.donor_derivation.steps


def test_substitution_leaves_parallel_positions_alone(fx4, fx4_site):
    # position 2.1 equals the replaced subtree but is not constrained to it
    new_tree, _ = substitute_derivation(fx4_site)
    assert subtree(fx4_site.base_tree, (2, 1)) \
        == subtree(fx4_site.base_tree, (1, 1))
    assert subtree(new_tree, (2, 1)) == leaf("a")
    assert subtree(new_tree, (1, 1)) == parse_term("g(a,a)", fx4.alphabet)


def test_substitution_rejects_target_mismatch(fx4, fx4_site):
    bad = SubstitutionSite(fx4, fx4_site.base_tree,
                           fx4_site.base_derivation, fx4_site.donor_tree,
                           fx4_site.donor_derivation, (2, 2))
    with pytest.raises(PumpError):
        substitute_derivation(bad)


def offender_grammar():
    # the all-sink production is unconstrained: a sink-to-sink equality
    # pair would have no governing index and fall outside the class
    alphabet = RankedAlphabet({"a": 0, "f": 2})
    prods = [
        Production(leaf("a"), "q", 1),
        Production(t("f", leaf("bot"), leaf("bot")), "q", 2),
        Production(leaf("a"), "bot", 1),
        Production(t("f", leaf("bot"), leaf("bot")), "bot", 1),
    ]
    return Wtgc({"q", "bot"}, alphabet, {"q": 1}, prods, NATURAL)


def test_ensure_nonbot_child_rewrites_offenders():
    g = offender_grammar()
    out = ensure_nonbot_child(g)
    assert "top" in out.nonterminals
    rewritten = [p for p in out.productions
                 if p.target == "q" and p.lhs.label == "f"]
    assert len(rewritten) == 1
    assert rewritten[0].lhs == t("f", leaf("top"), leaf("bot"))
    assert eq_restriction(out) is not None
    for tree in enumerate_trees(g.alphabet, 7):
        assert evaluate(g, tree) == evaluate(out, tree)


def test_ensure_nonbot_child_identity(fx4):
    assert ensure_nonbot_child(fx4) is fx4


def test_grammar_height(fx4, fx3_image):
    assert grammar_height(fx4) == 6  # (2 + 1) * height of the f-lhs
    # single nullary production: every lhs is one node, so the bound
    # degenerates to zero and nothing is tall enough to pump
    g = Wtgc({"q"}, RankedAlphabet({"alpha": 0}), {"q": 1},
             [Production(leaf("alpha"), "q", 1)], NATURAL)
    assert grammar_height(g) == 0
    assert grammar_height(fx3_image) == (3 + 1) * 2


def tall_square(n):
    out = leaf("a")
    for _ in range(n):
        out = Tree("g", [out, out])
    return out


@pytest.fixture
def fx4_prepared(fx4):
    return eliminate_zero_derivations(ensure_nonbot_child(fx4))


def test_pump_grows_strictly(fx4_prepared):
    g = fx4_prepared
    base = parse_term(term_str(tall_square(7)), g.alphabet)
    (q,) = g.final_support()
    (d,) = derivations(g, base, q)
    out = pump(g, base, d, 3)
    assert len(out) == 3
    heights = [base.height] + [tree.height for tree, _ in out]
    assert heights == sorted(set(heights))
    for tree, deriv in out:
        assert replay_derivation(g, deriv)
        assert derivation_weight(g, deriv) != 0
        assert evaluate(g, tree) != 0


def test_pump_zero_count(fx4_prepared):
    g = fx4_prepared
    base = parse_term(term_str(tall_square(7)), g.alphabet)
    (q,) = g.final_support()
    (d,) = derivations(g, base, q)
    assert pump(g, base, d, 0) == []


def test_pump_rejects_short_trees(fx4_prepared):
    g = fx4_prepared
    base = parse_term(term_str(tall_square(3)), g.alphabet)
    (q,) = g.final_support()
    (d,) = derivations(g, base, q)
    with pytest.raises(PumpError, match="height"):
        pump(g, base, d, 1)


def test_search_pump_base():
    from wtgc.pumping import search_pump_base

    alphabet = RankedAlphabet({"a": 0, "g": 1})
    g = Wtgc({"q", "bot"}, alphabet, {"q": 1},
             [Production(leaf("a"), "q", 1),
              Production(t("g", leaf("q")), "q", 1),
              Production(leaf("a"), "bot", 1),
              Production(t("g", leaf("bot")), "bot", 1)],
             NATURAL)
    assert grammar_height(g) == 3
    found = search_pump_base(g, 8)
    assert found is not None
    base, d = found
    assert base.height > 3
    assert replay_derivation(g, d)
    pumped = pump(g, base, d, 2)
    assert [x[0].height for x in pumped] == [base.height + 1,
                                             base.height + 2]
    assert search_pump_base(g, 3) is None


def test_separation_family_examples():
    t1, tp1 = separation_family(1)
    assert term_str(t1) == "g(a,a)"
    assert term_str(tp1) == "g(a,a)"
    t2, tp2 = separation_family(2)
    assert term_str(t2) == "f(g(a,a),g(a,a))"
    assert term_str(tp2) == "fbar(g(a,a),g(a,a))"
    for n in range(1, 8):
        tn, tpn = separation_family(n)
        assert tn.size == 2 ** (n + 1) - 1
        assert tpn.size == 2 ** (n + 1) - 1
        assert tn.height == n and tpn.height == n


def test_separation_family_accepted(fx5):
    for n in range(1, 6):
        tn, tpn = separation_family(n)
        assert evaluate(fx5, tn) == 1
        assert evaluate(fx5, tpn) == 1


def test_separation_family_needs_positive_index():
    with pytest.raises(PumpError):
        separation_family(0)
