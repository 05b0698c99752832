import itertools

import pytest

from oracles import formula_one_step_webs, tt_valid

from linbasis import formula as fm
from linbasis.cliques import implies_cliquewise, is_trivial
from linbasis.enumeration import p4_free_numerics
from linbasis.graph import Web, edge_pairs, to_web_with_order, web_from_edges
from linbasis.isomorphism import apply_perm, least_inference_form
from linbasis.rewrite import (
    Derivation,
    DerivationStep,
    GraphInference,
    RuleSet,
    StepError,
    apply_rule_all,
    check_derivation,
    derivable_one_step,
    format_derivation,
    format_graph_inference,
    inference_webs,
    is_instance,
    match_rule,
    medial_rule,
    parse_derivation,
    parse_graph_inference,
    switch_rule,
)


def test_rule_webs_built_from_formulas():
    s = switch_rule()
    assert s.n == 3
    assert sorted(edge_pairs(s.lhs)) == [(0, 1), (0, 2)]
    assert sorted(edge_pairs(s.rhs)) == [(0, 1)]
    m = medial_rule()
    assert sorted(edge_pairs(m.lhs)) == [(0, 1), (2, 3)]
    assert sorted(edge_pairs(m.rhs)) == [(0, 1), (0, 3), (1, 2), (2, 3)]
    assert implies_cliquewise(s.lhs, s.rhs)
    assert implies_cliquewise(m.lhs, m.rhs)


def test_is_instance_identity_and_renaming():
    s = switch_rule()
    assert is_instance(s, s)
    for p in itertools.permutations(range(3)):
        relabelled = GraphInference(apply_perm(p, s.lhs), apply_perm(p, s.rhs))
        assert is_instance(relabelled, s)


def test_is_instance_switch_in_context():
    # (a|b) & (y|z) rewritten at the module {a,b} standing for x
    lhs = fm.parse("(a | b) & (y | z)")
    rhs = fm.parse("((a | b) & y) | z")
    candidate, _ = inference_webs(fm.FormulaInference(lhs, rhs))
    assert is_instance(candidate, switch_rule())
    assert not is_instance(candidate, medial_rule())
    assert tt_valid(candidate.lhs, candidate.rhs)


def test_is_instance_rejects_eq1_for_both_rules(catalogue_fixtures):
    eq1 = catalogue_fixtures["eq1"].webs
    assert not is_instance(eq1, switch_rule())
    assert not is_instance(eq1, medial_rule())


def test_reflexive_pair_is_not_an_instance():
    g = web_from_edges(3, [(0, 1), (0, 2)])
    assert not is_instance(GraphInference(g, g), switch_rule())
    assert not is_instance(GraphInference(g, g), medial_rule())


def test_apply_rule_all_examples():
    assert apply_rule_all(Web(3), switch_rule()) == []
    s_lhs = switch_rule().lhs
    results = apply_rule_all(s_lhs, switch_rule())
    assert switch_rule().rhs in results


def test_apply_rule_all_matches_is_instance_exhaustive():
    rules = [switch_rule(), medial_rule()]
    for n in (3, 4, 5):
        numerics = p4_free_numerics(n)
        graphs = [Web(n, int(v)) for v in numerics]
        step = 5 if n == 5 else 1
        for g in graphs[::step]:
            for rule in rules:
                produced = {h.edges for h in apply_rule_all(g, rule)}
                for h in graphs[:: step * 2]:
                    assert (h.edges in produced) == is_instance(GraphInference(g, h), rule)
                for value in produced:
                    assert is_instance(GraphInference(g, Web(n, value)), rule)


def test_instance_soundness():
    # if the rule is valid, every produced inference is valid
    for n in (4, 5):
        for value in p4_free_numerics(n)[:: 9 if n == 5 else 3]:
            g = Web(n, int(value))
            for rule in (switch_rule(), medial_rule()):
                for h in apply_rule_all(g, rule):
                    assert implies_cliquewise(g, h)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_is_instance_matches_formula_level_rewriting(n):
    # web-level instances of s/m coincide with one-step AC rewriting of the
    # decompositions, via an independent formula-surgery oracle
    rules = {"s": switch_rule(), "m": medial_rule()}
    for value in p4_free_numerics(n)[:: 7 if n == 5 else 1]:
        g = Web(n, int(value))
        for name, rule in rules.items():
            expected = formula_one_step_webs(g, name)
            got = {h.edges for h in apply_rule_all(g, rule)}
            assert got == expected, (n, int(value), name)


def test_medial_characterization_cross_check():
    # medial instances never delete an edge; on logically minimal non-trivial
    # valid pairs the converse holds as well (single step = derivability)
    from linbasis.cliques import CliqueCache
    from linbasis.isomorphism import build_least_map
    from linbasis.search import (
        phase4_valid_inferences,
        phase5_nontrivial,
        phase6_logically_minimal,
    )

    n = 5
    numerics = p4_free_numerics(n)
    graphs = [Web(n, int(v)) for v in numerics]
    lmap = build_least_map(numerics, n)
    cache = CliqueCache.build(n, numerics)
    valid = phase4_valid_inferences(graphs, lmap, cache)
    nontrivial = phase5_nontrivial(valid, cache)
    for inf in nontrivial:
        if is_instance(inf, medial_rule()):
            assert inf.lhs.edges & ~inf.rhs.edges == 0
    minimal = phase6_logically_minimal(nontrivial, lmap)
    for inf in minimal:
        preserves = inf.lhs.edges & ~inf.rhs.edges == 0
        assert is_instance(inf, medial_rule()) == preserves


def test_rulesets_store_least_forms(tmp_path):
    rs = RuleSet.builtin_sm()
    assert rs.names() == ["s", "m"]
    for rule in rs:
        assert rule.inference == least_inference_form(rule.inference)
    path = tmp_path / "sm.rules"
    rs.to_file(path)
    again = RuleSet.from_file(path)
    assert again.lines() == rs.lines()
    assert again.digest == rs.digest


def test_match_rule_first_match():
    rs = RuleSet.builtin_sm()
    switch_inst, _ = inference_webs(fm.parse_inference("x & (y | z) -> (x & y) | z"))
    medial_inst, _ = inference_webs(
        fm.parse_inference("(w & x) | (y & z) -> (w | y) & (x | z)")
    )
    assert match_rule(switch_inst, rs) == "s"
    assert match_rule(medial_inst, rs) == "m"
    assert derivable_one_step(switch_inst, rs)
    assert match_rule(GraphInference(Web(3), Web(3)), rs) is None


def test_graph_inference_text_form():
    s = switch_rule()
    assert format_graph_inference(s) == "3 3 1"
    assert parse_graph_inference("3 3 1") == s


def test_derivation_roundtrip_and_check():
    s = switch_rule()
    d = Derivation(3, s.lhs, (DerivationStep(None, s.lhs), DerivationStep("s", s.rhs)))
    text = format_derivation(d)
    assert parse_derivation(text) == d
    ok, reports = check_derivation(d, RuleSet.builtin_sm())
    assert ok and [r.ok for r in reports] == [True, True]


def test_empty_derivation_passes():
    d = Derivation(3, Web(3), ())
    ok, reports = check_derivation(d, RuleSet.builtin_sm())
    assert ok and reports == []


def test_derivation_failures():
    s = switch_rule()
    bad_ac = Derivation(3, s.lhs, (DerivationStep(None, s.rhs),))
    ok, reports = check_derivation(bad_ac, RuleSet.builtin_sm())
    assert not ok and not reports[0].ok
    unknown = Derivation(3, s.lhs, (DerivationStep("zig", s.rhs),))
    ok, reports = check_derivation(unknown, RuleSet.builtin_sm())
    assert not ok and "not in the set" in reports[0].reason
    wrong_size = Derivation(3, s.lhs, (DerivationStep("s", Web(4)),))
    with pytest.raises(StepError):
        check_derivation(wrong_size, RuleSet.builtin_sm())
