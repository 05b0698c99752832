import pytest

from linbasis import isomorphism as iso
from linbasis.basis import basis, graph_basis
from linbasis.enumeration import BudgetError
from linbasis.fixtures import g4_rules, g5_rules, golden_rules
from linbasis.graph import dual
from linbasis.rewrite import GraphInference, RuleSet, is_instance, medial_rule, switch_rule
from linbasis.search import SearchConfig, run_search


@pytest.fixture(scope="module")
def basis7():
    return basis(7)


@pytest.fixture(scope="module")
def gbasis5():
    return graph_basis(5)


def test_basis7_strata(basis7):
    assert basis7.stratum_sizes() == (1, 1, 0, 0, 0)
    by_size = dict(basis7.strata)
    switch_stratum = by_size[3]
    medial_stratum = by_size[4]
    assert [r.name for r in switch_stratum] == ["m3_1"]
    assert [r.name for r in medial_stratum] == ["m4_1"]
    assert switch_stratum[0].inference == iso.least_inference_form(switch_rule())
    assert medial_stratum[0].inference == iso.least_inference_form(medial_rule())


def test_basis_monotone_and_rulesets(basis7):
    for upto in range(3, 8):
        smaller = {r.name for r in basis7.ruleset(upto - 1)}
        larger = {r.name for r in basis7.ruleset(upto)}
        assert smaller <= larger
    assert len(basis7.ruleset(7)) == 2


def test_basis_strata_members_are_verified(basis7):
    # every stratum rule is valid, non-trivial, minimal, and independent of
    # the smaller strata (re-checked through the public operations)
    from linbasis.cliques import implies_cliquewise, is_trivial

    for size, rules in basis7.strata:
        smaller = basis7.ruleset(size - 1)
        for rule in rules:
            inf = rule.inference
            assert implies_cliquewise(inf.lhs, inf.rhs)
            assert not is_trivial(inf.lhs, inf.rhs)
            for older in smaller:
                assert not is_instance(inf, older.inference)


def test_basis_text_format(basis7):
    lines = basis7.text().splitlines()
    assert lines[0] == "basis n=7 mode=p4free entailment=clique"
    assert "M 3" in lines and "M 7" in lines
    assert any(line.startswith("m4_1; 4; ") for line in lines)


def test_graph_basis_g3_g4_g5(gbasis5):
    assert gbasis5.stratum_sizes() == (1, 2, 16)
    by_size = dict(gbasis5.strata)
    computed_g4 = [r.inference for r in by_size[4]]
    computed_g5 = [r.inference for r in by_size[5]]
    for fixture in g4_rules():
        assert any(iso.is_isomorphic(fixture.inference, c) for c in computed_g4)
    for fixture in g5_rules():
        matches = [c for c in computed_g5 if iso.is_isomorphic(fixture.inference, c)]
        assert len(matches) == 1


def test_graph_basis_matches_golden_files(gbasis5):
    by_size = dict(gbasis5.strata)
    for name, size in (("g4", 4), ("g5", 5)):
        golden = golden_rules(name)
        computed = [r.inference for r in by_size[size]]
        assert [(r.inference.lhs.edges, r.inference.rhs.edges) for r in golden] == [
            (c.lhs.edges, c.rhs.edges) for c in computed
        ]


def test_medial_decomposes_in_graph_mode(gbasis5):
    # the composite of the two G_4 rules is medial, chained through one web
    by_size = dict(gbasis5.strata)
    g4 = [r.inference for r in by_size[4]]
    assert len(g4) == 2
    first, second = g4
    assert first.rhs.edges == second.lhs.edges  # they chain through one web
    assert iso.is_isomorphic(
        GraphInference(first.lhs, second.rhs), iso.least_inference_form(medial_rule())
    )


def test_stable_graph_basis_is_elementwise_dual():
    clique = graph_basis(4)
    stable = graph_basis(4, entailment="stable")
    stable_by_size = dict(stable.strata)
    for size, rules in clique.strata:
        stable_rules = [r.inference for r in stable_by_size[size]]
        assert len(rules) == len(stable_rules)
        for rule in rules:
            dualized = GraphInference(dual(rule.inference.rhs), dual(rule.inference.lhs))
            assert any(iso.is_isomorphic(dualized, s) for s in stable_rules)


def test_search_n5_all_graphs_against_g4_file(tmp_path):
    # CLI-level example: searching all 5-graphs against switch + G_4 leaves
    # the 16 classes of G_5
    g4 = RuleSet.from_rules(
        "g4+s",
        [("s", switch_rule())] + [(r.name, r.inference) for r in golden_rules("g4")],
        "file",
    )
    report = run_search(SearchConfig(n=5, rules=g4, mode="all"))
    assert len(report.classes) == 16


def test_basis_budget_guard():
    with pytest.raises(BudgetError):
        basis(9)  # long_run required
    with pytest.raises(BudgetError):
        graph_basis(6)
