import gzip
from pathlib import Path

import pytest

from linbasis.cliques import CliqueCache, implies_cliquewise, is_trivial
from linbasis.enumeration import BudgetError, p4_free_numerics
from linbasis.graph import Web
from linbasis.isomorphism import build_least_map, is_least
from linbasis.rewrite import GraphInference, RuleSet
from linbasis.search import (
    CheckpointCorruptError,
    MissingPhaseError,
    SearchConfig,
    _Sweep,
    phase4_valid_inferences,
    phase5_nontrivial,
    phase6_logically_minimal,
    phase7_independent,
    run_search,
)


@pytest.fixture(scope="module")
def small_pipeline():
    n = 5
    numerics = p4_free_numerics(n)
    graphs = [Web(n, int(v)) for v in numerics]
    lmap = build_least_map(numerics, n)
    cache = CliqueCache.build(n, numerics)
    return n, numerics, graphs, lmap, cache


def test_phase4_matches_definition(small_pipeline):
    n, numerics, graphs, lmap, cache = small_pipeline
    valid = phase4_valid_inferences(graphs, lmap, cache)
    expected = set()
    for pos in lmap.least_positions():
        r = graphs[pos]
        for s in graphs:
            if s.edges != r.edges and implies_cliquewise(r, s):
                expected.add((r.edges, s.edges))
    assert {(inf.lhs.edges, inf.rhs.edges) for inf in valid} == expected
    for inf in valid:
        assert is_least(inf.lhs)


def test_phase5_matches_definition(small_pipeline):
    n, numerics, graphs, lmap, cache = small_pipeline
    valid = phase4_valid_inferences(graphs, lmap, cache)
    nontrivial = phase5_nontrivial(valid, cache)
    assert nontrivial == [inf for inf in valid if not is_trivial(inf.lhs, inf.rhs)]


def test_sweep_matches_wrappers(small_pipeline):
    n, numerics, graphs, lmap, cache = small_pipeline
    valid = phase4_valid_inferences(graphs, lmap, cache)
    nontrivial = phase5_nontrivial(valid, cache)
    sweep = _Sweep(n, numerics, lmap.least_positions(), "clique").run()
    assert sweep.valid_count == len(valid)
    got = {
        (int(numerics[pos]), int(v))
        for ordinal, pos in enumerate(lmap.least_positions())
        for v in sweep.phi_groups()[ordinal]
    }
    assert got == {(inf.lhs.edges, inf.rhs.edges) for inf in nontrivial}


def test_sweep_chunked_equals_unchunked(small_pipeline):
    n, numerics, graphs, lmap, cache = small_pipeline
    whole = _Sweep(n, numerics, lmap.least_positions(), "clique").run()
    tiny = _Sweep(n, numerics, lmap.least_positions(), "clique").run(
        matrix_budget=(1 << n) * 8 * 2  # force ~128-column chunks
    )
    assert tiny.chunk_count > 1
    assert tiny.valid_count == whole.valid_count
    for a, b in zip(whole.phi_groups(), tiny.phi_groups()):
        assert list(a) == list(b)


def test_phase6_direct_definition(small_pipeline):
    n, numerics, graphs, lmap, cache = small_pipeline
    valid = phase4_valid_inferences(graphs, lmap, cache)
    nontrivial = phase5_nontrivial(valid, cache)
    minimal = phase6_logically_minimal(nontrivial, lmap)
    # direct: no interpolating web strictly between the sides
    got = {(inf.lhs.edges, inf.rhs.edges) for inf in minimal}
    for inf in nontrivial:
        r, s = inf.lhs, inf.rhs
        has_interpolant = any(
            t.edges not in (r.edges, s.edges)
            and implies_cliquewise(r, t)
            and implies_cliquewise(t, s)
            for t in graphs
        )
        assert ((r.edges, s.edges) in got) == (not has_interpolant)


def test_phase6_transport_identity(small_pipeline):
    # Phi of a non-least web equals the inverse-transported Phi of its least
    n, numerics, graphs, lmap, cache = small_pipeline
    from linbasis.isomorphism import apply_perm, invert

    phi = {}
    for r in graphs:
        phi[r.edges] = {
            s.edges for s in graphs
            if s.edges != r.edges and implies_cliquewise(r, s) and not is_trivial(r, s)
        }
    for r in graphs[::5]:
        perm = lmap.perm_to_least(r.edges)
        least_value = lmap.least_numeric(r.edges)
        transported = {
            apply_perm(invert(perm), Web(n, v)).edges for v in phi[least_value]
        }
        assert transported == phi[r.edges]


def test_phase7_counts_and_missing_phase():
    with pytest.raises(MissingPhaseError):
        phase7_independent(None, RuleSet.builtin_sm())
    with pytest.raises(MissingPhaseError):
        phase4_valid_inferences([], None, None)


def test_phase7_worker_pool_matches_sequential(small_pipeline):
    n, numerics, graphs, lmap, cache = small_pipeline
    valid = phase4_valid_inferences(graphs, lmap, cache)
    nontrivial = phase5_nontrivial(valid, cache)
    minimal = phase6_logically_minimal(nontrivial, lmap)
    sequential = phase7_independent(minimal, RuleSet.builtin_sm(), workers=1)
    pooled = phase7_independent(minimal, RuleSet.builtin_sm(), workers=2)
    assert pooled == sequential


def test_run_search_small_counts():
    report = run_search(SearchConfig(n=2, rules=RuleSet.empty()))
    assert report.graph_count == 2 and report.valid_count == 1
    assert report.nontrivial_count == 0  # mix is trivial
    report3 = run_search(SearchConfig(n=3, rules=RuleSet.empty()))
    assert report3.nontrivial_count == 2 and report3.minimal_count == 2
    assert len(report3.classes) == 1
    assert report3.classes[0].inference == GraphInference(Web(3, 3), Web(3, 1))


def test_budget_guards():
    with pytest.raises(BudgetError):
        run_search(SearchConfig(n=9, rules=RuleSet.builtin_sm()))
    with pytest.raises(BudgetError):
        run_search(SearchConfig(n=6, rules=RuleSet.builtin_sm(), mode="all"))
    with pytest.raises(BudgetError):
        run_search(SearchConfig(n=8, rules=RuleSet.builtin_sm(), mode="all", long_run=True))


def test_stable_equals_clique_on_p4free():
    for n in (4, 5, 6):
        clique = run_search(SearchConfig(n=n, rules=RuleSet.builtin_sm()))
        stable = run_search(
            SearchConfig(n=n, rules=RuleSet.builtin_sm(), entailment="stable")
        )
        assert clique.valid_count == stable.valid_count
        assert clique.nontrivial_count == stable.nontrivial_count
        assert clique.minimal_count == stable.minimal_count
        assert clique.rule_counts == stable.rule_counts
        assert [c.inference for c in clique.classes] == [c.inference for c in stable.classes]


def test_checkpoint_resume_and_corruption(tmp_path):
    config = SearchConfig(n=4, rules=RuleSet.builtin_sm(), checkpoint_dir=tmp_path)
    first = run_search(config)
    files = sorted(p.name for p in (tmp_path / "p4free-n4").iterdir())
    assert files == [
        "phase1.txt",
        "phase2.txt",
        "phase3.txt",
        "phase4-clique.txt",
        "phase5-clique.txt",
        "phase6-clique.txt",
        f"phase7-clique-{RuleSet.builtin_sm().digest}.txt",
    ]
    again = run_search(config)
    assert again.text() == first.text()

    # corrupt phase 6: the runner recomputes it and still agrees
    target = tmp_path / "p4free-n4" / "phase6-clique.txt"
    raw = target.read_bytes()
    target.write_bytes(raw[:-4] + b"999\n")
    rerun = run_search(config)
    assert rerun.text() == first.text()
    assert target.read_bytes() == raw


def test_checkpoints_keyed_by_rules_only_in_phase7(tmp_path):
    sm = RuleSet.builtin_sm()
    empty = RuleSet.empty()
    run_search(SearchConfig(n=4, rules=sm, checkpoint_dir=tmp_path))
    before = {
        p.name: p.read_bytes() for p in (tmp_path / "p4free-n4").iterdir() if "phase7" not in p.name
    }
    run_search(SearchConfig(n=4, rules=empty, checkpoint_dir=tmp_path))
    after = {
        p.name: p.read_bytes() for p in (tmp_path / "p4free-n4").iterdir() if "phase7" not in p.name
    }
    assert before == after  # phases 1-6 shared between rule sets
    phase7s = [p.name for p in (tmp_path / "p4free-n4").iterdir() if "phase7" in p.name]
    assert len(phase7s) == 2


def test_report_text_shape():
    report = run_search(SearchConfig(n=4, rules=RuleSet.empty()))
    text = report.text()
    assert text.splitlines()[0].startswith("search n=4 mode=p4free entailment=clique")
    assert "minimal:" in text
    assert any(line.startswith("class 1: 4 ") for line in text.splitlines())
    cls = report.classes[0]
    assert "; formula " in cls.line() and "self_dual=" in cls.line()
