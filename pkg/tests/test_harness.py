"""Oracle equivalence, enumeration, the lemma grids, and the differential
runner."""

from cfj.fixtures import ACCEPTED, load
from cfj.harness import (
    count_mains, dispatch_grid, enumerate_mains, mtype_implies_mbody_violations,
    ndp_implies_mtype_violations, oracle_disagreements_grid,
    pmtype_stability_violations, resolve_oracle, run_differential, run_soundness,
)
from cfj.parser import render_expr
from cfj.syntax import Invoke, NewClass, NewLayer, Program, With


def test_oracle_resolves_the_inherited_partial_method():
    p = load("p_lookup1")
    assert resolve_oracle(p, ("L1", "L2"), "C", "m") == ("layer", "L3", "C")


def test_oracle_falls_through_to_the_superclass():
    p = load("p_lookup1")
    assert resolve_oracle(p, ("L1",), "C", "m") == ("layer", "L1", "D")


def test_oracle_base_and_empty_cases():
    p = load("p_lookup1")
    assert resolve_oracle(p, (), "C", "m") == ("base", "D")
    empty = Program({}, {}, NewClass("Object", ()))
    assert resolve_oracle(empty, (), "Object", "m") is None


def test_oracle_equivalence_exhaustive():
    for f in ACCEPTED:
        p = load(f.id)
        assert oracle_disagreements_grid(p) == [], f.id


def test_dispatch_grid_is_exhaustive_over_permutations():
    p = load("p_lookup1")
    seqs = {seq for _, _, seq in dispatch_grid(p)}
    # 3 layers: 1 empty + 3 + 6 + 6 orderings
    assert len(seqs) == 16


def test_enumerate_depth1():
    p = load("p_lookup1")
    level1 = enumerate_mains(p, 1)
    rendered = {render_expr(e) for e in level1}
    assert "new C()" in rendered
    assert "new L1()" in rendered
    assert len(level1) == 12  # 9 field-free classes + 3 layers


def test_enumerate_depth3_contains_the_activation_shapes():
    p = load("p_lookup1")
    rendered = {render_expr(e) for e in enumerate_mains(p, 3)}
    assert "with new L1() { new C().m() }" in rendered
    assert "new C().m().m()" in rendered


def test_enumeration_count_matches_the_recurrence():
    for fid in ("p_lookup1", "p_lookup2", "p_game", "c07_swap"):
        p = load(fid)
        for depth in (1, 2, 3, 4):
            assert len(enumerate_mains(p, depth)) == count_mains(p, depth), (fid, depth)


def test_enumeration_has_no_duplicates():
    p = load("p_lookup2")
    mains = enumerate_mains(p, 3)
    assert len(mains) == len(set(mains))


def test_lemma_grids_have_no_violations():
    for f in ACCEPTED:
        p = load(f.id)
        assert pmtype_stability_violations(p) == [], f.id
        assert ndp_implies_mtype_violations(p, 3) == [], f.id
        assert mtype_implies_mbody_violations(p, 3) == [], f.id


def test_soundness_report_on_the_full_lookup_fixture():
    p = load("p_lookup2")
    report = run_soundness(p, 200, "p_lookup2")
    assert report.ok
    assert report.final_kind == "value"
    assert report.steps == 73


def test_soundness_report_trivial():
    p = load("c01_min")
    report = run_soundness(p, 10, "c01")
    assert report.ok and report.steps == 0


def test_soundness_shows_the_counterexample_stuckness():
    # checking bypassed on purpose: the report must record the progress
    # failure instead of raising
    p = load("p_cex1")
    report = run_soundness(p, 10, "p_cex1-unchecked")
    assert not report.ok
    assert any("progress violated" in f for f in report.failures)


def test_differential_depth3_on_lookup_tables():
    summary = run_differential(load("p_lookup1"), 3, 100, "p_lookup1")
    assert summary.ok
    assert summary.accepted > 0 and summary.rejected > 0
    assert summary.total == count_mains(load("p_lookup1"), 3)


def test_differential_on_rejected_tables_is_vacuous():
    summary = run_differential(load("p_cex1"), 3, 100, "p_cex1")
    assert summary.ok
    assert summary.accepted == 0
    assert summary.rejected == summary.total > 0


def test_differential_on_empty_tables():
    empty = Program({}, {}, NewClass("Object", ()))
    summary = run_differential(empty, 2, 10, "empty")
    assert summary.ok and summary.total == 0


def test_differential_restores_the_main_expression():
    p = load("p_lookup1")
    before = p.main
    run_differential(p, 2, 50, "p_lookup1")
    assert p.main is before
