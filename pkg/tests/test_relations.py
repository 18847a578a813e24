"""Subtyping relations, checked against a brute-force closure oracle and
exhaustively for the algebraic properties."""

from itertools import chain, combinations

from cfj.fixtures import ACCEPTED, load
from cfj.relations import (
    class_sub, normal_sub, set_sw_sub, set_weak_sub, type_sub, weak_sub,
)
from cfj.syntax import BASE, OBJECT, ClassType, LayerType


def reachable_pairs(edges, nodes):
    """Reflexive-transitive closure by plain BFS; independent of the
    implementation under test."""
    out = set()
    for start in nodes:
        seen = {start}
        frontier = [start]
        while frontier:
            cur = frontier.pop()
            nxt = edges.get(cur)
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
        out.update((start, other) for other in seen)
    return out


def all_classes(p):
    return sorted(p.classes) + [OBJECT]


def all_layers(p):
    return sorted(p.layers) + [BASE]


def subsets(xs):
    return chain.from_iterable(combinations(xs, k) for k in range(len(xs) + 1))


def test_class_sub_matches_closure_oracle():
    for fid in ("p_lookup1", "p_game", "c15_deep_chain"):
        p = load(fid)
        edges = {c: d.superclass for c, d in p.classes.items()}
        expected = reachable_pairs(edges, all_classes(p))
        for c in all_classes(p):
            for d in all_classes(p):
                assert class_sub(p, c, d) == ((c, d) in expected), (fid, c, d)


def test_class_sub_examples():
    p = load("p_lookup1")
    assert class_sub(p, "C", "C")
    assert class_sub(p, "C", "E")
    assert not class_sub(p, "E", "C")


def test_weak_sub_matches_closure_oracle():
    for f in ACCEPTED:
        p = load(f.id)
        edges = {l: d.superlayer for l, d in p.layers.items()}
        expected = reachable_pairs(edges, all_layers(p))
        for l1 in all_layers(p):
            for l2 in all_layers(p):
                assert weak_sub(p, l1, l2) == ((l1, l2) in expected), (f.id, l1, l2)


def test_weak_sub_examples():
    p = load("p_game")
    assert weak_sub(p, "Weather", "Weather")
    assert weak_sub(p, "Foggy", "Weather")
    assert weak_sub(p, "ThunderInStorm", "Thunder")
    assert not weak_sub(p, "Weather", "Foggy")


def test_normal_sub_examples():
    p = load("p_game")
    assert normal_sub(p, "Thunder", "Thunder")
    # requires {Stormy} versus the parent's {Weather}: weakly fine, not normal
    assert weak_sub(p, "ThunderInStorm", "Thunder")
    assert not normal_sub(p, "ThunderInStorm", "Thunder")
    # identical (empty) requires along the chain
    assert normal_sub(p, "Stormy", "Weather")
    # nonempty requires blocks the step to the root
    assert not normal_sub(p, "Thunder", "Base")
    assert normal_sub(p, "Weather", "Base")


def test_normal_implies_weak_everywhere():
    for f in ACCEPTED:
        p = load(f.id)
        for l1 in all_layers(p):
            for l2 in all_layers(p):
                if normal_sub(p, l1, l2):
                    assert weak_sub(p, l1, l2), (f.id, l1, l2)


def test_reflexive_and_transitive():
    for fid in ("p_game", "p_lookup2", "c20_swap_requires"):
        p = load(fid)
        layers = all_layers(p)
        for rel in (weak_sub, normal_sub):
            for l in layers:
                assert rel(p, l, l)
            for a in layers:
                for b in layers:
                    for c in layers:
                        if rel(p, a, b) and rel(p, b, c):
                            assert rel(p, a, c), (fid, rel.__name__, a, b, c)


def test_set_weak_sub_examples():
    p = load("p_game")
    assert set_weak_sub(p, frozenset(), frozenset())
    assert set_weak_sub(p, {"Foggy"}, {"Weather"})
    assert not set_weak_sub(p, {"Weather"}, {"Foggy"})


def test_set_weak_sub_monotone_in_the_left_argument():
    p = load("p_game")
    layers = sorted(p.layers)
    targets = [frozenset(), {"Weather"}, {"Weather", "Stormy"}, {"Thunder"}]
    for lam2 in targets:
        for lam1 in subsets(layers[:4]):
            lam1 = frozenset(lam1)
            if set_weak_sub(p, lam1, lam2):
                for extra in layers:
                    assert set_weak_sub(p, lam1 | {extra}, lam2)


def test_set_sw_sub_subsumes_set_weak_sub():
    for fid in ("p_game", "c07_swap", "c20_swap_requires"):
        p = load(fid)
        layers = sorted(p.layers)
        for lam1 in subsets(layers[:4]):
            for lam2 in subsets(layers[:4]):
                if set_weak_sub(p, lam1, lam2):
                    assert set_sw_sub(p, lam1, lam2)


def test_set_sw_sub_through_a_swappable():
    p = load("p_cex1")
    # L1 and L2 share the swappable ancestor L0, so either stands in for
    # the other even though neither weakly covers it.
    assert not set_weak_sub(p, {"L", "L2"}, {"L", "L1"})
    assert set_sw_sub(p, {"L", "L2"}, {"L", "L1"})
    assert not set_sw_sub(p, frozenset(), {"L"})


def test_weak_sub_lifts_to_singleton_sw_sets():
    p = load("p_game")
    for l1 in sorted(p.layers):
        for l2 in sorted(p.layers):
            if weak_sub(p, l1, l2):
                assert set_sw_sub(p, {l1}, {l2})


def test_type_sub_never_mixes_worlds():
    p = load("p_game")
    assert type_sub(p, ClassType("Hero"), ClassType("Object"))
    assert type_sub(p, LayerType("Stormy"), LayerType("Weather"))
    assert not type_sub(p, ClassType("Hero"), LayerType("Weather"))
    assert not type_sub(p, LayerType("Weather"), ClassType("Object"))
