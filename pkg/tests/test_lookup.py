"""Lookup functions and the override predicates."""

from itertools import permutations

import pytest

from cfj import lookup
from cfj.fixtures import ACCEPTED, load
from cfj.parser import parse_program
from cfj.relations import weak_sub
from cfj.syntax import BASE, OBJECT, ClassType, UnknownName


def sig(p, *names):
    return lookup.Signature(tuple(ClassType(n) for n in names[:-1]), ClassType(names[-1]))


def test_fields_of_object_is_empty():
    p = load("c01_min")
    assert lookup.fields(p, OBJECT) == ()


def test_fields_accumulate_superclass_first():
    p = parse_program("""
    class A extends Object { Object f; }
    class B extends A { A g; }
    main { new Object() }
    """)
    got = [(str(t), f) for t, f in lookup.fields(p, "B")]
    assert got == [("Object", "f"), ("A", "g")]


def test_fields_unknown_class():
    p = load("c01_min")
    with pytest.raises(UnknownName):
        lookup.fields(p, "Ghost")


def test_fields_empty_when_no_declarations():
    p = load("p_lookup1")
    assert lookup.fields(p, "C") == ()


def test_pmbody_walks_the_superlayer_chain():
    p = load("p_lookup1")
    r = lookup.pmbody(p, "m", "C", "L2")
    assert r is not None and r.found_layer == "L3"
    assert lookup.pmbody(p, "m", "C", "L1") is None
    assert lookup.pmbody(p, "m", "C", BASE) is None


def test_mbody_layer_beats_base_and_superclass():
    p = load("p_lookup1")
    seq = ("L1", "L2")
    r = lookup.mbody(p, "m", "C", seq, seq)
    assert (r.found_class, r.found_prefix, r.defining_layer) == ("C", seq, "L3")


def test_mbody_falls_through_to_the_superclass():
    p = load("p_lookup1")
    r = lookup.mbody(p, "m", "C", ("L1",), ("L1",))
    assert (r.found_class, r.found_prefix, r.defining_layer) == ("D", ("L1",), "L1")


def test_mbody_base_method_directly():
    p = load("p_lookup1")
    r = lookup.mbody(p, "m", "D", (), ())
    assert (r.found_class, r.found_prefix, r.defining_layer) == ("D", (), None)


def test_pmtype_own_declaration_and_base_emptiness():
    from cfj.syntax import LayerType
    p = load("p_lookup2")
    assert lookup.pmtype(p, "m", "C", "L3") == lookup.Signature((), LayerType("Unit"))
    assert lookup.pmtype(p, "m", "C", BASE) is None


def test_mtype_base_signature():
    p = load("c03_base_invoke")
    got = lookup.mtype(p, "id", "A", frozenset(), frozenset())
    assert got == sig(p, "A", "A")


def test_mtype_via_required_layer():
    p = load("p_cex1")
    got = lookup.mtype(p, "m", "C", {"L"}, {"L"})
    assert got == sig(p, "Int")


def test_mtype_conflict_on_clashing_layers():
    p = load("r03_conflict")
    got = lookup.mtype(p, "go", "A", {"X1", "X2"}, {"X1", "X2"})
    assert isinstance(got, lookup.Conflict)
    assert len(got.witnesses) == 2


def test_noconflict():
    p = load("p_lookup2")
    assert lookup.noconflict(p, "L1", "L1")
    assert lookup.noconflict(p, "L1", "L2")
    bad = load("r03_conflict")
    assert not lookup.noconflict(bad, "X1", "X2")


def test_override_h():
    p = load("p_lookup2")
    assert lookup.override_h(p, "L1", "D")
    assert lookup.override_h(p, "L3", "C")
    # vacuous when the layer has nothing for the class
    assert lookup.override_h(p, "L2", "E")
    bad = load("r04_override_h")
    assert not lookup.override_h(bad, "Bad", "A")


def test_override_v():
    p = load("p_lookup2")
    assert lookup.override_v(p, "D")
    assert lookup.override_v(p, "C")
    bad = load("r05_override_v")
    assert not lookup.override_v(bad, "B2")


def test_widened_parameter_rejected_by_override_h():
    p = parse_program("""
    class A extends Object { }
    class B extends A { }
    class K extends Object { K go(B x) { return this; } }
    layer Widener { K K.go(A x) { return this; } }
    main { new Object() }
    """)
    assert not lookup.override_h(p, "Widener", "K")


def all_seqs(p, max_len=None):
    layers = sorted(p.layers)
    if max_len is None:
        max_len = len(layers)
    yield ()
    for k in range(1, max_len + 1):
        yield from permutations(layers, k)


def grid_methods(p):
    return sorted({m for d in p.classes.values() for m in d.methods}
                  | {pm.name for d in p.layers.values()
                     for pm in d.partial_methods.values()})


def test_mbody_defined_iff_mtype_defined():
    for f in ACCEPTED:
        p = load(f.id)
        for seq in all_seqs(p, 3):
            for c in sorted(p.classes):
                for m in grid_methods(p):
                    for cut in range(len(seq) + 1):
                        seq1 = seq[:cut]
                        body = lookup.mbody(p, m, c, seq1, seq)
                        ty = lookup.mtype(p, m, c, frozenset(seq1), frozenset(seq))
                        assert not isinstance(ty, lookup.Conflict), (f.id, c, m)
                        assert (body is None) == (ty is None), (f.id, c, m, seq1, seq)
                        if body is not None:
                            assert len(body.params) == len(ty.param_types)


def test_mbody_prefix_never_ends_at_the_layer_root():
    for f in ACCEPTED:
        p = load(f.id)
        for seq in all_seqs(p, 3):
            for c in sorted(p.classes):
                for m in grid_methods(p):
                    r = lookup.mbody(p, m, c, seq, seq)
                    if r is not None and r.found_prefix:
                        assert r.found_prefix[-1] != BASE


def test_pmbody_found_layer_is_a_weak_ancestor():
    for f in ACCEPTED:
        p = load(f.id)
        for l in sorted(p.layers):
            for c in sorted(p.classes):
                for m in grid_methods(p):
                    r = lookup.pmbody(p, m, c, l)
                    if r is not None:
                        assert weak_sub(p, l, r.found_layer)


def test_pmtype_agrees_with_pmbody_on_definedness_and_arity():
    for f in ACCEPTED:
        p = load(f.id)
        for l in sorted(p.layers):
            for c in sorted(p.classes):
                for m in grid_methods(p):
                    body = lookup.pmbody(p, m, c, l)
                    ty = lookup.pmtype(p, m, c, l)
                    assert (body is None) == (ty is None)
                    if body is not None:
                        assert len(body.params) == len(ty.param_types)
