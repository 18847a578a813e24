"""Table validation and core invariants."""

import pytest

from cfj.fixtures import load
from cfj.parser import ValidationError, parse_program
from cfj.syntax import Cursor, NewClass, NewLayer, is_value, validate_tables


def violations_of(text):
    try:
        parse_program(text)
    except ValidationError as exc:
        return exc.report.violations
    return []


def conditions_of(text):
    return {v.condition for v in violations_of(text)}


def test_self_extends_is_a_cycle():
    assert 7 in conditions_of("class A extends A { } main { new Object() }")


def test_mutual_extends_cycle():
    assert 7 in conditions_of(
        "class A extends B { } class B extends A { } main { new Object() }")


def test_partial_method_on_object_rejected():
    text = """
    class A extends Object { }
    layer L1 { A Object.m() { return new A(); } }
    main { new A() }
    """
    assert 8 in conditions_of(text)


def test_paper_fixture_tables_are_clean():
    report = validate_tables(load("p_lookup2"))
    assert report.ok


def test_unresolved_superclass():
    assert 3 in conditions_of("class A extends Ghost { } main { new A() }")


def test_unresolved_layer_in_requires():
    text = "layer L1 requires Ghost { } main { new Object() }"
    assert 6 in conditions_of(text)


def test_duplicate_fields_rejected():
    text = "class A extends Object { Object f; Object f; } main { new A() }"
    assert violations_of(text)


def test_field_shadowing_rejected():
    text = """
    class A extends Object { Object f; }
    class B extends A { Object f; }
    main { new Object() }
    """
    assert violations_of(text)


def test_duplicate_requires_rejected():
    text = """
    layer L1 { }
    layer L2 requires L1, L1 { }
    main { new Object() }
    """
    assert violations_of(text)


def test_layer_requiring_itself_rejected():
    assert violations_of("layer L1 requires L1 { } main { new Object() }")


def test_reserved_names_not_declarable():
    assert 2 in conditions_of("class Object extends Object { } main { new Object() }")
    assert violations_of("class Base extends Object { } main { new Object() }")
    assert violations_of("layer Object { } main { new Object() }")


def test_proceed_in_base_method_rejected_early():
    # The grammar already refuses it; here the message must point at the body.
    from cfj.parser import ParseError
    text = "class A extends Object { A m() { return proceed(); } } main { new A() }"
    with pytest.raises(ParseError):
        parse_program(text)


def test_cursor_prefix_invariant_enforced():
    with pytest.raises(ValueError):
        Cursor("C", None, ("L1", "L2"), ("L1",))
    ok = Cursor("C", None, ("L1",), ("L1", "L2"))
    assert ok.prefix == ("L1",)


def test_is_value():
    assert is_value(NewLayer("L1"))
    assert is_value(NewClass("A", (NewClass("B", ()),)))
    p = load("c03_base_invoke")
    assert not is_value(p.main)


def test_extends_dags_rooted_at_the_roots():
    for fid in ("p_lookup1", "p_game", "c15_deep_chain"):
        p = load(fid)
        for c in p.classes:
            assert p.class_ancestors(c)[-1] == "Object"
        for l in p.layers:
            assert p.layer_ancestors(l)[-1] == "Base"
