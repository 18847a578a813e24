"""Surface syntax: parsing, rendering, and the round-trip property."""

import pytest
from hypothesis import given, strategies as st

from cfj.fixtures import FIXTURES, fixture_source, load
from cfj.parser import ParseError, parse_program, render, render_expr
from cfj.syntax import (
    Cursor, AnnotatedInvoke, Invoke, NewClass, NewLayer, FieldGet, Swap, Var, With,
)


def same_tree(p1, p2):
    return (p1.classes, p1.layers, p1.main) == (p2.classes, p2.layers, p2.main)


def test_smallest_program():
    p = parse_program("class C extends Object { } main { new C() }")
    assert list(p.classes) == ["C"]
    assert p.layers == {}
    assert p.main == NewClass("C", ())


def test_lookup_example_transcription():
    # Direct transcription of the two-activation dispatch tables.
    text = """
    class E extends Object { E m() { return this; } }
    class D extends E { E m() { return this; } }
    class C extends D { }
    layer L1 { E D.m() { return this; } }
    layer L2 extends L3 { E E.m() { return this; } }
    layer L3 { E C.m() { return this; } }
    main { with new L1() { with new L2() { new C().m() } } }
    """
    p = parse_program(text)
    assert len(p.classes) == 3
    assert len(p.layers) == 3
    assert p.layers["L2"].superlayer == "L3"
    assert p.layers["L1"].superlayer == "Base"
    assert p.layers["L1"].requires == ()


def test_with_requires_a_body():
    with pytest.raises(ParseError):
        parse_program("main { with new Object() { } }")


def test_layer_instantiation_takes_no_arguments():
    text = "class A extends Object { } layer L1 { } main { new L1(new A()) }"
    with pytest.raises(ParseError):
        parse_program(text)


def test_comments_and_whitespace():
    text = "// heading\nclass A extends Object { }\n\nmain { new A() } // tail"
    assert list(parse_program(text).classes) == ["A"]


def test_keywords_are_not_identifiers():
    with pytest.raises(ParseError):
        parse_program("class with extends Object { } main { new Object() }")


def test_render_layer_instance():
    assert render_expr(NewLayer("L1")) == "new L1()"


def test_render_triple_cursor():
    e = AnnotatedInvoke(
        NewClass("C", ()),
        Cursor("C", None, ("L1", "L2", "L3"), ("L1", "L2", "L3")),
        "m", ())
    assert render_expr(e) == "new C()<C,(L1;L2;L3),(L1;L2;L3)>.m()"


def test_render_quad_cursor_and_empty_prefix():
    quad = AnnotatedInvoke(
        NewClass("C", ()),
        Cursor("C", "L4", ("L1",), ("L1", "L2")),
        "m", ())
    assert render_expr(quad) == "new C()<C,L4,(L1),(L1;L2)>.m()"
    triple = AnnotatedInvoke(
        NewClass("C", ()), Cursor("C", None, (), ("L", "L2")), "m", ())
    assert render_expr(triple) == "new C()<C,•,(L;L2)>.m()"


def test_round_trip_all_fixtures():
    for f in FIXTURES:
        p1 = parse_program(fixture_source(f.filename), f.filename)
        p2 = parse_program(render(p1), f.filename)
        assert same_tree(p1, p2), f.id


def test_round_trip_is_a_fixpoint():
    for fid in ("p_lookup2", "c10_superproceed", "c20_swap_requires"):
        p1 = load(fid)
        text1 = render(p1)
        text2 = render(parse_program(text1))
        assert text1 == text2


def test_parse_swap_order():
    # Activation expression first, deactivation target second.
    p = parse_program(
        "swappable layer S { } layer T extends S { } "
        "main { swap (new T(), S) { new Object() } }")
    assert isinstance(p.main, Swap)
    assert p.main.swappable == "S"
    assert p.main.layer_expr == NewLayer("T")


# Expression-level round trip over arbitrary trees: rendering then parsing
# in a body context reproduces the tree (spans are ignored by equality).

PRELUDE = "class A extends Object { } class B extends Object { } swappable layer S { } "

names = st.sampled_from(["a", "b", "c"])
classnames = st.sampled_from(["A", "B"])
methods = st.sampled_from(["m", "go"])
fieldnames = st.sampled_from(["f", "g"])


def exprs(children):
    return st.one_of(
        st.builds(lambda n: Var(n), names),
        st.builds(lambda c, args: NewClass(c, tuple(args)),
                  classnames, st.lists(children, max_size=2)),
        st.builds(lambda e, f: FieldGet(e, f), children, fieldnames),
        st.builds(lambda e, m, args: Invoke(e, m, tuple(args)),
                  children, methods, st.lists(children, max_size=2)),
        st.builds(lambda el, b: With(el, b), children, children),
        st.builds(lambda el, b: Swap(el, "S", b), children, children),
    )


expr_trees = st.recursive(
    st.one_of(st.builds(lambda n: Var(n), names),
              st.builds(lambda c: NewClass(c, ()), classnames),
              st.just(NewLayer("S"))),
    exprs, max_leaves=12)


@given(expr_trees)
def test_expr_round_trip(e):
    text = render_expr(e)
    wrapped = parse_program(PRELUDE + "main { " + text + " }", "<prop>")
    assert wrapped.main == e
