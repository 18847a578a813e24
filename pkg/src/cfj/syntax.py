"""Abstract syntax: types, expressions, class/layer tables, and table validation.

Everything here is immutable once built.  Tables are plain dicts that the
parser populates in declaration order and never mutates afterwards, so a
validated Program can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

OBJECT = "Object"  # implicit root of the class hierarchy, never in the table
BASE = "Base"      # implicit root of the layer hierarchy, never in the table


class CfjError(Exception):
    """Base class for every error this package raises."""


class UnknownName(CfjError):
    """A class or layer name does not resolve in its table."""


# ------------------------------------------------------------------
# Source spans
# ------------------------------------------------------------------

@dataclass(frozen=True)
class SourceSpan:
    """Half-open byte range plus 1-based line/column of the start."""

    start: int
    end: int
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


_SPAN = field(default=None, compare=False, repr=False)


# ------------------------------------------------------------------
# Types
# ------------------------------------------------------------------

@dataclass(frozen=True)
class ClassType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class LayerType:
    name: str

    def __str__(self) -> str:
        return self.name


Type = Union[ClassType, LayerType]

# Activation state: an ordered duplicate-free sequence (dynamic) versus the
# unordered underapproximation the typechecker tracks.
LayerSeq = tuple  # tuple[str, ...]
LayerSet = frozenset  # frozenset[str]


# ------------------------------------------------------------------
# Expressions
# ------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class FieldGet:
    obj: "Expr"
    fieldname: str
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class Invoke:
    recv: "Expr"
    method: str
    args: tuple
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class NewClass:
    classname: str
    args: tuple
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class NewLayer:
    layername: str
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class With:
    layer_expr: "Expr"
    body: "Expr"
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class Swap:
    layer_expr: "Expr"
    swappable: str
    body: "Expr"
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class Proceed:
    args: tuple
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class SuperCall:
    method: str
    args: tuple
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class SuperProceed:
    args: tuple
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class Cursor:
    """Lookup cursor on a runtime invocation.

    ``layer`` is None for the triple form (proceed/super continuation) and a
    layer name for the quadruple form (superproceed continuation).  ``prefix``
    is always a prefix of ``full``.
    """

    target: str
    layer: Optional[str]
    prefix: tuple
    full: tuple

    def __post_init__(self) -> None:
        if self.full[: len(self.prefix)] != self.prefix:
            raise ValueError(f"cursor prefix {self.prefix} is not a prefix of {self.full}")

    @property
    def is_quad(self) -> bool:
        return self.layer is not None


@dataclass(frozen=True)
class AnnotatedInvoke:
    """Runtime-only invocation carrying a lookup cursor; never parsed."""

    recv: NewClass
    cursor: Cursor
    method: str
    args: tuple
    span: Optional[SourceSpan] = _SPAN


Expr = Union[
    Var, FieldGet, Invoke, NewClass, NewLayer, With, Swap,
    Proceed, SuperCall, SuperProceed, AnnotatedInvoke,
]


def is_value(e: Expr) -> bool:
    """True for fully-evaluated object and layer instances."""
    if isinstance(e, NewLayer):
        return True
    if isinstance(e, NewClass):
        return all(is_value(a) for a in e.args)
    return False


def subexprs(e: Expr) -> Iterator[Expr]:
    """Direct children of an expression node."""
    if isinstance(e, FieldGet):
        yield e.obj
    elif isinstance(e, Invoke):
        yield e.recv
        yield from e.args
    elif isinstance(e, NewClass):
        yield from e.args
    elif isinstance(e, With):
        yield e.layer_expr
        yield e.body
    elif isinstance(e, Swap):
        yield e.layer_expr
        yield e.body
    elif isinstance(e, (Proceed, SuperCall, SuperProceed)):
        yield from e.args
    elif isinstance(e, AnnotatedInvoke):
        yield e.recv
        yield from e.args


def walk(e: Expr) -> Iterator[Expr]:
    """Every node of the expression tree, preorder."""
    yield e
    for child in subexprs(e):
        yield from walk(child)


# ------------------------------------------------------------------
# Declarations and program
# ------------------------------------------------------------------

@dataclass(frozen=True)
class MethodDecl:
    name: str
    return_type: Type
    params: tuple  # tuple[(Type, str), ...]
    body: Expr
    span: Optional[SourceSpan] = _SPAN

    @property
    def param_names(self) -> tuple:
        return tuple(n for _, n in self.params)

    @property
    def param_types(self) -> tuple:
        return tuple(t for t, _ in self.params)


@dataclass(frozen=True)
class PartialMethodDecl:
    target_class: str
    name: str
    return_type: Type
    params: tuple
    body: Expr
    span: Optional[SourceSpan] = _SPAN

    @property
    def param_names(self) -> tuple:
        return tuple(n for _, n in self.params)

    @property
    def param_types(self) -> tuple:
        return tuple(t for t, _ in self.params)


@dataclass(frozen=True)
class ClassDecl:
    name: str
    superclass: str
    own_fields: tuple  # tuple[(Type, str), ...]
    methods: dict      # dict[str, MethodDecl], declaration order
    span: Optional[SourceSpan] = _SPAN


@dataclass(frozen=True)
class LayerDecl:
    name: str
    superlayer: str
    swappable: bool
    requires: tuple    # declared order; validated duplicate-free
    partial_methods: dict  # dict[(str, str), PartialMethodDecl]
    span: Optional[SourceSpan] = _SPAN

    @property
    def requires_set(self) -> frozenset:
        return frozenset(self.requires)


# Typing context: where an expression appears.

@dataclass(frozen=True)
class TopLevel:
    def __str__(self) -> str:
        return "top level"


@dataclass(frozen=True)
class InBaseMethod:
    classname: str
    method: str

    def __str__(self) -> str:
        return f"{self.classname}.{self.method}"


@dataclass(frozen=True)
class InPartialMethod:
    layer: str
    classname: str
    method: str

    def __str__(self) -> str:
        return f"{self.layer}.{self.classname}.{self.method}"


Location = Union[TopLevel, InBaseMethod, InPartialMethod]
TOP_LEVEL = TopLevel()


@dataclass
class Program:
    """A class table, a layer table, and the main expression."""

    classes: dict   # dict[str, ClassDecl]
    layers: dict    # dict[str, LayerDecl]
    main: Expr
    source_name: str = "<program>"

    def __post_init__(self) -> None:
        self._cache: dict = {}

    # Ancestor chains are the workhorse of every relation and lookup; they
    # are tiny, so caching them per name suffices.

    def class_ancestors(self, c: str) -> tuple:
        """Chain c, super(c), ..., Object.  Raises UnknownName off-table."""
        key = ("canc", c)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        chain = [c]
        seen = {c}
        cur = c
        while cur != OBJECT:
            decl = self.classes.get(cur)
            if decl is None:
                raise UnknownName(f"unknown class {cur!r}")
            cur = decl.superclass
            if cur in seen:
                raise CfjError(f"class extends cycle through {cur!r}")
            seen.add(cur)
            chain.append(cur)
        result = tuple(chain)
        self._cache[key] = result
        return result

    def layer_ancestors(self, l: str) -> tuple:
        """Chain l, super(l), ..., Base.  Raises UnknownName off-table."""
        key = ("lanc", l)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        chain = [l]
        seen = {l}
        cur = l
        while cur != BASE:
            decl = self.layers.get(cur)
            if decl is None:
                raise UnknownName(f"unknown layer {cur!r}")
            cur = decl.superlayer
            if cur in seen:
                raise CfjError(f"layer extends cycle through {cur!r}")
            seen.add(cur)
            chain.append(cur)
        result = tuple(chain)
        self._cache[key] = result
        return result

    def superclass(self, c: str) -> str:
        if c == OBJECT:
            raise UnknownName("Object has no superclass")
        decl = self.classes.get(c)
        if decl is None:
            raise UnknownName(f"unknown class {c!r}")
        return decl.superclass

    def superlayer(self, l: str) -> str:
        if l == BASE:
            raise UnknownName("Base has no superlayer")
        decl = self.layers.get(l)
        if decl is None:
            raise UnknownName(f"unknown layer {l!r}")
        return decl.superlayer

    def requires_of(self, l: str) -> frozenset:
        """Declared requires set; Base requires nothing."""
        if l == BASE:
            return frozenset()
        decl = self.layers.get(l)
        if decl is None:
            raise UnknownName(f"unknown layer {l!r}")
        return decl.requires_set

    def is_swappable(self, l: str) -> bool:
        if l == BASE:
            return False
        decl = self.layers.get(l)
        return decl is not None and decl.swappable

    def partial_method(self, l: str, c: str, m: str) -> Optional[PartialMethodDecl]:
        """The partial method literally declared in l, ignoring inheritance."""
        if l == BASE:
            return None
        decl = self.layers.get(l)
        if decl is None:
            raise UnknownName(f"unknown layer {l!r}")
        return decl.partial_methods.get((c, m))


# ------------------------------------------------------------------
# Table validation (the sanity conditions)
# ------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    condition: int       # sanity condition number; 0 for auxiliary checks
    location: str
    message: str

    def __str__(self) -> str:
        tag = f"sanity {self.condition}" if self.condition else "check"
        return f"[{tag}] {self.location}: {self.message}"


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "tables valid"
        return "\n".join(str(v) for v in self.violations)


def _expr_names(e: Expr) -> Iterator[tuple]:
    """(role, name, span) for every class/layer name mentioned in e."""
    for node in walk(e):
        if isinstance(node, NewClass):
            yield ("class", node.classname, node.span)
        elif isinstance(node, NewLayer):
            yield ("layer", node.layername, node.span)
        elif isinstance(node, Swap):
            yield ("layer", node.swappable, node.span)


def validate_tables(program: Program) -> ValidationReport:
    """Check the eight sanity conditions plus duplicate-name hygiene.

    Violations are report entries, not exceptions; the report lists every
    problem found so a caller can surface them all at once.
    """
    out: list = []

    def bad(cond: int, loc: str, msg: str) -> None:
        out.append(Violation(cond, loc, msg))

    classes = program.classes
    layers = program.layers

    def check_class_name(name: str, loc: str) -> None:
        if name != OBJECT and name not in classes:
            bad(3, loc, f"class name {name!r} does not resolve")

    def check_layer_name(name: str, loc: str) -> None:
        if name != BASE and name not in layers:
            bad(6, loc, f"layer name {name!r} does not resolve")

    def check_type(t: Type, loc: str) -> None:
        if isinstance(t, ClassType):
            check_class_name(t.name, loc)
        else:
            check_layer_name(t.name, loc)

    def check_body(e: Expr, loc: str) -> None:
        for role, name, _ in _expr_names(e):
            if role == "class":
                check_class_name(name, loc)
            else:
                check_layer_name(name, loc)
        for node in walk(e):
            if isinstance(node, NewLayer) and node.layername in classes:
                # resolution bug, not reachable through the parser
                bad(6, loc, f"{node.layername!r} instantiated as a layer but declared as a class")

    def check_params(params: tuple, loc: str) -> None:
        names = [n for _, n in params]
        if len(set(names)) != len(names):
            bad(0, loc, "duplicate parameter names")
        if "this" in names:
            bad(0, loc, "parameter named 'this'")
        for t, _ in params:
            check_type(t, loc)

    def check_no_continuations(e: Expr, loc: str, what: str) -> None:
        for node in walk(e):
            if isinstance(node, (Proceed, SuperProceed)):
                kw = "proceed" if isinstance(node, Proceed) else "superproceed"
                bad(0, loc, f"{kw} is not allowed in {what}")

    # Conditions 1/2: class table keys.  The reserved roots never appear in
    # either table domain.
    if OBJECT in classes:
        bad(2, OBJECT, "Object must not be declared")
    if BASE in classes:
        bad(0, BASE, "Base is reserved for the layer root")
    if OBJECT in layers:
        bad(0, OBJECT, "Object is reserved for the class root")
    for name, decl in classes.items():
        loc = f"class {name}"
        if decl.name != name:
            bad(1, loc, f"table key {name!r} does not match declared name {decl.name!r}")
        check_class_name(decl.superclass, loc)
        if decl.superclass in layers:
            bad(3, loc, f"superclass {decl.superclass!r} is a layer")
        fieldnames = [f for _, f in decl.own_fields]
        if len(set(fieldnames)) != len(fieldnames):
            bad(0, loc, "duplicate field names")
        for t, _ in decl.own_fields:
            check_type(t, loc)
        for m, md in decl.methods.items():
            mloc = f"{name}.{m}"
            check_type(md.return_type, mloc)
            check_params(md.params, mloc)
            check_body(md.body, mloc)
            check_no_continuations(md.body, mloc, "a base method body")

    # Conditions 4/5: layer table keys.
    if BASE in layers:
        bad(5, BASE, "Base must not be declared")
    for name, decl in layers.items():
        loc = f"layer {name}"
        if decl.name != name:
            bad(4, loc, f"table key {name!r} does not match declared name {decl.name!r}")
        check_layer_name(decl.superlayer, loc)
        if decl.superlayer in classes:
            bad(6, loc, f"superlayer {decl.superlayer!r} is a class")
        if len(set(decl.requires)) != len(decl.requires):
            bad(0, loc, "duplicate names in requires clause")
        if name in decl.requires:
            bad(0, loc, "layer requires itself")
        for req in decl.requires:
            check_layer_name(req, loc)
        for (c, m), pm in decl.partial_methods.items():
            ploc = f"{name}.{c}.{m}"
            if pm.target_class == OBJECT:
                bad(8, ploc, "a layer cannot introduce a method to Object")
            else:
                check_class_name(pm.target_class, ploc)
            check_type(pm.return_type, ploc)
            check_params(pm.params, ploc)
            check_body(pm.body, ploc)

    # Condition 7: both extends relations are acyclic.
    for name in classes:
        try:
            program.class_ancestors(name)
        except UnknownName:
            pass  # already reported under condition 3
        except CfjError:
            bad(7, f"class {name}", "cycle in class extends chain")
    for name in layers:
        try:
            program.layer_ancestors(name)
        except UnknownName:
            pass
        except CfjError:
            bad(7, f"layer {name}", "cycle in layer extends chain")

    # Duplicate field names along an inheritance chain break field indexing.
    for name in classes:
        try:
            chain = program.class_ancestors(name)
        except CfjError:
            continue
        seen: dict = {}
        for anc in reversed(chain):
            if anc == OBJECT:
                continue
            for _, f in classes[anc].own_fields:
                if f in seen and seen[f] != anc:
                    bad(0, f"class {name}", f"field {f!r} shadows the one in {seen[f]}")
                seen.setdefault(f, anc)

    # The main expression must resolve and contain no method-body keywords.
    check_body(program.main, "main")
    check_no_continuations(program.main, "main", "the main expression")

    return ValidationReport(out)
