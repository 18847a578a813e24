"""Method lookup: bodies, signatures, and the global override predicates.

Dispatch walks three axes: the activated layer sequence (right to left),
each layer's superlayer chain, and the class inheritance chain.  Body
lookup and signature lookup mirror each other rule for rule.

Signature lookup over a layer set is not a function a priori: several
layers may offer clashing signatures.  mtype therefore collects every
applicable witness and reports a Conflict when they disagree, which the
table checks turn into errors before anything trusts the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .relations import type_sub
from .syntax import BASE, OBJECT, Expr, Program, Type, UnknownName


@dataclass(frozen=True)
class Signature:
    param_types: tuple  # tuple[Type, ...]
    return_type: Type

    def __str__(self) -> str:
        params = ", ".join(str(t) for t in self.param_types)
        return f"({params}) -> {self.return_type}"


@dataclass(frozen=True)
class PMBodyResult:
    """A partial method found on a superlayer chain."""

    params: tuple       # parameter names
    body: Expr
    found_layer: str    # the layer whose table entry supplied the body


@dataclass(frozen=True)
class MBodyResult:
    """A method body found by full three-axis dispatch.

    found_prefix is the prefix of the queried sequence at which the scan
    stopped: its last element is the activated layer that matched (empty for
    a base method).  defining_layer is where the body literally lives, which
    may sit above the matched layer on its superlayer chain.
    """

    params: tuple
    body: Expr
    found_class: str
    found_prefix: tuple
    defining_layer: Optional[str]

    @property
    def in_base(self) -> bool:
        return self.defining_layer is None


@dataclass(frozen=True)
class Conflict:
    """Two applicable signature sources disagree."""

    witnesses: tuple  # tuple[(source-description, Signature), ...]

    def __str__(self) -> str:
        parts = ", ".join(f"{src}: {sig}" for src, sig in self.witnesses)
        return f"conflicting signatures ({parts})"


MTypeResult = Union[Signature, Conflict, None]


def _memo(p: Program, key: tuple, compute):
    cache = p._cache
    if key in cache:
        return cache[key]
    result = compute()
    cache[key] = result
    return result


def fields(p: Program, c: str) -> tuple:
    """All fields of c, superclass fields first, in declaration order."""
    if c == OBJECT:
        return ()
    decl = p.classes.get(c)
    if decl is None:
        raise UnknownName(f"unknown class {c!r}")
    return _memo(p, ("fields", c),
                 lambda: fields(p, decl.superclass) + decl.own_fields)


def pmbody(p: Program, m: str, c: str, l: str) -> Optional[PMBodyResult]:
    """Search l and its superlayers (Base excluded) for partial method c.m."""
    def compute():
        for layer in p.layer_ancestors(l):
            if layer == BASE:
                break
            pm = p.partial_method(layer, c, m)
            if pm is not None:
                return PMBodyResult(pm.param_names, pm.body, layer)
        return None
    return _memo(p, ("pmbody", m, c, l), compute)


def pmtype(p: Program, m: str, c: str, l: str) -> Optional[Signature]:
    """Signature counterpart of pmbody; agrees with it on definedness."""
    def compute():
        for layer in p.layer_ancestors(l):
            if layer == BASE:
                break
            pm = p.partial_method(layer, c, m)
            if pm is not None:
                return Signature(pm.param_types, pm.return_type)
        return None
    return _memo(p, ("pmtype", m, c, l), compute)


def mbody(p: Program, m: str, c: str, seq1: tuple, seq2: tuple) -> Optional[MBodyResult]:
    """Body of m on class c, scanning seq1 right to left before the base
    method, restarting at the superclass with the full sequence seq2."""
    assert seq2[: len(seq1)] == seq1, "first sequence must be a prefix of the second"

    def compute():
        for i in range(len(seq1) - 1, -1, -1):
            r = pmbody(p, m, c, seq1[i])
            if r is not None:
                return MBodyResult(r.params, r.body, c, seq1[: i + 1], r.found_layer)
        if c == OBJECT:
            return None
        decl = p.classes.get(c)
        if decl is None:
            raise UnknownName(f"unknown class {c!r}")
        md = decl.methods.get(m)
        if md is not None:
            return MBodyResult(md.param_names, md.body, c, (), None)
        return mbody(p, m, decl.superclass, seq2, seq2)

    return _memo(p, ("mbody", m, c, seq1, seq2), compute)


def mtype(p: Program, m: str, c: str, lam1: Iterable, lam2: Iterable) -> MTypeResult:
    """Signature of m on c assuming the layers lam1 are activated; lookup
    moving to a superclass widens to lam2.  Collects every witness at the
    first class that has any, returning Conflict on disagreement."""
    lam1 = frozenset(lam1)
    lam2 = frozenset(lam2)
    assert lam1 <= lam2, "first layer set must be contained in the second"

    def compute():
        if c == OBJECT:
            return None
        decl = p.classes.get(c)
        if decl is None:
            raise UnknownName(f"unknown class {c!r}")
        witnesses = []
        md = decl.methods.get(m)
        if md is not None:
            witnesses.append((f"class {c}", Signature(md.param_types, md.return_type)))
        for layer in sorted(lam1):
            sig = pmtype(p, m, c, layer)
            if sig is not None:
                witnesses.append((f"layer {layer}", sig))
        if witnesses:
            first = witnesses[0][1]
            if all(sig == first for _, sig in witnesses[1:]):
                return first
            return Conflict(tuple(witnesses))
        return mtype(p, m, decl.superclass, lam2, lam2)

    return _memo(p, ("mtype", m, c, lam1, lam2), compute)


def all_layers(p: Program) -> frozenset:
    return frozenset(p.layers)


def _partial_signature(pm) -> Signature:
    return Signature(pm.param_types, pm.return_type)


def noconflict(p: Program, l1: str, l2: str) -> bool:
    """Partial methods declared under the same qualified name in both layers
    carry identical signatures."""
    d1 = p.layers[l1].partial_methods
    d2 = p.layers[l2].partial_methods
    for key in d1.keys() & d2.keys():
        if _partial_signature(d1[key]) != _partial_signature(d2[key]):
            return False
    return True


def override_h(p: Program, l: str, c: str) -> bool:
    """Every partial method c.m declared in l matches the signature the
    base chain already gives c.m, when there is one."""
    for (target, m), pm in p.layers[l].partial_methods.items():
        if target != c:
            continue
        inherited = mtype(p, m, c, frozenset(), all_layers(p))
        if inherited is None:
            continue
        if isinstance(inherited, Conflict) or _partial_signature(pm) != inherited:
            return False
    return True


def override_v(p: Program, c: str) -> bool:
    """Every base method of c overriding anything visible on the superclass
    (with all layers in play) keeps parameter types and covariant return."""
    decl = p.classes[c]
    dom = all_layers(p)
    for m, md in decl.methods.items():
        inherited = mtype(p, m, decl.superclass, dom, dom)
        if inherited is None:
            continue
        if isinstance(inherited, Conflict):
            return False
        if md.param_types != inherited.param_types:
            return False
        if not type_sub(p, md.return_type, inherited.return_type):
            return False
    return True
