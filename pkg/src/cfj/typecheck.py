"""Static and runtime typing: expression rules, layer-set well-formedness,
cursor well-formedness, and the whole-table checks.

Every rejection names the rule whose premise failed, and the table-level
checks collect all violations instead of stopping at the first; a whole
program is the unit of checking because override consistency needs the
entire layer table in view.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Optional

from . import lookup
from .relations import class_sub, set_sw_sub, set_weak_sub, type_sub, weak_sub
from .semantics import SwapEvent, WithEvent
from .syntax import (
    BASE, OBJECT, AnnotatedInvoke, CfjError, ClassType, Cursor, Expr,
    FieldGet, InBaseMethod, InPartialMethod, Invoke, LayerType, Location,
    MethodDecl, NewClass, NewLayer, PartialMethodDecl, Proceed, Program,
    SourceSpan, SuperCall, SuperProceed, Swap, TOP_LEVEL, TopLevel, Type,
    UnknownName, ValidationReport, Var, With, validate_tables, walk,
)


class TypeCheckError(CfjError):
    """A failed typing premise, naming the rule that rejected it."""

    def __init__(self, rule: str, message: str, location: Location = TOP_LEVEL,
                 premise: Optional[str] = None, span: Optional[SourceSpan] = None):
        super().__init__(message)
        self.rule = rule
        self.message = message
        self.location = location
        self.premise = premise
        self.span = span

    def __str__(self) -> str:
        pos = f"{self.span}: " if self.span else ""
        return f"{pos}[{self.rule}] {self.location}: {self.message}"


class TypeCheckFailure(CfjError):
    """A program-level rejection carrying every collected error."""

    def __init__(self, errors: list):
        super().__init__("\n".join(str(e) for e in errors))
        self.errors = errors


class TablesInvalid(CfjError):
    def __init__(self, report: ValidationReport):
        super().__init__(str(report))
        self.report = report


# ------------------------------------------------------------------
# Syntactic side conditions
# ------------------------------------------------------------------

def contains_proceed(e: Expr) -> bool:
    """A proceed call occurs anywhere in the tree, nested bodies included."""
    return any(isinstance(node, Proceed) for node in walk(e))


# ------------------------------------------------------------------
# Non-dangling proceed
# ------------------------------------------------------------------

def ndp(p: Program, m: str, c: str, seq1: tuple, seq2: tuple) -> bool:
    """A chain of proceed calls from the cursor (c, seq1, seq2) eventually
    reaches a body without proceed: the class declares m, or some layer of
    seq1 supplies a proceed-free partial method, or the superclass does with
    the full sequence restored."""
    assert seq2[: len(seq1)] == seq1, "first sequence must be a prefix of the second"
    if c != OBJECT:
        decl = p.classes.get(c)
        if decl is None:
            raise UnknownName(f"unknown class {c!r}")
        if m in decl.methods:
            return True
        for l0 in seq1:
            r = lookup.pmbody(p, m, c, l0)
            if r is not None and not contains_proceed(r.body):
                return True
        return ndp(p, m, decl.superclass, seq2, seq2)
    return False


# ------------------------------------------------------------------
# Layer set well-formedness
# ------------------------------------------------------------------

def replay_witness(p: Program, events: tuple) -> Optional[frozenset]:
    """Run activation events through the well-formedness rules, returning
    the derived set, or None as soon as a premise fails."""
    cur: frozenset = frozenset()
    for ev in events:
        if isinstance(ev, WithEvent):
            if not set_weak_sub(p, cur, p.requires_of(ev.layer)):
                return None
            cur = cur | {ev.layer}
        elif isinstance(ev, SwapEvent):
            if not p.is_swappable(ev.swappable):
                return None
            if not weak_sub(p, ev.layer, ev.swappable):
                return None
            removed = frozenset(x for x in cur if not weak_sub(p, x, ev.swappable))
            if not set_weak_sub(p, removed, p.requires_of(ev.layer)):
                return None
            cur = removed | {ev.layer}
        else:
            raise CfjError(f"unknown activation event {ev!r}")
    return cur


_WF_SUBSET_CAP = 10  # powerset guard for the backward swap search


def wf_layer_set(p: Program, lam, witness: tuple = None) -> bool:
    """Decide whether lam is reachable by legal activations.

    A supplied witness (an activation event list) is replayed first; failing
    that, a memoized backward search reconstructs a derivation.  The search
    re-adds only table sublayers of the relevant swappable when undoing a
    swap, so it is bounded but may miss exotic derivations; runtime checks
    always have witnesses available.
    """
    lam = frozenset(lam)
    if witness is not None and replay_witness(p, witness) == lam:
        return True
    return _wf_search(p, lam, set())


def _wf_search(p: Program, lam: frozenset, visiting: set) -> bool:
    cache = p._cache
    key = ("wf", lam)
    if key in cache:
        return cache[key]
    if not lam:
        cache[key] = True
        return True
    if lam in visiting:
        return False
    visiting.add(lam)
    try:
        swappables = [l for l, d in p.layers.items() if d.swappable]
        for la in sorted(lam):
            rest = lam - {la}
            if not set_weak_sub(p, rest, p.requires_of(la)):
                continue
            if _wf_search(p, rest, visiting):
                cache[key] = True
                return True
            for lsw in swappables:
                if not weak_sub(p, la, lsw):
                    continue
                if any(weak_sub(p, x, lsw) for x in rest):
                    continue  # the removal step would have deleted these
                subs = [x for x in p.layers if weak_sub(p, x, lsw)]
                if len(subs) > _WF_SUBSET_CAP:
                    subs = subs[:_WF_SUBSET_CAP]
                found = False
                for k in range(1, len(subs) + 1):
                    for extra in combinations(subs, k):
                        if _wf_search(p, rest | frozenset(extra), visiting):
                            found = True
                            break
                    if found:
                        break
                if found:
                    cache[key] = True
                    return True
    finally:
        visiting.discard(lam)
    # Only certainty is cached: a failure under a nonempty visiting set may
    # be an artifact of cycle cutting.
    if not visiting:
        cache[key] = False
    return False


def cursor_ok(p: Program, owner: tuple, cursor: Cursor,
              witness: tuple = None) -> bool:
    """Well-formedness of a lookup cursor for owner = (class, method): the
    target is a superclass of the owner, the full layer set is well formed,
    and proceed chains from the cursor cannot dangle.  Quad cursors are
    judged through their embedded triple."""
    owner_class, method = owner
    if not class_sub(p, owner_class, cursor.target):
        return False
    if not wf_layer_set(p, frozenset(cursor.full), witness):
        return False
    return ndp(p, method, cursor.target, cursor.prefix, cursor.full)


# ------------------------------------------------------------------
# Expression typing
# ------------------------------------------------------------------

def type_expr(p: Program, loc: Location, lam, env: Mapping, e: Expr,
              witnesses: Mapping = None) -> Type:
    """Type an expression at a location under the layer set lam.

    witnesses maps layer sets (frozensets) to activation event lists and is
    only consulted for runtime cursors; static programs never need it.
    """
    lam = frozenset(lam)

    def fail(rule: str, msg: str, premise: str = None, span=None):
        raise TypeCheckError(rule, msg, loc, premise, span or getattr(e, "span", None))

    if isinstance(e, Var):
        t = env.get(e.name)
        if t is None:
            raise TypeCheckError("T-Var", f"unbound variable {e.name!r}", loc, span=e.span)
        return t

    if isinstance(e, FieldGet):
        t0 = type_expr(p, loc, lam, env, e.obj, witnesses)
        if not isinstance(t0, ClassType):
            raise TypeCheckError("T-Field", f"field access on layer type {t0}", loc, span=e.span)
        for ftype, fname in lookup.fields(p, t0.name):
            if fname == e.fieldname:
                return ftype
        raise TypeCheckError("T-Field", f"{t0} has no field {e.fieldname!r}", loc, span=e.span)

    if isinstance(e, Invoke):
        t0 = type_expr(p, loc, lam, env, e.recv, witnesses)
        if not isinstance(t0, ClassType):
            raise TypeCheckError("T-Invk", f"method call on layer type {t0}", loc, span=e.span)
        sig = lookup.mtype(p, e.method, t0.name, lam, lam)
        if sig is None:
            raise TypeCheckError(
                "T-Invk",
                f"no method {e.method!r} on {t0} under layers {sorted(lam)}",
                loc, span=e.span)
        if isinstance(sig, lookup.Conflict):
            raise TypeCheckError("T-Invk", f"{e.method!r} on {t0}: {sig}",
                                 loc, premise="mtype-conflict", span=e.span)
        _check_args(p, loc, lam, env, e.args, sig, "T-Invk", e, witnesses)
        return sig.return_type

    if isinstance(e, NewClass):
        try:
            flds = lookup.fields(p, e.classname)
        except UnknownName:
            raise TypeCheckError("T-New", f"unknown class {e.classname!r}", loc, span=e.span)
        if len(flds) != len(e.args):
            raise TypeCheckError(
                "T-New",
                f"new {e.classname} expects {len(flds)} arguments, got {len(e.args)}",
                loc, span=e.span)
        for (ftype, fname), arg in zip(flds, e.args):
            at = type_expr(p, loc, lam, env, arg, witnesses)
            if not type_sub(p, at, ftype):
                raise TypeCheckError(
                    "T-New", f"field {fname!r} of {e.classname} expects {ftype}, got {at}",
                    loc, span=e.span)
        return ClassType(e.classname)

    if isinstance(e, NewLayer):
        if e.layername != BASE and e.layername not in p.layers:
            raise TypeCheckError("T-NewL", f"unknown layer {e.layername!r}", loc, span=e.span)
        return LayerType(e.layername)

    if isinstance(e, With):
        tl = type_expr(p, loc, lam, env, e.layer_expr, witnesses)
        if not isinstance(tl, LayerType):
            raise TypeCheckError("T-With", f"with requires a layer, got {tl}", loc, span=e.span)
        required = p.requires_of(tl.name)
        if not set_weak_sub(p, lam, required):
            raise TypeCheckError(
                "T-With",
                f"activating {tl} requires {sorted(required)} but only "
                f"{sorted(lam)} are known active",
                loc, premise="requires-active", span=e.span)
        return type_expr(p, loc, lam | {tl.name}, env, e.body, witnesses)

    if isinstance(e, Swap):
        tl = type_expr(p, loc, lam, env, e.layer_expr, witnesses)
        if not isinstance(tl, LayerType):
            raise TypeCheckError("T-Swap", f"swap requires a layer, got {tl}", loc, span=e.span)
        if e.swappable != BASE and e.swappable not in p.layers:
            raise TypeCheckError("T-Swap", f"unknown layer {e.swappable!r}", loc, span=e.span)
        if not p.is_swappable(e.swappable):
            raise TypeCheckError("T-Swap", f"{e.swappable} is not swappable",
                                 loc, premise="swappable", span=e.span)
        if not weak_sub(p, tl.name, e.swappable):
            raise TypeCheckError(
                "T-Swap", f"{tl} is not a sublayer of {e.swappable}", loc, span=e.span)
        required = p.requires_of(tl.name)
        lam_rm = frozenset(x for x in lam if not weak_sub(p, x, e.swappable))
        if not set_weak_sub(p, lam_rm, required):
            raise TypeCheckError(
                "T-Swap",
                f"after deactivating {e.swappable}, {sorted(lam_rm)} no longer "
                f"covers required {sorted(required)}",
                loc, premise="requires-active", span=e.span)
        return type_expr(p, loc, lam_rm | {tl.name}, env, e.body, witnesses)

    if isinstance(e, SuperCall):
        if isinstance(loc, InBaseMethod):
            rule = "T-SuperB"
            sup = p.superclass(loc.classname)
            layer_set: frozenset = frozenset()
        elif isinstance(loc, InPartialMethod):
            rule = "T-SuperP"
            sup = p.superclass(loc.classname)
            layer_set = p.requires_of(loc.layer) | {loc.layer}
        else:
            raise TypeCheckError("T-SuperB", "super outside a method body", loc, span=e.span)
        sig = lookup.mtype(p, e.method, sup, layer_set, layer_set)
        if sig is None:
            raise TypeCheckError(
                rule, f"no method {e.method!r} on superclass {sup} "
                      f"under layers {sorted(layer_set)}", loc, span=e.span)
        if isinstance(sig, lookup.Conflict):
            raise TypeCheckError(rule, str(sig), loc, premise="mtype-conflict", span=e.span)
        _check_args(p, loc, lam, env, e.args, sig, rule, e, witnesses)
        return sig.return_type

    if isinstance(e, Proceed):
        if not isinstance(loc, InPartialMethod):
            raise TypeCheckError("T-Proceed", "proceed outside a partial method", loc, span=e.span)
        required = p.requires_of(loc.layer)
        sig = lookup.mtype(p, loc.method, loc.classname, required, required | {loc.layer})
        if sig is None:
            raise TypeCheckError(
                "T-Proceed",
                f"proceed from {loc} finds no {loc.method!r} on {loc.classname} "
                f"under required layers {sorted(required)}",
                loc, span=e.span)
        if isinstance(sig, lookup.Conflict):
            raise TypeCheckError("T-Proceed", str(sig), loc, premise="mtype-conflict", span=e.span)
        _check_args(p, loc, lam, env, e.args, sig, "T-Proceed", e, witnesses)
        return sig.return_type

    if isinstance(e, SuperProceed):
        if not isinstance(loc, InPartialMethod):
            raise TypeCheckError("T-SuperProceed", "superproceed outside a partial method",
                                 loc, span=e.span)
        sup = p.superlayer(loc.layer)
        sig = lookup.pmtype(p, loc.method, loc.classname, sup)
        if sig is None:
            raise TypeCheckError(
                "T-SuperProceed",
                f"no partial method {loc.classname}.{loc.method} at or above "
                f"superlayer {sup}", loc, span=e.span)
        _check_args(p, loc, lam, env, e.args, sig, "T-SuperProceed", e, witnesses)
        return sig.return_type

    if isinstance(e, AnnotatedInvoke):
        if not isinstance(loc, TopLevel):
            raise TypeCheckError("T-InvkA", "runtime invocation inside a declaration",
                                 loc, span=e.span)
        recv_type = type_expr(p, loc, lam, env, e.recv, witnesses)
        assert isinstance(recv_type, ClassType)
        cur = e.cursor
        rule = "T-InvkAL" if cur.is_quad else "T-InvkA"
        witness = None if witnesses is None else witnesses.get(frozenset(cur.full))
        if not cursor_ok(p, (recv_type.name, e.method), cur, witness):
            raise TypeCheckError(
                rule, f"ill-formed cursor for {recv_type.name}.{e.method}",
                loc, premise="cursor-ok", span=e.span)
        if not set_sw_sub(p, lam, frozenset(cur.full)):
            raise TypeCheckError(
                rule,
                f"active approximation {sorted(lam)} cannot reach the cursor "
                f"layers {sorted(set(cur.full))} even by swapping",
                loc, premise="layers-swap-covered", span=e.span)
        if cur.is_quad:
            if not cur.prefix:
                raise TypeCheckError("T-InvkAL", "quad cursor with empty prefix",
                                     loc, span=e.span)
            matched = cur.prefix[-1]
            if not weak_sub(p, matched, cur.layer):
                raise TypeCheckError(
                    "T-InvkAL",
                    f"matched layer {matched} is not a weak sublayer of {cur.layer}",
                    loc, span=e.span)
            sig = lookup.pmtype(p, e.method, cur.target, cur.layer)
            if sig is None:
                raise TypeCheckError(
                    "T-InvkAL",
                    f"no partial method {cur.target}.{e.method} at or above {cur.layer}",
                    loc, span=e.span)
        else:
            result = lookup.mtype(p, e.method, cur.target,
                                  frozenset(cur.prefix), frozenset(cur.full))
            if result is None:
                raise TypeCheckError(
                    "T-InvkA",
                    f"no method {e.method!r} on {cur.target} from this cursor",
                    loc, span=e.span)
            if isinstance(result, lookup.Conflict):
                raise TypeCheckError("T-InvkA", str(result), loc,
                                     premise="mtype-conflict", span=e.span)
            sig = result
        _check_args(p, loc, lam, env, e.args, sig, rule, e, witnesses)
        return sig.return_type

    raise CfjError(f"cannot type {type(e).__name__}")


def _check_args(p: Program, loc, lam, env, args: tuple, sig: lookup.Signature,
                rule: str, e: Expr, witnesses) -> None:
    if len(args) != len(sig.param_types):
        raise TypeCheckError(
            rule, f"expected {len(sig.param_types)} arguments, got {len(args)}",
            loc, span=getattr(e, "span", None))
    for arg, want in zip(args, sig.param_types):
        got = type_expr(p, loc, lam, env, arg, witnesses)
        if not type_sub(p, got, want):
            raise TypeCheckError(
                rule, f"argument type {got} is not a subtype of {want}",
                loc, span=getattr(e, "span", None))


# ------------------------------------------------------------------
# Declaration checking
# ------------------------------------------------------------------

def check_method(p: Program, c: str, md: MethodDecl) -> list:
    """T-Method: the body types under no layers with this bound, and the
    result is a subtype of the declared return type."""
    loc = InBaseMethod(c, md.name)
    env = {name: t for t, name in md.params}
    env["this"] = ClassType(c)
    try:
        body_type = type_expr(p, loc, frozenset(), env, md.body)
    except TypeCheckError as err:
        return [err]
    if not type_sub(p, body_type, md.return_type):
        return [TypeCheckError(
            "T-Method",
            f"body has type {body_type}, not a subtype of declared {md.return_type}",
            loc, span=md.span)]
    return []


def check_partial_method(p: Program, l: str, pm: PartialMethodDecl) -> list:
    """T-PMethod: the body types under the layer's requires set plus the
    layer itself."""
    loc = InPartialMethod(l, pm.target_class, pm.name)
    lam = p.requires_of(l) | {l}
    env = {name: t for t, name in pm.params}
    env["this"] = ClassType(pm.target_class)
    try:
        body_type = type_expr(p, loc, lam, env, pm.body)
    except TypeCheckError as err:
        return [err]
    if not type_sub(p, body_type, pm.return_type):
        return [TypeCheckError(
            "T-PMethod",
            f"body has type {body_type}, not a subtype of declared {pm.return_type}",
            loc, span=pm.span)]
    return []


def check_layer(p: Program, decl) -> list:
    """T-Layer for free-standing layers; T-LayerSW for strict sublayers of a
    swappable layer, which must add nothing: same requires as the parent, no
    new partial methods, and no other layer depending on them."""
    errors: list = []
    l = decl.name
    loc = f"layer {l}"
    strict_swappable_ancestors = [
        a for a in p.layer_ancestors(l)[1:] if a != BASE and p.is_swappable(a)]

    if not strict_swappable_ancestors:
        parent_req = p.requires_of(decl.superlayer)
        if not set_weak_sub(p, decl.requires_set, parent_req):
            errors.append(TypeCheckError(
                "T-Layer",
                f"{loc}: requires {sorted(decl.requires_set)} does not cover the "
                f"superlayer's requires {sorted(parent_req)}",
                premise="requires-covariant", span=decl.span))
    else:
        if decl.swappable:
            errors.append(TypeCheckError(
                "T-LayerSW",
                f"{loc}: a sublayer of a swappable layer cannot itself be swappable",
                premise="swappable-under-swappable", span=decl.span))
        parent_req = p.requires_of(decl.superlayer)
        if decl.requires_set != parent_req:
            errors.append(TypeCheckError(
                "T-LayerSW",
                f"{loc}: requires {sorted(decl.requires_set)} must equal the "
                f"superlayer's requires {sorted(parent_req)}",
                premise="requires-equality", span=decl.span))
        for lsw in strict_swappable_ancestors:
            missing = [
                f"{c}.{m}" for (c, m) in decl.partial_methods
                if lookup.pmtype(p, m, c, lsw) is None]
            if not missing:
                break
        else:
            errors.append(TypeCheckError(
                "T-LayerSW",
                f"{loc}: partial methods {missing} are not defined in the "
                f"swappable layer {strict_swappable_ancestors[0]}",
                premise="no-new-partial-method", span=decl.span))
        dependants = [l2 for l2, d2 in p.layers.items() if l in d2.requires_set]
        if dependants:
            errors.append(TypeCheckError(
                "T-LayerSW",
                f"{loc}: required by {sorted(dependants)}, but sublayers of a "
                f"swappable layer must not be required",
                premise="not-required-by-others", span=decl.span))

    for pm in decl.partial_methods.values():
        errors.extend(check_partial_method(p, l, pm))
    return errors


def check_tables(p: Program) -> list:
    """T-Table: every class and layer checks, no cross-layer signature
    conflicts, and both override predicates hold globally.  All violations
    are reported."""
    errors: list = []
    for c, decl in p.classes.items():
        for md in decl.methods.values():
            errors.extend(check_method(p, c, md))
    for decl in p.layers.values():
        errors.extend(check_layer(p, decl))
    names = sorted(p.layers)
    for l1, l2 in combinations(names, 2):
        if not lookup.noconflict(p, l1, l2):
            errors.append(TypeCheckError(
                "T-Table",
                f"layers {l1} and {l2} declare the same partial method with "
                f"different signatures",
                premise="noconflict"))
    for l in names:
        targets = {c for c, _ in p.layers[l].partial_methods}
        for c in sorted(targets):
            if not lookup.override_h(p, l, c):
                errors.append(TypeCheckError(
                    "T-Table",
                    f"layer {l} overrides a method of {c} with a different signature",
                    premise="override-h"))
    for c in p.classes:
        if not lookup.override_v(p, c):
            errors.append(TypeCheckError(
                "T-Table",
                f"class {c} overrides an inherited method incompatibly",
                premise="override-v"))
    return errors


def check_program(p: Program, witnesses: Mapping = None) -> Type:
    """T-Prog: validate the tables, check them, then type the main
    expression at top level under no layers.  Raises TablesInvalid or
    TypeCheckFailure; returns the main expression's type."""
    report = validate_tables(p)
    if not report.ok:
        raise TablesInvalid(report)
    errors = check_tables(p)
    if errors:
        raise TypeCheckFailure(errors)
    try:
        return type_expr(p, TOP_LEVEL, frozenset(), {}, p.main, witnesses)
    except TypeCheckError as err:
        raise TypeCheckFailure([err])
