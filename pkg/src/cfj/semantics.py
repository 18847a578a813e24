"""Small-step evaluation: context manipulation, method entry, stepping.

The paper-level reduction relation collapses cursor installation and body
entry into one derivation; here they are separate visible steps so traces
show the cursor states.  Each step records the axiom rule that fired plus
the layer sequence in effect at the redex; the congruence descent through
with/swap frames is captured as activation events for the well-formedness
witnesses the runtime typing checks need.

The strategy is leftmost-innermost, call-by-value: receiver before
arguments, with/swap layer expression before body, arguments left to
right.  A redex with no applicable rule yields a first-class Stuck outcome
rather than an exception, so unchecked runs can demonstrate stuckness.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Union

from . import lookup
from .relations import weak_sub
from .syntax import (
    BASE, AnnotatedInvoke, CfjError, Cursor, Expr, FieldGet, Invoke,
    NewClass, NewLayer, Proceed, Program, SuperCall, SuperProceed, Swap,
    UnknownName, Var, With, is_value,
)

RULE_NAMES = frozenset({
    "R-Field", "R-Invk", "R-InvkB", "R-InvkP", "R-InvkSP",
    "RC-With", "RC-Swap", "RC-WithArg", "RC-SwapArg",
    "R-WithVal", "R-SwapVal",
    "RC-Field", "RC-InvkArg", "RC-InvkRecv", "RC-New",
    "RC-InvkAArg1", "RC-InvkAArg2",
})


class NotSwappable(CfjError):
    def __init__(self, layer: str):
        super().__init__(f"layer {layer!r} is not swappable")
        self.layer = layer


# ------------------------------------------------------------------
# Context manipulation
# ------------------------------------------------------------------

def with_fn(l: str, seq: tuple) -> tuple:
    """Remove l if present, then append it; the result stays duplicate-free
    and ends with the newly activated layer."""
    return tuple(x for x in seq if x != l) + (l,)


def swap_fn(p: Program, l: str, lsw: str, seq: tuple) -> tuple:
    """Remove every weak sublayer of lsw (lsw itself included), then append
    the replacement l."""
    if not p.is_swappable(lsw):
        raise NotSwappable(lsw)
    return tuple(x for x in seq if not weak_sub(p, x, lsw)) + (l,)


# ------------------------------------------------------------------
# Activation events (well-formedness witnesses)
# ------------------------------------------------------------------

@dataclass(frozen=True)
class WithEvent:
    layer: str


@dataclass(frozen=True)
class SwapEvent:
    layer: str
    swappable: str


ActivationEvent = Union[WithEvent, SwapEvent]


# ------------------------------------------------------------------
# Method entry substitution
# ------------------------------------------------------------------

@dataclass(frozen=True)
class CursorBindings:
    """Continuation cursors installed when a method body is entered.

    Base-method entry carries only the super cursor; partial-method entry
    carries all three.  A missing binding leaves the keyword in place,
    where it will later report itself as stuck.
    """

    method: str
    proceed: Optional[Cursor] = None
    super_: Optional[Cursor] = None
    superproceed: Optional[Cursor] = None


def method_entry_subst(body: Expr, receiver: NewClass, args: tuple,
                       params: tuple, bindings: CursorBindings) -> Expr:
    """Replace this, the parameters, and the continuation keywords
    throughout body, including inside nested with/swap bodies."""
    if len(args) != len(params):
        raise CfjError(
            f"arity mismatch entering {bindings.method}: "
            f"{len(args)} arguments for {len(params)} parameters")
    env = dict(zip(params, args))
    env["this"] = receiver

    def go(e: Expr) -> Expr:
        if isinstance(e, Var):
            return env.get(e.name, e)
        if isinstance(e, FieldGet):
            return FieldGet(go(e.obj), e.fieldname, e.span)
        if isinstance(e, Invoke):
            return Invoke(go(e.recv), e.method, tuple(go(a) for a in e.args), e.span)
        if isinstance(e, NewClass):
            return NewClass(e.classname, tuple(go(a) for a in e.args), e.span)
        if isinstance(e, NewLayer):
            return e
        if isinstance(e, With):
            return With(go(e.layer_expr), go(e.body), e.span)
        if isinstance(e, Swap):
            return Swap(go(e.layer_expr), e.swappable, go(e.body), e.span)
        if isinstance(e, Proceed):
            new_args = tuple(go(a) for a in e.args)
            if bindings.proceed is None:
                return Proceed(new_args, e.span)
            return AnnotatedInvoke(receiver, bindings.proceed, bindings.method, new_args)
        if isinstance(e, SuperCall):
            new_args = tuple(go(a) for a in e.args)
            if bindings.super_ is None:
                return SuperCall(e.method, new_args, e.span)
            return AnnotatedInvoke(receiver, bindings.super_, e.method, new_args)
        if isinstance(e, SuperProceed):
            new_args = tuple(go(a) for a in e.args)
            if bindings.superproceed is None:
                return SuperProceed(new_args, e.span)
            return AnnotatedInvoke(receiver, bindings.superproceed, bindings.method, new_args)
        if isinstance(e, AnnotatedInvoke):
            return AnnotatedInvoke(e.recv, e.cursor, e.method,
                                   tuple(go(a) for a in e.args), e.span)
        raise CfjError(f"cannot substitute into {type(e).__name__}")

    return go(body)


# ------------------------------------------------------------------
# Single step
# ------------------------------------------------------------------

@dataclass(frozen=True)
class StuckReason:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class DispatchInfo:
    """What a dispatch-relevant step resolved, for oracles and goldens."""

    rule: str
    method: str
    cursor: Cursor
    found_class: Optional[str] = None
    defining_layer: Optional[str] = None

    @property
    def site(self) -> str:
        if self.found_class is None:
            return "?"
        if self.defining_layer is None:
            return f"{self.found_class}.{self.method}"
        return f"{self.defining_layer}.{self.found_class}.{self.method}"


@dataclass(frozen=True)
class Stepped:
    expr: Expr
    rule: str
    active: tuple                      # layer sequence at the redex
    events: tuple = ()                 # with/swap descents, root to redex
    dispatch: Optional[DispatchInfo] = None


@dataclass(frozen=True)
class AlreadyValue:
    value: Expr


@dataclass(frozen=True)
class Stuck:
    reason: StuckReason
    redex: Optional[Expr] = None


StepOutcome = Union[Stepped, AlreadyValue, Stuck]


def _stuck(code: str, message: str, redex: Expr) -> Stuck:
    return Stuck(StuckReason(code, message), redex)


def step(p: Program, seq: tuple, e: Expr) -> StepOutcome:
    """Perform exactly one reduction step under the activated sequence."""
    assert len(set(seq)) == len(seq), "activated sequence must be duplicate-free"
    return _go(p, seq, e, ())


def _step_args(p: Program, seq: tuple, args: tuple, events: tuple):
    """Step the leftmost non-value argument; None when all are values."""
    for i, a in enumerate(args):
        if is_value(a):
            continue
        out = _go(p, seq, a, events)
        if isinstance(out, Stepped):
            return i, out
        return i, out  # Stuck propagates
    return None


def _go(p: Program, seq: tuple, e: Expr, events: tuple) -> StepOutcome:
    if isinstance(e, Var):
        return _stuck("free-variable", f"unbound variable {e.name!r}", e)

    if isinstance(e, NewLayer):
        return AlreadyValue(e)

    if isinstance(e, NewClass):
        hit = _step_args(p, seq, e.args, events)
        if hit is None:
            return AlreadyValue(e)
        i, out = hit
        if isinstance(out, Stepped):
            new_args = e.args[:i] + (out.expr,) + e.args[i + 1:]
            return Stepped(NewClass(e.classname, new_args, e.span),
                           out.rule, out.active, out.events, out.dispatch)
        return out

    if isinstance(e, FieldGet):
        if not is_value(e.obj):
            out = _go(p, seq, e.obj, events)
            if isinstance(out, Stepped):
                return Stepped(FieldGet(out.expr, e.fieldname, e.span),
                               out.rule, out.active, out.events, out.dispatch)
            return out
        if not isinstance(e.obj, NewClass):
            return _stuck("field-on-layer", "field access on a layer instance", e)
        try:
            flds = lookup.fields(p, e.obj.classname)
        except UnknownName as exc:
            return _stuck("unknown-class", str(exc), e)
        for i, (_, fname) in enumerate(flds):
            if fname == e.fieldname:
                if i >= len(e.obj.args):
                    return _stuck("field-arity",
                                  f"object has no value for field {fname!r}", e)
                return Stepped(e.obj.args[i], "R-Field", seq, events)
        return _stuck("field-missing",
                      f"{e.obj.classname} has no field {e.fieldname!r}", e)

    if isinstance(e, Invoke):
        if not is_value(e.recv):
            out = _go(p, seq, e.recv, events)
            if isinstance(out, Stepped):
                return Stepped(Invoke(out.expr, e.method, e.args, e.span),
                               out.rule, out.active, out.events, out.dispatch)
            return out
        hit = _step_args(p, seq, e.args, events)
        if hit is not None:
            i, out = hit
            if isinstance(out, Stepped):
                new_args = e.args[:i] + (out.expr,) + e.args[i + 1:]
                return Stepped(Invoke(e.recv, e.method, new_args, e.span),
                               out.rule, out.active, out.events, out.dispatch)
            return out
        if not isinstance(e.recv, NewClass):
            return _stuck("invoke-on-layer",
                          f"method {e.method!r} invoked on a layer instance", e)
        cursor = Cursor(e.recv.classname, None, seq, seq)
        info = DispatchInfo("R-Invk", e.method, cursor)
        return Stepped(AnnotatedInvoke(e.recv, cursor, e.method, e.args),
                       "R-Invk", seq, events, info)

    if isinstance(e, With):
        if not is_value(e.layer_expr):
            out = _go(p, seq, e.layer_expr, events)
            if isinstance(out, Stepped):
                return Stepped(With(out.expr, e.body, e.span),
                               out.rule, out.active, out.events, out.dispatch)
            return out
        if not isinstance(e.layer_expr, NewLayer):
            return _stuck("with-on-object", "with requires a layer instance", e)
        layer = e.layer_expr.layername
        if is_value(e.body):
            result = e.body
            if os.environ.get("CFJ_TEST_BREAK_WITHVAL"):
                result = e.layer_expr  # deliberate corruption for mutation tests
            return Stepped(result, "R-WithVal", seq, events)
        inner_seq = with_fn(layer, seq)
        out = _go(p, seq=inner_seq, e=e.body, events=events + (WithEvent(layer),))
        if isinstance(out, Stepped):
            return Stepped(With(e.layer_expr, out.expr, e.span),
                           out.rule, out.active, out.events, out.dispatch)
        return out

    if isinstance(e, Swap):
        if not is_value(e.layer_expr):
            out = _go(p, seq, e.layer_expr, events)
            if isinstance(out, Stepped):
                return Stepped(Swap(out.expr, e.swappable, e.body, e.span),
                               out.rule, out.active, out.events, out.dispatch)
            return out
        if not isinstance(e.layer_expr, NewLayer):
            return _stuck("swap-on-object", "swap requires a layer instance", e)
        if is_value(e.body):
            return Stepped(e.body, "R-SwapVal", seq, events)
        layer = e.layer_expr.layername
        try:
            inner_seq = swap_fn(p, layer, e.swappable, seq)
        except NotSwappable as exc:
            return _stuck("not-swappable", str(exc), e)
        out = _go(p, seq=inner_seq, e=e.body,
                  events=events + (SwapEvent(layer, e.swappable),))
        if isinstance(out, Stepped):
            return Stepped(Swap(e.layer_expr, e.swappable, out.expr, e.span),
                           out.rule, out.active, out.events, out.dispatch)
        return out

    if isinstance(e, AnnotatedInvoke):
        hit = _step_args(p, seq, e.args, events)
        if hit is not None:
            i, out = hit
            if isinstance(out, Stepped):
                new_args = e.args[:i] + (out.expr,) + e.args[i + 1:]
                return Stepped(AnnotatedInvoke(e.recv, e.cursor, e.method, new_args, e.span),
                               out.rule, out.active, out.events, out.dispatch)
            return out
        return _enter_method(p, seq, e, events)

    if isinstance(e, Proceed):
        return _stuck("proceed-outside-method", "proceed outside a partial method", e)
    if isinstance(e, SuperCall):
        return _stuck("super-outside-method", "super outside a method", e)
    if isinstance(e, SuperProceed):
        return _stuck("superproceed-outside-method",
                      "superproceed outside a partial method", e)

    raise CfjError(f"cannot step {type(e).__name__}")


def _enter_method(p: Program, seq: tuple, e: AnnotatedInvoke, events: tuple) -> StepOutcome:
    cur = e.cursor
    m = e.method

    if cur.is_quad:
        r = lookup.pmbody(p, m, cur.target, cur.layer)
        if r is None:
            return _stuck("pmbody-undefined",
                          f"no partial method {cur.target}.{m} at or above layer {cur.layer}", e)
        assert cur.prefix, "quad cursors always carry a nonempty prefix"
        found_super = p.superlayer(r.found_layer)
        bindings = CursorBindings(
            method=m,
            proceed=Cursor(cur.target, None, cur.prefix[:-1], cur.full),
            super_=Cursor(p.superclass(cur.target), None, cur.full, cur.full),
            superproceed=Cursor(cur.target, found_super, cur.prefix, cur.full),
        )
        try:
            body = method_entry_subst(r.body, e.recv, e.args, r.params, bindings)
        except CfjError as exc:
            return _stuck("arity", str(exc), e)
        info = DispatchInfo("R-InvkSP", m, cur, cur.target, r.found_layer)
        return Stepped(body, "R-InvkSP", seq, events, info)

    r = lookup.mbody(p, m, cur.target, cur.prefix, cur.full)
    if r is None:
        return _stuck("mbody-undefined",
                      f"no method {m!r} for {cur.target} under prefix {list(cur.prefix)}", e)

    if not r.found_prefix:
        # Base method: only super gets a continuation.
        bindings = CursorBindings(
            method=m,
            super_=Cursor(p.superclass(r.found_class), None, cur.full, cur.full),
        )
        rule = "R-InvkB"
    else:
        matched = r.found_prefix[-1]
        bindings = CursorBindings(
            method=m,
            proceed=Cursor(r.found_class, None, r.found_prefix[:-1], cur.full),
            super_=Cursor(p.superclass(r.found_class), None, cur.full, cur.full),
            superproceed=Cursor(r.found_class, p.superlayer(matched),
                                r.found_prefix, cur.full),
        )
        rule = "R-InvkP"
    try:
        body = method_entry_subst(r.body, e.recv, e.args, r.params, bindings)
    except CfjError as exc:
        return _stuck("arity", str(exc), e)
    info = DispatchInfo(rule, m, cur, r.found_class, r.defining_layer)
    return Stepped(body, rule, seq, events, info)


# ------------------------------------------------------------------
# Multi-step driver with tracing
# ------------------------------------------------------------------

@dataclass(frozen=True)
class TraceStep:
    index: int
    active: tuple
    rule: str
    expr_after: Expr
    dispatch: Optional[DispatchInfo] = None

    def format(self) -> str:
        from .parser import render_expr
        return f"#{self.index} [{';'.join(self.active)}] {self.rule} {render_expr(self.expr_after)}"


@dataclass
class Trace:
    steps: list = field(default_factory=list)
    # Distinct activation contexts reached, each with the event sequence
    # that produced it: the constructive well-formedness witnesses.
    witnesses: dict = field(default_factory=dict)
    initial_seq: tuple = ()

    def record_witness(self, seq: tuple, events: tuple) -> None:
        self.witnesses.setdefault(frozenset(seq), events)

    def format(self) -> str:
        return "\n".join(s.format() for s in self.steps)


@dataclass
class EvalResult:
    kind: str            # "value" | "stuck" | "fuel"
    final: Expr
    trace: Trace
    stuck_reason: Optional[StuckReason] = None

    @property
    def is_value(self) -> bool:
        return self.kind == "value"


DEFAULT_MAX_STEPS = 10_000


def evaluate(p: Program, e: Expr, max_steps: int = DEFAULT_MAX_STEPS,
             initial_seq: tuple = (), initial_events: tuple = None) -> EvalResult:
    """Drive step to a value, a stuck state, or fuel exhaustion.

    When evaluation starts under a nonempty sequence, the corresponding
    activation events may be supplied; by default each initial layer is
    treated as a plain activation.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if initial_events is None:
        initial_events = tuple(WithEvent(l) for l in initial_seq)
    trace = Trace(initial_seq=initial_seq)
    trace.record_witness(initial_seq, initial_events)

    cur = e
    for i in range(1, max_steps + 1):
        out = step(p, initial_seq, cur)
        if isinstance(out, AlreadyValue):
            return EvalResult("value", cur, trace)
        if isinstance(out, Stuck):
            return EvalResult("stuck", cur, trace, out.reason)
        cur = out.expr
        trace.steps.append(TraceStep(i, out.active, out.rule, cur, out.dispatch))
        trace.record_witness(out.active, initial_events + out.events)
    if is_value(cur):
        return EvalResult("value", cur, trace)
    return EvalResult("fuel", cur, trace)
