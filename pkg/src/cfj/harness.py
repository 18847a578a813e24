"""Executable soundness checks: trace-level subject reduction and progress,
an independent dispatch oracle, bounded main-expression enumeration, and a
differential runner that crosses all of them.

The oracle re-implements dispatch from the informal search order (scan the
activation sequence right to left, walking each layer's parents, then the
base class, then start over at the superclass) directly against the raw
tables, sharing no code with the lookup module; agreement between the two
is itself one of the checked properties.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterator, Optional

from . import lookup
from .relations import type_sub, weak_sub
from .semantics import DEFAULT_MAX_STEPS, EvalResult, evaluate
from .syntax import (
    BASE, OBJECT, Expr, FieldGet, Invoke, NewClass, NewLayer, Program, Swap,
    TOP_LEVEL, With,
)
from .typecheck import (
    TypeCheckError, check_tables, ndp, type_expr, wf_layer_set,
)


# ------------------------------------------------------------------
# Independent dispatch oracle
# ------------------------------------------------------------------

def resolve_oracle(p: Program, seq: tuple, c: str, m: str) -> Optional[tuple]:
    """Resolve which definition a call of m on a c-instance runs under the
    activated sequence seq.

    Returns ("layer", defining_layer, for_class) or ("base", for_class) or
    None.  Works straight off the table dicts.
    """
    assert len(set(seq)) == len(seq)
    cur = c
    while cur != OBJECT:
        decl = p.classes[cur]
        for i in range(len(seq) - 1, -1, -1):
            candidate = seq[i]
            while candidate != BASE:
                layer_decl = p.layers[candidate]
                if (cur, m) in layer_decl.partial_methods:
                    return ("layer", candidate, cur)
                candidate = layer_decl.superlayer
        if m in decl.methods:
            return ("base", cur)
        cur = decl.superclass
    return None


def oracle_site(p: Program, seq: tuple, c: str, m: str) -> Optional[tuple]:
    """The same resolution computed through mbody, shaped like the oracle's
    answer."""
    r = lookup.mbody(p, m, c, seq, seq)
    if r is None:
        return None
    if r.in_base:
        return ("base", r.found_class)
    return ("layer", r.defining_layer, r.found_class)


def dispatch_grid(p: Program, max_len: Optional[int] = None) -> Iterator[tuple]:
    """Every (class, method, duplicate-free layer sequence) query over the
    program's own names; exhaustive because fixture tables are tiny."""
    layers = sorted(p.layers)
    if max_len is None:
        max_len = len(layers)
    methods = sorted(
        {m for d in p.classes.values() for m in d.methods}
        | {m for d in p.layers.values() for (_, m) in d.partial_methods})
    seqs = [()]
    for k in range(1, max_len + 1):
        seqs.extend(permutations(layers, k))
    for c in sorted(p.classes):
        for m in methods:
            for seq in seqs:
                yield c, m, seq


# ------------------------------------------------------------------
# Soundness over a single trace
# ------------------------------------------------------------------

@dataclass(frozen=True)
class StepRecord:
    index: int
    rule: str
    pre_type: Optional[str]
    post_type: Optional[str]
    subtype_ok: bool
    progress_ok: bool
    note: str = ""


@dataclass
class SoundnessReport:
    program_id: str
    steps: int
    final_kind: str                  # value | stuck | fuel
    records: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        verdict = "pass" if self.ok else "FAIL"
        lines = [f"{self.program_id}: {verdict} "
                 f"({self.steps} steps, outcome {self.final_kind})"]
        lines.extend(f"  {f}" for f in self.failures)
        return "\n".join(lines)


def run_soundness(p: Program, max_steps: int = DEFAULT_MAX_STEPS,
                  program_id: str = "<program>",
                  initial_seq: tuple = (),
                  result: EvalResult = None) -> SoundnessReport:
    """Evaluate the main expression, re-typing after every step with the
    runtime rules: each post-step type must be a subtype of its
    predecessor, and a non-value must always step.  Failures become report
    records, never exceptions."""
    if result is None:
        result = evaluate(p, p.main, max_steps, initial_seq)
    witnesses = result.trace.witnesses
    report = SoundnessReport(program_id, len(result.trace.steps), result.kind)
    lam = frozenset(initial_seq)

    def type_of(e: Expr) -> tuple:
        try:
            return type_expr(p, TOP_LEVEL, lam, {}, e, witnesses), None
        except TypeCheckError as err:
            return None, err

    pre, err = type_of(p.main)
    if err is not None:
        report.failures.append(f"initial expression fails to type: {err}")
    for step in result.trace.steps:
        post, err = type_of(step.expr_after)
        if err is not None:
            report.records.append(StepRecord(
                step.index, step.rule, _show(p, pre), None, False, True, str(err)))
            report.failures.append(
                f"step {step.index} ({step.rule}): post-state fails to type: {err}")
            pre = None
            continue
        ok = True
        if pre is not None and not type_sub(p, post, pre):
            ok = False
            report.failures.append(
                f"step {step.index} ({step.rule}): type {post} is not a "
                f"subtype of {pre}")
        report.records.append(StepRecord(
            step.index, step.rule, _show(p, pre), _show(p, post), ok, True))
        pre = post

    if result.kind == "stuck":
        report.failures.append(
            f"progress violated: stuck after {report.steps} steps "
            f"({result.stuck_reason})")
        report.records.append(StepRecord(
            report.steps + 1, "-", _show(p, pre), None, True, False,
            str(result.stuck_reason)))
    return report


def _show(p: Program, t) -> Optional[str]:
    return None if t is None else str(t)


# ------------------------------------------------------------------
# Bounded enumeration of main expressions
# ------------------------------------------------------------------

MAX_ENUM_DEPTH = 5


def enumerate_mains(p: Program, max_depth: int) -> list:
    """All main expressions of bounded depth over the fixed tables, drawn
    from instantiation, invocation, field access, and with/swap with a
    literal layer instance.  Deterministic order."""
    assert 1 <= max_depth <= MAX_ENUM_DEPTH, "enumeration depth is capped"
    classes = sorted(p.classes)
    layers = sorted(p.layers)
    swappables = sorted(l for l in layers if p.layers[l].swappable)
    fieldnames = sorted({f for d in p.classes.values() for _, f in d.own_fields})
    methods = sorted(
        {(m, len(d.methods[m].params)) for d in p.classes.values() for m in d.methods}
        | {(pm.name, len(pm.params)) for d in p.layers.values()
           for pm in d.partial_methods.values()})

    ctor_arity = {}
    for c in classes:
        try:
            ctor_arity[c] = len(lookup.fields(p, c))
        except Exception:
            ctor_arity[c] = None  # unresolvable chain; skip

    exact: dict = {1: []}
    exact[1].extend(NewClass(c, ()) for c in classes if ctor_arity[c] == 0)
    exact[1].extend(NewLayer(l) for l in layers)

    def pool(limit: int) -> list:
        out = []
        for d in range(1, limit + 1):
            out.extend(exact[d])
        return out

    depth_of: dict = {}
    for e in exact[1]:
        depth_of[id(e)] = 1

    for d in range(2, max_depth + 1):
        level: list = []
        inner = pool(d - 1)

        def combos(arity: int):
            """Tuples from the inner pool whose max depth is exactly d-1."""
            if arity == 0:
                return [()]
            out = []
            def rec(prefix: tuple, best: int):
                if len(prefix) == arity:
                    if best == d - 1:
                        out.append(prefix)
                    return
                for cand in inner:
                    rec(prefix + (cand,), max(best, depth_of[id(cand)]))
            rec((), 0)
            return out

        for c in classes:
            k = ctor_arity[c]
            if k:
                for args in combos(k):
                    level.append(NewClass(c, args))
        for recv_args in combos(1):
            for fname in fieldnames:
                level.append(FieldGet(recv_args[0], fname))
        for m, k in methods:
            for parts in combos(1 + k):
                level.append(Invoke(parts[0], m, parts[1:]))
        for l in layers:
            for body in exact[d - 1]:
                level.append(With(NewLayer(l), body))
        for lsw in swappables:
            for l in layers:
                for body in exact[d - 1]:
                    level.append(Swap(NewLayer(l), lsw, body))
        for e in level:
            depth_of[id(e)] = d
        exact[d] = level

    return pool(max_depth)


def count_mains(p: Program, max_depth: int) -> int:
    """Closed-form count of enumerate_mains output, computed by recurrence
    over table statistics rather than by generating expressions."""
    classes = sorted(p.classes)
    layers = sorted(p.layers)
    n_swap = sum(1 for l in layers if p.layers[l].swappable)
    n_fields = len({f for d in p.classes.values() for _, f in d.own_fields})
    methods = sorted(
        {(m, len(d.methods[m].params)) for d in p.classes.values() for m in d.methods}
        | {(pm.name, len(pm.params)) for d in p.layers.values()
           for pm in d.partial_methods.values()})

    nullary_classes = 0
    ctor_arity = {}
    for c in classes:
        k = len(lookup.fields(p, c))
        ctor_arity[c] = k
        if k == 0:
            nullary_classes += 1

    exact = {1: nullary_classes + len(layers)}
    cum = {1: exact[1]}

    def tuples_with_max(arity: int, d: int) -> int:
        # tuples over the pool of depth <= d-1 where the max depth is d-1
        return cum[d - 1] ** arity - (cum[d - 1] - exact[d - 1]) ** arity

    for d in range(2, max_depth + 1):
        total = 0
        for c in classes:
            if ctor_arity[c]:
                total += tuples_with_max(ctor_arity[c], d)
        total += n_fields * exact[d - 1]
        for _, k in methods:
            total += tuples_with_max(1 + k, d)
        total += len(layers) * exact[d - 1]
        total += n_swap * len(layers) * exact[d - 1]
        exact[d] = total
        cum[d] = cum[d - 1] + total
    return cum[max_depth]


# ------------------------------------------------------------------
# Differential run
# ------------------------------------------------------------------

@dataclass(frozen=True)
class CandidateRecord:
    candidate_id: str
    verdict: str          # accepted | rejected | violation
    steps: int
    failing_step: Optional[int] = None
    detail: str = ""


@dataclass
class DifferentialSummary:
    table_id: str
    total: int = 0
    accepted: int = 0
    rejected: int = 0
    violations: list = field(default_factory=list)
    records: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        verdict = "pass" if self.ok else "FAIL"
        lines = [f"{self.table_id}: {verdict} ({self.total} candidates, "
                 f"{self.accepted} accepted, {self.rejected} rejected, "
                 f"{len(self.violations)} violations)"]
        lines.extend(f"  {v}" for v in self.violations)
        return "\n".join(lines)


def run_differential(p: Program, expr_depth: int,
                     max_steps: int = 200,
                     table_id: str = "<tables>") -> DifferentialSummary:
    """Enumerate candidate mains over the program's tables; every candidate
    the typechecker accepts must run soundly (subject reduction, progress)
    and each initial dispatch along its trace must match the independent
    oracle.  Any discrepancy is a violation."""
    from .parser import render_expr

    summary = DifferentialSummary(table_id)
    tables_errors = check_tables(p)
    original_main = p.main
    try:
        for cand in enumerate_mains(p, expr_depth):
            cand_id = render_expr(cand)
            summary.total += 1
            p.main = cand
            accepted = False
            if not tables_errors:
                try:
                    type_expr(p, TOP_LEVEL, frozenset(), {}, cand)
                    accepted = True
                except TypeCheckError:
                    pass
            if not accepted:
                summary.rejected += 1
                summary.records.append(CandidateRecord(cand_id, "rejected", 0))
                continue
            summary.accepted += 1
            result = evaluate(p, p.main, max_steps)
            report = run_soundness(p, max_steps, cand_id, result=result)
            problems = list(report.failures)
            problems.extend(_trace_oracle_disagreements(p, result))
            if problems:
                summary.violations.extend(f"{cand_id}: {msg}" for msg in problems)
                failing = report.records[-1].index if report.records else None
                summary.records.append(CandidateRecord(
                    cand_id, "violation", report.steps, failing, "; ".join(problems)))
            else:
                summary.records.append(CandidateRecord(cand_id, "accepted", report.steps))
    finally:
        p.main = original_main
    return summary


def _trace_oracle_disagreements(p: Program, result: EvalResult) -> list:
    out = []
    for step in result.trace.steps:
        d = step.dispatch
        if d is None or d.rule != "R-Invk":
            continue
        seq = d.cursor.full
        ours = oracle_site(p, seq, d.cursor.target, d.method)
        prose = resolve_oracle(p, seq, d.cursor.target, d.method)
        if ours != prose:
            out.append(
                f"dispatch of {d.cursor.target}.{d.method} under {list(seq)}: "
                f"lookup says {ours}, oracle says {prose}")
    return out


# ------------------------------------------------------------------
# Property grids (the proved statements, run exhaustively)
# ------------------------------------------------------------------

def pmtype_stability_violations(p: Program) -> list:
    """Weak sublayers see exactly the signatures their ancestors see."""
    out = []
    names = sorted(p.layers)
    methods = {(c, m) for d in p.layers.values() for (c, m) in d.partial_methods}
    for l2 in names:
        for (c, m) in sorted(methods):
            sig = lookup.pmtype(p, m, c, l2)
            if sig is None:
                continue
            for l1 in names:
                if not weak_sub(p, l1, l2):
                    continue
                got = lookup.pmtype(p, m, c, l1)
                if got != sig:
                    out.append(f"pmtype({m},{c},{l1}) = {got} but "
                               f"pmtype({m},{c},{l2}) = {sig}")
    return out


def ndp_implies_mtype_violations(p: Program, max_len: Optional[int] = None) -> list:
    """Wherever proceed chains are known not to dangle, a signature exists."""
    out = []
    for c, m, seq in dispatch_grid(p, max_len):
        for cut in range(len(seq) + 1):
            seq1 = seq[:cut]
            if not ndp(p, m, c, seq1, seq):
                continue
            sig = lookup.mtype(p, m, c, frozenset(seq1), frozenset(seq))
            if sig is None or isinstance(sig, lookup.Conflict):
                out.append(f"ndp({m},{c},{list(seq1)},{list(seq)}) holds "
                           f"but mtype gives {sig}")
    return out


def mtype_implies_mbody_violations(p: Program, max_len: Optional[int] = None) -> list:
    """On well-formed sets, a signature guarantees a body of matching arity
    whose found prefix never ends at the layer root."""
    out = []
    wf_cache: dict = {}
    for c, m, seq in dispatch_grid(p, max_len):
        key = frozenset(seq)
        if key not in wf_cache:
            wf_cache[key] = wf_layer_set(p, key)
        if not wf_cache[key]:
            continue
        for cut in range(len(seq) + 1):
            seq1 = seq[:cut]
            sig = lookup.mtype(p, m, c, frozenset(seq1), frozenset(seq))
            if sig is None or isinstance(sig, lookup.Conflict):
                continue
            r = lookup.mbody(p, m, c, seq1, seq)
            if r is None:
                out.append(f"mtype({m},{c},{list(seq1)},{list(seq)}) = {sig} "
                           f"but mbody is undefined")
                continue
            if len(r.params) != len(sig.param_types):
                out.append(f"mbody({m},{c},{list(seq1)},{list(seq)}) arity "
                           f"{len(r.params)} != signature arity {len(sig.param_types)}")
            if r.found_prefix and r.found_prefix[-1] == BASE:
                out.append(f"mbody({m},{c},{list(seq1)},{list(seq)}) prefix "
                           f"ends at the layer root")
    return out


def oracle_disagreements_grid(p: Program, max_len: Optional[int] = None) -> list:
    """Exhaustive lookup-vs-oracle comparison over the dispatch grid."""
    out = []
    for c, m, seq in dispatch_grid(p, max_len):
        ours = oracle_site(p, seq, c, m)
        prose = resolve_oracle(p, seq, c, m)
        if ours != prose:
            out.append(f"({c},{m},{list(seq)}): lookup {ours} vs oracle {prose}")
    return out
