"""Command-line front door: check, run, and soundness over .cfj files.

Exit codes: 0 success/value, 1 type error, 2 parse or validation error,
3 stuck, 4 fuel exhausted, 5 soundness violation.  CFJ_MAX_STEPS overrides
the evaluation fuel default.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .harness import run_differential, run_soundness
from .parser import ParseError, ValidationError, parse_program, render_expr
from .semantics import DEFAULT_MAX_STEPS, evaluate
from .typecheck import TablesInvalid, TypeCheckFailure, check_program

EXIT_OK = 0
EXIT_TYPE_ERROR = 1
EXIT_SYNTAX_ERROR = 2
EXIT_STUCK = 3
EXIT_FUEL = 4
EXIT_VIOLATION = 5


def _fuel_default() -> int:
    env = os.environ.get("CFJ_MAX_STEPS")
    if env:
        try:
            return int(env)
        except ValueError:
            print(f"ignoring malformed CFJ_MAX_STEPS={env!r}", file=sys.stderr)
    return DEFAULT_MAX_STEPS


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return None
    try:
        return parse_program(text, path)
    except ParseError as exc:
        print(f"{path}:{exc.span}: {exc.message}", file=sys.stderr)
        return None
    except ValidationError as exc:
        for v in exc.report.violations:
            print(f"{path}: {v}", file=sys.stderr)
        return None


def _typecheck(program, path: str):
    """Check the program, printing diagnostics; the main type or None."""
    try:
        main_type = check_program(program)
    except TablesInvalid as exc:
        for v in exc.report.violations:
            print(f"{path}: {v}", file=sys.stderr)
        return None
    except TypeCheckFailure as exc:
        for err in exc.errors:
            pos = f"{err.span}: " if err.span else ""
            print(f"{path}:{pos}[{err.rule}] {err.location}: {err.message}",
                  file=sys.stderr)
        return None
    return main_type


def cmd_check(args) -> int:
    program = _load(args.path)
    if program is None:
        return EXIT_SYNTAX_ERROR
    main_type = _typecheck(program, args.path)
    if main_type is None:
        return EXIT_TYPE_ERROR
    print(main_type)
    return EXIT_OK


def cmd_run(args) -> int:
    program = _load(args.path)
    if program is None:
        return EXIT_SYNTAX_ERROR
    if not args.unchecked:
        if _typecheck(program, args.path) is None:
            return EXIT_TYPE_ERROR
    result = evaluate(program, program.main, args.max_steps)
    if args.trace:
        trace_text = result.trace.format()
        if trace_text:
            print(trace_text)
    if result.kind == "value":
        print(render_expr(result.final))
        return EXIT_OK
    if result.kind == "stuck":
        print(f"stuck after {len(result.trace.steps)} steps: {result.stuck_reason}",
              file=sys.stderr)
        print(render_expr(result.final))
        return EXIT_STUCK
    print(f"no normal form within {args.max_steps} steps", file=sys.stderr)
    return EXIT_FUEL


def cmd_soundness(args) -> int:
    paths = []
    if args.suite:
        paths = sorted(Path(args.suite).glob("*.cfj"))
        if not paths:
            print(f"0 programs found under {args.suite}")
            return EXIT_OK
    elif args.path:
        paths = [Path(args.path)]
    else:
        print("soundness needs a path or --suite", file=sys.stderr)
        return EXIT_SYNTAX_ERROR

    summaries = []
    records = []
    violations = 0
    syntax_errors = 0
    for path in paths:
        program = _load(str(path))
        if program is None:
            syntax_errors += 1
            continue
        try:
            check_program(program)
        except (TablesInvalid, TypeCheckFailure):
            summaries.append(f"{path.name}: rejected by the typechecker (skipped)")
            continue
        report = run_soundness(program, args.max_steps, path.name)
        summaries.append(report.summary())
        from .harness import CandidateRecord
        records.append(CandidateRecord(
            path.name, "accepted" if report.ok else "violation", report.steps,
            None, "; ".join(report.failures)))
        if not report.ok:
            violations += 1
        if args.depth:
            diff = run_differential(program, args.depth, args.max_steps, path.name)
            summaries.append(diff.summary())
            records.extend(diff.records)
            if not diff.ok:
                violations += 1

    print("\n".join(summaries))
    if args.report_dir:
        from .report import write_report
        for written in write_report(args.report_dir, records, summaries):
            print(f"wrote {written}")
    if syntax_errors:
        return EXIT_SYNTAX_ERROR
    return EXIT_VIOLATION if violations else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="cfj",
        description="Typecheck, run, and soundness-check layered programs (.cfj)")
    sub = top.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse and typecheck; print the main type")
    p_check.add_argument("path")
    p_check.set_defaults(fn=cmd_check)

    p_run = sub.add_parser("run", help="typecheck then evaluate; print the final value")
    p_run.add_argument("path")
    p_run.add_argument("--trace", action="store_true",
                       help="print one line per reduction step")
    p_run.add_argument("--max-steps", type=int, default=_fuel_default())
    p_run.add_argument("--unchecked", action="store_true",
                       help="skip the typechecker (demonstrates stuck states)")
    p_run.set_defaults(fn=cmd_run)

    p_sound = sub.add_parser(
        "soundness",
        help="subject reduction and progress along traces; optional enumeration")
    p_sound.add_argument("path", nargs="?")
    p_sound.add_argument("--suite", help="directory of .cfj programs")
    p_sound.add_argument("--max-steps", type=int, default=200)
    p_sound.add_argument("--depth", type=int, default=0,
                         help="also run every enumerated main up to this depth")
    p_sound.add_argument("--report-dir",
                         help="write report.csv and summary figures here")
    p_sound.set_defaults(fn=cmd_soundness)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
