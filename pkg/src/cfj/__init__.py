"""cfj: a layered Featherweight-Java-style language with first-class
layers, layer inheritance, subtyping, and swapping.

Parse programs, typecheck them, evaluate them step by step, and check the
soundness properties (subject reduction, progress) along every trace.
"""

from .parser import ParseError, ValidationError, parse_program, render, render_expr
from .semantics import DEFAULT_MAX_STEPS, EvalResult, evaluate, step
from .syntax import Program, ValidationReport, validate_tables
from .typecheck import (
    TablesInvalid, TypeCheckError, TypeCheckFailure, check_program, check_tables,
)

__all__ = [
    "DEFAULT_MAX_STEPS",
    "EvalResult",
    "ParseError",
    "Program",
    "TablesInvalid",
    "TypeCheckError",
    "TypeCheckFailure",
    "ValidationError",
    "ValidationReport",
    "check_program",
    "check_tables",
    "evaluate",
    "parse_program",
    "render",
    "render_expr",
    "step",
    "validate_tables",
]

__version__ = "0.1.0"
