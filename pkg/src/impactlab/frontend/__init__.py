"""MiniOO lexer, parser, pretty-printer and static checker."""

from .ast import NodePath, Program, StalePathError, node_at, replace_at, walk
from .checker import check, check_or_diagnostics, method_at
from .lexer import LexError
from .model import (
    CheckedProgram,
    Diagnostic,
    FieldRef,
    FrontendError,
    MethodRef,
    NoEnclosingMethod,
    SourceUnit,
)
from .parser import ParseError, parse, parse_or_diagnostics
from .printer import pretty_print


def load_units(directory) -> list[SourceUnit]:
    """Read every *.moo file of a project directory, sorted by relative path."""
    from pathlib import Path

    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    return [
        SourceUnit(p.relative_to(root).as_posix(), p.read_text(encoding="utf-8"))
        for p in sorted(root.rglob("*.moo"))
    ]


def parse_and_check(units: list[SourceUnit]) -> CheckedProgram:
    try:
        program = parse(units)
    except (ParseError, LexError) as exc:
        raise FrontendError([exc.diagnostic]) from None
    return check(program)


__all__ = [
    "CheckedProgram", "Diagnostic", "FieldRef", "FrontendError", "LexError", "MethodRef",
    "NoEnclosingMethod", "NodePath", "ParseError", "Program", "SourceUnit", "StalePathError",
    "check", "check_or_diagnostics", "load_units", "method_at", "node_at", "parse",
    "parse_and_check", "parse_or_diagnostics", "pretty_print", "replace_at", "walk",
]
