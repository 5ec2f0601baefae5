from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .ast import FieldDecl, MethodDecl, MethodSig, NodePath, Program, Span


@dataclass(frozen=True)
class SourceUnit:
    path: str
    text: str


@dataclass(frozen=True, order=True)
class MethodRef:
    owner: str
    name: str
    params: tuple[str, ...] = ()
    static: bool = field(default=False, compare=False)

    def __str__(self) -> str:
        return f"{self.owner}.{self.name}({','.join(self.params)})"


@dataclass(frozen=True, order=True)
class FieldRef:
    owner: str
    name: str
    static: bool = field(default=False, compare=False)

    def __str__(self) -> str:
        return f"{self.owner}#{self.name}"


# Diagnostic codes.  Each failure class of the frontend has its own code.
LEX_ERROR = "lex-error"
SYNTAX_ERROR = "syntax-error"
UNKNOWN_TYPE = "unknown-type"
UNKNOWN_MEMBER = "unknown-member"
UNKNOWN_NAME = "unknown-name"
SIGNATURE_MISMATCH = "signature-mismatch"
INHERITANCE_CYCLE = "inheritance-cycle"
DUPLICATE_DEFINITION = "duplicate-definition"
TYPE_ERROR = "type-error"


@dataclass(frozen=True)
class Diagnostic:
    span: Span
    severity: str  # "error" | "warning"
    code: str
    message: str = ""

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}[{self.code}] {self.message}"


class FrontendError(Exception):
    """Raised when parsing or checking produced error diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class NoEnclosingMethod(LookupError):
    pass


# name resolution kinds recorded by the checker for Name nodes
LOCAL = "local"
FIELD = "field"
CLASS = "class"


@dataclass
class CheckedProgram:
    """A fully resolved program.  All side tables are keyed by NodePath."""

    program: Program
    kinds: dict[str, str]  # type name -> "class" | "interface"
    hierarchy: dict[str, tuple[Optional[str], tuple[str, ...]]]
    methods: dict[MethodRef, Union[MethodDecl, MethodSig]]
    fields: dict[FieldRef, FieldDecl]
    static_types: dict[NodePath, str]
    overrides: dict[MethodRef, MethodRef]
    tests: list[MethodRef]
    # every (ancestor declaration, overriding or implementing method) pair
    override_pairs: list[tuple[MethodRef, MethodRef]] = field(default_factory=list)
    call_targets: dict[NodePath, MethodRef] = field(default_factory=dict)
    names: dict[NodePath, tuple] = field(default_factory=dict)
    field_targets: dict[NodePath, FieldRef] = field(default_factory=dict)
    method_paths: dict[MethodRef, NodePath] = field(default_factory=dict)
    field_paths: dict[FieldRef, NodePath] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, CheckedProgram):
            return NotImplemented
        return self.__dict__ == other.__dict__

    def method_by_id(self, ident: str) -> MethodRef:
        for ref in self.methods:
            if str(ref) == ident:
                return ref
        raise KeyError(ident)

    def ancestors(self, cls: str) -> list[str]:
        """cls followed by its superclass chain (classes only)."""
        out = []
        while cls is not None and cls not in out:
            out.append(cls)
            cls = self.hierarchy[cls][0]
        return out
