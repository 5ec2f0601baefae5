"""AST node classes for MiniOO.

Nodes are frozen dataclasses.  Every node is addressed by a NodePath: the
sequence of child indices from the Program root, where a node's children are
the Node-valued fields (and the elements of tuple-of-Node fields) in field
declaration order.  Absent optional children are skipped.  Because mutations
only ever replace one expression by another expression, paths outside the
replaced subtree are stable across edits and pretty-printing.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterator, Optional

NodePath = tuple[int, ...]


@dataclass(frozen=True)
class Span:
    path: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.path}:{self.line}:{self.col}"


NO_SPAN = Span("<generated>", 0, 0)


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


class Node:
    span: Span


class Expr(Node):
    pass


class Stmt(Node):
    pass


# -- declarations -----------------------------------------------------------


@dataclass(frozen=True)
class Program(Node):
    decls: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class ClassDecl(Node):
    name: str
    superclass: Optional[str]
    interfaces: tuple[str, ...]
    members: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class MethodSig(Node):
    ret: str
    name: str
    params: tuple[tuple[str, str], ...]  # (type, name)
    span: Span = _span()


@dataclass(frozen=True)
class InterfaceDecl(Node):
    name: str
    sigs: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class FieldDecl(Node):
    static: bool
    type: str
    name: str
    init: Optional[Expr] = None
    span: Span = _span()


@dataclass(frozen=True)
class Block(Stmt):
    stmts: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class MethodDecl(Node):
    static: bool
    test: bool
    ret: str
    name: str
    params: tuple[tuple[str, str], ...]
    body: Block
    span: Span = _span()


# -- statements -------------------------------------------------------------


@dataclass(frozen=True)
class VarDecl(Stmt):
    type: str
    name: str
    init: Optional[Expr] = None
    span: Span = _span()


@dataclass(frozen=True)
class Assign(Stmt):
    target: Expr  # Name or FieldAccess
    value: Expr
    span: Span = _span()


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Block
    orelse: Optional[Stmt] = None  # Block or If
    span: Span = _span()


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Block
    span: Span = _span()


@dataclass(frozen=True)
class Return(Stmt):
    value: Optional[Expr] = None
    span: Span = _span()


@dataclass(frozen=True)
class ExprStmt(Stmt):
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Assert(Stmt):
    cond: Expr
    span: Span = _span()


# -- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    span: Span = _span()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    span: Span = _span()


@dataclass(frozen=True)
class This(Expr):
    span: Span = _span()


@dataclass(frozen=True)
class Name(Expr):
    """A bare identifier: local variable, implicit-this field, or class name."""

    name: str
    span: Span = _span()


@dataclass(frozen=True)
class FieldAccess(Expr):
    obj: Expr
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Call(Expr):
    obj: Optional[Expr]  # None for an implicit-this / same-class call
    name: str
    args: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class New(Expr):
    cls: str
    span: Span = _span()


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Abs(Expr):
    arg: Expr
    span: Span = _span()


@dataclass(frozen=True)
class ReflectCall(Expr):
    obj: Expr
    name: str
    span: Span = _span()


ARITH_OPS = ("+", "-", "*", "/", "%")
REL_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")


# -- path utilities ---------------------------------------------------------


_CHILD_FIELDS: dict[type, tuple[str, ...]] = {}


def _child_fields(cls: type) -> tuple[str, ...]:
    names = _CHILD_FIELDS.get(cls)
    if names is None:
        names = _CHILD_FIELDS[cls] = tuple(f.name for f in dataclasses.fields(cls) if f.name != "span")
    return names


def children(node: Node) -> list[Node]:
    out: list[Node] = []
    for name in _child_fields(type(node)):
        value = getattr(node, name)
        if isinstance(value, Node):
            out.append(value)
        elif isinstance(value, tuple):
            out.extend(v for v in value if isinstance(v, Node))
    return out


def walk(node: Node, path: NodePath = ()) -> Iterator[tuple[NodePath, Node]]:
    """Pre-order (document order) traversal yielding (path, node)."""
    yield path, node
    for i, child in enumerate(children(node)):
        yield from walk(child, path + (i,))


class StalePathError(LookupError):
    """A NodePath does not address a node in the given tree."""


def node_at(root: Node, path: NodePath) -> Node:
    node = root
    for i in path:
        kids = children(node)
        if not 0 <= i < len(kids):
            raise StalePathError(f"path {list(path)} does not exist")
        node = kids[i]
    return node


def _replace_child(node: Node, index: int, new: Node) -> Node:
    seen = 0
    for name in _child_fields(type(node)):
        value = getattr(node, name)
        if isinstance(value, Node):
            if seen == index:
                return dataclasses.replace(node, **{name: new})
            seen += 1
        elif isinstance(value, tuple):
            items = list(value)
            for j, v in enumerate(items):
                if isinstance(v, Node):
                    if seen == index:
                        items[j] = new
                        return dataclasses.replace(node, **{name: tuple(items)})
                    seen += 1
    raise StalePathError(f"child index {index} out of range")


def replace_at(root: Node, path: NodePath, new: Node) -> Node:
    """Return a copy of root with the node at path replaced; shares all other subtrees."""
    if not path:
        return new
    kids = children(root)
    head = path[0]
    if not 0 <= head < len(kids):
        raise StalePathError(f"path {list(path)} does not exist")
    return _replace_child(root, head, replace_at(kids[head], path[1:], new))
