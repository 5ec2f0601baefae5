"""Pretty-printer emitting canonical MiniOO source.

Parentheses are inserted only where precedence requires them, so
parse(pretty_print(p)) == p for every parsed Program.
"""

from __future__ import annotations

from . import ast as A
from .parser import BINARY_LEVELS

_PREC = {op: i + 1 for i, ops in enumerate(BINARY_LEVELS) for op in ops}
UNARY_PREC = len(BINARY_LEVELS) + 1
ATOM_PREC = UNARY_PREC + 1

INDENT = "    "


def precedence(expr: A.Expr) -> int:
    if isinstance(expr, A.Binary):
        return _PREC[expr.op]
    if isinstance(expr, A.Unary):
        return UNARY_PREC
    return ATOM_PREC


def _wrap(expr: A.Expr, minimum: int) -> str:
    text = print_expr(expr)
    return f"({text})" if precedence(expr) < minimum else text


def print_expr(expr: A.Expr) -> str:
    if isinstance(expr, A.IntLit):
        return str(expr.value)
    if isinstance(expr, A.BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, A.This):
        return "this"
    if isinstance(expr, A.Name):
        return expr.name
    if isinstance(expr, A.FieldAccess):
        return f"{_wrap(expr.obj, ATOM_PREC)}.{expr.name}"
    if isinstance(expr, A.Call):
        args = ", ".join(print_expr(a) for a in expr.args)
        if expr.obj is None:
            return f"{expr.name}({args})"
        return f"{_wrap(expr.obj, ATOM_PREC)}.{expr.name}({args})"
    if isinstance(expr, A.New):
        return f"new {expr.cls}()"
    if isinstance(expr, A.Binary):
        p = _PREC[expr.op]
        return f"{_wrap(expr.left, p)} {expr.op} {_wrap(expr.right, p + 1)}"
    if isinstance(expr, A.Unary):
        # a nested unary is parenthesised so "- -x" never reads as a token pair
        inner = print_expr(expr.operand)
        if precedence(expr.operand) <= UNARY_PREC:
            inner = f"({inner})"
        return f"{expr.op}{inner}"
    if isinstance(expr, A.Abs):
        return f"abs({print_expr(expr.arg)})"
    if isinstance(expr, A.ReflectCall):
        return f'reflect_call({print_expr(expr.obj)}, "{expr.name}")'
    raise TypeError(f"not an expression: {expr!r}")


def _params(params) -> str:
    return ", ".join(f"{t} {n}" for t, n in params)


def _block(block: A.Block, depth: int) -> list[str]:
    lines = ["{"]
    for stmt in block.stmts:
        lines.extend(INDENT + line for line in _stmt(stmt, depth + 1))
    lines.append("}")
    return lines


def _glue(head: str, block_lines: list[str]) -> list[str]:
    return [f"{head} {block_lines[0]}"] + block_lines[1:]


def _stmt(stmt: A.Stmt, depth: int) -> list[str]:
    if isinstance(stmt, A.Block):
        return _block(stmt, depth)
    if isinstance(stmt, A.VarDecl):
        if stmt.init is None:
            return [f"{stmt.type} {stmt.name};"]
        return [f"{stmt.type} {stmt.name} = {print_expr(stmt.init)};"]
    if isinstance(stmt, A.Assign):
        return [f"{print_expr(stmt.target)} = {print_expr(stmt.value)};"]
    if isinstance(stmt, A.If):
        lines = _glue(f"if ({print_expr(stmt.cond)})", _block(stmt.then, depth))
        if stmt.orelse is not None:
            rest = _stmt(stmt.orelse, depth)
            lines[-1] = f"{lines[-1]} else {rest[0]}"
            lines.extend(rest[1:])
        return lines
    if isinstance(stmt, A.While):
        return _glue(f"while ({print_expr(stmt.cond)})", _block(stmt.body, depth))
    if isinstance(stmt, A.Return):
        return ["return;"] if stmt.value is None else [f"return {print_expr(stmt.value)};"]
    if isinstance(stmt, A.ExprStmt):
        return [f"{print_expr(stmt.expr)};"]
    if isinstance(stmt, A.Assert):
        return [f"assert({print_expr(stmt.cond)});"]
    raise TypeError(f"not a statement: {stmt!r}")


def _member(member, depth: int) -> list[str]:
    if isinstance(member, A.FieldDecl):
        prefix = "static " if member.static else ""
        init = "" if member.init is None else f" = {print_expr(member.init)}"
        return [f"{prefix}{member.type} {member.name}{init};"]
    mods = ("static " if member.static else "") + ("test " if member.test else "")
    head = f"{mods}{member.ret} {member.name}({_params(member.params)})"
    return _glue(head, _block(member.body, depth))


def pretty_print(program: A.Program) -> str:
    out: list[str] = []
    for decl in program.decls:
        if isinstance(decl, A.InterfaceDecl):
            out.append(f"interface {decl.name} {{")
            for sig in decl.sigs:
                out.append(f"{INDENT}{sig.ret} {sig.name}({_params(sig.params)});")
            out.append("}")
        else:
            head = f"class {decl.name}"
            if decl.superclass:
                head += f" extends {decl.superclass}"
            if decl.interfaces:
                head += " implements " + ", ".join(decl.interfaces)
            out.append(head + " {")
            for member in decl.members:
                out.extend(INDENT + line for line in _member(member, 1))
            out.append("}")
        out.append("")
    return "\n".join(out)
