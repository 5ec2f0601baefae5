"""Recursive-descent parser for MiniOO."""

from __future__ import annotations

from typing import Optional, Union

from . import ast as A
from .lexer import LexError, Token, tokenize
from .model import SYNTAX_ERROR, Diagnostic, SourceUnit

# binary precedence levels, lowest first
BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)


class ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers --

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str) -> ParseError:
        found = self.tok.text or "end of input"
        return ParseError(Diagnostic(self.tok.span, "error", SYNTAX_ERROR, f"{message}, found {found!r}"))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def ident(self) -> str:
        if self.tok.kind != "ident":
            raise self.error("expected identifier")
        return self.advance().text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    # -- declarations --

    def program_decls(self) -> list[A.Node]:
        decls = []
        while self.tok.kind != "eof":
            if self.at("class"):
                decls.append(self.class_decl())
            elif self.at("interface"):
                decls.append(self.interface_decl())
            else:
                raise self.error("expected 'class' or 'interface'")
        return decls

    def class_decl(self) -> A.ClassDecl:
        span = self.expect("class").span
        name = self.ident()
        superclass = None
        interfaces = []
        if self.accept("extends"):
            superclass = self.ident()
        if self.accept("implements"):
            interfaces.append(self.ident())
            while self.accept(","):
                interfaces.append(self.ident())
        self.expect("{")
        members = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("expected '}'")
            members.append(self.member())
        self.expect("}")
        return A.ClassDecl(name, superclass, tuple(interfaces), tuple(members), span=span)

    def interface_decl(self) -> A.InterfaceDecl:
        span = self.expect("interface").span
        name = self.ident()
        self.expect("{")
        sigs = []
        while not self.at("}"):
            sig_span = self.tok.span
            ret = self.type_name()
            mname = self.ident()
            params = self.params()
            self.expect(";")
            sigs.append(A.MethodSig(ret, mname, params, span=sig_span))
        self.expect("}")
        return A.InterfaceDecl(name, tuple(sigs), span=span)

    def type_name(self) -> str:
        if self.tok.kind == "kw" and self.tok.text in ("int", "bool", "void"):
            return self.advance().text
        if self.tok.kind == "ident":
            return self.advance().text
        raise self.error("expected type")

    def params(self) -> tuple[tuple[str, str], ...]:
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                ptype = self.type_name()
                params.append((ptype, self.ident()))
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(params)

    def member(self) -> Union[A.MethodDecl, A.FieldDecl]:
        span = self.tok.span
        static = self.accept("static")
        test = self.accept("test")
        mtype = self.type_name()
        name = self.ident()
        if self.at("("):
            params = self.params()
            body = self.block()
            return A.MethodDecl(static, test, mtype, name, params, body, span=span)
        if test:
            raise self.error("expected '(' after test method name")
        init = None
        if self.accept("="):
            init = self.expr()
        self.expect(";")
        return A.FieldDecl(static, mtype, name, init, span=span)

    # -- statements --

    def block(self) -> A.Block:
        span = self.expect("{").span
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("expected '}'")
            stmts.append(self.stmt())
        self.expect("}")
        return A.Block(tuple(stmts), span=span)

    def stmt(self) -> A.Stmt:
        tok = self.tok
        span = tok.span
        if self.at("{"):
            return self.block()
        if self.at("if"):
            return self.if_stmt()
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return A.While(cond, self.block(), span=span)
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return A.Return(value, span=span)
        if self.at("assert"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.expect(";")
            return A.Assert(cond, span=span)
        is_decl = (tok.kind == "kw" and tok.text in ("int", "bool")) or (
            tok.kind == "ident" and self.peek().kind == "ident"
        )
        if is_decl:
            vtype = self.type_name()
            name = self.ident()
            init = self.expr() if self.accept("=") else None
            self.expect(";")
            return A.VarDecl(vtype, name, init, span=span)
        expr = self.expr()
        if self.at("="):
            if not isinstance(expr, (A.Name, A.FieldAccess)):
                raise self.error("invalid assignment target")
            self.advance()
            value = self.expr()
            self.expect(";")
            return A.Assign(expr, value, span=span)
        self.expect(";")
        return A.ExprStmt(expr, span=span)

    def if_stmt(self) -> A.If:
        span = self.expect("if").span
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then = self.block()
        orelse: Optional[A.Stmt] = None
        if self.accept("else"):
            orelse = self.if_stmt() if self.at("if") else self.block()
        return A.If(cond, then, orelse, span=span)

    # -- expressions --

    def expr(self, level: int = 0) -> A.Expr:
        if level == len(BINARY_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        ops = BINARY_LEVELS[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            op_tok = self.advance()
            right = self.expr(level + 1)
            left = A.Binary(op_tok.text, left, right, span=op_tok.span)
        return left

    def unary(self) -> A.Expr:
        if self.tok.kind == "op" and self.tok.text in ("!", "-"):
            op_tok = self.advance()
            return A.Unary(op_tok.text, self.unary(), span=op_tok.span)
        return self.postfix()

    def args(self) -> tuple:
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.expr())
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(args)

    def postfix(self) -> A.Expr:
        expr = self.primary()
        while self.at("."):
            dot = self.advance()
            name = self.ident()
            if self.at("("):
                expr = A.Call(expr, name, self.args(), span=dot.span)
            else:
                expr = A.FieldAccess(expr, name, span=dot.span)
        return expr

    def primary(self) -> A.Expr:
        tok = self.tok
        span = tok.span
        if tok.kind == "int":
            self.advance()
            return A.IntLit(int(tok.text), span=span)
        if tok.kind == "ident":
            self.advance()
            if self.at("("):
                return A.Call(None, tok.text, self.args(), span=span)
            return A.Name(tok.text, span=span)
        if tok.kind == "kw":
            if tok.text in ("true", "false"):
                self.advance()
                return A.BoolLit(tok.text == "true", span=span)
            if tok.text == "this":
                self.advance()
                return A.This(span=span)
            if tok.text == "new":
                self.advance()
                cls = self.ident()
                self.expect("(")
                self.expect(")")
                return A.New(cls, span=span)
            if tok.text == "abs":
                self.advance()
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return A.Abs(arg, span=span)
            if tok.text == "reflect_call":
                self.advance()
                self.expect("(")
                obj = self.expr()
                self.expect(",")
                if self.tok.kind != "string":
                    raise self.error("expected method name string")
                name = self.advance().text[1:-1]
                self.expect(")")
                return A.ReflectCall(obj, name, span=span)
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.error("expected expression")


def parse(units: list[SourceUnit]) -> A.Program:
    """Parse source units into one Program (declarations in unit order).

    Raises ParseError or LexError on the first malformed token; no partial
    Program is ever returned.
    """
    if not units:
        raise ValueError("parse needs at least one source unit")
    decls: list[A.Node] = []
    for unit in units:
        decls.extend(Parser(tokenize(unit.text, unit.path)).program_decls())
    first = units[0].path
    return A.Program(tuple(decls), span=A.Span(first, 1, 1))


def parse_or_diagnostics(units: list[SourceUnit]) -> Union[A.Program, list[Diagnostic]]:
    try:
        return parse(units)
    except (ParseError, LexError) as exc:
        return [exc.diagnostic]
