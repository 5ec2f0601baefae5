"""Name resolution and type checking for MiniOO.

Method calls resolve statically by the nearest-definition rule: look the name
up in the receiver's static type, then walk the superclass chain.  Every
expression node (assignment targets included) receives one static type.
"""

from __future__ import annotations

from typing import Optional, Union

from . import ast as A
from .model import (
    CLASS,
    DUPLICATE_DEFINITION,
    FIELD,
    INHERITANCE_CYCLE,
    LOCAL,
    SIGNATURE_MISMATCH,
    TYPE_ERROR,
    UNKNOWN_MEMBER,
    UNKNOWN_NAME,
    UNKNOWN_TYPE,
    CheckedProgram,
    Diagnostic,
    FieldRef,
    FrontendError,
    MethodRef,
    NoEnclosingMethod,
)

INT, BOOL, VOID = "int", "bool", "void"
ERR = "?"  # poisoned type; suppresses cascading diagnostics
PRIMITIVES = (INT, BOOL, VOID)


def class_ref_type(name: str) -> str:
    return f"class:{name}"


class _Context:
    def __init__(self, cls: str, static: bool, ret: Optional[str]):
        self.cls = cls
        self.static = static
        self.ret = ret
        self.scopes: list[dict[str, str]] = [{}]

    def lookup(self, name: str) -> Optional[str]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None


class Checker:
    def __init__(self, program: A.Program):
        self.program = program
        self.diags: list[Diagnostic] = []
        self.decls: dict[str, Union[A.ClassDecl, A.InterfaceDecl]] = {}
        self.kinds: dict[str, str] = {}
        self.hierarchy: dict[str, tuple[Optional[str], tuple[str, ...]]] = {}
        # per type: member name -> ref
        self.class_methods: dict[str, dict[str, MethodRef]] = {}
        self.class_fields: dict[str, dict[str, FieldRef]] = {}
        self.methods: dict[MethodRef, Union[A.MethodDecl, A.MethodSig]] = {}
        self.fields: dict[FieldRef, A.FieldDecl] = {}
        self.method_paths: dict[MethodRef, A.NodePath] = {}
        self.field_paths: dict[FieldRef, A.NodePath] = {}
        self.overrides: dict[MethodRef, MethodRef] = {}
        self.override_pairs: list[tuple[MethodRef, MethodRef]] = []
        self.tests: list[MethodRef] = []
        self.static_types: dict[A.NodePath, str] = {}
        self.call_targets: dict[A.NodePath, MethodRef] = {}
        self.names: dict[A.NodePath, tuple] = {}
        self.field_targets: dict[A.NodePath, FieldRef] = {}
        self.acyclic = True

    def error(self, node: A.Node, code: str, message: str) -> None:
        self.diags.append(Diagnostic(node.span, "error", code, message))

    # -- driver --

    def run(self) -> CheckedProgram:
        self.collect_types()
        self.check_hierarchy()
        self.collect_members()
        if self.acyclic:
            self.check_overrides()
            self.check_bodies()
        if self.diags:
            raise FrontendError(self.diags)
        return CheckedProgram(
            program=self.program,
            kinds=self.kinds,
            hierarchy=self.hierarchy,
            methods=self.methods,
            fields=self.fields,
            static_types=self.static_types,
            overrides=self.overrides,
            tests=self.tests,
            override_pairs=self.override_pairs,
            call_targets=self.call_targets,
            names=self.names,
            field_targets=self.field_targets,
            method_paths=self.method_paths,
            field_paths=self.field_paths,
        )

    # -- phase 1: declarations and hierarchy --

    def collect_types(self) -> None:
        for decl in self.program.decls:
            if decl.name in self.decls or decl.name in PRIMITIVES:
                self.error(decl, DUPLICATE_DEFINITION, f"type {decl.name} already defined")
                continue
            self.decls[decl.name] = decl
            self.kinds[decl.name] = "interface" if isinstance(decl, A.InterfaceDecl) else "class"

    def check_hierarchy(self) -> None:
        for name, decl in self.decls.items():
            if isinstance(decl, A.InterfaceDecl):
                self.hierarchy[name] = (None, ())
                continue
            superclass = decl.superclass
            if superclass is not None and self.kinds.get(superclass) != "class":
                self.error(decl, UNKNOWN_TYPE, f"unknown superclass {superclass}")
                superclass = None
            interfaces = []
            for iface in decl.interfaces:
                if self.kinds.get(iface) != "interface":
                    self.error(decl, UNKNOWN_TYPE, f"unknown interface {iface}")
                elif iface in interfaces:
                    self.error(decl, DUPLICATE_DEFINITION, f"interface {iface} listed twice")
                else:
                    interfaces.append(iface)
            self.hierarchy[name] = (superclass, tuple(interfaces))
        for name in self.hierarchy:
            seen = set()
            cur: Optional[str] = name
            while cur is not None:
                if cur in seen:
                    self.error(self.decls[name], INHERITANCE_CYCLE, f"inheritance cycle through {name}")
                    self.acyclic = False
                    break
                seen.add(cur)
                cur = self.hierarchy[cur][0]

    def valid_type(self, node: A.Node, tname: str, allow_void: bool = False) -> bool:
        if tname in (INT, BOOL) or tname in self.kinds or (allow_void and tname == VOID):
            return True
        self.error(node, UNKNOWN_TYPE, f"unknown type {tname}")
        return False

    def collect_members(self) -> None:
        for i, decl in enumerate(self.program.decls):
            if self.decls.get(decl.name) is not decl:
                continue
            methods: dict[str, MethodRef] = {}
            fields: dict[str, FieldRef] = {}
            self.class_methods[decl.name] = methods
            self.class_fields[decl.name] = fields
            members = decl.sigs if isinstance(decl, A.InterfaceDecl) else decl.members
            for j, member in enumerate(members):
                if isinstance(member, A.FieldDecl):
                    self.valid_type(member, member.type)
                    if member.name in fields:
                        self.error(member, DUPLICATE_DEFINITION, f"field {member.name} already defined")
                        continue
                    ref = FieldRef(decl.name, member.name, member.static)
                    fields[member.name] = ref
                    self.fields[ref] = member
                    self.field_paths[ref] = (i, j)
                    continue
                self.valid_type(member, member.ret, allow_void=True)
                seen_params = set()
                for ptype, pname in member.params:
                    self.valid_type(member, ptype)
                    if pname in seen_params:
                        self.error(member, DUPLICATE_DEFINITION, f"parameter {pname} repeated")
                    seen_params.add(pname)
                if member.name in methods:
                    self.error(member, DUPLICATE_DEFINITION, f"method {member.name} already defined")
                    continue
                static = isinstance(member, A.MethodDecl) and member.static
                ref = MethodRef(decl.name, member.name, tuple(t for t, _ in member.params), static)
                methods[member.name] = ref
                self.methods[ref] = member
                self.method_paths[ref] = (i, j)
                if isinstance(member, A.MethodDecl) and member.test:
                    if member.params or member.ret != VOID:
                        self.error(member, SIGNATURE_MISMATCH, f"test {member.name} must be void with no parameters")
                    else:
                        self.tests.append(ref)

    # -- hierarchy queries --

    def ancestors(self, cls: str) -> list[str]:
        out = []
        cur: Optional[str] = cls
        while cur is not None:
            out.append(cur)
            cur = self.hierarchy[cur][0]
        return out

    def supertypes(self, cls: str) -> set[str]:
        out = set()
        for c in self.ancestors(cls):
            out.add(c)
            out.update(self.hierarchy[c][1])
        return out

    def subtype(self, sub: str, sup: str) -> bool:
        return sub in self.kinds and sup in self.supertypes(sub)

    def find_method(self, tname: str, name: str) -> Optional[MethodRef]:
        if self.kinds.get(tname) == "interface":
            return self.class_methods[tname].get(name)
        for c in self.ancestors(tname):
            ref = self.class_methods[c].get(name)
            if ref is not None:
                return ref
        return None

    def find_field(self, cls: str, name: str) -> Optional[FieldRef]:
        if self.kinds.get(cls) != "class":
            return None
        for c in self.ancestors(cls):
            ref = self.class_fields[c].get(name)
            if ref is not None:
                return ref
        return None

    def return_type(self, ref: MethodRef) -> str:
        return self.methods[ref].ret

    def same_signature(self, a: MethodRef, b: MethodRef) -> bool:
        return a.params == b.params and self.return_type(a) == self.return_type(b)

    def check_overrides(self) -> None:
        for name, decl in self.decls.items():
            if not isinstance(decl, A.ClassDecl):
                continue
            superclass = self.hierarchy[name][0]
            for mname, ref in self.class_methods[name].items():
                parent = self.find_method(superclass, mname) if superclass else None
                if parent is None:
                    continue
                node = self.methods[ref]
                if ref.static or parent.static:
                    self.error(node, SIGNATURE_MISMATCH, f"static method {mname} cannot be redeclared")
                elif not self.same_signature(ref, parent):
                    self.error(node, SIGNATURE_MISMATCH, f"{ref} does not match overridden {parent}")
                else:
                    self.overrides[ref] = parent
                    self.override_pairs.append((parent, ref))
            for iface in self.hierarchy[name][1]:
                for sig in self.class_methods[iface].values():
                    impl = self.find_method(name, sig.name)
                    if impl is None:
                        self.error(decl, SIGNATURE_MISMATCH, f"{name} does not implement {sig}")
                        continue
                    if impl.static or not self.same_signature(impl, sig):
                        self.error(decl, SIGNATURE_MISMATCH, f"{impl} does not match {sig}")
                        continue
                    self.override_pairs.append((sig, impl))
                    if impl.owner == name and impl not in self.overrides:
                        self.overrides[impl] = sig

    # -- phase 2: bodies --

    def check_bodies(self) -> None:
        for i, decl in enumerate(self.program.decls):
            if not isinstance(decl, A.ClassDecl) or self.decls.get(decl.name) is not decl:
                continue
            for j, member in enumerate(decl.members):
                path = (i, j)
                if isinstance(member, A.FieldDecl):
                    if member.init is not None:
                        ctx = _Context(decl.name, member.static, None)
                        t = self.expr(member.init, path + (0,), ctx)
                        self.require_assignable(member.init, t, member.type)
                    continue
                ctx = _Context(decl.name, member.static, member.ret)
                for ptype, pname in member.params:
                    ctx.scopes[0][pname] = ptype
                self.block(member.body, path + (0,), ctx)

    def assignable(self, src: str, dst: str) -> bool:
        if ERR in (src, dst):
            return True
        if src == dst:
            return src != VOID and not src.startswith("class:")
        return self.subtype(src, dst)

    def require_assignable(self, node: A.Node, src: str, dst: str) -> None:
        if not self.assignable(src, dst):
            self.error(node, TYPE_ERROR, f"cannot use {src} where {dst} is expected")

    def block(self, block: A.Block, path: A.NodePath, ctx: _Context) -> None:
        ctx.scopes.append({})
        for k, stmt in enumerate(block.stmts):
            self.stmt(stmt, path + (k,), ctx)
        ctx.scopes.pop()

    def stmt(self, stmt: A.Stmt, path: A.NodePath, ctx: _Context) -> None:
        if isinstance(stmt, A.Block):
            self.block(stmt, path, ctx)
        elif isinstance(stmt, A.VarDecl):
            if stmt.init is not None:
                t = self.expr(stmt.init, path + (0,), ctx)
            if self.valid_type(stmt, stmt.type):
                if stmt.init is not None:
                    self.require_assignable(stmt.init, t, stmt.type)
            if ctx.lookup(stmt.name) is not None:
                self.error(stmt, DUPLICATE_DEFINITION, f"variable {stmt.name} already defined")
            ctx.scopes[-1][stmt.name] = stmt.type if stmt.type in self.kinds or stmt.type in (INT, BOOL) else ERR
        elif isinstance(stmt, A.Assign):
            target_t = self.expr(stmt.target, path + (0,), ctx)
            if target_t.startswith("class:"):
                self.error(stmt.target, TYPE_ERROR, "cannot assign to a class name")
            value_t = self.expr(stmt.value, path + (1,), ctx)
            self.require_assignable(stmt.value, value_t, target_t)
        elif isinstance(stmt, A.If):
            self.cond(stmt.cond, path + (0,), ctx)
            self.block(stmt.then, path + (1,), ctx)
            if stmt.orelse is not None:
                self.stmt(stmt.orelse, path + (2,), ctx)
        elif isinstance(stmt, A.While):
            self.cond(stmt.cond, path + (0,), ctx)
            self.block(stmt.body, path + (1,), ctx)
        elif isinstance(stmt, A.Return):
            if ctx.ret is None:
                self.error(stmt, TYPE_ERROR, "return outside a method")
            elif stmt.value is None:
                if ctx.ret != VOID:
                    self.error(stmt, TYPE_ERROR, "missing return value")
            else:
                t = self.expr(stmt.value, path + (0,), ctx)
                if ctx.ret == VOID:
                    self.error(stmt, TYPE_ERROR, "void method returns a value")
                else:
                    self.require_assignable(stmt.value, t, ctx.ret)
        elif isinstance(stmt, A.ExprStmt):
            self.expr(stmt.expr, path + (0,), ctx)
            if not isinstance(stmt.expr, (A.Call, A.ReflectCall, A.New)):
                self.error(stmt, TYPE_ERROR, "expression is not a statement")
        elif isinstance(stmt, A.Assert):
            self.cond(stmt.cond, path + (0,), ctx)
        else:
            raise TypeError(stmt)

    def cond(self, expr: A.Expr, path: A.NodePath, ctx: _Context) -> None:
        t = self.expr(expr, path, ctx)
        if t not in (BOOL, ERR):
            self.error(expr, TYPE_ERROR, f"condition must be bool, not {t}")

    def expr(self, expr: A.Expr, path: A.NodePath, ctx: _Context) -> str:
        t = self._expr(expr, path, ctx)
        self.static_types[path] = t
        return t

    def _expr(self, expr: A.Expr, path: A.NodePath, ctx: _Context) -> str:
        if isinstance(expr, A.IntLit):
            return INT
        if isinstance(expr, A.BoolLit):
            return BOOL
        if isinstance(expr, A.This):
            if ctx.static:
                self.error(expr, TYPE_ERROR, "'this' in a static context")
                return ERR
            return ctx.cls
        if isinstance(expr, A.Name):
            return self.name(expr, path, ctx)
        if isinstance(expr, A.FieldAccess):
            return self.field_access(expr, path, ctx)
        if isinstance(expr, A.Call):
            return self.call(expr, path, ctx)
        if isinstance(expr, A.New):
            kind = self.kinds.get(expr.cls)
            if kind is None:
                self.error(expr, UNKNOWN_TYPE, f"unknown class {expr.cls}")
                return ERR
            if kind != "class":
                self.error(expr, TYPE_ERROR, f"cannot instantiate interface {expr.cls}")
                return ERR
            return expr.cls
        if isinstance(expr, A.Binary):
            return self.binary(expr, path, ctx)
        if isinstance(expr, A.Unary):
            t = self.expr(expr.operand, path + (0,), ctx)
            want = BOOL if expr.op == "!" else INT
            if t not in (want, ERR):
                self.error(expr, TYPE_ERROR, f"operator {expr.op} needs {want}, not {t}")
                return ERR
            return want
        if isinstance(expr, A.Abs):
            t = self.expr(expr.arg, path + (0,), ctx)
            if t not in (INT, ERR):
                self.error(expr, TYPE_ERROR, f"abs needs int, not {t}")
            return INT
        if isinstance(expr, A.ReflectCall):
            t = self.expr(expr.obj, path + (0,), ctx)
            if t != ERR and t not in self.kinds:
                self.error(expr, TYPE_ERROR, f"reflect_call receiver must be an object, not {t}")
            return INT
        raise TypeError(expr)

    def name(self, expr: A.Name, path: A.NodePath, ctx: _Context) -> str:
        local = ctx.lookup(expr.name)
        if local is not None:
            self.names[path] = (LOCAL, expr.name)
            return local
        ref = self.find_field(ctx.cls, expr.name)
        if ref is not None:
            if ctx.static and not ref.static:
                self.error(expr, TYPE_ERROR, f"instance field {expr.name} in a static context")
                return ERR
            self.names[path] = (FIELD, ref)
            self.field_targets[path] = ref
            return self.fields[ref].type
        if expr.name in self.kinds:
            self.names[path] = (CLASS, expr.name)
            return class_ref_type(expr.name)
        self.error(expr, UNKNOWN_NAME, f"unknown name {expr.name}")
        return ERR

    def field_access(self, expr: A.FieldAccess, path: A.NodePath, ctx: _Context) -> str:
        t = self.expr(expr.obj, path + (0,), ctx)
        if t == ERR:
            return ERR
        if t.startswith("class:"):
            owner, want_static = t[len("class:"):], True
        elif t in self.kinds:
            owner, want_static = t, False
        else:
            self.error(expr, TYPE_ERROR, f"{t} has no fields")
            return ERR
        ref = self.find_field(owner, expr.name)
        if ref is None or ref.static != want_static:
            self.error(expr, UNKNOWN_MEMBER, f"{owner} has no {'static ' if want_static else ''}field {expr.name}")
            return ERR
        self.field_targets[path] = ref
        return self.fields[ref].type

    def call(self, expr: A.Call, path: A.NodePath, ctx: _Context) -> str:
        arg_base = 0
        if expr.obj is None:
            ref = self.find_method(ctx.cls, expr.name)
            if ref is None:
                self.error(expr, UNKNOWN_MEMBER, f"{ctx.cls} has no method {expr.name}")
                ref_ok = False
            elif ctx.static and not ref.static:
                self.error(expr, TYPE_ERROR, f"instance method {expr.name} called from a static context")
                ref_ok = False
            else:
                ref_ok = True
        else:
            arg_base = 1
            t = self.expr(expr.obj, path + (0,), ctx)
            ref, ref_ok = None, False
            if t == ERR:
                pass
            elif t.startswith("class:") or t in self.kinds:
                owner = t[len("class:"):] if t.startswith("class:") else t
                want_static = t.startswith("class:")
                ref = self.find_method(owner, expr.name)
                if ref is None or ref.static != want_static:
                    self.error(expr, UNKNOWN_MEMBER, f"{owner} has no {'static ' if want_static else ''}method {expr.name}")
                else:
                    ref_ok = True
            else:
                self.error(expr, TYPE_ERROR, f"{t} has no methods")
        arg_types = [self.expr(a, path + (arg_base + k,), ctx) for k, a in enumerate(expr.args)]
        if not ref_ok:
            return ERR
        self.call_targets[path] = ref
        if len(arg_types) != len(ref.params):
            self.error(expr, SIGNATURE_MISMATCH, f"{ref} takes {len(ref.params)} arguments, got {len(arg_types)}")
        else:
            for arg, at, pt in zip(expr.args, arg_types, ref.params):
                self.require_assignable(arg, at, pt)
        return self.return_type(ref)

    def binary(self, expr: A.Binary, path: A.NodePath, ctx: _Context) -> str:
        lt = self.expr(expr.left, path + (0,), ctx)
        rt = self.expr(expr.right, path + (1,), ctx)
        op = expr.op
        if op in A.ARITH_OPS or op in ("<", "<=", ">", ">="):
            operand, result = INT, (INT if op in A.ARITH_OPS else BOOL)
        elif op in A.LOGIC_OPS:
            operand, result = BOOL, BOOL
        else:  # == and !=
            if ERR in (lt, rt):
                return BOOL
            same_prim = lt == rt and lt in (INT, BOOL)
            both_refs = lt in self.kinds and rt in self.kinds
            if not (same_prim or both_refs):
                self.error(expr, TYPE_ERROR, f"cannot compare {lt} with {rt}")
                return ERR
            return BOOL
        for t in (lt, rt):
            if t not in (operand, ERR):
                self.error(expr, TYPE_ERROR, f"operator {op} needs {operand} operands, not {t}")
                return ERR
        return result


def check(program: A.Program) -> CheckedProgram:
    """Resolve and type-check a Program; raises FrontendError on any error diagnostic."""
    return Checker(program).run()


def check_or_diagnostics(program: A.Program) -> Union[CheckedProgram, list[Diagnostic]]:
    try:
        return check(program)
    except FrontendError as exc:
        return exc.diagnostics


def method_at(checked: CheckedProgram, path: A.NodePath) -> MethodRef:
    """The method whose body lexically contains the node at path."""
    if len(path) >= 3:
        for ref, mpath in checked.method_paths.items():
            if path[:2] == mpath and isinstance(checked.methods[ref], A.MethodDecl):
                return ref
    raise NoEnclosingMethod(f"no enclosing method for path {list(path)}")
