"""Deterministic evaluator and test runner for checked MiniOO programs.

Method bodies are compiled lazily into nested Python closures.  Every
statement and expression evaluation consumes one step; a test that reaches
its step budget stops with status TIMEOUT, which stands in for a wall-clock
timeout and keeps hang detection reproducible.
"""

from __future__ import annotations

import enum
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .frontend import ast as A
from .frontend.model import CLASS, FIELD, LOCAL, CheckedProgram, FieldRef, MethodRef

DEFAULT_STEP_BUDGET = 1_000_000
MAX_CALL_DEPTH = 150

_INT_MIN = -(1 << 31)
_MASK = (1 << 32) - 1


def wrap32(v: int) -> int:
    return ((v - _INT_MIN) & _MASK) + _INT_MIN


def java_div(a: int, b: int) -> int:
    if b == 0:
        raise MiniRuntimeError("division by zero")
    q = abs(a) // abs(b)
    return wrap32(q if (a >= 0) == (b >= 0) else -q)


def java_mod(a: int, b: int) -> int:
    if b == 0:
        raise MiniRuntimeError("modulo by zero")
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


class Status(str, enum.Enum):
    PASS = "pass"
    ASSERT_FAIL = "assert_fail"
    RUNTIME_ERROR = "runtime_error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # not a pytest class

    test: MethodRef
    status: Status
    steps_used: int
    detail: str = field(default="", compare=False)

    @property
    def failing(self) -> bool:
        return self.status is not Status.PASS


@dataclass
class SuiteResult:
    outcomes: dict[MethodRef, TestOutcome]
    wall_time: float
    # methods entered by each test; only filled when coverage was requested
    coverage: Optional[dict[MethodRef, frozenset[MethodRef]]] = None

    def failing(self) -> set[MethodRef]:
        return {t for t, o in self.outcomes.items() if o.failing}


class MiniRuntimeError(Exception):
    pass


class AssertFailure(Exception):
    pass


class StepBudgetExhausted(Exception):
    pass


class Obj:
    __slots__ = ("cls", "fields")

    def __init__(self, cls: str, fields: dict):
        self.cls = cls
        self.fields = fields

    def __repr__(self) -> str:
        return f"<{self.cls} object>"


def default_value(tname: str):
    if tname == "int":
        return 0
    if tname == "bool":
        return False
    return None


Closure = Callable[[Optional[Obj], dict], object]


class Runtime:
    """Executes tests of one CheckedProgram under a fixed step budget."""

    def __init__(self, checked: CheckedProgram, step_budget: int = DEFAULT_STEP_BUDGET):
        if step_budget <= 0:
            raise ValueError("step budget must be positive")
        self.checked = checked
        self.budget = step_budget
        self.counter = [0]
        self.depth = 0
        self.statics: dict[FieldRef, object] = {}
        self.coverage: Optional[set[MethodRef]] = None
        self._bodies: dict[MethodRef, Callable] = {}
        self._dispatch: dict[tuple[str, str], Optional[MethodRef]] = {}
        self._field_inits: dict[FieldRef, Optional[Closure]] = {}
        self._instance_fields: dict[str, list[FieldRef]] = {}
        self._static_fields = [ref for ref in checked.fields if ref.static]
        if sys.getrecursionlimit() < 20000:
            sys.setrecursionlimit(20000)

    # -- steps --

    def _timeout(self):
        self.counter[0] = self.budget
        raise StepBudgetExhausted()

    # -- objects and dispatch --

    def lookup(self, cls: str, name: str) -> Optional[MethodRef]:
        key = (cls, name)
        if key not in self._dispatch:
            found = None
            for c in self.checked.ancestors(cls):
                for ref in self.checked.methods:
                    if ref.owner == c and ref.name == name:
                        found = ref
                        break
                if found:
                    break
            self._dispatch[key] = found
        return self._dispatch[key]

    def field_init(self, ref: FieldRef) -> Optional[Closure]:
        if ref not in self._field_inits:
            decl = self.checked.fields[ref]
            path = self.checked.field_paths[ref]
            self._field_inits[ref] = None if decl.init is None else self.compile_expr(decl.init, path + (0,))
        return self._field_inits[ref]

    def instantiate(self, cls: str) -> Obj:
        refs = self._instance_fields.get(cls)
        if refs is None:
            chain = list(reversed(self.checked.ancestors(cls)))
            refs = [r for c in chain for r in self.checked.fields if r.owner == c and not r.static]
            self._instance_fields[cls] = refs
        obj = Obj(cls, {r: default_value(self.checked.fields[r].type) for r in refs})
        for r in refs:
            init = self.field_init(r)
            if init is not None:
                obj.fields[r] = init(obj, {})
        return obj

    def reset_statics(self) -> None:
        self.statics = {r: default_value(self.checked.fields[r].type) for r in self._static_fields}
        for r in self._static_fields:
            init = self.field_init(r)
            if init is not None:
                self.statics[r] = init(None, {})

    def invoke(self, ref: MethodRef, this: Optional[Obj], args: list):
        body = self._bodies.get(ref)
        if body is None:
            body = self._bodies[ref] = self.compile_method(ref)
        if self.coverage is not None:
            self.coverage.add(ref)
        if self.depth >= MAX_CALL_DEPTH:
            raise MiniRuntimeError("call stack overflow")
        self.depth += 1
        try:
            return body(this, args)
        finally:
            self.depth -= 1

    # -- running tests --

    def run_test(self, test: MethodRef) -> TestOutcome:
        self.counter[0] = 0
        self.depth = 0
        detail = ""
        try:
            self.reset_statics()
            this = None if test.static else self.instantiate(test.owner)
            self.invoke(test, this, [])
            status = Status.PASS
        except AssertFailure as exc:
            status, detail = Status.ASSERT_FAIL, str(exc)
        except MiniRuntimeError as exc:
            status, detail = Status.RUNTIME_ERROR, str(exc)
        except StepBudgetExhausted:
            status = Status.TIMEOUT
        except RecursionError:
            status, detail = Status.RUNTIME_ERROR, "host recursion limit"
        return TestOutcome(test, status, self.counter[0], detail)

    # -- compilation --

    def compile_method(self, ref: MethodRef) -> Callable:
        decl = self.checked.methods[ref]
        if not isinstance(decl, A.MethodDecl):
            raise MiniRuntimeError(f"{ref} has no body")
        names = [n for _, n in decl.params]
        body = self.compile_stmt(decl.body, self.checked.method_paths[ref] + (0,))
        void = decl.ret == "void"

        def run(this, args):
            env = dict(zip(names, args))
            result = body(this, env)
            if result is None:
                if not void:
                    raise MiniRuntimeError(f"{ref} ended without returning a value")
                return None
            return result[0]

        return run

    def compile_stmt(self, stmt: A.Stmt, path: A.NodePath) -> Closure:
        counter, budget, timeout = self.counter, self.budget, self._timeout

        if isinstance(stmt, A.Block):
            fns = tuple(self.compile_stmt(s, path + (k,)) for k, s in enumerate(stmt.stmts))

            def block(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                for f in fns:
                    r = f(this, env)
                    if r is not None:
                        return r
                return None

            return block

        if isinstance(stmt, A.VarDecl):
            name = stmt.name
            init = self.compile_expr(stmt.init, path + (0,)) if stmt.init is not None else None
            dflt = default_value(stmt.type)

            def var_decl(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                env[name] = dflt if init is None else init(this, env)

            return var_decl

        if isinstance(stmt, A.Assign):
            value = self.compile_expr(stmt.value, path + (1,))
            return self.compile_store(stmt.target, path + (0,), value)

        if isinstance(stmt, A.If):
            cond = self.compile_expr(stmt.cond, path + (0,))
            then = self.compile_stmt(stmt.then, path + (1,))
            orelse = self.compile_stmt(stmt.orelse, path + (2,)) if stmt.orelse is not None else None

            def if_stmt(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                if cond(this, env):
                    return then(this, env)
                if orelse is not None:
                    return orelse(this, env)
                return None

            return if_stmt

        if isinstance(stmt, A.While):
            cond = self.compile_expr(stmt.cond, path + (0,))
            body = self.compile_stmt(stmt.body, path + (1,))

            def while_stmt(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                while cond(this, env):
                    r = body(this, env)
                    if r is not None:
                        return r
                return None

            return while_stmt

        if isinstance(stmt, A.Return):
            value = self.compile_expr(stmt.value, path + (0,)) if stmt.value is not None else None

            def return_stmt(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                return (None if value is None else value(this, env),)

            return return_stmt

        if isinstance(stmt, A.ExprStmt):
            expr = self.compile_expr(stmt.expr, path + (0,))

            def expr_stmt(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                expr(this, env)

            return expr_stmt

        if isinstance(stmt, A.Assert):
            cond = self.compile_expr(stmt.cond, path + (0,))
            where = str(stmt.span)

            def assert_stmt(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                if not cond(this, env):
                    raise AssertFailure(f"assertion failed at {where}")

            return assert_stmt

        raise TypeError(stmt)

    def compile_store(self, target: A.Expr, path: A.NodePath, value: Closure) -> Closure:
        counter, budget, timeout = self.counter, self.budget, self._timeout
        statics = self  # statics dict is replaced per test; read it through the runtime

        if isinstance(target, A.Name):
            kind, what = self.checked.names[path]
            if kind == LOCAL:

                def store_local(this, env):
                    n = counter[0] = counter[0] + 1
                    if n >= budget:
                        timeout()
                    env[what] = value(this, env)

                return store_local
            if what.static:

                def store_static(this, env):
                    n = counter[0] = counter[0] + 1
                    if n >= budget:
                        timeout()
                    statics.statics[what] = value(this, env)

                return store_static

            def store_this_field(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                this.fields[what] = value(this, env)

            return store_this_field

        ref = self.checked.field_targets[path]
        if ref.static:

            def store_static_qualified(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                statics.statics[ref] = value(this, env)

            return store_static_qualified
        obj_fn = self.compile_expr(target.obj, path + (0,))

        def store_field(this, env):
            n = counter[0] = counter[0] + 1
            if n >= budget:
                timeout()
            obj = obj_fn(this, env)
            v = value(this, env)
            if obj is None:
                raise MiniRuntimeError(f"null receiver writing {ref}")
            obj.fields[ref] = v

        return store_field

    def compile_expr(self, expr: A.Expr, path: A.NodePath) -> Closure:
        counter, budget, timeout = self.counter, self.budget, self._timeout
        rt = self

        if isinstance(expr, (A.IntLit, A.BoolLit)):
            const = expr.value

            def literal(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                return const

            return literal

        if isinstance(expr, A.This):

            def this_expr(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                return this

            return this_expr

        if isinstance(expr, A.Name):
            kind, what = self.checked.names[path]
            if kind == LOCAL:

                def load_local(this, env):
                    n = counter[0] = counter[0] + 1
                    if n >= budget:
                        timeout()
                    return env[what]

                return load_local
            if kind == FIELD and what.static:

                def load_static(this, env):
                    n = counter[0] = counter[0] + 1
                    if n >= budget:
                        timeout()
                    return rt.statics[what]

                return load_static
            if kind == FIELD:

                def load_this_field(this, env):
                    n = counter[0] = counter[0] + 1
                    if n >= budget:
                        timeout()
                    return this.fields[what]

                return load_this_field
            assert kind == CLASS
            return lambda this, env: None

        if isinstance(expr, A.FieldAccess):
            ref = self.checked.field_targets[path]
            if ref.static:

                def load_static_qualified(this, env):
                    n = counter[0] = counter[0] + 1
                    if n >= budget:
                        timeout()
                    return rt.statics[ref]

                return load_static_qualified
            obj_fn = self.compile_expr(expr.obj, path + (0,))

            def load_field(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                obj = obj_fn(this, env)
                if obj is None:
                    raise MiniRuntimeError(f"null receiver reading {ref}")
                return obj.fields[ref]

            return load_field

        if isinstance(expr, A.Call):
            return self.compile_call(expr, path)

        if isinstance(expr, A.New):
            cls = expr.cls

            def new(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                return rt.instantiate(cls)

            return new

        if isinstance(expr, A.Binary):
            return self.compile_binary(expr, path)

        if isinstance(expr, A.Unary):
            operand = self.compile_expr(expr.operand, path + (0,))
            if expr.op == "!":

                def not_expr(this, env):
                    n = counter[0] = counter[0] + 1
                    if n >= budget:
                        timeout()
                    return not operand(this, env)

                return not_expr

            def neg_expr(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                return wrap32(-operand(this, env))

            return neg_expr

        if isinstance(expr, A.Abs):
            arg = self.compile_expr(expr.arg, path + (0,))

            def abs_expr(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                return wrap32(abs(arg(this, env)))

            return abs_expr

        if isinstance(expr, A.ReflectCall):
            obj_fn = self.compile_expr(expr.obj, path + (0,))
            name = expr.name

            def reflect(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                obj = obj_fn(this, env)
                if obj is None:
                    raise MiniRuntimeError("null receiver in reflect_call")
                target = rt.lookup(obj.cls, name)
                if target is None:
                    raise MiniRuntimeError(f"reflect_call: {obj.cls} has no method {name}")
                if target.params or rt.checked.methods[target].ret != "int":
                    raise MiniRuntimeError(f"reflect_call: {target} is not a no-arg int method")
                return rt.invoke(target, None if target.static else obj, [])

            return reflect

        raise TypeError(expr)

    def compile_call(self, expr: A.Call, path: A.NodePath) -> Closure:
        counter, budget, timeout = self.counter, self.budget, self._timeout
        rt = self
        target = self.checked.call_targets[path]
        base = 0 if expr.obj is None else 1
        arg_fns = tuple(self.compile_expr(a, path + (base + k,)) for k, a in enumerate(expr.args))

        if target.static:

            def static_call(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                return rt.invoke(target, None, [f(this, env) for f in arg_fns])

            return static_call

        if expr.obj is None:
            recv_fn = None
        else:
            recv_fn = self.compile_expr(expr.obj, path + (0,))
        name = target.name

        def virtual_call(this, env):
            n = counter[0] = counter[0] + 1
            if n >= budget:
                timeout()
            obj = this if recv_fn is None else recv_fn(this, env)
            args = [f(this, env) for f in arg_fns]
            if obj is None:
                raise MiniRuntimeError(f"null receiver calling {name}")
            return rt.invoke(rt.lookup(obj.cls, name), obj, args)

        return virtual_call

    def compile_binary(self, expr: A.Binary, path: A.NodePath) -> Closure:
        counter, budget, timeout = self.counter, self.budget, self._timeout
        left = self.compile_expr(expr.left, path + (0,))
        right = self.compile_expr(expr.right, path + (1,))
        op = expr.op

        if op == "&&":

            def and_expr(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                return left(this, env) and right(this, env)

            return and_expr
        if op == "||":

            def or_expr(this, env):
                n = counter[0] = counter[0] + 1
                if n >= budget:
                    timeout()
                return left(this, env) or right(this, env)

            return or_expr

        fn = _BINARY_FUNCS[op]

        def binary(this, env):
            n = counter[0] = counter[0] + 1
            if n >= budget:
                timeout()
            return fn(left(this, env), right(this, env))

        return binary


_BINARY_FUNCS = {
    "+": lambda a, b: wrap32(a + b),
    "-": lambda a, b: wrap32(a - b),
    "*": lambda a, b: wrap32(a * b),
    "/": java_div,
    "%": java_mod,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a is b if isinstance(a, Obj) or isinstance(b, Obj) else a == b,
    "!=": lambda a, b: not (a is b if isinstance(a, Obj) or isinstance(b, Obj) else a == b),
}


def run_test(checked: CheckedProgram, test: MethodRef, step_budget: int = DEFAULT_STEP_BUDGET) -> TestOutcome:
    if test not in checked.tests:
        raise ValueError(f"{test} is not a test of this program")
    return Runtime(checked, step_budget).run_test(test)


def run_suite(
    checked: CheckedProgram,
    step_budget: int = DEFAULT_STEP_BUDGET,
    *,
    tests: Optional[list[MethodRef]] = None,
    record_coverage: bool = False,
) -> SuiteResult:
    """Run every test (or the given subset) on fresh program state."""
    selected = checked.tests if tests is None else tests
    if not checked.tests:
        raise ValueError("program has no tests")
    rt = Runtime(checked, step_budget)
    outcomes: dict[MethodRef, TestOutcome] = {}
    coverage: Optional[dict[MethodRef, frozenset[MethodRef]]] = {} if record_coverage else None
    start = time.perf_counter()
    for test in selected:
        if coverage is not None:
            rt.coverage = set()
        outcomes[test] = rt.run_test(test)
        if coverage is not None:
            coverage[test] = frozenset(rt.coverage)
    return SuiteResult(outcomes, time.perf_counter() - start, coverage)
