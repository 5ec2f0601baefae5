import pytest
from hypothesis import given, settings, strategies as st

from impactlab import corpus
from impactlab.frontend import (
    FrontendError,
    MethodRef,
    NoEnclosingMethod,
    SourceUnit,
    check,
    check_or_diagnostics,
    load_units,
    method_at,
    parse,
    parse_or_diagnostics,
    pretty_print,
    walk,
)
from impactlab.frontend import ast as A
from impactlab.frontend.model import (
    DUPLICATE_DEFINITION,
    INHERITANCE_CYCLE,
    SIGNATURE_MISMATCH,
    SYNTAX_ERROR,
    TYPE_ERROR,
    UNKNOWN_MEMBER,
    UNKNOWN_NAME,
    UNKNOWN_TYPE,
    FieldRef,
)
from impactlab.frontend.printer import print_expr

from conftest import compile_source, parse_source


def codes(text):
    out = parse_or_diagnostics([SourceUnit("t.moo", text)])
    if isinstance(out, list):
        return {d.code for d in out}
    res = check_or_diagnostics(out)
    return set() if not isinstance(res, list) else {d.code for d in res}


def test_minimal_unit():
    prog = parse_source("class A { int one() { return 1; } }")
    assert len(prog.decls) == 1
    assert len(prog.decls[0].members) == 1
    assert isinstance(prog.decls[0].members[0], A.MethodDecl)


def test_override_field_shape(override_field):
    classes = [d for d in override_field.program.decls if isinstance(d, A.ClassDecl)]
    assert [c.name for c in classes] == ["A", "B", "C"]
    assert len(override_field.methods) == 4
    assert list(override_field.fields) == [FieldRef("C", "bar", False)]


def test_syntax_error_has_span():
    out = parse_or_diagnostics([SourceUnit("t.moo", "class A { int f( }")])
    assert isinstance(out, list) and len(out) == 1
    d = out[0]
    assert d.code == SYNTAX_ERROR and d.severity == "error"
    assert (d.span.line, d.span.col) == (1, 18)


def test_parse_requires_units():
    with pytest.raises(ValueError):
        parse([])


def test_lex_error_reported():
    out = parse_or_diagnostics([SourceUnit("t.moo", "class A { int f() { return 1 $ 2; } }")])
    assert isinstance(out, list)


def test_override_field_resolution(override_field):
    assert override_field.overrides == {MethodRef("B", "foo", ()): MethodRef("A", "foo", ())}
    targets = {}
    for path, ref in override_field.call_targets.items():
        targets[str(method_at(override_field, path))] = str(ref)
    assert targets == {"C.biz1()": "B.foo()", "C.biz2()": "A.foo()"}


def test_nearest_definition_rule():
    checked = compile_source(
        """
        class A { int foo() { return 1; } }
        class B extends A { int bar() { return 2; } }
        class U { int use() { B x = new B(); return x.foo(); } }
        """
    )
    (target,) = checked.call_targets.values()
    assert target == MethodRef("A", "foo", ())


@pytest.mark.parametrize(
    "source, code",
    [
        ("class D extends D { }", INHERITANCE_CYCLE),
        ("class A extends B { } class B extends A { }", INHERITANCE_CYCLE),
        ("class A { Missing m() { return 1; } }", UNKNOWN_TYPE),
        ("class A { int f() { return this.g(); } }", UNKNOWN_MEMBER),
        ("class A { int f() { return y; } }", UNKNOWN_NAME),
        ("class A { int f() { return 1; } } class B extends A { bool f() { return true; } }", SIGNATURE_MISMATCH),
        ("class A { test int t() { return 1; } }", SIGNATURE_MISMATCH),
        ("class A { int f() { return 1; } int f() { return 2; } }", DUPLICATE_DEFINITION),
        ("class A { } class A { }", DUPLICATE_DEFINITION),
        ("class A { int f() { return true; } }", TYPE_ERROR),
        ("class A { int f(int a, int b) { return a && b; } }", TYPE_ERROR),
    ],
)
def test_diagnostic_codes(source, code):
    assert code in codes(source)


def test_checked_program_never_built_with_errors():
    with pytest.raises(FrontendError):
        check(parse_source("class A { int f() { return true; } }"))


def test_method_at_single_method():
    checked = compile_source("class A { int one() { return 1; } }")
    ret = next(p for p, n in walk(checked.program) if isinstance(n, A.Return))
    assert method_at(checked, ret) == MethodRef("A", "one", ())


def test_method_at_field_write(override_field):
    assign = next(p for p, n in walk(override_field.program) if isinstance(n, A.Assign))
    assert str(method_at(override_field, assign)) == "C.biz2()"
    assert str(method_at(override_field, assign + (0,))) == "C.biz2()"


def test_method_at_field_initializer():
    checked = compile_source("class A { static int x = 1 + 2; int f() { return x; } }")
    init = next(p for p, n in walk(checked.program) if isinstance(n, A.Binary))
    with pytest.raises(NoEnclosingMethod):
        method_at(checked, init)
    with pytest.raises(NoEnclosingMethod):
        method_at(checked, (0,))


def test_every_expression_typed(corpus_programs):
    for checked in corpus_programs.values():
        exprs = {p for p, n in walk(checked.program) if isinstance(n, A.Expr)}
        assert exprs == set(checked.static_types)


@pytest.mark.parametrize("name", corpus.project_names())
def test_corpus_round_trip(name):
    units = load_units(corpus.project(name).source_dir)
    prog = parse(units)
    again = parse([SourceUnit("printed.moo", pretty_print(prog))])
    assert again == prog


def test_check_deterministic():
    units = load_units(corpus.project("zoo").source_dir)
    assert check(parse(units)) == check(parse(units))


# -- random expressions -------------------------------------------------------

INT_LEAVES = st.one_of(st.integers(0, 50).map(A.IntLit), st.sampled_from([A.Name("a"), A.Name("b")]))
BOOL_LEAVES = st.one_of(st.booleans().map(A.BoolLit), st.sampled_from([A.Name("p"), A.Name("q")]))


def int_exprs():
    return st.recursive(
        INT_LEAVES,
        lambda sub: st.one_of(
            st.builds(A.Binary, st.sampled_from(A.ARITH_OPS), sub, sub),
            st.builds(A.Unary, st.just("-"), sub),
            st.builds(A.Abs, sub),
        ),
        max_leaves=12,
    )


def bool_exprs():
    ints = int_exprs()
    return st.recursive(
        st.one_of(BOOL_LEAVES, st.builds(A.Binary, st.sampled_from(A.REL_OPS), ints, ints)),
        lambda sub: st.one_of(
            st.builds(A.Binary, st.sampled_from(A.LOGIC_OPS), sub, sub),
            st.builds(A.Unary, st.just("!"), sub),
            st.builds(A.Binary, st.sampled_from(["==", "!="]), sub, sub),
        ),
        max_leaves=10,
    )


def wrap(expr, ret):
    return (
        "class K { " + ret + " f(int a, int b, bool p, bool q) { return "
        + print_expr(expr) + "; } }"
    )


@settings(max_examples=150, deadline=None)
@given(st.one_of(int_exprs().map(lambda e: (e, "int")), bool_exprs().map(lambda e: (e, "bool"))))
def test_printed_expressions_reparse(pair):
    expr, ret = pair
    prog = parse_source(wrap(expr, ret))
    ret_stmt = prog.decls[0].members[0].body.stmts[0]
    assert ret_stmt.value == expr
    checked = check(prog)
    assert checked.static_types[(0, 0, 0, 0, 0)] == ret
