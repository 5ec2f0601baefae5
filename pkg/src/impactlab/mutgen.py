"""Mutation sites, mutants, and their materialisation.

Five operators are supported:

ABS  wrap an int literal, variable/field read or call in abs()
AOR  swap an arithmetic operator, or keep only the left/right operand
LCR  swap && and ||, replace by true/false, or keep one operand
ROR  swap a relational operator, or replace by true/false
UOI  negate/increment/decrement an int expression, complement a bool one

Sites inside test methods and field initialisers are never mutated: the
tests are the oracle.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import random
from dataclasses import dataclass
from typing import Optional

from .frontend import ast as A
from .frontend.checker import check_or_diagnostics
from .frontend.model import CheckedProgram, MethodRef
from .frontend.printer import print_expr
from .interpreter import DEFAULT_STEP_BUDGET, SuiteResult, run_suite


class MutationOperator(str, enum.Enum):
    ABS = "ABS"
    AOR = "AOR"
    LCR = "LCR"
    ROR = "ROR"
    UOI = "UOI"

    @classmethod
    def parse(cls, text: str) -> "MutationOperator":
        try:
            return cls(text.upper())
        except ValueError:
            raise ValueError(f"unknown mutation operator {text!r}") from None


NUMERIC_EXPR = "numeric-expr"
ARITH_BINARY = "arith-binary"
LOGICAL_BINARY = "logical-binary"
RELATIONAL_BINARY = "relational-binary"
BOOL_EXPR = "bool-expr"

_SITE_KIND = {
    MutationOperator.AOR: ARITH_BINARY,
    MutationOperator.LCR: LOGICAL_BINARY,
    MutationOperator.ROR: RELATIONAL_BINARY,
}
_FAMILY = {ARITH_BINARY: A.ARITH_OPS, LOGICAL_BINARY: A.LOGIC_OPS, RELATIONAL_BINARY: A.REL_OPS}

# non-operator replacement descriptors
LEFT, RIGHT = "L", "R"
CONST_TRUE, CONST_FALSE = "true", "false"
ABS_WRAP = "abs"
NEGATE, INCREMENT, DECREMENT, COMPLEMENT = "neg", "inc", "dec", "not"

BINARY_SYMBOLS = set(A.ARITH_OPS) | set(A.REL_OPS) | set(A.LOGIC_OPS)


@dataclass(frozen=True)
class MutationSite:
    path: A.NodePath
    kind: str
    enclosing: MethodRef
    original: str = dataclasses.field(default="", compare=False)


@dataclass(frozen=True)
class Mutant:
    id: str
    operator: MutationOperator
    site: MutationSite
    replacement: str


class StaleMutantError(ValueError):
    """The mutant's NodePath no longer addresses its original site."""


def _abs_candidate(node: A.Expr, checked: CheckedProgram, path: A.NodePath) -> bool:
    if isinstance(node, (A.IntLit, A.FieldAccess, A.Call, A.Abs, A.ReflectCall)):
        return True
    if isinstance(node, A.Name):
        return checked.names.get(path, ("",))[0] != "class"
    return False


def _is_site(op: MutationOperator, node: A.Node, path: A.NodePath, checked: CheckedProgram) -> Optional[str]:
    if not isinstance(node, A.Expr):
        return None
    stype = checked.static_types.get(path)
    if op is MutationOperator.ABS:
        if stype == "int" and _abs_candidate(node, checked, path):
            return NUMERIC_EXPR
        return None
    if op is MutationOperator.UOI:
        if stype == "int":
            return NUMERIC_EXPR
        if stype == "bool":
            return BOOL_EXPR
        return None
    kind = _SITE_KIND[op]
    if isinstance(node, A.Binary) and node.op in _FAMILY[kind]:
        return kind
    return None


def sites(checked: CheckedProgram, op: MutationOperator) -> list[MutationSite]:
    """All sites of op in non-test method bodies, in document order."""
    op = MutationOperator(op)
    out = []
    for ref, mpath in sorted(checked.method_paths.items(), key=lambda kv: kv[1]):
        decl = checked.methods[ref]
        if not isinstance(decl, A.MethodDecl) or decl.test:
            continue
        targets: set[A.NodePath] = set()
        for path, node in A.walk(decl.body, mpath + (0,)):
            if isinstance(node, A.Assign):
                targets.add(path + (0,))
            if path in targets:
                continue
            kind = _is_site(op, node, path, checked)
            if kind is not None:
                out.append(MutationSite(path, kind, ref, print_expr(node)))
    return out


def replacements(op: MutationOperator, site: MutationSite, original_op: Optional[str] = None) -> list[str]:
    op = MutationOperator(op)
    if op is MutationOperator.ABS:
        return [ABS_WRAP]
    if op is MutationOperator.UOI:
        return [COMPLEMENT] if site.kind == BOOL_EXPR else [NEGATE, INCREMENT, DECREMENT]
    others = [s for s in _FAMILY[site.kind] if s != original_op]
    if op is MutationOperator.AOR:
        return others + [LEFT, RIGHT]
    if op is MutationOperator.LCR:
        return others + [CONST_TRUE, CONST_FALSE, LEFT, RIGHT]
    return others + [CONST_TRUE, CONST_FALSE]


def site_hash(path: A.NodePath) -> str:
    return hashlib.sha1(".".join(map(str, path)).encode()).hexdigest()[:8]


def mutants_at(checked: CheckedProgram, site: MutationSite, op: MutationOperator) -> list[Mutant]:
    op = MutationOperator(op)
    node = A.node_at(checked.program, site.path)
    original_op = node.op if isinstance(node, A.Binary) else None
    h = site_hash(site.path)
    return [
        Mutant(f"{op.value}-{h}-{k}", op, site, rep)
        for k, rep in enumerate(replacements(op, site, original_op))
    ]


def all_mutants(checked: CheckedProgram, op: MutationOperator) -> list[Mutant]:
    return [m for s in sites(checked, op) for m in mutants_at(checked, s, op)]


def apply(program: A.Program, mutant: Mutant) -> A.Program:
    """Return program with the mutant's site replaced; every other subtree is shared."""
    try:
        node = A.node_at(program, mutant.site.path)
    except A.StalePathError as exc:
        raise StaleMutantError(str(exc)) from None
    rep = mutant.replacement
    if rep in BINARY_SYMBOLS:
        if not isinstance(node, A.Binary):
            raise StaleMutantError(f"{mutant.id}: site is no longer a binary expression")
        return A.replace_at(program, mutant.site.path, dataclasses.replace(node, op=rep))
    if not isinstance(node, A.Expr) or print_expr(node) != mutant.site.original:
        raise StaleMutantError(f"{mutant.id}: site no longer holds {mutant.site.original!r}")
    span = node.span
    if rep in (LEFT, RIGHT):
        if not isinstance(node, A.Binary):
            raise StaleMutantError(f"{mutant.id}: operand replacement needs a binary expression")
        new = node.left if rep == LEFT else node.right
    elif rep in (CONST_TRUE, CONST_FALSE):
        new = A.BoolLit(rep == CONST_TRUE, span=span)
    elif rep == ABS_WRAP:
        new = A.Abs(node, span=span)
    elif rep == NEGATE:
        new = A.Unary("-", node, span=span)
    elif rep == INCREMENT:
        new = A.Binary("+", node, A.IntLit(1, span=span), span=span)
    elif rep == DECREMENT:
        new = A.Binary("-", node, A.IntLit(1, span=span), span=span)
    elif rep == COMPLEMENT:
        new = A.Unary("!", node, span=span)
    else:
        raise ValueError(f"unknown replacement {rep!r}")
    return A.replace_at(program, mutant.site.path, new)


# -- viability --------------------------------------------------------------

NONCOMPILING = "noncompiling"
ALIVE = "alive"
KILLED = "killed"


@dataclass(frozen=True)
class Viability:
    status: str
    # tests failing on the mutant but not on the original (the AIS)
    failing: frozenset[MethodRef] = frozenset()
    suite: Optional[SuiteResult] = dataclasses.field(default=None, compare=False, repr=False)

    @property
    def compiles(self) -> bool:
        return self.status != NONCOMPILING

    @property
    def killed(self) -> bool:
        return self.status == KILLED


def baseline_suite(checked: CheckedProgram, step_budget: int = DEFAULT_STEP_BUDGET) -> SuiteResult:
    return run_suite(checked, step_budget, record_coverage=True)


def viability(
    checked_original: CheckedProgram,
    mutant: Mutant,
    step_budget: int = DEFAULT_STEP_BUDGET,
    baseline: Optional[SuiteResult] = None,
    prune: bool = True,
) -> Viability:
    """Compile and run one mutant against the original's test suite.

    With prune=True, tests that never entered the mutated method on the
    original program are not re-run: execution is deterministic and the
    mutation is confined to that method's body, so their outcomes cannot
    change.
    """
    mutated = apply(checked_original.program, mutant)
    checked = check_or_diagnostics(mutated)
    if isinstance(checked, list):
        return Viability(NONCOMPILING)
    if baseline is None:
        baseline = baseline_suite(checked_original, step_budget)
    if prune and baseline.coverage is not None:
        method = mutant.site.enclosing
        selected = [t for t in checked.tests if method in baseline.coverage[t]]
        result = run_suite(checked, step_budget, tests=selected)
        outcomes = dict(baseline.outcomes)
        outcomes.update(result.outcomes)
        suite = SuiteResult(outcomes, result.wall_time)
    else:
        suite = run_suite(checked, step_budget)
    failing = frozenset(suite.failing() - baseline.failing())
    return Viability(KILLED if failing else ALIVE, failing, suite)


def sample(mutants: list[Mutant], cap: int, seed: int) -> list[Mutant]:
    """Uniform subset of at most cap mutants, deterministic in seed, in original order."""
    if cap <= 0:
        raise ValueError("cap must be positive")
    if len(mutants) <= cap:
        return list(mutants)
    chosen = sorted(random.Random(seed).sample(range(len(mutants)), cap))
    return [mutants[i] for i in chosen]


def manifest_json(project: str, operator: MutationOperator, seed: int, entries: list[tuple[Mutant, str]]) -> str:
    doc = {
        "project": project,
        "operator": MutationOperator(operator).value,
        "seed": seed,
        "mutants": [
            {
                "id": m.id,
                "path": list(m.site.path),
                "replacement": m.replacement,
                "enclosing": str(m.site.enclosing),
                "viability": status,
            }
            for m, status in entries
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
