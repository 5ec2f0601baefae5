"""End-to-end evaluation: mutate, run, predict, score, report.

Mutant execution is by far the expensive part and does not depend on the
graph variant, so it runs once per (project, operator) and its results are
reused for every variant.
"""

from __future__ import annotations

import csv
import io
import statistics
import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import impact
from .callgraph import FORMAL, CallGraph, GraphVariant, build, dot_quote, method_node, node_for
from .frontend import FrontendError, load_units, parse_and_check
from .frontend.model import CheckedProgram, MethodRef, SourceUnit
from .impact import ImpactRecord, MutantCategory
from .interpreter import DEFAULT_STEP_BUDGET, SuiteResult, run_suite
from .mutgen import KILLED, Mutant, MutationOperator, all_mutants, baseline_suite, sample, viability

DEFAULT_CAP = 3000
DEFAULT_SEED = 0

# mutant id -> record, in mutant order
EvaluationLedger = dict[str, ImpactRecord]


class EvaluationError(Exception):
    """The project cannot be evaluated (does not compile, red baseline, no tests)."""


@dataclass(frozen=True)
class EvaluationReport:
    project: str
    operator: str
    variant: str
    k: int
    n: int
    p_same: Fraction
    p_complete: Fraction
    mean_p: Fraction
    mean_r: Fraction
    mean_f: Fraction
    s: int
    o: int
    u: int
    d: int


@dataclass(frozen=True)
class TimingReport:
    project: str
    variant: str
    t_test: float  # seconds
    t_build: float  # seconds
    t_pred_mean: float  # seconds


@dataclass(frozen=True)
class MutantRun:
    """Outcome of one mutant, independent of any graph."""

    mutant: Mutant
    status: str
    ais: frozenset[MethodRef]


# -- project loading ------------------------------------------------------------


def load_project(project_dir) -> tuple[str, list[SourceUnit], CheckedProgram]:
    path = Path(project_dir)
    units = load_units(path)
    if not units:
        raise EvaluationError(f"{project_dir}: no .moo files")
    try:
        checked = parse_and_check(units)
    except FrontendError as exc:
        raise EvaluationError(f"{project_dir}: {exc}") from None
    name = path.resolve().name
    if name == "src":
        name = path.resolve().parent.name
    return name, units, checked


def green_baseline(checked: CheckedProgram, step_budget: int) -> SuiteResult:
    if not checked.tests:
        raise EvaluationError("project has no tests")
    baseline = baseline_suite(checked, step_budget)
    failing = sorted(str(t) for t in baseline.failing())
    if failing:
        raise EvaluationError(f"baseline suite is not green: {', '.join(failing)}")
    return baseline


# -- mutant execution -------------------------------------------------------------

_worker_state: dict = {}


def _init_worker(units: list[SourceUnit], op: str, cap: int, seed: int, step_budget: int) -> None:
    checked = parse_and_check(units)
    _worker_state.update(
        checked=checked,
        mutants=sample(all_mutants(checked, MutationOperator(op)), cap, seed),
        baseline=baseline_suite(checked, step_budget),
        step_budget=step_budget,
    )


def _run_one(index: int) -> tuple[str, frozenset[MethodRef]]:
    st = _worker_state
    v = viability(st["checked"], st["mutants"][index], st["step_budget"], st["baseline"])
    return v.status, v.failing


def run_mutants(
    units: list[SourceUnit],
    checked: CheckedProgram,
    op: MutationOperator,
    cap: int = DEFAULT_CAP,
    seed: int = DEFAULT_SEED,
    step_budget: int = DEFAULT_STEP_BUDGET,
    workers: int = 1,
    baseline: Optional[SuiteResult] = None,
) -> list[MutantRun]:
    """Sample the operator's mutants and run each against the test suite."""
    op = MutationOperator(op)
    mutants = sample(all_mutants(checked, op), cap, seed)
    if baseline is None:
        baseline = green_baseline(checked, step_budget)
    if workers <= 1 or len(mutants) < 2:
        results = []
        for m in mutants:
            v = viability(checked, m, step_budget, baseline)
            results.append((v.status, v.failing))
    else:
        chunk = max(1, len(mutants) // (workers * 8))
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(units, op.value, cap, seed, step_budget)
        ) as pool:
            results = list(pool.map(_run_one, range(len(mutants)), chunksize=chunk))
    return [MutantRun(m, status, ais) for m, (status, ais) in zip(mutants, results)]


# -- prediction and aggregation ----------------------------------------------------


def ledger_for(runs: Sequence[MutantRun], graph: CallGraph, checked: CheckedProgram) -> EvaluationLedger:
    """Records for the killed mutants, keyed by mutant id."""
    declared = checked.methods.keys()
    ledger: EvaluationLedger = {}
    for run in runs:
        if run.status != KILLED:
            continue
        method = run.mutant.site.enclosing
        cis, unbounded = impact.predict(graph, method, checked.tests, declared)
        if run.mutant.id in ledger:
            raise ValueError(f"duplicate mutant id {run.mutant.id}")
        ledger[run.mutant.id] = impact.make_record(run.mutant.id, method, run.ais, cis, unbounded)
    return ledger


def aggregate(
    ledger: EvaluationLedger,
    project: str = "",
    operator: str = "",
    variant: str = "",
    exclude_unbounded: bool = False,
) -> EvaluationReport:
    """Partition sizes and mean scores over the killed mutants.

    By default unbounded mutants stay in K with zero scores; with
    exclude_unbounded they are dropped from K but still counted in n.
    """
    if not ledger:
        raise ValueError("cannot aggregate an empty ledger")
    records = list(ledger.values())
    n = sum(r.unbounded for r in records)
    if exclude_unbounded:
        records = [r for r in records if not r.unbounded]
    return _report(records, n, project, operator, variant)


def _report(records: list[ImpactRecord], n: int, project: str, operator: str, variant: str) -> EvaluationReport:
    k = len(records)
    counts = {c: 0 for c in MutantCategory}
    sum_p = sum_r = sum_f = Fraction(0)
    for r in records:
        counts[impact.classify(r)] += 1
        m = impact.metrics(r)
        sum_p += m.precision
        sum_r += m.recall
        sum_f += m.f_score

    def ratio(x) -> Fraction:
        return Fraction(x) / k if k else Fraction(0)

    s, o, u, d = (counts[c] for c in MutantCategory)
    return EvaluationReport(
        project, operator, variant, k, n,
        ratio(s), ratio(s + o), ratio(sum_p), ratio(sum_r), ratio(sum_f),
        s, o, u, d,
    )


def report_for(
    ledger: EvaluationLedger, project: str, operator: str, variant: str, exclude_unbounded: bool = False
) -> EvaluationReport:
    """Like aggregate, but an empty ledger (nothing killed) yields an all-zero report."""
    if not ledger:
        return _report([], 0, project, operator, variant)
    return aggregate(ledger, project, operator, variant, exclude_unbounded)


@dataclass
class Evaluation:
    project: str
    operator: str
    variant: str
    ledger: EvaluationLedger
    report: EvaluationReport
    runs: list[MutantRun]


def evaluate_many(
    project_dir,
    variants: Sequence[GraphVariant],
    operators: Sequence[MutationOperator],
    cap: int = DEFAULT_CAP,
    seed: int = DEFAULT_SEED,
    step_budget: int = DEFAULT_STEP_BUDGET,
    *,
    workers: int = 1,
    exclude_unbounded: bool = False,
    field_orientation: str = FORMAL,
) -> list[Evaluation]:
    """One Evaluation per (operator, variant), operators in the outer loop."""
    name, units, checked = load_project(project_dir)
    baseline = green_baseline(checked, step_budget)
    graphs = {GraphVariant(v): build(checked, v, field_orientation) for v in variants}
    out = []
    for op in operators:
        op = MutationOperator(op)
        runs = run_mutants(units, checked, op, cap, seed, step_budget, workers, baseline)
        for v, graph in graphs.items():
            ledger = ledger_for(runs, graph, checked)
            report = report_for(ledger, name, op.value, v.value, exclude_unbounded)
            out.append(Evaluation(name, op.value, v.value, ledger, report, runs))
    return out


def evaluate(
    project_dir,
    variant: GraphVariant,
    op: MutationOperator,
    cap: int = DEFAULT_CAP,
    seed: int = DEFAULT_SEED,
    step_budget: int = DEFAULT_STEP_BUDGET,
    **kwargs,
) -> tuple[EvaluationLedger, EvaluationReport]:
    (ev,) = evaluate_many(project_dir, [variant], [op], cap, seed, step_budget, **kwargs)
    return ev.ledger, ev.report


# -- serialisation -------------------------------------------------------------


def ledger_to_jsonl(ledger: EvaluationLedger, variant: Optional[str] = None) -> str:
    return "".join(impact.record_to_json(r, variant) + "\n" for r in ledger.values())


def ledger_from_jsonl(text: str) -> tuple[EvaluationLedger, Optional[str]]:
    """Parse a ledger file; also returns its variant tag when every line carries one."""
    ledger: EvaluationLedger = {}
    variants = set()
    for line in text.splitlines():
        if not line.strip():
            continue
        record, doc = impact.record_from_json(line)
        if record.mutant_id in ledger:
            raise ValueError(f"duplicate mutant id {record.mutant_id} in ledger")
        ledger[record.mutant_id] = record
        variants.add(doc.get("variant"))
    if len(variants) > 1:
        raise ValueError(f"ledger mixes variants: {sorted(map(str, variants))}")
    return ledger, next(iter(variants), None)


REPORT_HEADER = ["project", "operator", "variant", "k", "n", "p_same", "p_complete", "mean_p", "mean_r", "mean_f", "s", "o", "u", "d"]
TIMING_HEADER = ["project", "variant", "t_test_ms", "t_build_ms", "t_pred_mean_us"]


def _row(r: EvaluationReport) -> list[str]:
    reals = [r.p_same, r.p_complete, r.mean_p, r.mean_r, r.mean_f]
    return [r.project, r.operator, r.variant, str(r.k), str(r.n)] + [f"{float(x):.6f}" for x in reals] + [
        str(r.s), str(r.o), str(r.u), str(r.d)
    ]


def render_report(reports: Sequence[EvaluationReport], fmt: str = "csv") -> bytes:
    fmt = fmt.lower()
    rows = [_row(r) for r in reports]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        writer.writerows(rows)
        return buf.getvalue().encode("utf-8")
    if fmt in ("md", "markdown"):
        best: dict[tuple[str, str], Fraction] = {}
        for r in reports:
            key = (r.project, r.operator)
            best[key] = max(best.get(key, r.mean_f), r.mean_f)
        lines = ["| " + " | ".join(REPORT_HEADER) + " |", "|" + "---|" * len(REPORT_HEADER)]
        for r, row in zip(reports, rows):
            if r.mean_f == best[(r.project, r.operator)]:
                row[9] = f"**{row[9]}**"
            lines.append("| " + " | ".join(row) + " |")
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def render_timings(reports: Sequence[TimingReport]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TIMING_HEADER)
    for t in reports:
        writer.writerow([t.project, t.variant, f"{t.t_test * 1e3:.3f}", f"{t.t_build * 1e3:.3f}", f"{t.t_pred_mean * 1e6:.3f}"])
    return buf.getvalue().encode("utf-8")


# -- timing ---------------------------------------------------------------------


def timings(
    project_dir,
    variants: Sequence[GraphVariant] = tuple(GraphVariant),
    repetitions: int = 3,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> list[TimingReport]:
    """Median wall times over repetitions: suite run, graph build, one prediction."""
    if repetitions < 3:
        raise ValueError("at least 3 repetitions are required")
    name, _, checked = load_project(project_dir)
    if not checked.tests:
        raise EvaluationError("project has no tests")
    t_test = statistics.median(run_suite(checked, step_budget).wall_time for _ in range(repetitions))
    sources = sorted(checked.method_paths)
    declared = checked.methods.keys()
    out = []
    for v in variants:
        builds, preds = [], []
        for _ in range(repetitions):
            start = time.perf_counter()
            graph = build(checked, v)
            builds.append(time.perf_counter() - start)
            start = time.perf_counter()
            for m in sources:
                impact.predict(graph, m, checked.tests, declared)
            preds.append((time.perf_counter() - start) / len(sources))
        out.append(TimingReport(name, GraphVariant(v).value, t_test, statistics.median(builds), statistics.median(preds)))
    return out


# -- propagation picture ----------------------------------------------------------

MUTATED, TP, FP, FN, APP = "mutated", "tp", "fp", "fn", "app"
_STYLE = {
    MUTATED: 'style=filled, fillcolor="orange", shape=doubleoctagon',
    TP: 'style=filled, fillcolor="palegreen", shape=box',
    FP: 'style=filled, fillcolor="lightpink", shape=box',
    FN: 'style="filled,dashed", fillcolor="lightblue", shape=box',
    APP: 'shape=ellipse',
}


def render_impact_dot(graph: CallGraph, record: ImpactRecord) -> bytes:
    """DOT picture of one mutant's prediction: mutated node, TP/FP/FN tests, other nodes."""
    mutated = node_for(graph, record.mutated_method)
    if mutated is None:
        raise KeyError(f"{record.mutated_method} has no node in graph {graph.variant.value}")
    classes = {n: APP for n in graph.nodes}
    tp = record.ais & record.cis
    for group, cls in ((tp, TP), (record.fpis, FP), (record.fnis, FN)):
        for t in group:
            node = method_node(t)
            if node not in graph.nodes:
                raise KeyError(f"{t} has no node in graph {graph.variant.value}")
            classes[node] = cls
    classes[mutated] = MUTATED
    counts = {c: 0 for c in (TP, FP, FN, APP)}
    for n, c in classes.items():
        if c in counts:
            counts[c] += 1
    lines = [
        f"digraph {dot_quote('impact_' + record.mutant_id)} {{",
        f"    // counts: tp={counts[TP]} fp={counts[FP]} fn={counts[FN]} app={counts[APP]}",
        "    rankdir=BT;",
    ]
    for n in sorted(classes):
        c = classes[n]
        lines.append(f"    {dot_quote(n.id)} [class={dot_quote(c)}, {_STYLE[c]}];")
    for e in sorted(graph.edges):
        lines.append(f"    {dot_quote(e.src.id)} -> {dot_quote(e.dst.id)} [label={dot_quote(e.kind)}];")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")
