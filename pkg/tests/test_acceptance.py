"""One test per acceptance criterion; each prints a single PASS/FAIL line.

Tolerances: criteria 1 to 11 and 13 are exact.  Wall-clock bounds: criterion 1
runs in under 1 s, criterion 3 sweeps in under 120 s, and criterion 12 uses
medians of 3 runs with a 10x prediction ratio.
"""

import random
import time
from fractions import Fraction

import pytest

from impactlab import corpus, evalpipe, impact, mutgen
from impactlab.callgraph import FIELD_READ, FIELD_WRITE, GraphVariant, build, method_node
from impactlab.evalpipe import evaluate_many, ledger_to_jsonl, render_report
from impactlab.impact import MutantCategory, classify, metrics
from impactlab.interpreter import Status
from impactlab.mutgen import MutationOperator

from conftest import OVERRIDE_FIELD_DIR
from graph_oracle import brute_force_predict, random_graph
from roles import designated_loop_mutant, designated_mul_mutant
from verdicts import verdict

# 25x the largest baseline step count in the corpus; see corpus expected.json
SWEEP_BUDGET = 50_000
SWEEP_SECONDS = 120.0
VARIANTS = list(GraphVariant)
OPERATORS = list(MutationOperator)


@pytest.fixture(scope="module")
def sweep():
    start = time.perf_counter()
    runs = {}
    for proj in corpus.projects():
        for ev in evaluate_many(proj.source_dir, VARIANTS, OPERATORS, step_budget=SWEEP_BUDGET, workers=1):
            runs[(ev.project, ev.operator, ev.variant)] = ev
    return runs, time.perf_counter() - start


def test_01_mul_mutant_end_to_end():
    start = time.perf_counter()
    checked = corpus.project(corpus.REFLECTION_PROJECT).load()
    m = designated_mul_mutant(checked)
    ais = mutgen.viability(checked, m).failing
    cis, unbounded = impact.predict(build(checked, "B"), m.site.enclosing, checked.tests)
    record = impact.make_record(m.id, m.site.enclosing, ais, cis, unbounded)
    elapsed = time.perf_counter() - start
    t = checked.method_by_id
    ok = (
        record.ais == {t("CalcTest.testMul()"), t("CalcTest.testOp()")}
        and record.cis == {t("CalcTest.testMul()"), t("CalcTest.testPow()")}
        and record.fpis == {t("CalcTest.testPow()")}
        and record.fnis == {t("CalcTest.testOp()")}
        and classify(record) is MutantCategory.D
        and elapsed < 1.0
    )
    verdict(1, "mul mutant in calc: exact AIS, CIS, FPIS, FNIS and category D", ok, f"{elapsed * 1000:.0f} ms")


def test_02_override_and_field_structure():
    checked = corpus.CorpusProject("override_field", OVERRIDE_FIELD_DIR, {}).load()
    b, h, f = (build(checked, v) for v in "BHF")
    a_foo, b_foo = method_node(checked.method_by_id("A.foo()")), method_node(checked.method_by_id("B.foo()"))
    in_h = any(e.src == a_foo and e.dst == b_foo for e in h.edges)
    in_b = any(e.src == a_foo and e.dst == b_foo for e in b.edges)
    new_nodes = f.nodes - h.nodes
    field_edges = f.edges - h.edges
    (bar,) = new_nodes if len(new_nodes) == 1 else (None,)
    reads = [e for e in field_edges if e.kind == FIELD_READ]
    writes = [e for e in field_edges if e.kind == FIELD_WRITE]
    ok = (
        in_h and not in_b and bar is not None and bar.kind == "field" and len(field_edges) == 2
        and len(reads) == 1 and reads[0].dst == bar and reads[0].src.id == "C.biz1()"
        and len(writes) == 1 and writes[0].src == bar and writes[0].dst.id == "C.biz2()"
    )
    verdict(2, "override_field fixture: override edge only in H, one field node with one read and one write edge in F", ok)


def test_03_partition_identity(sweep):
    runs, elapsed = sweep
    bad = []
    for key, ev in runs.items():
        r = ev.report
        counted = {c: 0 for c in MutantCategory}
        for record in ev.ledger.values():
            counted[classify(record)] += 1
        killed = sum(run.status == mutgen.KILLED for run in ev.runs)
        if r.s + r.o + r.u + r.d != r.k or r.k != killed or (r.s, r.o, r.u, r.d) != tuple(counted.values()):
            bad.append(key)
    expected_runs = len(corpus.project_names()) * len(OPERATORS) * len(VARIANTS)
    ok = not bad and len(runs) == expected_runs and elapsed < SWEEP_SECONDS
    verdict(3, "|S|+|O|+|U|+|D| = |K| for every run of the full sweep", ok,
            f"{len(runs)} runs, {elapsed:.1f} s, violations {bad}")


def test_04_node_and_edge_inclusion():
    bad = []
    for proj in corpus.projects():
        checked = proj.load()
        b, h, f = (build(checked, v) for v in "BHF")
        if not (b.nodes == h.nodes and b.edges <= h.edges <= f.edges):
            bad.append(proj.name)
    verdict(4, "nodes(B) = nodes(H) and edges(B) <= edges(H) <= edges(F) on every project", not bad, f"violations {bad}")


def test_05_recall_monotone(sweep):
    runs, _ = sweep
    bad = []
    for (project, op, variant), ev in runs.items():
        if variant != "B":
            continue
        ledgers = [runs[(project, op, v)].ledger for v in "BHF"]
        reports = [runs[(project, op, v)].report for v in "BHF"]
        if not reports[0].p_complete <= reports[1].p_complete <= reports[2].p_complete:
            bad.append((project, op, "p_C"))
        for mid, rb in ledgers[0].items():
            if rb.unbounded:
                continue
            rec = [metrics(l[mid]).recall for l in ledgers]
            if not rec[0] <= rec[1] <= rec[2]:
                bad.append((project, op, mid))
    verdict(5, "R(B) <= R(H) <= R(F) per bound mutant and p_C(B) <= p_C(H) <= p_C(F) per run", not bad,
            f"violations {bad[:5]}")


def test_06_metric_arithmetic():
    refs = [impact.parse_method_id(f"T.t{i}()") for i in range(37)]
    tp, fp, fn = refs[:7], refs[7:30], refs[30:]
    record = impact.make_record("m", impact.parse_method_id("K.m()"), tp + fn, tp + fp, False)
    got = metrics(record)
    ok = (got.precision, got.recall, got.f_score) == (Fraction(7, 30), Fraction(1, 2), Fraction(7, 22))
    verdict(6, "7 TP, 23 FP, 7 FN gives P=7/30, R=1/2, F=7/22", ok, f"{got.precision}, {got.recall}, {got.f_score}")


def test_07_unbounded_isolated_method():
    proj = corpus.project(corpus.ISOLATED_PROJECT)
    checked = proj.load()
    isolated = checked.method_by_id("Warehouse.legacyChecksum()")
    ok = True
    counts = []
    for ev in evaluate_many(proj.source_dir, ["B", "H", "F"], OPERATORS, step_budget=SWEEP_BUDGET, workers=1):
        mine = [r for r in ev.ledger.values() if r.mutated_method == isolated]
        for r in mine:
            m = metrics(r)
            ok = ok and r.unbounded and (m.precision, m.recall, m.f_score) == (0, 0, 0) and classify(r) is MutantCategory.U
        others = {k: r for k, r in ev.ledger.items() if r.mutated_method != isolated}
        without = evalpipe.report_for(others, ev.project, ev.operator, ev.variant)
        ok = ok and ev.report.n - without.n == len(mine)
        counts.append(len(mine))
    ok = ok and sum(counts) > 0
    verdict(7, "isolated method mutants are unbounded, score 0, fall in U and count in N", ok,
            f"{sum(counts)} killed mutant records")


def test_08_overriding_method_absent_under_s(sweep):
    runs, _ = sweep
    project = corpus.INHERITANCE_PROJECT
    checked = corpus.project(project).load()
    found = []
    for op in OPERATORS:
        s, b = runs[(project, op.value, "S")].ledger, runs[(project, op.value, "B")].ledger
        for mid, rs in s.items():
            method = rs.mutated_method
            if method in checked.overrides and rs.unbounded and not b[mid].unbounded:
                found.append(mid)
    verdict(8, "an overriding-method mutant is unbounded under S and bounded under B", bool(found),
            f"{len(found)} mutants")


def test_09_oracle_equivalence():
    rng = random.Random(20240601)
    graphs = mismatches = choices = 0
    for _ in range(250):
        graph, refs, tests = random_graph(rng, max_nodes=12)
        graphs += 1
        for source in refs:
            choices += 1
            if impact.predict(graph, source, tests) != brute_force_predict(graph, source, tests):
                mismatches += 1
    verdict(9, "predict matches all-paths enumeration on random graphs", mismatches == 0 and graphs >= 200,
            f"{graphs} graphs, {choices} sources, {mismatches} mismatches")


EXPECTED_PER_SITE = {
    ("AOR", mutgen.ARITH_BINARY): 6,
    ("LCR", mutgen.LOGICAL_BINARY): 5,
    ("ROR", mutgen.RELATIONAL_BINARY): 7,
    ("ABS", mutgen.NUMERIC_EXPR): 1,
    ("UOI", mutgen.NUMERIC_EXPR): 3,
    ("UOI", mutgen.BOOL_EXPR): 1,
}


def test_10_mutant_cardinalities():
    seen = {key: 0 for key in EXPECTED_PER_SITE}
    bad = []
    for proj in corpus.projects():
        checked = proj.load()
        for op in OPERATORS:
            for site in mutgen.sites(checked, op):
                key = (op.value, site.kind)
                n = len(mutgen.mutants_at(checked, site, op))
                seen[key] = seen.get(key, 0) + 1
                if EXPECTED_PER_SITE.get(key) != n:
                    bad.append((proj.name, key, n))
    ok = not bad and all(seen.values())
    verdict(10, "per-site counts AOR=6 LCR=5 ROR=7 ABS=1 UOI=3/1", ok,
            f"{sum(seen.values())} sites, violations {bad[:5]}")


def test_11_timeout_kill():
    checked = corpus.project(corpus.LOOP_PROJECT).load()
    m = designated_loop_mutant(checked)
    v = mutgen.viability(checked, m, SWEEP_BUDGET)
    timeouts = {t for t, o in v.suite.outcomes.items() if o.status is Status.TIMEOUT}
    ok = v.killed and bool(timeouts) and timeouts <= v.failing
    verdict(11, "loop-guard ROR->true mutant is killed by Timeout", ok, f"{len(timeouts)} timed-out tests")


def test_12_speed_ratio():
    bad = []
    for proj in corpus.projects():
        for t in evalpipe.timings(proj.source_dir, VARIANTS, 3, SWEEP_BUDGET):
            if not (t.t_pred_mean * 10 <= t.t_test and t.t_build < t.t_test):
                bad.append((t.project, t.variant))
    verdict(12, "prediction >= 10x faster than the suite and build faster than the suite", not bad,
            f"violations {bad}")


def test_13_scheduling_independence():
    src = corpus.project("bank").source_dir
    outputs = []
    for workers in (1, 4):
        evs = evaluate_many(src, VARIANTS, OPERATORS, cap=40, seed=3, step_budget=SWEEP_BUDGET, workers=workers)
        ledgers = "".join(ledger_to_jsonl(ev.ledger, ev.variant) for ev in evs).encode()
        outputs.append((ledgers, render_report([ev.report for ev in evs], "csv")))
    ok = outputs[0] == outputs[1] and len(outputs[0][0]) > 0
    verdict(13, "ledgers and reports are byte-identical at 1 and 4 workers", ok)
