"""Candidate impact prediction and per-mutant accuracy.

The candidate impact set of a change in method m is the set of test methods
from which m's node is reachable, found by a breadth-first walk over reversed
edges.  A mutant whose method has no node, or only an isolated one, is
*unbounded*: the graph carries no information about it.
"""

from __future__ import annotations

import enum
import json
import re
from collections import deque
from collections.abc import Collection
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .callgraph import CallGraph, GraphNode, is_isolated, method_node, node_for
from .frontend.model import MethodRef
from .interpreter import SuiteResult


class MutantCategory(str, enum.Enum):
    S = "S"  # same
    O = "O"  # overestimate
    U = "U"  # underestimate
    D = "D"  # different


@dataclass(frozen=True)
class MutantMetrics:
    precision: Fraction
    recall: Fraction
    f_score: Fraction


@dataclass(frozen=True)
class ImpactRecord:
    mutant_id: str
    mutated_method: MethodRef
    ais: frozenset[MethodRef]
    cis: frozenset[MethodRef]
    fpis: frozenset[MethodRef]
    fnis: frozenset[MethodRef]
    unbounded: bool


def reverse_closure(graph: CallGraph, start: GraphNode) -> set[GraphNode]:
    """All nodes that reach start (start included)."""
    preds = graph.predecessors
    seen = {start}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for p in preds.get(node, ()):
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return seen


def predict(
    graph: CallGraph,
    mutated: MethodRef,
    tests: Iterable[MethodRef],
    declared: Optional[Collection[MethodRef]] = None,
) -> tuple[frozenset[MethodRef], bool]:
    """Return (CIS, unbounded) for a change in the mutated method."""
    if declared is not None and mutated not in declared:
        raise KeyError(f"{mutated} is not declared in the program")
    node = node_for(graph, mutated)
    if node is None:
        if declared is None and graph.variant.value != "S":
            raise KeyError(f"{mutated} has no node in graph {graph.variant.value}")
        return frozenset(), True
    if is_isolated(graph, node):
        return frozenset(), True
    reached = reverse_closure(graph, node)
    return frozenset(t for t in tests if method_node(t) in reached), False


def actual(suite_mutant: SuiteResult, suite_baseline: SuiteResult) -> frozenset[MethodRef]:
    if suite_mutant.outcomes.keys() != suite_baseline.outcomes.keys():
        raise ValueError("mutant and baseline suites ran different tests")
    return frozenset(suite_mutant.failing() - suite_baseline.failing())


def bohner(ais: frozenset, cis: frozenset) -> tuple[frozenset, frozenset]:
    """(FPIS, FNIS): over-estimated and missed impacts."""
    common = ais & cis
    return cis - common, ais - common


def make_record(
    mutant_id: str, method: MethodRef, ais: Iterable[MethodRef], cis: Iterable[MethodRef], unbounded: bool
) -> ImpactRecord:
    ais, cis = frozenset(ais), frozenset(cis)
    if unbounded and cis:
        raise ValueError("an unbounded record cannot carry a candidate impact set")
    fpis, fnis = bohner(ais, cis)
    return ImpactRecord(mutant_id, method, ais, cis, fpis, fnis, unbounded)


def classify(record: ImpactRecord) -> MutantCategory:
    if not record.ais:
        raise ValueError(f"mutant {record.mutant_id} was not killed; it has no category")
    if record.unbounded:
        return MutantCategory.U
    if not record.fpis and not record.fnis:
        return MutantCategory.S
    if record.fpis and not record.fnis:
        return MutantCategory.O
    if not record.fpis and record.fnis:
        return MutantCategory.U
    return MutantCategory.D


def metrics(record: ImpactRecord) -> MutantMetrics:
    if not record.ais:
        raise ValueError(f"mutant {record.mutant_id} was not killed; recall is undefined")
    zero = Fraction(0)
    if record.unbounded or not record.cis:
        return MutantMetrics(zero, zero, zero)
    hits = len(record.ais & record.cis)
    p = Fraction(hits, len(record.cis))
    r = Fraction(hits, len(record.ais))
    f = zero if p + r == 0 else 2 * p * r / (p + r)
    return MutantMetrics(p, r, f)


# -- ledger lines -------------------------------------------------------------

_METHOD_ID = re.compile(r"^(?P<owner>[A-Za-z_]\w*)\.(?P<name>[A-Za-z_]\w*)\((?P<params>[\w,]*)\)$")


def parse_method_id(ident: str) -> MethodRef:
    m = _METHOD_ID.match(ident)
    if m is None:
        raise ValueError(f"not a method id: {ident!r}")
    params = tuple(p for p in m.group("params").split(",") if p)
    return MethodRef(m.group("owner"), m.group("name"), params)


def _ids(refs: Iterable[MethodRef]) -> list[str]:
    return sorted(str(r) for r in refs)


def record_to_json(record: ImpactRecord, variant: Optional[str] = None) -> str:
    m = metrics(record)
    doc = {
        "mutant": record.mutant_id,
        "method": str(record.mutated_method),
        "ais": _ids(record.ais),
        "cis": _ids(record.cis),
        "fpis": _ids(record.fpis),
        "fnis": _ids(record.fnis),
        "unbounded": record.unbounded,
        "category": classify(record).value,
        "p": float(m.precision),
        "r": float(m.recall),
        "f": float(m.f_score),
    }
    if variant is not None:
        doc["variant"] = variant
    return json.dumps(doc, separators=(",", ":"))


def record_from_json(line: str) -> tuple[ImpactRecord, dict]:
    """Parse one ledger line; returns the record and the raw document."""
    doc = json.loads(line)
    record = make_record(
        doc["mutant"],
        parse_method_id(doc["method"]),
        (parse_method_id(t) for t in doc["ais"]),
        (parse_method_id(t) for t in doc["cis"]),
        doc["unbounded"],
    )
    if _ids(record.fpis) != doc["fpis"] or _ids(record.fnis) != doc["fnis"]:
        raise ValueError(f"ledger line for {doc['mutant']} has inconsistent FPIS/FNIS")
    return record, doc
