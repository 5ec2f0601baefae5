"""The four call-graph variants used for impact prediction.

S  declaration-site graph: call targets and callers are lifted to the topmost
   declaration of their signature; overriding methods get no node.
B  one node per declared method, edges to statically resolved callees.
H  B plus an edge from every overridden or interface declaration to each of
   its overriding implementations (class hierarchy analysis).
F  H plus one node per field, with reader -> field and field -> writer edges.
"""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .frontend import ast as A
from .frontend.model import CheckedProgram, FieldRef, MethodRef


class GraphVariant(str, enum.Enum):
    S = "S"
    B = "B"
    H = "H"
    F = "F"

    @classmethod
    def parse(cls, text: str) -> "GraphVariant":
        try:
            return cls(text.upper())
        except ValueError:
            raise ValueError(f"unknown graph variant {text!r}; expected one of S, B, H, F") from None


CALL = "call"
OVERRIDE = "override"
FIELD_READ = "field_read"
FIELD_WRITE = "field_write"
EDGE_KINDS = (CALL, OVERRIDE, FIELD_READ, FIELD_WRITE)

FORMAL = "formal"
FIGURE = "figure"


@dataclass(frozen=True, order=True)
class GraphNode:
    kind: str  # "method" | "field"
    id: str

    def __hash__(self) -> int:
        return hash(self.id)

    def __str__(self) -> str:
        return self.id


@dataclass(frozen=True, order=True)
class Edge:
    src: GraphNode
    dst: GraphNode
    kind: str


def method_node(ref: MethodRef) -> GraphNode:
    return GraphNode("method", str(ref))


def field_node(ref: FieldRef) -> GraphNode:
    return GraphNode("field", str(ref))


@dataclass(frozen=True)
class CallGraph:
    variant: GraphVariant
    nodes: frozenset[GraphNode]
    edges: frozenset[Edge]
    tests: frozenset[GraphNode] = field(default=frozenset(), compare=False)

    def __post_init__(self):
        for e in self.edges:
            if e.src not in self.nodes or e.dst not in self.nodes:
                raise ValueError(f"edge {e.src} -> {e.dst} has an endpoint outside the graph")

    @cached_property
    def predecessors(self) -> dict[GraphNode, tuple[GraphNode, ...]]:
        preds: dict[GraphNode, set[GraphNode]] = defaultdict(set)
        for e in self.edges:
            preds[e.dst].add(e.src)
        return {n: tuple(sorted(p)) for n, p in preds.items()}

    @cached_property
    def degree(self) -> dict[GraphNode, int]:
        deg: dict[GraphNode, int] = defaultdict(int)
        for e in self.edges:
            deg[e.src] += 1
            if e.dst != e.src:
                deg[e.dst] += 1
        return dict(deg)


@dataclass
class MethodFacts:
    calls: set[MethodRef] = field(default_factory=set)
    reads: set[FieldRef] = field(default_factory=set)
    writes: set[FieldRef] = field(default_factory=set)


def method_facts(checked: CheckedProgram) -> dict[MethodRef, MethodFacts]:
    """Call targets and field reads/writes of every method body.

    Read off the checker's per-path resolution tables; a path belongs to the
    method whose declaration path is its two-element prefix.
    """
    facts: dict[MethodRef, MethodFacts] = {}
    owner: dict[A.NodePath, MethodRef] = {}
    for ref, path in checked.method_paths.items():
        if isinstance(checked.methods[ref], A.MethodDecl):
            facts[ref] = MethodFacts()
            owner[path] = ref
    for path, target in checked.call_targets.items():
        ref = owner.get(path[:2])
        if ref is not None:
            facts[ref].calls.add(target)
    for path, target in checked.field_targets.items():
        ref = owner.get(path[:2])
        if ref is None:
            continue
        # a field is written when it is the target (child 0) of an assignment
        written = path[-1] == 0 and isinstance(A.node_at(checked.methods[ref], path[2:-1]), A.Assign)
        (facts[ref].writes if written else facts[ref].reads).add(target)
    return facts


def declaration_root(checked: CheckedProgram, ref: MethodRef) -> MethodRef:
    seen = {ref}
    while ref in checked.overrides:
        ref = checked.overrides[ref]
        if ref in seen:
            break
        seen.add(ref)
    return ref


def build(checked: CheckedProgram, variant: GraphVariant, field_orientation: str = FORMAL) -> CallGraph:
    variant = GraphVariant(variant)
    if field_orientation not in (FORMAL, FIGURE):
        raise ValueError(f"unknown field orientation {field_orientation!r}")
    facts = method_facts(checked)
    if variant is GraphVariant.S:
        def lift(ref: MethodRef) -> MethodRef:
            return declaration_root(checked, ref)
        nodes = {method_node(m) for m in checked.methods if m not in checked.overrides}
    else:
        def lift(ref: MethodRef) -> MethodRef:
            return ref
        nodes = {method_node(m) for m in checked.methods}

    edges: set[Edge] = set()
    for caller, f in facts.items():
        src = method_node(lift(caller))
        for callee in f.calls:
            edges.add(Edge(src, method_node(lift(callee)), CALL))

    if variant in (GraphVariant.H, GraphVariant.F):
        for parent, child in checked.override_pairs:
            edges.add(Edge(method_node(parent), method_node(child), OVERRIDE))

    if variant is GraphVariant.F:
        nodes.update(field_node(r) for r in checked.fields)
        for m, f in facts.items():
            mn = method_node(m)
            for r in f.reads:
                fn = field_node(r)
                edges.add(Edge(mn, fn, FIELD_READ) if field_orientation == FORMAL else Edge(fn, mn, FIELD_READ))
            for r in f.writes:
                fn = field_node(r)
                edges.add(Edge(fn, mn, FIELD_WRITE) if field_orientation == FORMAL else Edge(mn, fn, FIELD_WRITE))

    tests = frozenset(method_node(lift(t)) for t in checked.tests) & frozenset(nodes)
    return CallGraph(variant, frozenset(nodes), frozenset(edges), tests)


def node_for(graph: CallGraph, method: MethodRef) -> Optional[GraphNode]:
    """The graph node of a method, or None when the graph has no node for it."""
    node = method_node(method)
    return node if node in graph.nodes else None


def is_isolated(graph: CallGraph, node: GraphNode) -> bool:
    if node not in graph.nodes:
        raise KeyError(f"{node} is not a node of this graph")
    return graph.degree.get(node, 0) == 0


# -- serialisation ----------------------------------------------------------


def to_json(graph: CallGraph) -> bytes:
    doc = {
        "variant": graph.variant.value,
        "nodes": [{"id": n.id, "kind": n.kind} for n in sorted(graph.nodes, key=lambda n: (n.id, n.kind))],
        "edges": [
            {"from": e.src.id, "to": e.dst.id, "kind": e.kind}
            for e in sorted(graph.edges, key=lambda e: (e.src.id, e.dst.id, e.kind))
        ],
    }
    return json.dumps(doc, separators=(",", ":")).encode("utf-8")


def from_json(data: bytes) -> CallGraph:
    doc = json.loads(data)
    nodes = {n["id"]: GraphNode(n["kind"], n["id"]) for n in doc["nodes"]}
    edges = set()
    for e in doc["edges"]:
        if e["kind"] not in EDGE_KINDS:
            raise ValueError(f"unknown edge kind {e['kind']!r}")
        edges.add(Edge(nodes[e["from"]], nodes[e["to"]], e["kind"]))
    return CallGraph(GraphVariant(doc["variant"]), frozenset(nodes.values()), frozenset(edges))


def dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: CallGraph) -> bytes:
    lines = [f"digraph {dot_quote('CG_' + graph.variant.value)} {{", "    rankdir=BT;"]
    for n in sorted(graph.nodes):
        if n.kind == "field":
            attrs = "shape=box"
        elif n in graph.tests:
            attrs = "shape=ellipse, peripheries=2"
        else:
            attrs = "shape=ellipse"
        lines.append(f"    {dot_quote(n.id)} [{attrs}];")
    for e in sorted(graph.edges):
        lines.append(f"    {dot_quote(e.src.id)} -> {dot_quote(e.dst.id)} [label={dot_quote(e.kind)}];")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def export(graph: CallGraph, fmt: str) -> bytes:
    fmt = fmt.lower()
    if fmt == "json":
        return to_json(graph)
    if fmt == "dot":
        return to_dot(graph)
    raise ValueError(f"unknown export format {fmt!r}")
