"""Language-neutral data-flow graph model.

A :class:`FunctionGraph` holds the def-use graph of one function: nodes are
statements (plus sub-expression nodes for nested calls), edges are explicit
data flows labelled with the flowing variable.  Two function graphs joined by a
cross-language call edge form a :class:`CrossLanguageGraph`.

Both graph types expose ``nodes``, ``edges`` and ``root`` so every operation in
this module accepts either one.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

BOUNDARY_LABEL = " Cross-language call"


class Language(enum.Enum):
    HighLevel = "HighLevel"
    Native = "Native"


class NodeKind(enum.Enum):
    FunctionDef = "FunctionDef"
    Statement = "Statement"
    Call = "Call"
    NameRef = "NameRef"
    Return = "Return"
    Other = "Other"


class Role(enum.Enum):
    Root = "Root"
    Sink = "Sink"
    Sanitizer = "Sanitizer"


class EdgeKind(enum.Enum):
    DefUse = "DefUse"
    CrossLanguageCall = "CrossLanguageCall"


class Verdict(enum.Enum):
    Vulnerable = "Vulnerable"
    SanitizedNative = "SanitizedNative"
    SanitizedHighLevel = "SanitizedHighLevel"
    SanitizedBoth = "SanitizedBoth"
    NoFlow = "NoFlow"


class GraphError(ValueError):
    """Raised for malformed graphs or unknown node ids."""


@dataclass(frozen=True)
class Location:
    path: str
    line: int  # 1-based
    col: int  # 0-based

    def to_dict(self) -> dict:
        return {"file": self.path, "line": self.line, "col": self.col}


@dataclass(frozen=True)
class GraphNode:
    id: int
    language: Language
    kind: NodeKind
    label: str
    location: Location
    roles: frozenset = frozenset()
    # Normalized callee text for Call nodes ("" otherwise); used by rule matching.
    callee: str = ""
    # Syntactic markers set by the frontends, e.g. "typeof", "argcount-compare".
    traits: frozenset = frozenset()

    def has(self, role: Role) -> bool:
        return role in self.roles


@dataclass(frozen=True)
class FlowEdge:
    src: int
    dst: int
    variable: str = ""
    kind: EdgeKind = EdgeKind.DefUse


@dataclass(frozen=True)
class FunctionGraph:
    name: str
    nodes: tuple  # tuple[GraphNode, ...] sorted by id
    edges: tuple  # tuple[FlowEdge, ...] sorted
    root: int

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise GraphError(f"{self.name}: duplicate node ids")
        idset = set(ids)
        if self.root not in idset:
            raise GraphError(f"{self.name}: root {self.root} not in graph")
        roots = [n for n in self.nodes if n.has(Role.Root)]
        if len(roots) != 1 or roots[0].id != self.root:
            raise GraphError(f"{self.name}: exactly one node must carry role Root")
        if roots[0].kind is not NodeKind.FunctionDef:
            raise GraphError(f"{self.name}: root must be a FunctionDef node")
        for e in self.edges:
            if e.src not in idset or e.dst not in idset:
                raise GraphError(f"{self.name}: dangling edge {e.src}->{e.dst}")

    @classmethod
    def build(cls, name: str, nodes: Iterable[GraphNode], edges: Iterable[FlowEdge], root: int):
        nodes = tuple(sorted(nodes, key=lambda n: n.id))
        edges = tuple(sorted(set(edges), key=_edge_key))
        return cls(name, nodes, edges, root)

    @cached_property
    def node_map(self) -> dict:
        return {n.id: n for n in self.nodes}

    @cached_property
    def successors(self) -> dict:
        return _adjacency(self.nodes, self.edges)

    def node(self, node_id: int) -> GraphNode:
        try:
            return self.node_map[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id}") from None

    def with_roles(self, roles: Mapping[int, Iterable[Role]]) -> "FunctionGraph":
        """Return a copy where the given nodes gain the given roles."""
        new_nodes = []
        for n in self.nodes:
            extra = roles.get(n.id)
            if extra:
                n = replace(n, roles=n.roles | frozenset(extra))
            new_nodes.append(n)
        return replace(self, nodes=tuple(new_nodes))


@dataclass(frozen=True)
class CrossLanguageGraph:
    high_level: FunctionGraph
    native: FunctionGraph
    boundary: FlowEdge
    # original native node id -> id used in the merged graph
    remap: Mapping[int, int] = field(default_factory=dict)

    @cached_property
    def nodes(self) -> tuple:
        native = [replace(n, id=self.remap[n.id]) for n in self.native.nodes]
        return tuple(sorted((*self.high_level.nodes, *native), key=lambda n: n.id))

    @cached_property
    def edges(self) -> tuple:
        native = [replace(e, src=self.remap[e.src], dst=self.remap[e.dst]) for e in self.native.edges]
        return tuple(sorted({*self.high_level.edges, *native, self.boundary}, key=_edge_key))

    @property
    def root(self) -> int:
        return self.high_level.root

    @property
    def name(self) -> str:
        return f"{self.high_level.name}->{self.native.name}"

    @cached_property
    def node_map(self) -> dict:
        return {n.id: n for n in self.nodes}

    @cached_property
    def successors(self) -> dict:
        return _adjacency(self.nodes, self.edges)

    def node(self, node_id: int) -> GraphNode:
        try:
            return self.node_map[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id}") from None


AnyGraph = Union[FunctionGraph, CrossLanguageGraph]


def _edge_key(e: FlowEdge):
    return (e.src, e.dst, e.kind.value, e.variable)


def _adjacency(nodes: Sequence[GraphNode], edges: Sequence[FlowEdge]) -> dict:
    succ: dict = {n.id: [] for n in nodes}
    for e in edges:
        succ[e.src].append(e.dst)
    return {k: sorted(set(v)) for k, v in succ.items()}


def merge(high_level: FunctionGraph, call_node: int, native: FunctionGraph) -> CrossLanguageGraph:
    """Join two function graphs with an edge from ``call_node`` to the native root."""
    src = high_level.node(call_node)
    if src.language is not Language.HighLevel:
        raise GraphError("boundary edge must start at a high-level node")
    if native.node(native.root).language is not Language.Native:
        raise GraphError("boundary edge must end at a native FunctionDef")
    base = max(n.id for n in high_level.nodes) + 1
    remap = {n.id: base + i for i, n in enumerate(native.nodes)}
    boundary = FlowEdge(call_node, remap[native.root], BOUNDARY_LABEL, EdgeKind.CrossLanguageCall)
    return CrossLanguageGraph(high_level, native, boundary, remap)


def reachable_nodes(graph: AnyGraph, start: int) -> set:
    """All node ids reachable from ``start`` (inclusive), by worklist BFS."""
    graph.node(start)
    succ = graph.successors
    seen = {start}
    work = deque([start])
    while work:
        cur = work.popleft()
        for nxt in succ[cur]:
            if nxt not in seen:
                seen.add(nxt)
                work.append(nxt)
    return seen


def reachable(graph: AnyGraph, start: int, role: Role) -> list:
    """Sorted ids of nodes carrying ``role`` that are reachable from ``start``."""
    nm = graph.node_map
    return sorted(i for i in reachable_nodes(graph, start) if nm[i].has(role))


def judge(graph: AnyGraph, start: int | None = None) -> Verdict:
    """Apply the sink/sanitizer rule from ``start`` (defaults to the root).

    Vulnerable iff some sink is reachable and no sanitizer is; a reachable
    sanitizer anywhere suppresses every sink in the graph.
    """
    start = graph.root if start is None else start
    seen = reachable_nodes(graph, start)
    nm = graph.node_map
    if not any(nm[i].has(Role.Sink) for i in seen):
        return Verdict.NoFlow
    langs = {nm[i].language for i in seen if nm[i].has(Role.Sanitizer)}
    if not langs:
        return Verdict.Vulnerable
    if langs == {Language.Native}:
        return Verdict.SanitizedNative
    if langs == {Language.HighLevel}:
        return Verdict.SanitizedHighLevel
    return Verdict.SanitizedBoth


def shortest_path(graph: AnyGraph, start: int, targets: Iterable[int]) -> list:
    """Shortest path (edge count) from ``start`` to the nearest target.

    Among equally short paths the lexicographically smallest id sequence wins,
    so the result is reproducible.  Returns [] when no target is reachable.
    """
    targets = set(targets)
    if not targets:
        return []
    succ = graph.successors
    dist = {start: 0}
    work = deque([start])
    while work:
        cur = work.popleft()
        for nxt in succ[cur]:
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                work.append(nxt)
    hits = [t for t in targets if t in dist]
    if not hits:
        return []
    best = min(dist[t] for t in hits)
    goal = min(t for t in hits if dist[t] == best)
    # distance-to-goal over reversed edges restricts the greedy walk to shortest paths
    pred: dict = {}
    for a, outs in succ.items():
        for b in outs:
            pred.setdefault(b, []).append(a)
    back = {goal: 0}
    work = deque([goal])
    while work:
        cur = work.popleft()
        for p in pred.get(cur, ()):
            if p not in back:
                back[p] = back[cur] + 1
                work.append(p)
    path = [start]
    cur = start
    while cur != goal:
        cur = min(n for n in succ[cur] if back.get(n) == back[cur] - 1)
        path.append(cur)
    return path


_KIND_TAGS = {
    NodeKind.FunctionDef: "FUNCTION",
    NodeKind.Statement: "STMT",
    NodeKind.Call: "CALL",
    NodeKind.NameRef: "NAME",
    NodeKind.Return: "RETURN",
    NodeKind.Other: "OTHER",
}

_COLORS = {Language.HighLevel: "blue", Language.Native: "green"}


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", " ")


def node_caption(node: GraphNode) -> str:
    return f"{_KIND_TAGS[node.kind]} {node.location.line} ,{node.label}"


def emit_dot(graph: AnyGraph, name: str | None = None) -> str:
    """Serialize a graph in Graphviz dot syntax, nodes ordered by id."""
    title = _dot_escape(name if name is not None else graph.name)
    lines = [f'digraph "{title}" {{']
    for n in graph.nodes:
        lines.append(
            f'  "{n.id}" [label="{_dot_escape(node_caption(n))}",color={_COLORS[n.language]}]'
        )
    for e in graph.edges:
        lines.append(f'  "{e.src}" -> "{e.dst}" [label="{_dot_escape(e.variable)}"]')
    lines.append("}")
    return "\n".join(lines) + "\n"
