"""Labeled-graph core: construction, file loading, neighborhoods, oracles.

Graphs are undirected, simple (no self-loops, no parallel edges) and carry
exactly one label per node. Node ids are dense integers 0..n-1; label
strings are interned to dense integer ids in first-seen order.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from .errors import GraphFormatError, OracleLimitError


class LabeledGraph:
    """Immutable undirected node-labeled graph.

    Attributes:
        labels: tuple mapping node id -> label id.
        adj: tuple mapping node id -> sorted tuple of neighbor ids.
        label_names: tuple mapping label id -> original label string.
    """

    __slots__ = ("labels", "adj", "label_names", "_adj_sets")

    def __init__(
        self,
        labels: Sequence[int],
        edges: Iterable[tuple[int, int]],
        label_names: Sequence[str],
    ):
        n = len(labels)
        names = tuple(label_names)
        if len(set(names)) != len(names):
            raise GraphFormatError("label names must be distinct")
        for u, lid in enumerate(labels):
            if not 0 <= lid < len(names):
                raise GraphFormatError(f"node {u} has label id {lid} outside universe")
        neighbor_sets: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u}, {v}) references unknown node")
            if u == v:
                raise GraphFormatError(f"self-loop on node {u}")
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
        object.__setattr__(self, "labels", tuple(labels))
        object.__setattr__(self, "adj", tuple(tuple(sorted(s)) for s in neighbor_sets))
        object.__setattr__(self, "label_names", names)
        object.__setattr__(self, "_adj_sets", tuple(frozenset(s) for s in neighbor_sets))

    def __setattr__(self, name, value):
        raise AttributeError("LabeledGraph is immutable")

    def __getstate__(self):
        return (self.labels, self.adj, self.label_names, self._adj_sets)

    def __setstate__(self, state):
        for name, value in zip(self.__slots__, state):
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def num_labels(self) -> int:
        return len(self.label_names)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adj[u]

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj_sets[u]

    def label_name(self, u: int) -> str:
        return self.label_names[self.labels[u]]

    def label_id(self, name: str) -> int | None:
        try:
            return self.label_names.index(name)
        except ValueError:
            return None

    def label_class(self, label_id: int) -> tuple[int, ...]:
        return tuple(u for u in range(self.n) if self.labels[u] == label_id)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each undirected edge once as (u, v) with u < v, sorted."""
        for u in range(self.n):
            for v in self.adj[u]:
                if v > u:
                    yield (u, v)

    def with_labels(self, labels: Sequence[int]) -> "LabeledGraph":
        """New graph with the same topology and a replacement label array."""
        if len(labels) != self.n:
            raise GraphFormatError("replacement labels must cover every node")
        return LabeledGraph(labels, self.edges(), self.label_names)

    def check_node(self, u: int) -> None:
        if not isinstance(u, int) or not 0 <= u < self.n:
            raise GraphFormatError(f"invalid node id {u!r} (graph has {self.n} nodes)")

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.adj == other.adj
            and self.label_names == other.label_names
        )

    def __hash__(self):
        return hash((self.labels, self.adj, self.label_names))

    def __repr__(self) -> str:
        return (
            f"LabeledGraph(n={self.n}, edges={self.edge_count}, "
            f"labels={len(self.label_names)})"
        )


def _clean_lines(lines: Iterable[str]) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, stripped content), skipping blanks/comments."""
    for i, raw in enumerate(lines, start=1):
        line = raw.lstrip("﻿").strip()
        if not line or line.startswith("#"):
            continue
        yield i, line


def load_graph(
    edge_lines: Iterable[str],
    label_lines: Iterable[str],
    *,
    edge_name: str = "edge input",
    label_name: str = "label input",
) -> LabeledGraph:
    """Build a graph from line-oriented edge and label sources.

    Edge lines hold two whitespace-separated non-negative integer ids;
    label lines hold an id and a label string. `#` comments and blank
    lines are ignored. Node ids must densely cover 0..n-1 in the label
    source. Duplicate and reversed-duplicate edges collapse to one edge;
    self-loops are rejected.
    """
    node_label: dict[int, str] = {}
    interner: dict[str, int] = {}
    names: list[str] = []
    for lineno, line in _clean_lines(label_lines):
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise GraphFormatError(f"{label_name} line {lineno}: expected 'id label'")
        try:
            node = int(parts[0])
        except ValueError:
            raise GraphFormatError(
                f"{label_name} line {lineno}: node id {parts[0]!r} is not an integer"
            ) from None
        if node < 0:
            raise GraphFormatError(f"{label_name} line {lineno}: negative node id {node}")
        label = parts[1].strip()
        if node in node_label:
            raise GraphFormatError(
                f"{label_name} line {lineno}: node {node} labeled more than once"
            )
        node_label[node] = label
        if label not in interner:
            interner[label] = len(names)
            names.append(label)

    if not node_label:
        raise GraphFormatError(f"{label_name}: no labeled nodes")
    n = max(node_label) + 1
    labels: list[int] = []
    for u in range(n):
        if u not in node_label:
            raise GraphFormatError(f"node {u} has no label (ids must be dense 0..{n - 1})")
        labels.append(interner[node_label[u]])

    edges: list[tuple[int, int]] = []
    for lineno, line in _clean_lines(edge_lines):
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"{edge_name} line {lineno}: expected 'u v'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(
                f"{edge_name} line {lineno}: node ids must be integers"
            ) from None
        if u == v:
            raise GraphFormatError(f"{edge_name} line {lineno}: self-loop on node {u}")
        for w in (u, v):
            if w < 0 or w >= n or w not in node_label:
                raise GraphFormatError(
                    f"{edge_name} line {lineno}: node {w} has no label line"
                )
        edges.append((u, v))

    return LabeledGraph(labels, edges, names)


def load_graph_files(edge_path, label_path) -> LabeledGraph:
    """Load a graph from file paths (UTF-8, byte-order-mark tolerant)."""
    with open(edge_path, encoding="utf-8-sig") as ef:
        edge_lines = ef.readlines()
    with open(label_path, encoding="utf-8-sig") as lf:
        label_lines = lf.readlines()
    return load_graph(
        edge_lines, label_lines, edge_name=str(edge_path), label_name=str(label_path)
    )


def write_graph_files(g: LabeledGraph, edge_path, label_path) -> None:
    """Write a graph in the edge-list / label-list format `load_graph` reads."""
    with open(edge_path, "w", encoding="utf-8") as ef:
        for u, v in g.edges():
            ef.write(f"{u}\t{v}\n")
    with open(label_path, "w", encoding="utf-8") as lf:
        for u in range(g.n):
            lf.write(f"{u}\t{g.label_name(u)}\n")


class Neighborhood:
    """Radius-r BFS ball around a center node with its induced edge set."""

    __slots__ = ("center", "radius", "members", "edges", "_adj")

    def __init__(self, center: int, radius: int, members: frozenset[int],
                 edges: tuple[tuple[int, int], ...]):
        self.center = center
        self.radius = radius
        self.members = members
        self.edges = edges
        self._adj = None

    def adjacency(self) -> dict[int, frozenset[int]]:
        """Induced adjacency over the member nodes (built once, then cached)."""
        if self._adj is None:
            adj: dict[int, set[int]] = {m: set() for m in self.members}
            for a, b in self.edges:
                adj[a].add(b)
                adj[b].add(a)
            self._adj = {m: frozenset(s) for m, s in adj.items()}
        return self._adj

    @property
    def node_count(self) -> int:
        return len(self.members)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return (
            f"Neighborhood(center={self.center}, r={self.radius}, "
            f"nodes={self.node_count}, edges={self.edge_count})"
        )


def neighborhood(g: LabeledGraph, u: int, r: int) -> Neighborhood:
    """All nodes within shortest-path distance r of u, with induced edges."""
    g.check_node(u)
    if r < 1:
        raise ValueError(f"neighborhood radius must be >= 1, got {r}")
    members = {u}
    frontier = [u]
    for _ in range(r):
        nxt = []
        for x in frontier:
            for y in g.adj[x]:
                if y not in members:
                    members.add(y)
                    nxt.append(y)
        if not nxt:
            break
        frontier = nxt
    edges = tuple(
        (a, b)
        for a in sorted(members)
        for b in g.adj[a]
        if b > a and b in members
    )
    return Neighborhood(u, r, frozenset(members), edges)


def are_automorphic_equivalent(
    g: LabeledGraph, u: int, v: int, *, node_limit: int = 10
) -> bool:
    """Exact automorphic-equivalence test by exhaustive bijection search.

    Test-support oracle: refuses graphs larger than `node_limit` nodes to
    prevent accidental exponential runs.
    """
    if g.n > node_limit:
        raise OracleLimitError(
            f"automorphism oracle limited to {node_limit} nodes, graph has {g.n}"
        )
    g.check_node(u)
    g.check_node(v)
    if u == v:
        return True
    if g.labels[u] != g.labels[v] or g.degree(u) != g.degree(v):
        return False

    nodes = [x for x in range(g.n) if x not in (u, v)]
    mapping: dict[int, int] = {u: v, v: u}
    used = {u, v}

    def consistent(x: int, fx: int) -> bool:
        for y, fy in mapping.items():
            if g.has_edge(x, y) != g.has_edge(fx, fy):
                return False
        return True

    if not consistent(u, v):
        return False

    def extend(i: int) -> bool:
        if i == len(nodes):
            return True
        x = nodes[i]
        for fx in range(g.n):
            if fx in used:
                continue
            if g.labels[fx] != g.labels[x] or g.degree(fx) != g.degree(x):
                continue
            if not consistent(x, fx):
                continue
            mapping[x] = fx
            used.add(fx)
            if extend(i + 1):
                return True
            del mapping[x]
            used.discard(fx)
        return False

    return extend(0)
