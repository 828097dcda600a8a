"""Center-rooted neighborhood patterns: canonical form, matching, mining.

A pattern is a small connected labeled graph with a distinguished center.
Patterns are held in a canonical node order (center first, then the
lexicographically minimal label/adjacency sequence), so byte equality of
`code` decides pattern equivalence.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from . import _parallel
from .errors import (
    BudgetExceededError,
    GraphFormatError,
    ParamsMismatchError,
    PartialMiningError,
)
from .graph import LabeledGraph, Neighborhood, neighborhood

MAX_PATTERN_NODES = 32


class NeighborhoodPattern:
    """Connected labeled graph with a center node, stored canonically.

    After construction, local node 0 is the center and `code` is a byte
    string identifying the equivalence class: two patterns are equivalent
    (label-preserving center-fixing isomorphism) iff their codes are equal.
    """

    __slots__ = ("labels", "edges", "center", "code", "_adj", "_order_plan")

    def __init__(self, labels, edges, center: int):
        labels = tuple(labels)
        k = len(labels)
        if k == 0:
            raise ValueError("pattern needs at least one node")
        if k > MAX_PATTERN_NODES:
            raise ValueError(f"pattern larger than {MAX_PATTERN_NODES} nodes")
        if not 0 <= center < k:
            raise ValueError(f"center {center} out of range for {k} nodes")
        edge_set = set()
        for a, b in edges:
            if a == b or not (0 <= a < k and 0 <= b < k):
                raise ValueError(f"bad pattern edge ({a}, {b})")
            edge_set.add((min(a, b), max(a, b)))
        adj = [set() for _ in range(k)]
        for a, b in edge_set:
            adj[a].add(b)
            adj[b].add(a)
        if not _connected(k, adj, center):
            raise ValueError("pattern must be connected")

        order = _canonical_order(labels, adj, center)
        pos = {x: p for p, x in enumerate(order)}
        self.labels = tuple(labels[x] for x in order)
        self.edges = tuple(
            sorted((min(pos[a], pos[b]), max(pos[a], pos[b])) for a, b in edge_set)
        )
        self.center = 0
        self._adj = None
        self._order_plan = None
        masks = [0] * k
        for a, b in self.edges:
            masks[b] |= 1 << a
        self.code = struct.pack(">B", k) + b"".join(
            struct.pack(">HI", self.labels[p], masks[p]) for p in range(k)
        )

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def adjacency(self) -> tuple[frozenset[int], ...]:
        if self._adj is None:
            adj = [set() for _ in range(self.node_count)]
            for a, b in self.edges:
                adj[a].add(b)
                adj[b].add(a)
            self._adj = tuple(frozenset(s) for s in adj)
        return self._adj

    def __eq__(self, other):
        if not isinstance(other, NeighborhoodPattern):
            return NotImplemented
        return self.code == other.code

    def __hash__(self):
        return hash(self.code)

    def __repr__(self):
        return (
            f"NeighborhoodPattern(nodes={self.node_count}, edges={self.edge_count}, "
            f"labels={self.labels})"
        )


def _connected(k: int, adj, start: int) -> bool:
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == k


def _canonical_order(labels, adj, center: int) -> list[int]:
    """Node order minimizing the (label, back-adjacency-mask) token string.

    Position 0 is pinned to the center; remaining positions are chosen by
    branch-and-bound over all orders, pruning any prefix that already
    compares worse than the best complete order found.
    """
    k = len(labels)
    if k == 1:
        return [center]
    best: list[int] | None = None
    best_order: list[int] | None = None
    pos: dict[int, int] = {center: 0}
    order = [center]
    tokens = [labels[center] << k]

    def rec(tight: bool) -> None:
        nonlocal best, best_order
        d = len(order)
        if d == k:
            if best is None or tokens < best:
                best = list(tokens)
                best_order = list(order)
            return
        cands = []
        for x in range(k):
            if x in pos:
                continue
            mask = 0
            for y in adj[x]:
                p = pos.get(y)
                if p is not None:
                    mask |= 1 << p
            cands.append(((labels[x] << k) | mask, x))
        cands.sort()
        for tok, x in cands:
            child_tight = False
            if best is not None and tight:
                if tok > best[d]:
                    break
                child_tight = tok == best[d]
            pos[x] = d
            order.append(x)
            tokens.append(tok)
            rec(child_tight)
            tokens.pop()
            order.pop()
            del pos[x]

    rec(True)
    return best_order


def canonical_code(p: NeighborhoodPattern) -> bytes:
    """Byte representative of the pattern's equivalence class."""
    return p.code


def single_node_pattern(label: int) -> NeighborhoodPattern:
    return NeighborhoodPattern((label,), (), 0)


class _NhIndex:
    """Per-neighborhood lookup tables reused across many pattern tests."""

    __slots__ = ("center", "adj", "labels", "label_counts", "by_label")

    def __init__(self, g: LabeledGraph, nh: Neighborhood):
        self.center = nh.center
        self.adj = nh.adjacency()
        self.labels = {m: g.labels[m] for m in nh.members}
        counts: dict[int, int] = {}
        by_label: dict[int, list[int]] = {}
        for m in sorted(nh.members):
            l = self.labels[m]
            counts[l] = counts.get(l, 0) + 1
            by_label.setdefault(l, []).append(m)
        self.label_counts = counts
        self.by_label = by_label


def _nh_index(g: LabeledGraph, nh) -> _NhIndex:
    if isinstance(nh, _NhIndex):
        return nh
    return _NhIndex(g, nh)


def _match_plan(p: NeighborhoodPattern):
    """Static matching order: center first, then most-anchored nodes.

    Returns, per position, the pattern node and the positions of its
    already-placed pattern neighbors (non-empty for every position > 0
    because patterns are connected).
    """
    if p._order_plan is not None:
        return p._order_plan
    adj = p.adjacency()
    k = p.node_count
    placed = [0]
    placed_set = {0}
    plan = [(0, ())]
    while len(placed) < k:
        cand_best = None
        for x in range(k):
            if x in placed_set:
                continue
            anchors = tuple(i for i, px in enumerate(placed) if px in adj[x])
            if not anchors:
                continue
            key = (-len(anchors), -len(adj[x]), x)
            if cand_best is None or key < cand_best[0]:
                cand_best = (key, x, anchors)
        _, x, anchors = cand_best
        plan.append((x, anchors))
        placed.append(x)
        placed_set.add(x)
    p._order_plan = tuple(plan)
    return p._order_plan


def ns_isomorphic(
    p: NeighborhoodPattern,
    nh: Neighborhood | _NhIndex,
    g: LabeledGraph,
    *,
    state_budget: int = 10_000_000,
    return_mapping: bool = False,
):
    """Test whether the pattern embeds into the neighborhood.

    An embedding is an injective map of pattern nodes to neighborhood
    members that preserves labels and pattern edges and sends the pattern
    center to the neighborhood center. Returns a bool, or (bool, mapping)
    when `return_mapping` is set; the mapping lists the image of each
    pattern-local node. Search is complete; exceeding `state_budget`
    raises instead of returning a wrong answer.
    """
    idx = _nh_index(g, nh)
    if p.labels[0] != idx.labels.get(idx.center):
        return (False, None) if return_mapping else False
    if p.node_count > len(idx.labels):
        return (False, None) if return_mapping else False
    need: dict[int, int] = {}
    for l in p.labels:
        need[l] = need.get(l, 0) + 1
    for l, c in need.items():
        if idx.label_counts.get(l, 0) < c:
            return (False, None) if return_mapping else False

    plan = _match_plan(p)
    k = p.node_count
    images = [-1] * k
    images[0] = idx.center
    used = {idx.center}
    nh_adj = idx.adj
    labels = p.labels
    states = 0

    def extend(i: int) -> bool:
        nonlocal states
        if i == len(plan):
            return True
        x, anchors = plan[i]
        want = labels[x]
        anchor_sets = [nh_adj[images[a_pos]] for a_pos in _anchor_nodes(plan, anchors)]
        base = min(anchor_sets, key=len)
        for cand in base:
            if cand in used or idx.labels[cand] != want:
                continue
            ok = True
            for s in anchor_sets:
                if cand not in s:
                    ok = False
                    break
            if not ok:
                continue
            states += 1
            if states > state_budget:
                raise BudgetExceededError(
                    f"pattern match exceeded state budget {state_budget}"
                )
            images[x] = cand
            used.add(cand)
            if extend(i + 1):
                return True
            used.discard(cand)
            images[x] = -1
        return False

    found = extend(1)
    if return_mapping:
        return (found, list(images) if found else None)
    return found


def _anchor_nodes(plan, anchors):
    return [plan[a][0] for a in anchors]


@dataclass(frozen=True)
class MiningConfig:
    """Support threshold, pattern-size cap, and neighborhood radius."""

    tau: int
    max_edges: int
    radius: int = 2

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if self.max_edges < 1:
            raise ValueError(f"max_edges must be >= 1, got {self.max_edges}")
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")


class PatternSet:
    """Frequent patterns ordered by canonical code, with their supports.

    `support` maps canonical code -> frozenset of nodes whose neighborhood
    the pattern embeds into; it is None for sets loaded from files, in
    which case membership falls back to explicit matching.
    """

    __slots__ = ("patterns", "support", "radius", "tau", "_edge_by_code")

    def __init__(self, patterns, support, radius: int, tau: int | None):
        self.patterns = tuple(sorted(patterns, key=lambda p: p.code))
        codes = [p.code for p in self.patterns]
        if len(set(codes)) != len(codes):
            raise ValueError("duplicate pattern codes in set")
        self.support = dict(support) if support is not None else None
        self.radius = radius
        self.tau = tau
        self._edge_by_code = None

    def edge_count_by_code(self) -> dict[bytes, int]:
        if self._edge_by_code is None:
            self._edge_by_code = {p.code: p.edge_count for p in self.patterns}
        return self._edge_by_code

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)


_MINE_STATE: tuple | None = None


def _support_worker(job):
    cand_idx, pattern, nodes = job
    g, indexes, budget = _MINE_STATE
    sup = [u for u in nodes if ns_isomorphic(pattern, indexes[u], g, state_budget=budget)]
    return cand_idx, sup


def _pattern_extensions(p: NeighborhoodPattern, num_labels: int):
    """All patterns reachable by adding one edge (closing or leaf-adding)."""
    k = p.node_count
    adj = p.adjacency()
    out = []
    for a in range(k):
        for b in range(a + 1, k):
            if b not in adj[a]:
                out.append(NeighborhoodPattern(p.labels, p.edges + ((a, b),), 0))
    for attach in range(k):
        for l in range(num_labels):
            out.append(
                NeighborhoodPattern(p.labels + (l,), p.edges + ((attach, k),), 0)
            )
    return out


def mine_patterns(
    g: LabeledGraph,
    cfg: MiningConfig,
    *,
    workers: int = 1,
    state_budget: int = 10_000_000,
) -> PatternSet:
    """All frequent center-rooted connected patterns with 1..max_edges edges.

    A pattern's support is the number of graph nodes whose radius-r
    neighborhood it embeds into (each node counted once regardless of how
    many embeddings exist). Grown level by level: level m candidates are
    one-edge extensions of frequent level m-1 patterns, which is complete
    because every connected center-rooted pattern loses either a leaf edge
    or a cycle edge and stays connected and center-rooted.

    Budget exhaustion raises PartialMiningError carrying the levels that
    finished; output is never silently truncated.
    """
    global _MINE_STATE
    indexes = [_NhIndex(g, neighborhood(g, u, cfg.radius)) for u in range(g.n)]

    frequent: dict[bytes, tuple[NeighborhoodPattern, frozenset[int]]] = {}
    level: dict[bytes, tuple[NeighborhoodPattern, frozenset[int]]] = {}
    acc: dict[bytes, tuple[NeighborhoodPattern, set[int]]] = {}
    for u in range(g.n):
        lc = g.labels[u]
        for nlabel in {g.labels[w] for w in g.adj[u]}:
            p = NeighborhoodPattern((lc, nlabel), ((0, 1),), 0)
            entry = acc.get(p.code)
            if entry is None:
                acc[p.code] = (p, {u})
            else:
                entry[1].add(u)
    for code in sorted(acc):
        p, sup = acc[code]
        if len(sup) >= cfg.tau:
            level[code] = (p, frozenset(sup))
    frequent.update(level)

    def finish_partial(exc):
        kept = [(p, sup) for p, sup in frequent.values()]
        partial = PatternSet(
            [p for p, _ in kept],
            {p.code: sup for p, sup in kept},
            cfg.radius,
            cfg.tau,
        )
        raise PartialMiningError(
            f"mining stopped early: {exc}", partial
        ) from exc

    for _ in range(2, cfg.max_edges + 1):
        if not level:
            break
        cands: dict[bytes, tuple[NeighborhoodPattern, set[int]]] = {}
        for code in sorted(level):
            parent, parent_sup = level[code]
            for child in _pattern_extensions(parent, g.num_labels):
                entry = cands.get(child.code)
                if entry is None:
                    cands[child.code] = (child, set(parent_sup))
                else:
                    entry[1].intersection_update(parent_sup)
        jobs = []
        for i, code in enumerate(sorted(cands)):
            child, cand_nodes = cands[code]
            if len(cand_nodes) >= cfg.tau:
                jobs.append((i, child, sorted(cand_nodes)))
        try:
            if workers > 1:
                _MINE_STATE = (g, indexes, state_budget)
                try:
                    results = _parallel.fork_map(_support_worker, jobs, workers)
                finally:
                    _MINE_STATE = None
            else:
                _MINE_STATE = (g, indexes, state_budget)
                try:
                    results = [_support_worker(job) for job in jobs]
                finally:
                    _MINE_STATE = None
        except BudgetExceededError as exc:
            finish_partial(exc)
        next_level = {}
        by_idx = {i: sup for i, sup in results}
        for (i, child, _nodes) in jobs:
            sup = by_idx[i]
            if len(sup) >= cfg.tau:
                next_level[child.code] = (child, frozenset(sup))
        level = next_level
        frequent.update(level)

    return PatternSet(
        [p for p, _ in frequent.values()],
        {p.code: sup for p, sup in frequent.values()},
        cfg.radius,
        cfg.tau,
    )


def pattern_memberships(
    g: LabeledGraph,
    pset: PatternSet,
    u: int,
    *,
    nh: Neighborhood | _NhIndex | None = None,
    state_budget: int = 10_000_000,
) -> frozenset[bytes]:
    """Codes of the set's patterns embedding into u's neighborhood."""
    if pset.support is not None:
        return frozenset(code for code, sup in pset.support.items() if u in sup)
    if nh is None:
        nh = neighborhood(g, u, pset.radius)
    idx = _nh_index(g, nh)
    return frozenset(
        p.code for p in pset.patterns if ns_isomorphic(p, idx, g, state_budget=state_budget)
    )


def sim_np(
    u: int,
    v: int,
    pset: PatternSet,
    g: LabeledGraph,
    r: int,
    *,
    memberships=None,
) -> float:
    """Total edge count of set patterns embedding into both neighborhoods.

    Equals the inner product of feature vectors whose j-th entry is
    sqrt(edge count of pattern j) when pattern j matches, 0 otherwise.
    `memberships` may supply a precomputed node -> codes map.
    """
    if r != pset.radius:
        raise ParamsMismatchError(
            f"pattern set mined at radius {pset.radius}, requested {r}"
        )
    if memberships is not None:
        mu, mv = memberships[u], memberships[v]
    else:
        mu = pattern_memberships(g, pset, u)
        mv = pattern_memberships(g, pset, v)
    weights = pset.edge_count_by_code()
    return float(sum(weights[c] for c in mu & mv))


def write_pattern_set(path, pset: PatternSet, g: LabeledGraph) -> None:
    """Write the exchange format: header, then one block per pattern."""
    with open(path, "w", encoding="utf-8") as fp:
        tau = pset.tau if pset.tau is not None else 1
        fp.write(f"#patterns r={pset.radius} tau={tau}\n")
        for p in pset.patterns:
            fp.write(f"P {p.node_count} {p.edge_count} {p.center}\n")
            for i, l in enumerate(p.labels):
                fp.write(f"N {i} {g.label_names[l]}\n")
            for a, b in p.edges:
                fp.write(f"E {a} {b}\n")


def read_pattern_set(path, g: LabeledGraph) -> PatternSet:
    """Load a pattern-set file; patterns with labels absent from the graph
    are rejected (they could never match and usually indicate a mixup)."""
    name_to_id = {name: i for i, name in enumerate(g.label_names)}
    with open(path, encoding="utf-8-sig") as fp:
        lines = [ln.rstrip("\n") for ln in fp]
    if not lines or not lines[0].startswith("#patterns"):
        raise GraphFormatError(f"{path}: missing '#patterns' header")
    fields = dict(tok.split("=", 1) for tok in lines[0].split()[1:] if "=" in tok)
    try:
        radius = int(fields["r"])
        tau = int(fields["tau"])
    except (KeyError, ValueError):
        raise GraphFormatError(f"{path}: header must carry r= and tau=") from None

    patterns = []
    i = 1
    try:
        while i < len(lines):
            line = lines[i].strip()
            if not line:
                i += 1
                continue
            parts = line.split()
            if parts[0] != "P" or len(parts) != 4:
                raise GraphFormatError(f"{path} line {i + 1}: expected 'P k m center'")
            k, m, center = int(parts[1]), int(parts[2]), int(parts[3])
            labels: list[int | None] = [None] * k
            for j in range(k):
                nparts = lines[i + 1 + j].split(None, 2)
                if len(nparts) != 3 or nparts[0] != "N":
                    raise GraphFormatError(f"{path} line {i + 2 + j}: expected 'N id label'")
                local = int(nparts[1])
                if not 0 <= local < k:
                    raise GraphFormatError(f"{path} line {i + 2 + j}: node id {local} out of range")
                lid = name_to_id.get(nparts[2].strip())
                if lid is None:
                    raise GraphFormatError(
                        f"{path} line {i + 2 + j}: label {nparts[2]!r} not in graph"
                    )
                labels[local] = lid
            if any(l is None for l in labels):
                raise GraphFormatError(f"{path} line {i + 1}: pattern nodes not all labeled")
            edges = []
            for j in range(m):
                eparts = lines[i + 1 + k + j].split()
                if len(eparts) != 3 or eparts[0] != "E":
                    raise GraphFormatError(f"{path} line {i + 2 + k + j}: expected 'E a b'")
                edges.append((int(eparts[1]), int(eparts[2])))
            patterns.append(NeighborhoodPattern(labels, edges, center))
            i += 1 + k + m
    except (IndexError, ValueError) as exc:
        raise GraphFormatError(f"{path}: truncated or malformed pattern block: {exc}") from None
    return PatternSet(patterns, None, radius, tau)
