"""Maximum common neighborhood pattern between two nodes.

The similarity value is the edge count of the largest connected pattern
embedding into both neighborhoods with the two centers mapped to each
other. Deciding it is NP-hard in general, so the solver is a bounded
branch-and-bound over partial center-anchored pair mappings; exhausting
the budget yields a result explicitly flagged as a lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OracleLimitError
from .graph import LabeledGraph, neighborhood
from .patterns import NeighborhoodPattern, single_node_pattern


@dataclass(frozen=True)
class McnpResult:
    """Edge count of the best common pattern found, with exactness flag.

    When `exact` is False the search budget ran out and `value` is only a
    lower bound; callers must not treat it as the true similarity.
    """

    value: int
    exact: bool
    witness: NeighborhoodPattern | None


class _Exhausted(Exception):
    pass


def sim_mcnp(
    u: int,
    v: int,
    g: LabeledGraph,
    r: int,
    *,
    state_budget: int = 10_000_000,
) -> McnpResult:
    """Branch-and-bound search for the maximum common neighborhood pattern.

    Mappings are grown only along edges common to both neighborhoods, so
    every explored pattern is connected and anchored at the pair (u, v).
    The bound prunes branches whose remaining matchable edges cannot beat
    the incumbent.
    """
    g.check_node(u)
    g.check_node(v)
    if g.labels[u] != g.labels[v]:
        return McnpResult(0, True, None)
    nh_u = neighborhood(g, u, r)
    nh_v = neighborhood(g, v, r)
    adj_u = nh_u.adjacency()
    adj_v = nh_v.adjacency()
    labels = g.labels

    pairs: list[tuple[int, int]] = [(u, v)]
    mapped_a: dict[int, int] = {u: v}
    mapped_b = {v}
    best_value = 0
    best_pairs: list[tuple[int, int]] = [(u, v)]
    states = 0

    def avail_edges(edges, mapped) -> int:
        return sum(1 for a, b in edges if a not in mapped or b not in mapped)

    def run(cur_edges: int, excluded: set[tuple[int, int]]) -> None:
        nonlocal best_value, best_pairs, states
        states += 1
        if states > state_budget:
            raise _Exhausted
        if cur_edges > best_value:
            best_value = cur_edges
            best_pairs = list(pairs)
        cands = []
        for x, y in pairs:
            for a in adj_u[x]:
                if a in mapped_a:
                    continue
                la = labels[a]
                for b in adj_v[y]:
                    if b in mapped_b or labels[b] != la:
                        continue
                    c = (a, b)
                    if c not in excluded:
                        cands.append(c)
        if not cands:
            return
        remaining = min(
            avail_edges(nh_u.edges, mapped_a), avail_edges(nh_v.edges, mapped_b)
        )
        if cur_edges + remaining <= best_value:
            return
        scored = []
        for a, b in set(cands):
            gain = sum(
                1 for x, y in pairs if a in adj_u[x] and b in adj_v[y]
            )
            scored.append((-gain, a, b))
        scored.sort()
        added_excl = []
        for neg_gain, a, b in scored:
            pairs.append((a, b))
            mapped_a[a] = b
            mapped_b.add(b)
            run(cur_edges - neg_gain, excluded)
            pairs.pop()
            del mapped_a[a]
            mapped_b.discard(b)
            excluded.add((a, b))
            added_excl.append((a, b))
        for c in added_excl:
            excluded.discard(c)

    exact = True
    try:
        run(0, set())
    except _Exhausted:
        exact = False

    witness = _witness_pattern(g, best_pairs, adj_u, adj_v)
    return McnpResult(best_value, exact, witness)


def _witness_pattern(g, pairs, adj_u, adj_v) -> NeighborhoodPattern:
    if len(pairs) == 1:
        return single_node_pattern(g.labels[pairs[0][0]])
    local = {ab: i for i, ab in enumerate(pairs)}
    labels = [g.labels[a] for a, _ in pairs]
    edges = []
    for i, (a, b) in enumerate(pairs):
        for j in range(i + 1, len(pairs)):
            a2, b2 = pairs[j]
            if a2 in adj_u[a] and b2 in adj_v[b]:
                edges.append((i, j))
    return NeighborhoodPattern(labels, edges, local[pairs[0]])


def mcnp_bruteforce(
    u: int, v: int, g: LabeledGraph, r: int, *, node_limit: int = 8
) -> int:
    """Exhaustive maximum over all anchored injective label-preserving maps.

    Test-support oracle: enumerates every partial mapping of the first
    neighborhood into the second (with u mapped to v) and evaluates the
    connected common subgraph through the centers; refuses neighborhoods
    larger than `node_limit` nodes.
    """
    g.check_node(u)
    g.check_node(v)
    if g.labels[u] != g.labels[v]:
        return 0
    nh_u = neighborhood(g, u, r)
    nh_v = neighborhood(g, v, r)
    if nh_u.node_count > node_limit or nh_v.node_count > node_limit:
        raise OracleLimitError(
            f"brute-force oracle limited to {node_limit}-node neighborhoods"
        )
    adj_u = nh_u.adjacency()
    adj_v = nh_v.adjacency()
    labels = g.labels
    a_nodes = sorted(x for x in nh_u.members if x != u)
    b_by_label: dict[int, list[int]] = {}
    for y in sorted(nh_v.members):
        if y != v:
            b_by_label.setdefault(labels[y], []).append(y)

    best = 0
    mapping: dict[int, int] = {u: v}
    used: set[int] = set()

    def evaluate() -> int:
        # connected component of (u, v) in the common-edge graph
        items = list(mapping.items())
        comp_adj: dict[int, list[int]] = {a: [] for a, _ in items}
        for i, (a, b) in enumerate(items):
            for a2, b2 in items[i + 1 :]:
                if a2 in adj_u[a] and b2 in adj_v[b]:
                    comp_adj[a].append(a2)
                    comp_adj[a2].append(a)
        seen = {u}
        stack = [u]
        edges = 0
        while stack:
            x = stack.pop()
            for y in comp_adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        for a in seen:
            for a2 in comp_adj[a]:
                if a2 in seen:
                    edges += 1
        return edges // 2

    def rec(i: int) -> None:
        nonlocal best
        if i == len(a_nodes):
            score = evaluate()
            if score > best:
                best = score
            return
        a = a_nodes[i]
        rec(i + 1)
        for b in b_by_label.get(labels[a], ()):  # same-label images only
            if b in used:
                continue
            mapping[a] = b
            used.add(b)
            rec(i + 1)
            del mapping[a]
            used.discard(b)

    rec(0)
    return best
