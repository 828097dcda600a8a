"""Exact walk counting on a labeled graph and on the implicit product graph.

All counts are exact integers. Counts above the 64-bit unsigned range are
treated as overflow and raise, rather than silently degrading to floats.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetExceededError
from .graph import LabeledGraph

U64_MAX = 2**64 - 1


def _check_counts(counts: dict, where: str) -> None:
    for c in counts.values():
        if c > U64_MAX:
            raise OverflowError(f"walk count exceeds 64-bit range in {where}")


@dataclass(frozen=True)
class WalkCountTable:
    """Counts of walks of a fixed length from one source node.

    counts[t] is the exact number of walks of length `depth` from `source`
    to t; unreachable targets are absent.
    """

    source: int
    depth: int
    counts: dict[int, int]


def walk_counts(g: LabeledGraph, source: int, max_depth: int) -> list[WalkCountTable]:
    """Tables of walk counts for every length 1..max_depth from `source`.

    Computed by the recurrence count_i(t) = sum over neighbors s of t of
    count_{i-1}(s), never by dense matrix powers.
    """
    g.check_node(source)
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    tables = []
    prev = {source: 1}
    for depth in range(1, max_depth + 1):
        cur: dict[int, int] = {}
        for s, c in prev.items():
            for t in g.adj[s]:
                cur[t] = cur.get(t, 0) + c
        _check_counts(cur, f"walk_counts depth {depth}")
        tables.append(WalkCountTable(source, depth, cur))
        prev = cur
    return tables


def product_walk_counts(
    g: LabeledGraph,
    u: int,
    v: int,
    max_depth: int,
    *,
    state_budget: int = 500_000,
) -> list[int]:
    """Per-depth totals of label-matched walk pairs starting at (u, v).

    Entry i-1 is the number of pairs (W1 from u, W2 from v), both of length
    i, whose label sequences are identical; equivalently the row sum of the
    i-th power of the product-graph adjacency at the pair node (u, v). The
    product graph is never materialized: a synchronized BFS runs over pair
    states, bounded by `state_budget` live states per level.
    """
    g.check_node(u)
    g.check_node(v)
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    totals: list[int] = []
    if g.labels[u] != g.labels[v]:
        return [0] * max_depth
    labels = g.labels
    frontier: dict[tuple[int, int], int] = {(u, v): 1}
    for depth in range(1, max_depth + 1):
        nxt: dict[tuple[int, int], int] = {}
        for (a, b), c in frontier.items():
            for a2 in g.adj[a]:
                la2 = labels[a2]
                for b2 in g.adj[b]:
                    if labels[b2] == la2:
                        key = (a2, b2)
                        nxt[key] = nxt.get(key, 0) + c
        if len(nxt) > state_budget:
            raise BudgetExceededError(
                f"pair walk states ({len(nxt)}) exceed budget {state_budget} "
                f"at depth {depth} for pair ({u}, {v})"
            )
        _check_counts(nxt, f"product walks depth {depth}")
        totals.append(sum(nxt.values()))
        frontier = nxt
    return totals


def product_walk_count(
    g: LabeledGraph, u: int, v: int, depth: int, *, state_budget: int = 500_000
) -> int:
    """Label-matched walk-pair count for a single depth (see plural form)."""
    return product_walk_counts(g, u, v, depth, state_budget=state_budget)[depth - 1]
