"""Walk-derived feature vectors and the two inner-product similarities.

Two feature families are built from walks leaving a node:

* labeled-walk vectors: one entry per label sequence instantiated by a
  walk of length 1..r starting at the node;
* k-hop neighbor vectors: per depth i, the multiset of length-i walk
  endpoints aggregated by label.

Both similarities are plain inner products after per-depth decay weights
are applied. Underlying counts stay exact integers; the sqrt-decay
weighting is folded in only at dot-product or serialization time, which
is observationally identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _parallel
from .errors import BudgetExceededError, GraphFormatError, ParamsMismatchError
from .graph import LabeledGraph
from .walks import U64_MAX, product_walk_counts

MAX_RADIUS = 4


@dataclass(frozen=True)
class SimilarityParams:
    """Walk-length cap r and per-length decay weights lambda_1..lambda_r.

    Weights are non-negative and sum to 1. The default construction uses a
    geometric decay alpha^i normalized over i = 1..r.
    """

    r: int
    lambdas: tuple[float, ...]
    alpha: float | None = None

    def __post_init__(self):
        if not isinstance(self.r, int) or self.r < 1:
            raise ValueError(f"radius r must be an integer >= 1, got {self.r!r}")
        if self.r > MAX_RADIUS:
            raise ValueError(f"radius r={self.r} exceeds configured maximum {MAX_RADIUS}")
        if len(self.lambdas) != self.r:
            raise ValueError("need exactly one lambda per walk length 1..r")
        if any(l < 0 for l in self.lambdas):
            raise ValueError("lambdas must be non-negative")
        if abs(sum(self.lambdas) - 1.0) > 1e-12:
            raise ValueError(f"lambdas must sum to 1, got {sum(self.lambdas)!r}")

    @classmethod
    def from_alpha(cls, r: int = 2, alpha: float = 0.5) -> "SimilarityParams":
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {alpha}")
        if not isinstance(r, int) or r < 1:
            raise ValueError(f"radius r must be an integer >= 1, got {r!r}")
        z = sum(alpha**i for i in range(1, r + 1))
        return cls(r, tuple(alpha**i / z for i in range(1, r + 1)), alpha)

    @classmethod
    def from_lambdas(cls, lambdas) -> "SimilarityParams":
        return cls(len(lambdas), tuple(float(l) for l in lambdas), None)

    def same_as(self, other: "SimilarityParams") -> bool:
        return self.r == other.r and self.lambdas == other.lambdas


def _ensure_same_params(a, b, what: str) -> None:
    if not a.params.same_as(b.params):
        raise ParamsMismatchError(f"{what} built under different parameters")


class LWFeatureVector:
    """Sparse labeled-walk feature vector of one node.

    Keys are label-id sequences of length 2..r+1 (the labels along a walk
    of length 1..r, starting with the owner's label). `counts` holds exact
    integer walk counts when built in-process; vectors loaded from disk
    carry only the sqrt-weighted float entries.
    """

    __slots__ = ("owner", "params", "counts", "_weighted")

    def __init__(self, owner: int, params: SimilarityParams,
                 counts: dict[tuple[int, ...], int] | None,
                 weighted: dict[tuple[int, ...], float] | None = None):
        self.owner = owner
        self.params = params
        self.counts = counts
        self._weighted = weighted

    def entries(self) -> dict[tuple[int, ...], float]:
        """Weighted view: key -> sqrt(lambda_len) * count."""
        if self._weighted is None:
            lam = self.params.lambdas
            self._weighted = {
                key: math.sqrt(lam[len(key) - 2]) * c for key, c in self.counts.items()
            }
        return self._weighted

    def __len__(self) -> int:
        return len(self.counts if self.counts is not None else self._weighted)


class KNFeatureVector:
    """Per-depth label histograms of walk endpoints for one node.

    levels[i-1][l] is the exact number of length-i walks from the owner
    ending at a node labeled l. Decay weights are applied at dot-product
    time so the levels stay integers.
    """

    __slots__ = ("owner", "params", "levels", "_weighted")

    def __init__(self, owner: int, params: SimilarityParams,
                 levels: tuple[tuple[int, ...], ...] | None,
                 weighted: dict[tuple[int, int], float] | None = None):
        self.owner = owner
        self.params = params
        self.levels = levels
        self._weighted = weighted

    def entries(self) -> dict[tuple[int, int], float]:
        """Weighted view: (depth, label) -> sqrt(lambda_depth) * count."""
        if self._weighted is None:
            lam = self.params.lambdas
            self._weighted = {
                (i + 1, l): math.sqrt(lam[i]) * c
                for i, level in enumerate(self.levels)
                for l, c in enumerate(level)
                if c
            }
        return self._weighted


def _lw_counts(g: LabeledGraph, u: int, r: int, state_budget: int) -> dict:
    labels = g.labels
    counts: dict[tuple[int, ...], int] = {}
    frontier: dict[tuple[int, tuple[int, ...]], int] = {(u, (labels[u],)): 1}
    for _ in range(r):
        nxt: dict[tuple[int, tuple[int, ...]], int] = {}
        for (node, seq), c in frontier.items():
            for w in g.adj[node]:
                key = (w, seq + (labels[w],))
                nxt[key] = nxt.get(key, 0) + c
        if len(nxt) > state_budget:
            raise BudgetExceededError(
                f"labeled-walk states for node {u} exceed budget {state_budget}"
            )
        for (node, seq), c in nxt.items():
            total = counts.get(seq, 0) + c
            if total > U64_MAX:
                raise OverflowError(f"labeled-walk count overflow at node {u}")
            counts[seq] = total
        frontier = nxt
    return counts


_FORK_STATE: tuple | None = None


def _lw_worker(nodes: list[int]) -> list[tuple[int, dict]]:
    g, r, budget = _FORK_STATE
    return [(u, _lw_counts(g, u, r, budget)) for u in nodes]


def build_lw_features(
    g: LabeledGraph,
    params: SimilarityParams,
    *,
    workers: int = 1,
    state_budget: int = 1_000_000,
) -> dict[int, LWFeatureVector]:
    """Labeled-walk feature vectors for every node.

    Walks of length <= r never leave the radius-r ball of their start node,
    so enumeration runs on the full graph without extracting subgraphs.
    """
    global _FORK_STATE
    nodes = list(range(g.n))
    if workers > 1 and g.n > 1:
        _FORK_STATE = (g, params.r, state_budget)
        try:
            chunks = _parallel.chunked(nodes, workers)
            results = _parallel.fork_map(_lw_worker, chunks, workers)
        finally:
            _FORK_STATE = None
        pairs = [p for chunk in results for p in chunk]
    else:
        pairs = [(u, _lw_counts(g, u, params.r, state_budget)) for u in nodes]
    return {u: LWFeatureVector(u, params, counts) for u, counts in pairs}


def build_kn_features(
    g: LabeledGraph, params: SimilarityParams
) -> dict[int, KNFeatureVector]:
    """k-hop neighbor feature vectors for every node.

    Computed by r rounds of the neighbor-aggregation recurrence (work
    proportional to r * |labels| * |edges|), not by walk enumeration.
    """
    nl = g.num_labels
    prev: list[list[int]] = []
    for u in range(g.n):
        vec = [0] * nl
        vec[g.labels[u]] = 1
        prev.append(vec)
    per_node_levels: list[list[tuple[int, ...]]] = [[] for _ in range(g.n)]
    for _ in range(params.r):
        cur: list[list[int]] = []
        for u in range(g.n):
            vec = [0] * nl
            for v in g.adj[u]:
                pv = prev[v]
                for l in range(nl):
                    vec[l] += pv[l]
            for x in vec:
                if x > U64_MAX:
                    raise OverflowError(f"k-hop count overflow at node {u}")
            cur.append(vec)
            per_node_levels[u].append(tuple(vec))
        prev = cur
    return {
        u: KNFeatureVector(u, params, tuple(per_node_levels[u])) for u in range(g.n)
    }


def sim_lw(a: LWFeatureVector, b: LWFeatureVector) -> float:
    """Inner product of two labeled-walk feature vectors."""
    _ensure_same_params(a, b, "labeled-walk vectors")
    if a.counts is not None and b.counts is not None:
        lam = a.params.lambdas
        per_depth = [0] * a.params.r
        small, large = (a.counts, b.counts) if len(a.counts) <= len(b.counts) else (b.counts, a.counts)
        for key, c in small.items():
            c2 = large.get(key)
            if c2 is not None:
                per_depth[len(key) - 2] += c * c2
        return sum(lam[i] * per_depth[i] for i in range(a.params.r))
    ea, eb = a.entries(), b.entries()
    small, large = (ea, eb) if len(ea) <= len(eb) else (eb, ea)
    return sum(w * large[key] for key, w in small.items() if key in large)


def sim_kn(
    a: KNFeatureVector, b: KNFeatureVector, params: SimilarityParams | None = None
) -> float:
    """Inner product of two k-hop neighbor feature vectors."""
    _ensure_same_params(a, b, "k-hop vectors")
    if params is not None and not params.same_as(a.params):
        raise ParamsMismatchError("k-hop vectors do not match the requested parameters")
    if a.levels is not None and b.levels is not None:
        lam = a.params.lambdas
        total = 0.0
        for i in range(a.params.r):
            la, lb = a.levels[i], b.levels[i]
            dot = sum(x * y for x, y in zip(la, lb))
            total += lam[i] * dot
        return total
    ea, eb = a.entries(), b.entries()
    small, large = (ea, eb) if len(ea) <= len(eb) else (eb, ea)
    return sum(w * large[key] for key, w in small.items() if key in large)


def sim_lw_via_product_oracle(
    g: LabeledGraph,
    u: int,
    v: int,
    params: SimilarityParams,
    *,
    state_budget: int = 500_000,
) -> float:
    """Labeled-walk similarity computed through pair-walk counts.

    Independent route used to validate `sim_lw`: the count of identical
    label-sequence walk pairs at each depth, decay-weighted and summed.
    """
    totals = product_walk_counts(g, u, v, params.r, state_budget=state_budget)
    return sum(lam * t for lam, t in zip(params.lambdas, totals))


def _format_float(x: float) -> str:
    return repr(x)


def _key_to_str(g: LabeledGraph, kind: str, key) -> str:
    if kind == "lw":
        return ">".join(g.label_names[l] for l in key)
    return f"hop:{key[0]};{g.label_names[key[1]]}"


def write_features(path, g: LabeledGraph, vectors: dict, kind: str) -> None:
    """Serialize feature vectors as `node<TAB>key<TAB>weight` lines.

    Lines are sorted by node id then key for byte-reproducibility. A header
    comment records the kind and parameters so files can be reloaded.
    """
    if kind not in ("lw", "kn"):
        raise ValueError(f"unknown feature kind {kind!r}")
    some = next(iter(vectors.values()), None)
    if some is None:
        raise ValueError("no vectors to write")
    p = some.params
    header = f"# features kind={kind} r={p.r} lambdas=" + ",".join(
        _format_float(l) for l in p.lambdas
    )
    if p.alpha is not None:
        header += f" alpha={_format_float(p.alpha)}"
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(header + "\n")
        for u in sorted(vectors):
            vec = vectors[u]
            rows = sorted(
                (_key_to_str(g, kind, key), w) for key, w in vec.entries().items()
            )
            for key_str, w in rows:
                fp.write(f"{u}\t{key_str}\t{_format_float(w)}\n")


def read_features(path, g: LabeledGraph):
    """Load a feature file; returns (kind, params, {node: vector})."""
    with open(path, encoding="utf-8-sig") as fp:
        lines = fp.readlines()
    if not lines or not lines[0].startswith("# features "):
        raise GraphFormatError(f"{path}: missing feature header line")
    fields = dict(
        tok.split("=", 1) for tok in lines[0][len("# features "):].split() if "=" in tok
    )
    try:
        kind = fields["kind"]
        lambdas = tuple(float(x) for x in fields["lambdas"].split(","))
    except (KeyError, ValueError) as exc:
        raise GraphFormatError(f"{path}: bad feature header: {exc}") from None
    alpha = float(fields["alpha"]) if "alpha" in fields else None
    params = SimilarityParams(len(lambdas), lambdas, alpha)
    name_to_id = {name: i for i, name in enumerate(g.label_names)}

    def parse_key(s: str):
        if kind == "lw":
            try:
                return tuple(name_to_id[part] for part in s.split(">"))
            except KeyError as exc:
                raise GraphFormatError(f"{path}: unknown label {exc}") from None
        if not s.startswith("hop:"):
            raise GraphFormatError(f"{path}: bad k-hop key {s!r}")
        hop_str, _, label = s[4:].partition(";")
        if label not in name_to_id:
            raise GraphFormatError(f"{path}: unknown label {label!r}")
        return (int(hop_str), name_to_id[label])

    per_node: dict[int, dict] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise GraphFormatError(f"{path} line {lineno}: expected 3 tab-separated fields")
        try:
            node = int(parts[0])
            weight = float(parts[2])
        except ValueError:
            raise GraphFormatError(f"{path} line {lineno}: bad node id or weight") from None
        per_node.setdefault(node, {})[parse_key(parts[1])] = weight

    vectors: dict[int, object] = {}
    for u in range(g.n):
        weighted = per_node.get(u, {})
        if kind == "lw":
            vectors[u] = LWFeatureVector(u, params, None, weighted)
        else:
            vectors[u] = KNFeatureVector(u, params, None, weighted)
    return kind, params, vectors
