"""Synthetic-graph experiments: generation, planted anomalies, rankings.

The generator grows a stochastic Kronecker graph from a small initiator
probability matrix; each label class then gets a few nodes whose labels
are deliberately switched, and nodes are ranked inside their label group
by a normality index (aggregate closeness to their most similar peers),
so the planted nodes should surface near the top.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GraphFormatError
from .graph import LabeledGraph
from .measures import MeasureContext, MeasureKind, distance, nsim

DEFAULT_INITIATOR_LABELS = ("Professor", "Graduate", "Researcher", "Engineer")

DEFAULT_INITIATOR_MATRIX = (
    (0.9, 0.25, 0.15, 0.1),
    (0.25, 0.9, 0.15, 0.15),
    (0.15, 0.15, 0.9, 0.2),
    (0.1, 0.15, 0.2, 0.9),
)

DEFAULT_LABEL_CYCLE = {
    "Professor": "Engineer",
    "Graduate": "Researcher",
    "Researcher": "Professor",
    "Engineer": "Graduate",
}


@dataclass(frozen=True)
class KroneckerConfig:
    """Initiator matrix, per-initiator-node labels, power, and RNG seed."""

    initiator: tuple[tuple[float, ...], ...]
    labels: tuple[str, ...]
    power: int
    seed: int

    def __post_init__(self):
        k = len(self.initiator)
        if k == 0 or any(len(row) != k for row in self.initiator):
            raise ValueError("initiator must be a square matrix")
        if any(not 0.0 <= p <= 1.0 for row in self.initiator for p in row):
            raise ValueError("initiator probabilities must lie in [0, 1]")
        if len(self.labels) != k:
            raise ValueError("need one label per initiator node")
        if self.power < 1:
            raise ValueError("power must be >= 1")

    @property
    def k(self) -> int:
        return len(self.initiator)

    @property
    def node_count(self) -> int:
        return self.k**self.power

    @classmethod
    def default(cls, seed: int, power: int = 4) -> "KroneckerConfig":
        return cls(DEFAULT_INITIATOR_MATRIX, DEFAULT_INITIATOR_LABELS, power, seed)


def _pair_probabilities(cfg: KroneckerConfig) -> np.ndarray:
    """Full n x n probability matrix as the repeated Kronecker power."""
    p = np.array(cfg.initiator, dtype=float)
    full = p
    for _ in range(cfg.power - 1):
        full = np.kron(full, p)
    return full


def pair_probability(cfg: KroneckerConfig, u: int, v: int) -> float:
    """Closed-form edge probability: product over base-k digit pairs."""
    k = cfg.k
    prob = 1.0
    a, b = u, v
    for _ in range(cfg.power):
        prob *= cfg.initiator[a % k][b % k]
        a //= k
        b //= k
    return prob


def _pair_draws(cfg: KroneckerConfig) -> np.ndarray:
    """One uniform draw per unordered pair (u, v), u < v, in row-major order.

    The stream is fixed: PCG64 seeded with cfg.seed, consuming exactly
    n(n-1)/2 doubles regardless of the probabilities.
    """
    n = cfg.node_count
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    return rng.random(n * (n - 1) // 2)


def kronecker_edge_mask(cfg: KroneckerConfig) -> np.ndarray:
    """Boolean presence per unordered pair in row-major order."""
    n = cfg.node_count
    probs = _pair_probabilities(cfg)
    iu, ju = np.triu_indices(n, k=1)
    return _pair_draws(cfg) < probs[iu, ju]


def kronecker_generate(cfg: KroneckerConfig) -> LabeledGraph:
    """Sample a labeled graph: each pair kept with its product probability.

    Node u gets the label of initiator node u mod k. Self-pairs are never
    sampled, so the graph is simple.
    """
    n = cfg.node_count
    k = cfg.k
    mask = kronecker_edge_mask(cfg)
    iu, ju = np.triu_indices(n, k=1)
    edges = [(int(a), int(b)) for a, b in zip(iu[mask], ju[mask])]
    labels = [u % k for u in range(n)]
    return LabeledGraph(labels, edges, cfg.labels)


@dataclass(frozen=True)
class AnomalyPlan:
    """Recorded label switches: (node, original label, new label)."""

    swaps: tuple[tuple[int, str, str], ...]
    label_cycle: dict[str, str]

    def __post_init__(self):
        nodes = [s[0] for s in self.swaps]
        if len(set(nodes)) != len(nodes):
            raise ValueError("a node may be switched at most once")
        if any(orig == new for _, orig, new in self.swaps):
            raise ValueError("new label must differ from the original")


def plant_anomalies(
    g: LabeledGraph,
    seed: int,
    count_per_label: int,
    *,
    cycle: dict[str, str] | None = None,
) -> tuple[LabeledGraph, AnomalyPlan]:
    """Switch the labels of randomly picked nodes, a fixed count per class.

    Each picked node receives the label its original label maps to under
    the cycle (default: Professor->Engineer, Graduate->Researcher,
    Researcher->Professor, Engineer->Graduate). The RNG stream is fixed:
    PCG64 seeded with `seed`, one choice call per label class in label-id
    order.
    """
    if count_per_label < 0:
        raise ValueError("count_per_label must be >= 0")
    cycle = dict(DEFAULT_LABEL_CYCLE) if cycle is None else dict(cycle)
    rng = np.random.Generator(np.random.PCG64(seed))
    new_labels = list(g.labels)
    swaps: list[tuple[int, str, str]] = []
    if count_per_label > 0:
        for lid, name in enumerate(g.label_names):
            members = g.label_class(lid)
            if len(members) < count_per_label:
                raise GraphFormatError(
                    f"label {name!r} has {len(members)} nodes, "
                    f"needs at least {count_per_label}"
                )
            if name not in cycle:
                raise GraphFormatError(f"label cycle does not cover {name!r}")
            target = cycle[name]
            target_id = g.label_id(target)
            if target_id is None:
                raise GraphFormatError(
                    f"cycle target {target!r} is not a label of this graph"
                )
            picked = rng.choice(len(members), size=count_per_label, replace=False)
            for idx in sorted(int(i) for i in picked):
                node = members[idx]
                new_labels[node] = target_id
                swaps.append((node, name, target))
    plan = AnomalyPlan(tuple(swaps), cycle)
    return g.with_labels(new_labels), plan


def topk_similar(
    u: int,
    k: int,
    ctx: MeasureContext,
    candidates=None,
    *,
    mode: str = "raw",
) -> list[tuple[int, float]]:
    """Top-k candidates by similarity (or closeness, for distance mode).

    Ties break toward the smaller node id; u itself is excluded from the
    candidate set.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if mode not in ("raw", "nsim", "distance"):
        raise ValueError(f"unknown mode {mode!r}")
    g = ctx.graph
    g.check_node(u)
    cands = [c for c in (candidates if candidates is not None else range(g.n)) if c != u]
    if mode == "distance":
        scored = [(distance(ctx, u, c), c) for c in cands]
        scored.sort()
        return [(c, s) for s, c in scored[:k]]
    if mode == "nsim":
        scored = [(-nsim(ctx, u, c), c) for c in cands]
    else:
        scored = [(-ctx.similarity(u, c), c) for c in cands]
    scored.sort()
    return [(c, -s) for s, c in scored[:k]]


@dataclass
class GroupRanking:
    """Per label group: nodes ordered most-abnormal-first, with indices."""

    groups: dict[str, tuple[int, ...]]
    normality: dict[int, float]
    short_groups: tuple[str, ...]

    def rank_of(self, label: str, node: int) -> int:
        return self.groups[label].index(node) + 1


def anomaly_rank(g: LabeledGraph, ctx: MeasureContext, top_m: int = 5) -> GroupRanking:
    """Rank nodes inside each label group by ascending normality index.

    A node's normality index is the sum of its similarities to its top-m
    most similar same-group peers; for the two metric measures it is the
    negated sum of distances to the m closest peers. Groups smaller than
    m+1 nodes use every available peer and are flagged.
    """
    if top_m < 1:
        raise ValueError("top_m must be >= 1")
    metric = ctx.spec.kind in (MeasureKind.LW, MeasureKind.KN)
    groups: dict[str, tuple[int, ...]] = {}
    normality: dict[int, float] = {}
    short: list[str] = []
    for lid, name in enumerate(g.label_names):
        members = list(g.label_class(lid))
        if not members:
            continue
        if len(members) - 1 < top_m:
            short.append(name)
        for u in members:
            peers = [w for w in members if w != u]
            if not peers:
                normality[u] = 0.0
                continue
            m = min(top_m, len(peers))
            if metric:
                scored = sorted((distance(ctx, u, w), w) for w in peers)
                normality[u] = -sum(s for s, _ in scored[:m])
            else:
                scored = sorted((-ctx.similarity(u, w), w) for w in peers)
                normality[u] = sum(-s for s, _ in scored[:m])
        order = sorted(members, key=lambda w: (normality[w], w))
        groups[name] = tuple(order)
    return GroupRanking(groups, normality, tuple(short))


@dataclass
class PlantedOutcome:
    """Ranks of one planted node: in its new group, and in the control run."""

    node: int
    original_label: str
    new_label: str
    rank_planted: int
    rank_control: int

    @property
    def promotion(self) -> int:
        return self.rank_control - self.rank_planted


@dataclass
class AnomalyReport:
    """One trial: groups of the swapped run plus per-planted-node ranks."""

    ranking: GroupRanking
    planted: tuple[PlantedOutcome, ...]


def rank_planted_nodes(
    swapped_ranking: GroupRanking,
    control_ranking: GroupRanking,
    plan: AnomalyPlan,
) -> AnomalyReport:
    """Join a swapped-run ranking with its control counterpart."""
    outcomes = []
    for node, orig, new in plan.swaps:
        outcomes.append(
            PlantedOutcome(
                node,
                orig,
                new,
                swapped_ranking.rank_of(new, node),
                control_ranking.rank_of(orig, node),
            )
        )
    return AnomalyReport(swapped_ranking, tuple(outcomes))


def trial_seeds(seed: int, trials: int) -> list[tuple[int, int]]:
    """Derive (generation seed, planting seed) pairs from one root seed."""
    state = np.random.SeedSequence(seed).generate_state(2 * trials, dtype=np.uint64)
    return [(int(state[2 * t]), int(state[2 * t + 1])) for t in range(trials)]
