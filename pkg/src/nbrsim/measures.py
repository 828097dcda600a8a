"""Uniform interface over the four similarities, plus normalizations.

A `MeasureSpec` names one of the four measures and bundles its
parameters; a `MeasureContext` holds the graph and whatever precomputed
artifacts the measure needs (feature maps, pattern set, neighborhoods).
On top of the raw similarity the module provides the Euclidean distance
normalization (inner-product measures only) and the bounded normalized
similarity, and fills whole similarity matrices.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass

import numpy as np

from . import _parallel
from .errors import (
    BudgetExceededError,
    GraphFormatError,
    MissingArtifactError,
    NbrsimError,
)
from .features import (
    KNFeatureVector,
    LWFeatureVector,
    SimilarityParams,
    build_kn_features,
    build_lw_features,
    sim_kn,
    sim_lw,
)
from .graph import LabeledGraph
from .mcnp import sim_mcnp
from .patterns import PatternSet, pattern_memberships

NSIM_ZERO_TOL = 0.0
DISTANCE_CLAMP = 1e-9


class MeasureKind(str, enum.Enum):
    MCNP = "mcnp"
    NP = "np"
    LW = "lw"
    KN = "kn"


INNER_PRODUCT_KINDS = (MeasureKind.NP, MeasureKind.LW, MeasureKind.KN)


@dataclass(frozen=True)
class MeasureSpec:
    """A measure kind with the complete parameter bundle it requires."""

    kind: MeasureKind
    params: SimilarityParams | None = None
    pattern_set: PatternSet | None = None
    radius: int | None = None
    mcnp_budget: int = 10_000_000

    def __post_init__(self):
        if self.kind in (MeasureKind.LW, MeasureKind.KN):
            if self.params is None:
                raise MissingArtifactError(f"{self.kind.value} measure needs walk parameters")
        elif self.kind is MeasureKind.NP:
            if self.pattern_set is None:
                raise MissingArtifactError("np measure needs a pattern set")
            object.__setattr__(self, "radius", self.pattern_set.radius)
        elif self.kind is MeasureKind.MCNP:
            if self.radius is None:
                object.__setattr__(self, "radius", 2)

    @classmethod
    def lw(cls, params: SimilarityParams) -> "MeasureSpec":
        return cls(MeasureKind.LW, params=params)

    @classmethod
    def kn(cls, params: SimilarityParams) -> "MeasureSpec":
        return cls(MeasureKind.KN, params=params)

    @classmethod
    def np_patterns(cls, pattern_set: PatternSet) -> "MeasureSpec":
        return cls(MeasureKind.NP, pattern_set=pattern_set)

    @classmethod
    def mcnp(cls, radius: int = 2, budget: int = 10_000_000) -> "MeasureSpec":
        return cls(MeasureKind.MCNP, radius=radius, mcnp_budget=budget)


class MeasureContext:
    """Graph plus the prepared artifacts one measure operates on."""

    def __init__(self, graph: LabeledGraph, spec: MeasureSpec,
                 lw_features: dict[int, LWFeatureVector] | None = None,
                 kn_features: dict[int, KNFeatureVector] | None = None):
        self.graph = graph
        self.spec = spec
        self.lw_features = lw_features
        self.kn_features = kn_features
        self._memberships: dict[int, frozenset[bytes]] = {}
        self._self_sim: dict[int, float] = {}

    @classmethod
    def prepare(cls, graph: LabeledGraph, spec: MeasureSpec, *,
                workers: int = 1,
                lw_features=None, kn_features=None) -> "MeasureContext":
        """Build the artifacts the measure needs, unless already supplied."""
        if spec.kind is MeasureKind.LW and lw_features is None:
            lw_features = build_lw_features(graph, spec.params, workers=workers)
        if spec.kind is MeasureKind.KN and kn_features is None:
            kn_features = build_kn_features(graph, spec.params)
        return cls(graph, spec, lw_features=lw_features, kn_features=kn_features)

    def memberships(self, u: int) -> frozenset[bytes]:
        got = self._memberships.get(u)
        if got is None:
            got = pattern_memberships(self.graph, self.spec.pattern_set, u)
            self._memberships[u] = got
        return got

    def similarity(self, u: int, v: int) -> float:
        """Raw (unnormalized) similarity under this context's measure."""
        kind = self.spec.kind
        if kind is MeasureKind.LW:
            if self.lw_features is None:
                raise MissingArtifactError("labeled-walk feature map not prepared")
            return sim_lw(self.lw_features[u], self.lw_features[v])
        if kind is MeasureKind.KN:
            if self.kn_features is None:
                raise MissingArtifactError("k-hop feature map not prepared")
            return sim_kn(self.kn_features[u], self.kn_features[v])
        if kind is MeasureKind.NP:
            weights = self.spec.pattern_set.edge_count_by_code()
            shared = self.memberships(u) & self.memberships(v)
            return float(sum(weights[c] for c in shared))
        result = sim_mcnp(u, v, self.graph, self.spec.radius,
                          state_budget=self.spec.mcnp_budget)
        if not result.exact:
            raise BudgetExceededError(
                f"mcnp similarity for ({u}, {v}) is only a lower bound "
                f"{result.value}; raise the budget for an exact value"
            )
        return float(result.value)

    def self_similarity(self, u: int) -> float:
        got = self._self_sim.get(u)
        if got is None:
            got = self.similarity(u, u)
            self._self_sim[u] = got
        return got


def similarity(ctx: MeasureContext, u: int, v: int) -> float:
    return ctx.similarity(u, v)


def distance(ctx: MeasureContext, u: int, v: int) -> float:
    """Euclidean feature-space distance sqrt(S(u,u) - 2 S(u,v) + S(v,v)).

    Only defined for the inner-product measures; the max-common-pattern
    similarity is not an inner product and supports only `nsim`.
    """
    if ctx.spec.kind not in INNER_PRODUCT_KINDS:
        raise NbrsimError("distance is unsupported for the mcnp measure")
    s_uu = ctx.self_similarity(u)
    s_vv = ctx.self_similarity(v)
    s_uv = ctx.similarity(u, v)
    rad = s_uu - 2.0 * s_uv + s_vv
    if rad < 0:
        if rad < -DISTANCE_CLAMP:
            raise NbrsimError(
                f"distance radicand {rad} below clamp; inconsistent similarities"
            )
        rad = 0.0
    return math.sqrt(rad)


def nsim(ctx: MeasureContext, u: int, v: int) -> float:
    """Normalized similarity S(u,v) / (S(u,u) + S(v,v) - S(u,v)), in [0, 1].

    Degenerate zero denominator (both self-similarities zero) is 1 for a
    node against itself and 0 for distinct nodes, by convention.
    """
    s_uv = ctx.similarity(u, v)
    denom = ctx.self_similarity(u) + ctx.self_similarity(v) - s_uv
    if denom <= NSIM_ZERO_TOL:
        return 1.0 if u == v else 0.0
    value = s_uv / denom
    return min(1.0, max(0.0, value))


NORMALIZATIONS = ("raw", "nsim", "distance")


@dataclass
class SimilarityMatrix:
    """Dense symmetric pairwise values over an ordered node subset."""

    node_ids: tuple[int, ...]
    values: np.ndarray
    kind: MeasureKind
    normalized: str = "raw"

    def __post_init__(self):
        n = len(self.node_ids)
        if self.values.shape != (n, n):
            raise ValueError("matrix shape must match node count")
        if n and np.max(np.abs(self.values - self.values.T)) > 1e-12:
            raise ValueError("matrix must be symmetric within 1e-12")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fp:
            fp.write("node," + ",".join(str(i) for i in self.node_ids) + "\n")
            for i, u in enumerate(self.node_ids):
                row = ",".join(repr(float(x)) for x in self.values[i])
                fp.write(f"{u},{row}\n")

    def to_binary(self, path) -> None:
        n = len(self.node_ids)
        with open(path, "wb") as fp:
            fp.write(b"NSIM")
            fp.write(struct.pack("<BBB", 1, _KIND_BYTE[self.kind],
                                 NORMALIZATIONS.index(self.normalized)))
            fp.write(struct.pack("<I", n))
            fp.write(struct.pack(f"<{n}Q", *self.node_ids))
            fp.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())


_KIND_BYTE = {MeasureKind.MCNP: 0, MeasureKind.NP: 1, MeasureKind.LW: 2, MeasureKind.KN: 3}
_BYTE_KIND = {b: k for k, b in _KIND_BYTE.items()}


def read_binary_matrix(path) -> SimilarityMatrix:
    with open(path, "rb") as fp:
        blob = fp.read()
    if blob[:4] != b"NSIM":
        raise GraphFormatError(f"{path}: bad magic")
    version, kind_b, norm_b = struct.unpack_from("<BBB", blob, 4)
    if version != 1:
        raise GraphFormatError(f"{path}: unsupported version {version}")
    (n,) = struct.unpack_from("<I", blob, 7)
    ids = struct.unpack_from(f"<{n}Q", blob, 11)
    offset = 11 + 8 * n
    values = np.frombuffer(blob, dtype="<f8", offset=offset, count=n * n).reshape(n, n)
    return SimilarityMatrix(tuple(int(i) for i in ids), values.copy(),
                            _BYTE_KIND[kind_b], NORMALIZATIONS[norm_b])


_MATRIX_STATE: tuple | None = None


def _matrix_worker(rows: list[int]):
    ctx, nodes = _MATRIX_STATE
    out = []
    for i in rows:
        u = nodes[i]
        out.append((i, [ctx.similarity(u, nodes[j]) for j in range(i + 1, len(nodes))]))
    return out


def pairwise_matrix(
    ctx: MeasureContext,
    nodes,
    normalization: str = "raw",
    *,
    workers: int = 1,
) -> SimilarityMatrix:
    """All-pairs values over a node subset with the chosen normalization.

    Cells are computed in a fixed order independent of the worker count,
    so outputs are byte-identical for any `workers` value.
    """
    global _MATRIX_STATE
    nodes = list(nodes)
    if not nodes:
        raise ValueError("node subset must be non-empty")
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}")
    if normalization == "distance" and ctx.spec.kind not in INNER_PRODUCT_KINDS:
        raise NbrsimError("distance matrices are unsupported for the mcnp measure")
    for u in nodes:
        ctx.graph.check_node(u)

    n = len(nodes)
    raw = np.zeros((n, n), dtype=float)
    diag = [ctx.self_similarity(u) for u in nodes]
    for i in range(n):
        raw[i, i] = diag[i]

    row_idx = list(range(n - 1))
    if workers > 1 and n > 2:
        _MATRIX_STATE = (ctx, nodes)
        try:
            chunks = _parallel.chunked(row_idx, workers)
            results = _parallel.fork_map(_matrix_worker, chunks, workers)
        finally:
            _MATRIX_STATE = None
        rows = [r for chunk in results for r in chunk]
    else:
        _MATRIX_STATE = (ctx, nodes)
        try:
            rows = _matrix_worker(row_idx)
        finally:
            _MATRIX_STATE = None
    for i, vals in rows:
        for off, s in enumerate(vals):
            j = i + 1 + off
            raw[i, j] = s
            raw[j, i] = s

    if normalization == "raw":
        values = raw
    elif normalization == "nsim":
        values = np.zeros_like(raw)
        for i in range(n):
            values[i, i] = 1.0
            for j in range(i + 1, n):
                denom = diag[i] + diag[j] - raw[i, j]
                v = 0.0 if denom <= 0 else min(1.0, max(0.0, raw[i, j] / denom))
                values[i, j] = values[j, i] = v
    else:
        values = np.zeros_like(raw)
        for i in range(n):
            for j in range(i + 1, n):
                rad = diag[i] - 2.0 * raw[i, j] + diag[j]
                if rad < 0:
                    if rad < -DISTANCE_CLAMP:
                        raise NbrsimError("distance radicand below clamp")
                    rad = 0.0
                values[i, j] = values[j, i] = math.sqrt(rad)
    return SimilarityMatrix(tuple(nodes), values, ctx.spec.kind, normalization)
