"""Neighborhood-based node similarity measures for labeled graphs.

Four measures over the radius-r neighborhood of each node: maximum
common neighborhood pattern, shared frequent neighborhood patterns,
labeled-walk inner product, and k-hop neighbor inner product, with
normalizations to a bounded similarity and (for the inner-product
measures) a Euclidean distance metric.
"""

from .errors import (
    BudgetExceededError,
    GraphFormatError,
    MissingArtifactError,
    NbrsimError,
    OracleLimitError,
    ParamsMismatchError,
    PartialMiningError,
)
from .features import (
    KNFeatureVector,
    LWFeatureVector,
    SimilarityParams,
    build_kn_features,
    build_lw_features,
    read_features,
    sim_kn,
    sim_lw,
    sim_lw_via_product_oracle,
    write_features,
)
from .graph import (
    LabeledGraph,
    Neighborhood,
    are_automorphic_equivalent,
    load_graph,
    load_graph_files,
    neighborhood,
    write_graph_files,
)
from .mcnp import McnpResult, mcnp_bruteforce, sim_mcnp
from .measures import (
    MeasureContext,
    MeasureKind,
    MeasureSpec,
    SimilarityMatrix,
    distance,
    nsim,
    pairwise_matrix,
    read_binary_matrix,
    similarity,
)
from .patterns import (
    MiningConfig,
    NeighborhoodPattern,
    PatternSet,
    canonical_code,
    mine_patterns,
    ns_isomorphic,
    pattern_memberships,
    read_pattern_set,
    sim_np,
    write_pattern_set,
)
from .experiments import (
    AnomalyPlan,
    AnomalyReport,
    GroupRanking,
    KroneckerConfig,
    anomaly_rank,
    kronecker_generate,
    pair_probability,
    plant_anomalies,
    rank_planted_nodes,
    topk_similar,
    trial_seeds,
)
from .walks import WalkCountTable, product_walk_count, product_walk_counts, walk_counts

__version__ = "0.1.0"
