"""rolemine: structural role discovery in graphs.

Recursive neighborhood features with redundancy pruning, low-rank role
assignment with automatic rank selection, exact node-equivalence oracles,
and role transfer across graphs and time.
"""

from .equivalences import (
    AUTOMORPHISM_NODE_LIMIT,
    automorphic_orbits,
    regular_refinement,
    structural_classes,
)
from .features import (
    DEFAULT_OPERATORS,
    DEFAULT_PRIMITIVES,
    OPERATOR_KINDS,
    PRIMITIVE_KINDS,
    BinnedColumn,
    FeatureDescriptor,
    FeatureGraph,
    FeatureLearnConfig,
    FeatureMatrix,
    apply_operator,
    compute_primitive,
    create_feature_graph,
    descriptors_from_json,
    descriptors_to_json,
    feature_similarity,
    features_from_csv,
    features_to_csv,
    learn_features,
    prune_feature_set,
    recompute,
    vertical_log_bin,
)
from .graph import (
    Graph,
    NodePartition,
    apply_permutation,
    load_edge_list,
    write_edge_list,
)
from .roles import (
    RoleModel,
    factorize_at_rank,
    hard_assignment,
    kmeans_assign,
    model_cost,
    model_from_json,
    model_to_json,
    nmf_factorize,
    normalize_columns,
    select_rank,
    soft_memberships,
    svd_factorize,
)
from .synth import erdos_renyi, planted_role_graph
from .transfer import (
    MembershipSeries,
    estimate_transition_model,
    memberships_for_matrix,
    role_time_series,
    series_from_csv,
    series_to_csv,
    transfer_memberships,
    transition_from_json,
    transition_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "AUTOMORPHISM_NODE_LIMIT",
    "BinnedColumn",
    "DEFAULT_OPERATORS",
    "DEFAULT_PRIMITIVES",
    "FeatureDescriptor",
    "FeatureGraph",
    "FeatureLearnConfig",
    "FeatureMatrix",
    "Graph",
    "MembershipSeries",
    "NodePartition",
    "OPERATOR_KINDS",
    "PRIMITIVE_KINDS",
    "RoleModel",
    "apply_operator",
    "apply_permutation",
    "automorphic_orbits",
    "compute_primitive",
    "create_feature_graph",
    "descriptors_from_json",
    "descriptors_to_json",
    "erdos_renyi",
    "estimate_transition_model",
    "factorize_at_rank",
    "feature_similarity",
    "features_from_csv",
    "features_to_csv",
    "hard_assignment",
    "kmeans_assign",
    "learn_features",
    "load_edge_list",
    "memberships_for_matrix",
    "model_cost",
    "model_from_json",
    "model_to_json",
    "nmf_factorize",
    "normalize_columns",
    "planted_role_graph",
    "prune_feature_set",
    "recompute",
    "regular_refinement",
    "role_time_series",
    "select_rank",
    "series_from_csv",
    "series_to_csv",
    "soft_memberships",
    "structural_classes",
    "svd_factorize",
    "transfer_memberships",
    "transition_from_json",
    "transition_to_json",
    "vertical_log_bin",
    "write_edge_list",
]
