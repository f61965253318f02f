"""HNSW indices with metered distance counting and graph merging."""

from .build import assign_level, build_index, insert, sigm_merge
from .estimator import HNSW
from .evaluation import (
    MergeVariant,
    SweepReport,
    SweepRow,
    ground_truth,
    merge_benchmark,
    recall_at_k,
    search_sweep,
)
from .graph import GraphStats, HnswIndex, IndexParams, LayerGraph, get_layer, graph_stats
from .merge import (
    MergeAlgorithm,
    MergeParams,
    MergeTrace,
    cgtm_layer,
    general_merge,
    igtm_layer,
    merge_indices,
    ngm_layer,
)
from .neighborhood import Strategy, knn_construct, rng_construct, select_neighbors
from .search import hnsw_search, local_search
from .vecstore import DistanceMeter, Metric, Space, brute_force_knn, distance, meter_snapshot

__version__ = "0.1.0"

__all__ = [
    "HNSW",
    "DistanceMeter",
    "GraphStats",
    "HnswIndex",
    "IndexParams",
    "LayerGraph",
    "MergeAlgorithm",
    "MergeParams",
    "MergeTrace",
    "MergeVariant",
    "Metric",
    "Space",
    "Strategy",
    "SweepReport",
    "SweepRow",
    "assign_level",
    "brute_force_knn",
    "build_index",
    "cgtm_layer",
    "distance",
    "general_merge",
    "get_layer",
    "graph_stats",
    "ground_truth",
    "hnsw_search",
    "igtm_layer",
    "insert",
    "knn_construct",
    "local_search",
    "merge_benchmark",
    "merge_indices",
    "meter_snapshot",
    "ngm_layer",
    "recall_at_k",
    "rng_construct",
    "search_sweep",
    "select_neighbors",
    "sigm_merge",
]
