"""scikit-learn style front end over the index, search and merge code."""

from __future__ import annotations

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .build import build_index
from .graph import HnswIndex, IndexParams
from .merge import MergeParams, MergeTrace, merge_indices
from .search import hnsw_search
from .vecstore import DistanceMeter, Metric, Space


class HNSW(TransformerMixin, BaseEstimator):
    """Approximate nearest neighbors over an HNSW graph.

    Parameters
    ----------
    n_neighbors : int, default=5
        Neighbors returned by :meth:`kneighbors` and :meth:`transform`.
    M, M0 : int, default=16, 32
        Out-degree caps above and at layer 0.
    ef_construction : int, default=32
        Beam width used while inserting.
    ef_search : int, default=64
        Beam width used by queries.
    strategy : {"rng", "knn"}, default="rng"
        Neighborhood selection rule.
    metric : {"sqeuclidean", "euclidean"}, default="sqeuclidean"
    random_state : int, default=0
        Seeds level assignment.

    Attributes
    ----------
    index_ : HnswIndex
    space_ : Space
        The fitted vectors; its meter holds the build cost under ``"build"``.
    n_features_in_ : int
    """

    def __init__(
        self,
        n_neighbors: int = 5,
        M: int = 16,
        M0: int = 32,
        ef_construction: int = 32,
        ef_search: int = 64,
        strategy: str = "rng",
        metric: str = "sqeuclidean",
        random_state: int = 0,
    ):
        self.n_neighbors = n_neighbors
        self.M = M
        self.M0 = M0
        self.ef_construction = ef_construction
        self.ef_search = ef_search
        self.strategy = strategy
        self.metric = metric
        self.random_state = random_state

    def _index_params(self) -> IndexParams:
        return IndexParams(M=self.M, M0=self.M0, ef_construction=self.ef_construction,
                           seed=self.random_state)

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float32)
        self.space_ = Space(X, Metric(self.metric))
        self.index_ = build_index(self.space_, range(X.shape[0]), self._index_params(),
                                  self.strategy, phase="build")
        self.n_features_in_ = X.shape[1]
        return self

    @property
    def build_distance_count_(self) -> int:
        check_is_fitted(self, "index_")
        return self.space_.meter["build"]

    def kneighbors(self, X, n_neighbors: int | None = None, return_distance: bool = True):
        """Approximate neighbors of each row of ``X``.

        Returns ``(distances, indices)`` of shape ``(n_queries, n_neighbors)``,
        or just ``indices`` when ``return_distance`` is false. Rows with fewer
        reachable points are padded with ``-1`` / ``inf``.
        """
        check_is_fitted(self, "index_")
        X = check_array(X, dtype=np.float32)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        k = self.n_neighbors if n_neighbors is None else n_neighbors
        if k < 1:
            raise ValueError("n_neighbors must be positive")
        meter = DistanceMeter()
        probe = self.space_.with_meter(meter)
        ind = np.full((X.shape[0], k), -1, dtype=np.int64)
        dist = np.full((X.shape[0], k), np.inf)
        for row, q in enumerate(X.astype(np.float64)):
            res = hnsw_search(self.index_, q, k, max(self.ef_search, k), probe, phase="search")
            for col, (v, d) in enumerate(res):
                ind[row, col] = v
                dist[row, col] = d
        self.last_search_distance_count_ = meter["search"]
        return (dist, ind) if return_distance else ind

    def transform(self, X):
        """Sparse ``(n_queries, n_fitted)`` graph of distances to the approximate neighbors."""
        dist, ind = self.kneighbors(X)
        n = self.space_.n
        rows = np.repeat(np.arange(ind.shape[0]), ind.shape[1])
        mask = ind.ravel() >= 0
        return sparse.csr_matrix(
            (dist.ravel()[mask], (rows[mask], ind.ravel()[mask])), shape=(ind.shape[0], n)
        )

    def merge(self, other: "HNSW", algo: str = "igtm", **merge_params) -> "HNSW":
        """Merge with another fitted estimator into a new one.

        The other estimator's points follow this one's, so their ids shift by
        ``len(self)``. Keyword arguments go to :class:`MergeParams`; the merge
        cost ends up in ``merge_distance_count_``.
        """
        check_is_fitted(self, "index_")
        check_is_fitted(other, "index_")
        if other.n_features_in_ != self.n_features_in_:
            raise ValueError("estimators were fitted on different dimensions")
        offset = self.space_.n
        vectors = np.vstack([self.space_.vectors, other.space_.vectors])
        meter = DistanceMeter()
        space = Space(vectors, Metric(self.metric), meter)
        merge_params.setdefault("m", self.M)
        merge_params.setdefault("m0", self.M0)
        merge_params.setdefault("seed", self.random_state)
        trace = MergeTrace()
        merged = merge_indices(self.index_, other.index_.relabel(offset), algo, space,
                               MergeParams(**merge_params), self.strategy, trace=trace)
        out = self.__class__(**self.get_params())
        out.space_ = space
        out.index_ = merged
        out.n_features_in_ = self.n_features_in_
        out.merge_distance_count_ = meter["merge"]
        out.merge_trace_ = trace
        return out

    @classmethod
    def from_index(cls, index: HnswIndex, vectors, metric: str = "sqeuclidean", **params) -> "HNSW":
        """Wrap an existing index. ``vectors`` is indexed by vertex id."""
        p = index.params
        est = cls(M=p.M, M0=p.M0, ef_construction=p.ef_construction, metric=metric,
                  random_state=p.seed, **params)
        est.space_ = Space(np.asarray(vectors), Metric(metric))
        est.index_ = index
        est.n_features_in_ = est.space_.dim
        return est

    def __len__(self) -> int:
        check_is_fitted(self, "index_")
        return len(self.index_)
