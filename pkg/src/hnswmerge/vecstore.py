"""Vectors, metrics and metered distance evaluation.

Every distance computed anywhere in the package goes through a
:class:`Space`, which charges a :class:`DistanceMeter`. The meter is the
cost model used to compare build and merge algorithms, so nothing may
compute a distance behind its back.
"""

from __future__ import annotations

from collections import Counter
from contextlib import contextmanager
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

DEFAULT_PHASE = "default"


class Metric(str, Enum):
    SQEUCLIDEAN = "sqeuclidean"
    EUCLIDEAN = "euclidean"

    @property
    def code(self) -> int:
        return _METRIC_CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "Metric":
        for metric, c in _METRIC_CODES.items():
            if c == code:
                return metric
        raise ValueError(f"unknown metric code {code}")


_METRIC_CODES = {Metric.SQEUCLIDEAN: 0, Metric.EUCLIDEAN: 1}


class DistanceMeter:
    """Counts distance evaluations per phase label.

    The active phase is used whenever a caller does not name one::

        meter = DistanceMeter()
        with meter.phase("merge"):
            ...
    """

    def __init__(self) -> None:
        self._counts: Counter[str] = Counter()
        self._active = DEFAULT_PHASE

    @property
    def active_phase(self) -> str:
        return self._active

    @contextmanager
    def phase(self, label: str) -> Iterator["DistanceMeter"]:
        previous = self._active
        self._active = label
        try:
            yield self
        finally:
            self._active = previous

    def add(self, n: int = 1, phase: str | None = None) -> None:
        if n < 0:
            raise ValueError("meter increments must be non-negative")
        if n:
            self._counts[phase or self._active] += n

    def __getitem__(self, phase: str) -> int:
        return self._counts.get(phase, 0)

    @property
    def total(self) -> int:
        return sum(self._counts.values())

    def snapshot(self) -> dict[str, int]:
        return dict(self._counts)

    def merge_from(self, other: "DistanceMeter") -> None:
        """Fold another meter's counts into this one (join point for parallel work)."""
        self._counts.update(other._counts)

    def __repr__(self) -> str:
        return f"DistanceMeter({dict(self._counts)!r})"


def meter_snapshot(meter: DistanceMeter) -> dict[str, int]:
    return meter.snapshot()


class Space:
    """A dataset plus a metric plus the meter that pays for every distance.

    Parameters
    ----------
    vectors : array-like of shape (n, dim)
        Stored as float64 so sums do not lose precision on float32 input.
    metric : Metric or str, default="sqeuclidean"
    meter : DistanceMeter, optional
        A fresh meter is created when omitted.
    """

    def __init__(
        self,
        vectors: np.ndarray,
        metric: Metric | str = Metric.SQEUCLIDEAN,
        meter: DistanceMeter | None = None,
    ) -> None:
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValueError(f"expected a 2-D array of vectors, got shape {vectors.shape}")
        self.vectors = vectors
        self.vectors.setflags(write=False)
        self.metric = Metric(metric)
        self.meter = meter if meter is not None else DistanceMeter()

    def with_meter(self, meter: DistanceMeter | None = None) -> "Space":
        """Same vectors and metric, different meter (a fresh one by default)."""
        view = Space.__new__(Space)
        view.vectors = self.vectors
        view.metric = self.metric
        view.meter = meter if meter is not None else DistanceMeter()
        return view

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.n

    def vector(self, i: int) -> np.ndarray:
        self._check_id(i)
        return self.vectors[i]

    def _check_id(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"vector id {i} out of range [0, {self.n})")

    def _finish(self, sq: np.ndarray | float):
        if self.metric is Metric.EUCLIDEAN:
            return np.sqrt(sq)
        return sq

    def distance(self, a: int, b: int, phase: str | None = None) -> float:
        self._check_id(a)
        self._check_id(b)
        diff = self.vectors[a] - self.vectors[b]
        self.meter.add(1, phase)
        return float(self._finish(float(diff @ diff)))

    def distances(
        self, q: np.ndarray, ids: Sequence[int] | np.ndarray, phase: str | None = None
    ) -> np.ndarray:
        """Distances from query vector ``q`` to each stored vector in ``ids``.

        Charges ``len(ids)`` evaluations.
        """
        ids = np.asarray(ids, dtype=np.intp)
        if ids.size == 0:
            return np.empty(0, dtype=np.float64)
        diff = self.vectors[ids] - q
        self.meter.add(int(ids.size), phase)
        return self._finish(np.einsum("ij,ij->i", diff, diff))

    def query_distance(self, q: np.ndarray, i: int, phase: str | None = None) -> float:
        diff = self.vectors[i] - q
        self.meter.add(1, phase)
        return float(self._finish(float(diff @ diff)))

    def first_violation(
        self,
        v: int,
        admitted: Sequence[int],
        bound: float,
        phase: str | None = None,
    ) -> int:
        """Scan ``admitted`` in order for the first ``w`` with ``bound >= rho(v, w)``.

        Returns its position, or ``-1`` when there is none. The meter is
        charged for exactly the evaluations a one-at-a-time scan that stops
        at the first hit would make, although the kernel is vectorised.
        """
        if not admitted:
            return -1
        diff = self.vectors[np.asarray(admitted, dtype=np.intp)] - self.vectors[v]
        d = self._finish(np.einsum("ij,ij->i", diff, diff))
        hits = np.flatnonzero(bound >= d)
        if hits.size:
            pos = int(hits[0])
            self.meter.add(pos + 1, phase)
            return pos
        self.meter.add(len(admitted), phase)
        return -1


def distance(meter: DistanceMeter, phase: str, a: int, b: int, space: Space) -> float:
    """Metered ``rho(a, b)`` charged to ``meter`` under ``phase``."""
    saved = space.meter
    space.meter = meter
    try:
        return space.distance(a, b, phase)
    finally:
        space.meter = saved


def brute_force_knn(
    q: np.ndarray,
    space: Space,
    k: int,
    ids: Sequence[int] | np.ndarray | None = None,
    phase: str | None = None,
) -> list[tuple[int, float]]:
    """Exact k nearest neighbours of ``q``, ascending, ties to the smaller id.

    ``ids`` restricts the search to a subset of the stored vectors.
    """
    pool = np.arange(space.n) if ids is None else np.asarray(ids, dtype=np.intp)
    if k < 1:
        raise ValueError("k must be positive")
    if k > pool.size:
        raise ValueError(f"k={k} exceeds the number of vectors ({pool.size})")
    d = space.distances(np.asarray(q, dtype=np.float64), pool, phase)
    order = np.lexsort((pool, d))[:k]
    return [(int(pool[i]), float(d[i])) for i in order]
