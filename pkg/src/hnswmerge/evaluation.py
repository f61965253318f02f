"""Ground truth, recall@k and the merge/search benchmark sweeps."""

from __future__ import annotations

import csv
import dataclasses
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .build import build_index
from .graph import HnswIndex, IndexParams
from .merge import MergeAlgorithm, MergeParams, merge_indices
from .neighborhood import Strategy
from .search import hnsw_search
from .vecstore import DistanceMeter, Space, brute_force_knn

DEFAULT_LS = (32, 40, 50, 64, 72)


def ground_truth(space: Space, queries: np.ndarray, k: int, phase: str = "ground-truth") -> np.ndarray:
    """Exact top-``k`` ids per query (ties to the smaller id), shape ``(nq, k)``."""
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    out = np.empty((len(queries), k), dtype=np.int64)
    for i, q in enumerate(queries):
        out[i] = [v for v, _ in brute_force_knn(q, space, k, phase=phase)]
    return out


def recall_at_k(truth: Sequence[Sequence[int]], answers: Sequence[Sequence[int]], k: int) -> float:
    """Mean over queries of ``|true top-k & returned top-k| / k``.

    Short answer lists count their missing slots as misses.
    """
    if len(truth) != len(answers):
        raise ValueError(f"{len(truth)} truth rows but {len(answers)} answer rows")
    if k < 1:
        raise ValueError("k must be positive")
    if not len(truth):
        return 0.0
    hits = 0
    for t, a in zip(truth, answers):
        if len(t) < k:
            raise ValueError(f"ground truth has {len(t)} ids per query, need k={k}")
        hits += len({int(x) for x in t[:k]} & {int(x) for x in list(a)[:k]})
    return hits / (k * len(truth))


@dataclass
class SweepRow:
    algorithm: str
    merge_dc: int | None
    L: int
    recall: float
    avg_search_dc: float


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)
    k: int = 5
    comment: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.comment:
            buf.write(f"# {self.comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["algorithm", "merge_dc", "L", f"recall_at_{self.k}", "avg_search_dc"])
        for r in self.rows:
            w.writerow([
                r.algorithm,
                "" if r.merge_dc is None else r.merge_dc,
                r.L,
                f"{r.recall:.6f}",
                f"{r.avg_search_dc:.3f}",
            ])
        return buf.getvalue()

    def by_algorithm(self, name: str) -> list[SweepRow]:
        return [r for r in self.rows if r.algorithm == name]


def search_sweep(
    h: HnswIndex,
    space: Space,
    queries: np.ndarray,
    truth: Sequence[Sequence[int]],
    k: int = 5,
    Ls: Iterable[int] = DEFAULT_LS,
    algorithm: str = "index",
    merge_dc: int | None = None,
) -> list[SweepRow]:
    """Recall@k and mean search cost of ``h`` for each beam width in ``Ls``.

    Search distances go to a private meter, so the caller's counts are
    left untouched.
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    rows = []
    for L in Ls:
        meter = DistanceMeter()
        probe = space.with_meter(meter)
        answers = []
        for q in queries:
            res = hnsw_search(h, q, k, max(L, k), probe, phase="search")
            answers.append([v for v, _ in res])
        rows.append(SweepRow(
            algorithm=algorithm,
            merge_dc=merge_dc,
            L=int(L),
            recall=recall_at_k(truth, answers, k),
            avg_search_dc=meter["search"] / max(len(queries), 1),
        ))
    return rows


@dataclass
class MergeVariant:
    """One entry of a merge grid."""

    algo: MergeAlgorithm
    label: str | None = None
    params: MergeParams | None = None
    ef_construction: int | None = None

    def __post_init__(self) -> None:
        self.algo = MergeAlgorithm(self.algo)
        if self.label is None:
            self.label = self.algo.value


DEFAULT_GRID = (
    MergeVariant("sigm"),
    MergeVariant("ngm"),
    MergeVariant("igtm"),
    MergeVariant("cgtm"),
)


@dataclass
class BenchmarkResult:
    report: SweepReport
    merge_dc: dict[str, int]
    indices: dict[str, HnswIndex]
    parts: tuple[HnswIndex, HnswIndex]


def split_ids(n: int, fraction: float = 0.5) -> tuple[list[int], list[int]]:
    """Contiguous disjoint split of ``range(n)``."""
    if not 0 < fraction < 1:
        raise ValueError("split fraction must be in (0, 1)")
    cut = int(round(n * fraction))
    return list(range(cut)), list(range(cut, n))


def merge_benchmark(
    space: Space,
    queries: np.ndarray,
    truth: Sequence[Sequence[int]] | None = None,
    split: float | tuple[Sequence[int], Sequence[int]] = 0.5,
    build_params: IndexParams | None = None,
    grid: Sequence[MergeVariant] = DEFAULT_GRID,
    merge_params: MergeParams | None = None,
    strategy: Strategy | str = Strategy.RNG,
    k: int = 5,
    Ls: Iterable[int] = DEFAULT_LS,
    keep_indices: bool = False,
) -> BenchmarkResult:
    """Build two indices on a disjoint split, merge them every way in
    ``grid``, and sweep search quality on each result.

    The second index is built with seed ``build_params.seed + 1``.
    """
    build_params = build_params or IndexParams()
    merge_params = merge_params or MergeParams(m=build_params.M, m0=build_params.M0)
    ids_a, ids_b = split_ids(space.n, split) if isinstance(split, float) else split
    if set(ids_a) & set(ids_b):
        raise ValueError("split parts overlap")
    Ls = list(Ls)
    if truth is None:
        truth = ground_truth(space.with_meter(DistanceMeter()), queries, k)

    build_space = space.with_meter(DistanceMeter())
    h_a = build_index(build_space, ids_a, build_params, strategy)
    h_b = build_index(build_space, ids_b, dataclasses.replace(build_params, seed=build_params.seed + 1),
                      strategy)

    rows: list[SweepRow] = []
    counts: dict[str, int] = {}
    merged: dict[str, HnswIndex] = {}
    for variant in grid:
        meter = DistanceMeter()
        params = variant.params or merge_params
        h_c = merge_indices(h_a, h_b, variant.algo, space.with_meter(meter), params, strategy,
                            ef_construction=variant.ef_construction, phase="merge")
        counts[variant.label] = meter["merge"]
        rows.extend(search_sweep(h_c, space, queries, truth, k, Ls, variant.label, meter["merge"]))
        if keep_indices:
            merged[variant.label] = h_c

    comment = (
        f"seed={build_params.seed}, params=M:{build_params.M} M0:{build_params.M0} "
        f"efc:{build_params.ef_construction} n:{space.n} queries:{len(queries)} k:{k} "
        f"strategy:{Strategy(strategy).value}"
    )
    return BenchmarkResult(
        report=SweepReport(rows=rows, k=k, comment=comment),
        merge_dc=counts,
        indices=merged,
        parts=(h_a, h_b),
    )
