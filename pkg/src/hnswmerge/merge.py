"""Layer-by-layer HNSW merging: NGM, IGTM and CGTM.

All three rebuild every vertex's out-neighborhood from its old
neighbors plus candidates found in the other index. They differ in how
the next vertex is picked and how much search work is carried over from
the previous vertex:

* NGM runs a full top-down search into the other index for every vertex.
* IGTM walks through its own graph to a nearby unprocessed vertex and
  reuses the previous candidates as seeds for a cheap local search; a
  full search is only paid on a random restart.
* CGTM does the same, but the next vertex may come from either graph.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .build import sigm_merge
from .graph import HnswIndex, LayerGraph
from .neighborhood import Strategy, select_neighbors
from .search import hnsw_search, local_search
from .vecstore import Space


class MergeAlgorithm(str, Enum):
    SIGM = "sigm"
    NGM = "ngm"
    IGTM = "igtm"
    CGTM = "cgtm"


@dataclass
class MergeParams:
    """Knobs for the layer-merge algorithms.

    ``m``/``m0`` cap the rebuilt neighborhoods above/at layer 0.
    ``next_step_ef`` defaults to ``next_step_k``. The next-step and carry
    defaults were picked on pilot runs as the cheapest settings that kept
    recall unchanged.
    """

    m: int = 16
    m0: int = 32
    search_ef: int = 20
    jump_ef: int = 20
    local_ef: int = 32
    next_step_k: int = 8
    next_step_ef: int | None = None
    m_carry: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.next_step_ef is None:
            self.next_step_ef = self.next_step_k
        for name in ("m", "m0", "search_ef", "jump_ef", "local_ef", "next_step_k",
                     "next_step_ef", "m_carry"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.next_step_ef < self.next_step_k:
            raise ValueError("next_step_ef must be >= next_step_k")
        if self.local_ef < self.m:
            raise ValueError("local_ef must be >= m")

    def cap(self, layer: int) -> int:
        return self.m0 if layer == 0 else self.m


@dataclass
class MergeTrace:
    """What a merge did, for tests and reports."""

    restarts: dict[int, int] = field(default_factory=dict)
    order: dict[int, list[int]] = field(default_factory=dict)

    def _restart(self, layer: int) -> None:
        self.restarts[layer] = self.restarts.get(layer, 0) + 1

    def _visit(self, layer: int, v: int) -> None:
        self.order.setdefault(layer, []).append(v)

    @property
    def total_restarts(self) -> int:
        return sum(self.restarts.values())


class _NotDone:
    """Unprocessed vertex set with O(1) removal and seeded uniform draws."""

    def __init__(self, vertices, rng: np.random.Generator) -> None:
        self._items = sorted(vertices)
        self._pos = {v: i for i, v in enumerate(self._items)}
        self._rng = rng

    def __bool__(self) -> bool:
        return bool(self._items)

    def __contains__(self, v: int) -> bool:
        return v in self._pos

    def draw(self) -> int:
        return self._items[int(self._rng.integers(len(self._items)))]

    def discard(self, v: int) -> None:
        i = self._pos.pop(v, None)
        if i is None:
            return
        last = self._items.pop()
        if last != v:
            self._items[i] = last
            self._pos[last] = i


def _layer_rng(params: MergeParams, layer: int, salt: int) -> np.random.Generator:
    return np.random.default_rng([params.seed, layer, salt])


def _trivial_layer(g_a: LayerGraph, g_b: LayerGraph) -> LayerGraph | None:
    # Above one index's top layer there is nothing to search on the other
    # side, so the existing layer is kept as is.
    if len(g_b) == 0:
        return g_a.copy()
    if len(g_a) == 0:
        return g_b.copy()
    return None


def ngm_layer(
    h_a: HnswIndex,
    h_b: HnswIndex,
    layer: int,
    params: MergeParams,
    space: Space,
    strategy: Strategy | str = Strategy.RNG,
    phase: str | None = None,
    trace: MergeTrace | None = None,
) -> LayerGraph:
    g_a, g_b = h_a.get_layer(layer), h_b.get_layer(layer)
    trivial = _trivial_layer(g_a, g_b)
    if trivial is not None:
        return trivial
    cap = params.cap(layer)
    beam = max(params.search_ef, cap)
    out = LayerGraph(sorted(g_a.vertices | g_b.vertices))
    for own, other_index in ((g_a, h_b), (g_b, h_a)):
        for v in sorted(own):
            if trace is not None:
                trace._restart(layer)
                trace._visit(layer, v)
            q = space.vectors[v]
            found = hnsw_search(other_index, q, cap, beam, space, layer, phase=phase)
            cands = list(own.neighbors(v)) + found
            out.set_neighborhood(v, select_neighbors(strategy, v, cands, cap, space, phase))
    return out


def igtm_layer(
    h_a: HnswIndex,
    h_b: HnswIndex,
    layer: int,
    params: MergeParams,
    space: Space,
    strategy: Strategy | str = Strategy.RNG,
    phase: str | None = None,
    trace: MergeTrace | None = None,
) -> LayerGraph:
    g_a, g_b = h_a.get_layer(layer), h_b.get_layer(layer)
    trivial = _trivial_layer(g_a, g_b)
    if trivial is not None:
        return trivial
    out = LayerGraph(sorted(g_a.vertices | g_b.vertices))
    _igtm_pass(g_a, h_b, layer, params, space, strategy, phase, trace, out, salt=0)
    _igtm_pass(g_b, h_a, layer, params, space, strategy, phase, trace, out, salt=1)
    return out


def _igtm_pass(own, other_index, layer, params, space, strategy, phase, trace, out, salt):
    other = other_index.get_layer(layer)
    cap = params.cap(layer)
    local_ef = max(params.local_ef, cap)
    jump_ef = max(params.jump_ef, params.m_carry)
    not_done = _NotDone(own.vertices, _layer_rng(params, layer, salt))

    while not_done:
        v = not_done.draw()
        if trace is not None:
            trace._restart(layer)
        q = space.vectors[v]
        pool: list = hnsw_search(other_index, q, params.m_carry, jump_ef, space, layer, phase=phase)
        while True:
            not_done.discard(v)
            if trace is not None:
                trace._visit(layer, v)
            found = local_search(other, q, pool, cap, local_ef, space, phase)
            cands = list(own.neighbors(v)) + found
            out.set_neighborhood(v, select_neighbors(strategy, v, cands, cap, space, phase))
            carried = [u for u, _ in found[: params.m_carry]]

            step = local_search(own, q, [(v, 0.0)], params.next_step_k, params.next_step_ef,
                                space, phase)
            step = [u for u, _ in step if u in not_done]
            if not step:
                break
            v = step[0]
            q = space.vectors[v]
            pool = carried


def cgtm_layer(
    h_a: HnswIndex,
    h_b: HnswIndex,
    layer: int,
    params: MergeParams,
    space: Space,
    strategy: Strategy | str = Strategy.RNG,
    phase: str | None = None,
    trace: MergeTrace | None = None,
) -> LayerGraph:
    g_a, g_b = h_a.get_layer(layer), h_b.get_layer(layer)
    trivial = _trivial_layer(g_a, g_b)
    if trivial is not None:
        return trivial
    cap = params.cap(layer)
    local_ef = max(params.local_ef, cap)
    jump_ef = max(params.jump_ef, params.m_carry)
    k_next = params.next_step_k
    out = LayerGraph(sorted(g_a.vertices | g_b.vertices))
    not_done = _NotDone(out.vertices, _layer_rng(params, layer, 2))

    while not_done:
        v = not_done.draw()
        if trace is not None:
            trace._restart(layer)
        q = space.vectors[v]
        pool_a: list = hnsw_search(h_a, q, params.m_carry, jump_ef, space, layer, phase=phase)
        pool_b: list = hnsw_search(h_b, q, params.m_carry, jump_ef, space, layer, phase=phase)
        while True:
            not_done.discard(v)
            if trace is not None:
                trace._visit(layer, v)
            found_a = local_search(g_a, q, pool_a, cap, local_ef, space, phase)
            found_b = local_search(g_b, q, pool_b, cap, local_ef, space, phase)
            if v in g_a:
                cands = list(g_a.neighbors(v)) + found_b
            else:
                cands = list(g_b.neighbors(v)) + found_a
            out.set_neighborhood(v, select_neighbors(strategy, v, cands, cap, space, phase))

            step = [(d, u) for u, d in found_a[:k_next] + found_b[:k_next] if u in not_done]
            if not step:
                break
            v = min(step)[1]
            q = space.vectors[v]
            pool_a = [u for u, _ in found_a]
            pool_b = [u for u, _ in found_b]
    return out


_LAYER_MERGES = {
    MergeAlgorithm.NGM: ngm_layer,
    MergeAlgorithm.IGTM: igtm_layer,
    MergeAlgorithm.CGTM: cgtm_layer,
}


def general_merge(
    h_a: HnswIndex,
    h_b: HnswIndex,
    algo: MergeAlgorithm | str,
    space: Space,
    params: MergeParams | None = None,
    strategy: Strategy | str = Strategy.RNG,
    phase: str = "merge",
    trace: MergeTrace | None = None,
) -> HnswIndex:
    """Merge two indices over disjoint ids, one layer at a time.

    The result keeps every vertex's level; its entry point is the lowest id
    on the top layer. All distance evaluations are charged to ``phase``.
    """
    algo = MergeAlgorithm(algo)
    if algo is MergeAlgorithm.SIGM:
        raise ValueError("use merge_indices() or sigm_merge() for insertion merging")
    params = params or MergeParams()
    overlap = h_a.levels.keys() & h_b.levels.keys()
    if overlap:
        raise ValueError(f"indices share {len(overlap)} vertex ids")
    if not h_b.levels:
        return h_a.copy()
    if not h_a.levels:
        return h_b.copy()

    layer_merge = _LAYER_MERGES[algo]
    top = max(h_a.l_max, h_b.l_max)
    layers = [
        layer_merge(h_a, h_b, i, params, space, strategy, phase, trace) for i in range(top + 1)
    ]
    merged_params = dataclasses.replace(h_a.params, M=params.m, M0=params.m0, seed=params.seed)
    return HnswIndex(
        params=merged_params,
        layers=layers,
        levels={**h_a.levels, **h_b.levels},
        entry=min(layers[top]),
    )


def merge_indices(
    h_a: HnswIndex,
    h_b: HnswIndex,
    algo: MergeAlgorithm | str,
    space: Space,
    params: MergeParams | None = None,
    strategy: Strategy | str = Strategy.RNG,
    ef_construction: int | None = None,
    phase: str = "merge",
    trace: MergeTrace | None = None,
) -> HnswIndex:
    """Dispatch to :func:`sigm_merge` or :func:`general_merge`."""
    if MergeAlgorithm(algo) is MergeAlgorithm.SIGM:
        return sigm_merge(h_a, h_b, space, strategy, ef_construction=ef_construction, phase=phase)
    return general_merge(h_a, h_b, algo, space, params, strategy, phase, trace)
