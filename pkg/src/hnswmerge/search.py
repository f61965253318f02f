"""Beam search on one layer and top-down search through an HNSW index."""

from __future__ import annotations

import heapq
from typing import Sequence, Union

import numpy as np

from .graph import HnswIndex, LayerGraph
from .vecstore import Space

Seed = Union[int, tuple[int, float]]


def _seed_distances(
    seeds: Sequence[Seed], q: np.ndarray, space: Space, phase: str | None
) -> dict[int, float]:
    known: dict[int, float] = {}
    pending: list[int] = []
    for s in seeds:
        if isinstance(s, tuple):
            known.setdefault(int(s[0]), float(s[1]))
        else:
            pending.append(int(s))
    pending = [v for v in dict.fromkeys(pending) if v not in known]
    if pending:
        for v, d in zip(pending, space.distances(q, pending, phase)):
            known[v] = float(d)
    return known


def local_search(
    g: LayerGraph,
    q: np.ndarray,
    seeds: Sequence[Seed],
    k: int,
    L: int,
    space: Space,
    phase: str | None = None,
) -> list[tuple[int, float]]:
    """Beam search for the ``k`` nearest vertices of ``g`` to ``q``.

    The candidate pool holds at most ``L`` entries; the nearest unexpanded
    entry is expanded until every surviving entry has been expanded.
    Seeds are vertex ids, or ``(id, distance)`` pairs whose distance is
    already known and is not charged again. Each other vertex is charged
    at most once per call.

    Returns ``(id, distance)`` pairs ascending by distance, ties by id.
    """
    if not seeds:
        raise ValueError("local_search needs at least one seed")
    if k < 1 or L < k:
        raise ValueError(f"need 1 <= k <= L, got k={k}, L={L}")

    seen = _seed_distances(seeds, q, space, phase)
    for v in seen:
        if v not in g:
            raise ValueError(f"seed {v} is not a vertex of the layer")

    # pool: max-heap of the best L entries; frontier: min-heap of unexpanded ones
    entries = sorted((d, v) for v, d in seen.items())[:L]
    pool = [(-d, -v) for d, v in entries]
    heapq.heapify(pool)
    frontier = list(entries)
    heapq.heapify(frontier)

    adj = g.adjacency()
    while frontier:
        d_u, u = heapq.heappop(frontier)
        if len(pool) >= L and (d_u, u) > (-pool[0][0], -pool[0][1]):
            break
        fresh = [v for v in adj[u] if v not in seen]
        if not fresh:
            continue
        dists = space.distances(q, fresh, phase)
        for v, d in zip(fresh, dists.tolist()):
            seen[v] = d
            if len(pool) < L or (d, v) < (-pool[0][0], -pool[0][1]):
                heapq.heappush(frontier, (d, v))
                heapq.heappush(pool, (-d, -v))
                if len(pool) > L:
                    heapq.heappop(pool)

    best = sorted((-nd, -nv) for nd, nv in pool)[:k]
    return [(v, d) for d, v in best]


def hnsw_search(
    h: HnswIndex,
    q: np.ndarray,
    k: int,
    L: int,
    space: Space,
    layer: int = 0,
    entry: int | None = None,
    phase: str | None = None,
) -> list[tuple[int, float]]:
    """Descend from the top layer to ``layer`` and return its ``k`` nearest.

    Upper layers run a beam of width ``L`` keeping only the single best
    vertex as the entry for the next layer down.
    """
    if not h.levels:
        raise KeyError("cannot search an empty index")
    if layer < 0 or layer > h.l_max:
        raise ValueError(f"target layer {layer} outside [0, {h.l_max}]")
    v0 = h.entry if entry is None else entry
    if v0 not in h.get_layer(h.l_max):
        raise ValueError(f"entry vertex {v0} is not on the top layer")

    current: list[Seed] = [v0]
    for i in range(h.l_max, layer, -1):
        current = local_search(h.layers[i], q, current, 1, max(L, 1), space, phase)
    return local_search(h.layers[layer], q, current, k, L, space, phase)
