"""HNSW construction by sequential insertion, and the insertion-based merge."""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable

import numpy as np

from .graph import HnswIndex, IndexParams
from .neighborhood import Strategy, select_neighbors
from .search import local_search
from .vecstore import Space

BuildParams = IndexParams


def assign_level(rng: np.random.Generator, mL: float) -> int:
    """Geometric level draw ``floor(-ln(U) * mL)`` with ``U`` uniform on (0, 1]."""
    if mL <= 0:
        raise ValueError("mL must be positive")
    u = 1.0 - rng.random()
    return int(math.floor(-math.log(u) * mL))


def insert(
    h: HnswIndex,
    v: int,
    space: Space,
    strategy: Strategy | str = Strategy.RNG,
    level: int | None = None,
    rng: np.random.Generator | None = None,
    phase: str | None = None,
) -> int:
    """Insert vertex ``v`` into ``h`` in place and return its level.

    The level is drawn from ``rng`` unless given explicitly.
    """
    if v in h.levels:
        raise ValueError(f"vertex {v} is already in the index")
    if level is None:
        if rng is None:
            raise ValueError("either level or rng is required")
        level = assign_level(rng, h.params.mL)
    if level < 0:
        raise ValueError("level must be non-negative")

    if not h.levels:
        h.add_vertex(v, level)
        h.entry = v
        return level

    efc = h.params.ef_construction
    q = space.vectors[v]
    top = h.l_max
    current: list = [h.entry]
    for i in range(top, level, -1):
        current = local_search(h.layers[i], q, current, 1, efc, space, phase)

    h.add_vertex(v, level)
    for i in range(min(level, top), -1, -1):
        g = h.layers[i]
        cap = h.params.cap(i)
        found = local_search(g, q, current, efc, efc, space, phase)
        chosen = select_neighbors(strategy, v, found, cap, space, phase)
        g.set_neighborhood(v, chosen)
        adj = g.adjacency()
        for u in chosen:
            back = adj[u]
            if len(back) < cap:
                back.append(v)
            else:
                adj[u] = select_neighbors(strategy, u, back + [v], cap, space, phase)
        current = found

    if level > top:
        h.entry = v
    return level


def build_index(
    space: Space,
    ids: Iterable[int],
    params: IndexParams | None = None,
    strategy: Strategy | str = Strategy.RNG,
    phase: str = "build",
) -> HnswIndex:
    """Build an index over ``ids`` by inserting them in the given order.

    Levels come from a generator seeded with ``params.seed``, so the same
    ids, order and params always give the same index.
    """
    params = params or IndexParams()
    ids = [int(i) for i in ids]
    if len(set(ids)) != len(ids):
        raise ValueError("ids must be unique")
    rng = np.random.default_rng(params.seed)
    h = HnswIndex(params=dataclasses.replace(params))
    for v in ids:
        insert(h, v, space, strategy, rng=rng, phase=phase)
    return h


def sigm_merge(
    h_a: HnswIndex,
    h_b: HnswIndex,
    space: Space,
    strategy: Strategy | str = Strategy.RNG,
    ef_construction: int | None = None,
    phase: str = "merge",
) -> HnswIndex:
    """Insert every vertex of the smaller index into a copy of the larger one.

    Ties in size go to ``h_a``. Inserted vertices keep the level they had in
    their source index. ``ef_construction`` overrides the beam used for the
    insertions.
    """
    overlap = h_a.levels.keys() & h_b.levels.keys()
    if overlap:
        raise ValueError(f"indices share {len(overlap)} vertex ids")
    big, small = (h_a, h_b) if len(h_a) >= len(h_b) else (h_b, h_a)
    merged = big.copy()
    if ef_construction is not None:
        merged.params = dataclasses.replace(merged.params, ef_construction=ef_construction)
    for v in sorted(small.levels):
        insert(merged, v, space, strategy, level=small.levels[v], phase=phase)
    merged.params = dataclasses.replace(merged.params, ef_construction=big.params.ef_construction)
    return merged
