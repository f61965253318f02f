"""Layered directed graph storage for HNSW indices."""

from __future__ import annotations

import copy
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class LayerGraph:
    """One HNSW layer: a vertex set and ordered out-adjacency lists."""

    def __init__(self, vertices: Iterable[int] = ()) -> None:
        self._adj: dict[int, list[int]] = {int(v): [] for v in vertices}

    def add_vertex(self, v: int) -> None:
        self._adj.setdefault(int(v), [])

    def __contains__(self, v: object) -> bool:
        return v in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def __iter__(self) -> Iterator[int]:
        return iter(self._adj)

    @property
    def vertices(self) -> set[int]:
        return set(self._adj)

    def neighbors(self, v: int) -> list[int]:
        try:
            return self._adj[v]
        except KeyError:
            raise KeyError(f"vertex {v} not in layer") from None

    def set_neighborhood(self, v: int, ns: Iterable[int]) -> None:
        if v not in self._adj:
            raise ValueError(f"vertex {v} not in layer")
        ns = [int(u) for u in ns]
        if v in ns:
            raise ValueError(f"self-loop on vertex {v}")
        if len(set(ns)) != len(ns):
            raise ValueError(f"duplicate neighbors for vertex {v}")
        missing = [u for u in ns if u not in self._adj]
        if missing:
            raise ValueError(f"neighbors {missing} of vertex {v} are not in the layer")
        self._adj[v] = ns

    def adjacency(self) -> dict[int, list[int]]:
        return self._adj

    def num_edges(self) -> int:
        return sum(len(ns) for ns in self._adj.values())

    def max_degree(self) -> int:
        return max((len(ns) for ns in self._adj.values()), default=0)

    def copy(self) -> "LayerGraph":
        g = LayerGraph()
        g._adj = {v: list(ns) for v, ns in self._adj.items()}
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LayerGraph):
            return NotImplemented
        return self._adj == other._adj

    def __repr__(self) -> str:
        return f"LayerGraph(n={len(self)}, edges={self.num_edges()})"


@dataclass
class IndexParams:
    """Degree caps and construction settings carried by an index."""

    M: int = 16
    M0: int = 32
    ef_construction: int = 32
    mL: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        import math

        if self.M < 1 or self.M0 < 1 or self.ef_construction < 1:
            raise ValueError("M, M0 and ef_construction must be positive")
        if self.M0 < self.M:
            raise ValueError("M0 must be >= M")
        if self.mL is None:
            self.mL = 1.0 / math.log(self.M) if self.M > 1 else 1.0
        if self.mL <= 0:
            raise ValueError("mL must be positive")

    def cap(self, layer: int) -> int:
        return self.M0 if layer == 0 else self.M


@dataclass
class HnswIndex:
    """A stack of layers, each vertex's top level, and an entry point.

    ``l_max`` is -1 for an index with no vertices.
    """

    params: IndexParams = field(default_factory=IndexParams)
    layers: list[LayerGraph] = field(default_factory=list)
    levels: dict[int, int] = field(default_factory=dict)
    entry: int | None = None

    @property
    def l_max(self) -> int:
        return len(self.layers) - 1

    def __len__(self) -> int:
        return len(self.levels)

    def __contains__(self, v: object) -> bool:
        return v in self.levels

    @property
    def ids(self) -> list[int]:
        return sorted(self.levels)

    def get_layer(self, layer: int) -> LayerGraph:
        if layer < 0:
            raise ValueError("layer index must be non-negative")
        if layer > self.l_max:
            return LayerGraph()
        return self.layers[layer]

    def add_vertex(self, v: int, level: int) -> None:
        """Register ``v`` with no edges on layers ``0..level``."""
        if v in self.levels:
            raise ValueError(f"vertex {v} already in index")
        while self.l_max < level:
            self.layers.append(LayerGraph())
        for i in range(level + 1):
            self.layers[i].add_vertex(v)
        self.levels[v] = level

    def copy(self) -> "HnswIndex":
        return HnswIndex(
            params=copy.copy(self.params),
            layers=[g.copy() for g in self.layers],
            levels=dict(self.levels),
            entry=self.entry,
        )

    def relabel(self, offset: int) -> "HnswIndex":
        """Copy with every vertex id shifted by ``offset``."""
        layers = []
        for g in self.layers:
            h = LayerGraph()
            h._adj = {v + offset: [u + offset for u in ns] for v, ns in g.adjacency().items()}
            layers.append(h)
        return HnswIndex(
            params=copy.copy(self.params),
            layers=layers,
            levels={v + offset: lvl for v, lvl in self.levels.items()},
            entry=None if self.entry is None else self.entry + offset,
        )

    def check_invariants(self) -> None:
        """Raise AssertionError if nesting, degree caps, adjacency or entry rules fail."""
        if not self.levels:
            assert self.entry is None and not self.layers, "empty index must have no layers"
            return
        top = max(self.levels.values())
        assert self.l_max == top, f"l_max {self.l_max} != highest level {top}"
        for i, g in enumerate(self.layers):
            expected = {v for v, lvl in self.levels.items() if lvl >= i}
            assert g.vertices == expected, f"layer {i} membership does not match levels"
            cap = self.params.cap(i)
            for v, ns in g.adjacency().items():
                assert len(ns) <= cap, f"vertex {v} has degree {len(ns)} > {cap} on layer {i}"
                assert v not in ns, f"self-loop at {v} on layer {i}"
                assert len(set(ns)) == len(ns), f"duplicate neighbors at {v} on layer {i}"
                for u in ns:
                    assert u in g, f"edge {v}->{u} leaves layer {i}"
            if i + 1 < len(self.layers):
                assert self.layers[i + 1].vertices <= g.vertices, f"layer {i + 1} not nested"
        assert self.entry in self.levels, "entry point missing"
        assert self.levels[self.entry] == self.l_max, "entry point is not on the top layer"


def get_layer(h: HnswIndex, layer: int) -> LayerGraph:
    return h.get_layer(layer)


@dataclass
class GraphStats:
    layer_sizes: list[int]
    degree_histograms: list[dict[int, int]]
    l_max: int


def graph_stats(h: HnswIndex) -> GraphStats:
    sizes = [len(g) for g in h.layers]
    hists = [dict(sorted(Counter(len(ns) for ns in g.adjacency().values()).items())) for g in h.layers]
    return GraphStats(layer_sizes=sizes, degree_histograms=hists, l_max=h.l_max)
