"""Neighborhood construction strategies shared by build and merge."""

from __future__ import annotations

from enum import Enum
from typing import Iterable, Sequence, Union

from .vecstore import Space

Candidate = Union[int, tuple[int, float]]


class Strategy(str, Enum):
    KNN = "knn"
    RNG = "rng"


def _normalize(v_star: int, candidates: Iterable[tuple[int, float]]) -> list[tuple[float, int]]:
    best: dict[int, float] = {}
    for v, d in candidates:
        v = int(v)
        if v != v_star and v not in best:
            best[v] = float(d)
    return sorted((d, v) for v, d in best.items())


def knn_construct(v_star: int, candidates: Iterable[tuple[int, float]], k: int) -> list[int]:
    """The ``k`` candidates nearest to ``v_star``, ascending, ties to the smaller id."""
    return [v for _, v in _normalize(v_star, candidates)[:k]]


def rng_construct(
    v_star: int,
    candidates: Iterable[tuple[int, float]],
    m: int,
    space: Space,
    phase: str | None = None,
) -> list[int]:
    """Relative-neighborhood pruning.

    Candidates are visited nearest first; ``v`` is admitted only if
    ``rho(v_star, v) < rho(v, w)`` for every ``w`` admitted before it.
    Stops once ``m`` are admitted. Pairwise distances are metered.
    """
    admitted: list[int] = []
    for d, v in _normalize(v_star, candidates):
        if space.first_violation(v, admitted, d, phase) < 0:
            admitted.append(v)
            if len(admitted) >= m:
                break
    return admitted


def complete_distances(
    v_star: int, candidates: Sequence[Candidate], space: Space, phase: str | None = None
) -> list[tuple[int, float]]:
    """Attach distances to ``v_star`` for bare ids, charging one evaluation each."""
    out: list[tuple[int, float]] = []
    bare: list[int] = []
    for c in candidates:
        if isinstance(c, tuple):
            out.append((int(c[0]), float(c[1])))
        else:
            bare.append(int(c))
    if bare:
        have = {v for v, _ in out}
        bare = [v for v in dict.fromkeys(bare) if v not in have and v != v_star]
        dists = space.distances(space.vectors[v_star], bare, phase)
        out.extend(zip(bare, dists.tolist()))
    return out


def select_neighbors(
    strategy: Strategy | str,
    v_star: int,
    candidates: Sequence[Candidate],
    limit: int,
    space: Space,
    phase: str | None = None,
) -> list[int]:
    """Apply ``strategy`` to ``candidates`` (ids or ``(id, distance)`` pairs)."""
    if limit < 1:
        raise ValueError("neighborhood size limit must be >= 1")
    scored = complete_distances(v_star, candidates, space, phase)
    if Strategy(strategy) is Strategy.KNN:
        return knn_construct(v_star, scored, limit)
    return rng_construct(v_star, scored, limit, space, phase)
