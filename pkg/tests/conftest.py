import time

import numpy as np
import pytest

from hnswmerge import IndexParams, Space, build_index
from hnswmerge.datasets import gaussian_mixture, sift_descriptors
from hnswmerge.evaluation import merge_benchmark

ACCEPTANCE_LINES: list[str] = []

DESK_N = 20_000
DESK_QUERIES = 100
DESK_LS = (32, 40, 50, 64, 72)
DESK_PARAMS = IndexParams(M=16, M0=32, ef_construction=32, seed=0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_world():
    """Two indices over a 2x300 split of a 16-d mixture, plus their space."""
    X = gaussian_mixture(600, dim=16, n_clusters=6, intrinsic_dim=6, seed=7)
    space = Space(X)
    params = IndexParams(M=8, M0=16, ef_construction=24, seed=3)
    h_a = build_index(space, range(300), params)
    h_b = build_index(space, range(300, 600), IndexParams(M=8, M0=16, ef_construction=24, seed=4))
    return space, h_a, h_b


@pytest.fixture(scope="session")
def desk_data():
    X = sift_descriptors(DESK_N + DESK_QUERIES, seed=0)
    return Space(X[:DESK_N]), X[DESK_N:]


@pytest.fixture(scope="session")
def desk(desk_data):
    """2x10k split, build twice, merge four ways, sweep recall@5 over DESK_LS."""
    space, queries = desk_data
    start = time.perf_counter()
    result = merge_benchmark(space, queries, build_params=DESK_PARAMS, k=5, Ls=DESK_LS,
                             keep_indices=True)
    result.seconds = time.perf_counter() - start
    return result
