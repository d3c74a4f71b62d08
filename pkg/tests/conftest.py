"""
Shared fixtures: seeds, tiny parameter sets and hand-built graphs.
"""

import pytest

from pdbs.graph.graph import Graph
from pdbs.models.canonical import ModelParams, Seed

SEED = 20240611


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo acceptance runs (deselect with -m 'not slow')")


@pytest.fixture
def seed() -> Seed:
    return Seed(root=SEED)


@pytest.fixture
def tiny_params() -> ModelParams:
    return ModelParams.create(n=5, k_r=2, k_l=1, p=0.9, q=0.2)


@pytest.fixture
def small_params() -> ModelParams:
    return ModelParams.create(n=6, k_r=2, k_l=2, p=0.8, q=0.3)


@pytest.fixture
def triangle() -> Graph:
    return Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def path3() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def planted_k23() -> Graph:
    """K_{2,3} on R = {0, 1}, L = {2, 3, 4} plus an isolated vertex 5."""
    return Graph.from_edges(6, [(r, l) for r in (0, 1) for l in (2, 3, 4)])
