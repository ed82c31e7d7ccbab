import os
import pathlib

import pytest

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent

# Persistent catalog/adjacency caches make repeated test runs fast; the
# directory is keyed by format version and safe to delete at any time.
os.environ.setdefault("GRAPHDIST_CACHE_DIR", str(REPO_ROOT / ".graphdist-cache"))

from graphdist import GraphClassSpec, Pdag  # noqa: E402
from graphdist.catalog import enumerate_class, hasse_adjacency  # noqa: E402
from graphdist.poset import NeighborCache  # noqa: E402

THREADS = min(os.cpu_count() or 1, 4)


def make(n, directed=(), undirected=()):
    """1-based edge-list graph builder for readable test cases."""
    return Pdag.from_edges(
        n,
        directed=[(a - 1, b - 1) for a, b in directed],
        undirected=[(a - 1, b - 1) for a, b in undirected],
    )


def preloaded_cache(spec: GraphClassSpec, n: int) -> tuple:
    catalog = enumerate_class(spec, n)
    up, down = hasse_adjacency(catalog, threads=THREADS)
    cache = NeighborCache(spec)
    mem = catalog.members
    for i, g in enumerate(mem):
        cache.preload(g, [mem[j] for j in up[i]], [mem[j] for j in down[i]])
    return catalog, cache


@pytest.fixture(scope="session")
def cpdag4():
    return preloaded_cache(GraphClassSpec("cpdag"), 4)


@pytest.fixture(scope="session")
def cpdag3():
    return preloaded_cache(GraphClassSpec("cpdag"), 3)


@pytest.fixture(scope="session")
def cpdag5():
    return preloaded_cache(GraphClassSpec("cpdag"), 5)


@pytest.fixture(scope="session")
def poly_mpdag4():
    return preloaded_cache(GraphClassSpec("mpdag", polytree=True), 4)
