"""
Shared graph fixtures and random graph factories.
"""

from typing import Callable, List, Tuple

import numpy as np
import pytest

from src.arcorder.digraph import Graph, build_graph


G3_EDGES = [("a", "b", 5), ("b", "c", 3), ("c", "a", 10)]
G4_EDGES = [("3", "1", 10), ("1", "2", 2), ("2", "3", 2)]


@pytest.fixture
def g3() -> Graph:
    """3-cycle a->b:5, b->c:3, c->a:10 (optimum [c,a,b], FW 15 of 18)."""
    return build_graph(G3_EDGES)


@pytest.fixture
def g3d() -> Graph:
    """G3 plus a pendant node d reached by c->d:1."""
    return build_graph(G3_EDGES + [("c", "d", 1)])


@pytest.fixture
def g4() -> Graph:
    """Nodes 1,2,3 (indices in that order) with 3->1:10, 1->2:2, 2->3:2."""
    return build_graph(G4_EDGES, nodes=("1", "2", "3"))


def random_edges(
    rng: np.random.Generator,
    n: int,
    density: float,
    max_weight: int = 20,
) -> List[Tuple[str, str, int]]:
    edges = []
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < density:
                edges.append((f"n{u}", f"n{v}", int(rng.integers(1, max_weight + 1))))
    return edges


def random_graph(
    rng: np.random.Generator, n: int, density: float, max_weight: int = 20
) -> Graph:
    nodes = tuple(f"n{i}" for i in range(n))
    return build_graph(random_edges(rng, n, density, max_weight), nodes=nodes)


def random_dag(
    rng: np.random.Generator, n: int, density: float, max_weight: int = 20
) -> Graph:
    """Random DAG whose edges respect a shuffled hidden order."""
    hidden = rng.permutation(n)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                edges.append(
                    (f"n{hidden[i]}", f"n{hidden[j]}", int(rng.integers(1, max_weight + 1)))
                )
    return build_graph(edges, nodes=tuple(f"n{i}" for i in range(n)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def graph_factory() -> Callable[..., Graph]:
    return random_graph


@pytest.fixture
def dag_factory() -> Callable[..., Graph]:
    return random_dag
