"""Shared fixtures."""

from __future__ import annotations

import numpy as np
import pytest

from embedlouvain.datasets import LabeledDataset
from embedlouvain.graph import Graph


def random_graph(rng: np.random.Generator, node_count: int, density: float) -> Graph:
    """Erdos-Renyi graph with random positive weights."""
    rows, cols = np.triu_indices(node_count, 1)
    keep = rng.random(len(rows)) < density
    weights = rng.uniform(0.5, 2.0, int(keep.sum()))
    return Graph.from_edges(node_count, rows[keep], cols[keep], weights)


def two_triangles_graph() -> Graph:
    """Two disconnected triangles on nodes 0-2 and 3-5."""
    return Graph.from_edges(6, [0, 1, 0, 3, 4, 3], [1, 2, 2, 4, 5, 5])


@pytest.fixture
def two_triangles() -> Graph:
    """Two disconnected triangles."""
    return two_triangles_graph()


@pytest.fixture
def triangles_dataset() -> LabeledDataset:
    """Two triangles joined by one edge, one class per triangle."""
    graph = Graph.from_edges(
        6, [0, 1, 0, 3, 4, 3, 2], [1, 2, 2, 4, 5, 5, 3], node_names=[f"n{i}" for i in range(6)]
    )
    features = np.array([[1, 0], [1, 0], [1, 0], [0, 1], [0, 1], [0, 1]], dtype=np.float64)
    return LabeledDataset(graph, features, np.array([0, 0, 0, 1, 1, 1]), ("a", "b"))
