"""Tests for feature propagation, distances and centroids."""

from __future__ import annotations

import asyncio
from pathlib import Path

import numpy as np
import pytest

from embedlouvain.datasets import LabeledDataset
from embedlouvain.embeddings import (
    EmbeddingMatrix,
    async_load_embeddings,
    centroid,
    community_centroids,
    cosine_distance,
    cosine_distances,
    load_embeddings,
    normalize_rows,
    pairwise_cosine_distances,
    parse_embeddings,
    propagate_features,
)
from embedlouvain.exceptions import InvalidConfig, InvalidData, ParseError
from embedlouvain.graph import Graph, Partition


def _dataset(graph: Graph, features: np.ndarray) -> LabeledDataset:
    return LabeledDataset(graph, features.astype(np.float64), np.zeros(graph.node_count, dtype=np.int64), ("c",))


def test_propagate_single_edge() -> None:
    """Test one hop over a single edge with identity features."""
    dataset = _dataset(Graph.from_edges(2, [0], [1]), np.eye(2))
    embeddings = propagate_features(dataset, hops=1)
    assert np.allclose(embeddings.data, 0.5)


def test_propagate_without_edges() -> None:
    """Test that an edgeless graph leaves the features unchanged."""
    features = np.random.default_rng(0).random((4, 3))
    embeddings = propagate_features(_dataset(Graph.from_edges(4, [], []), features), hops=3)
    assert np.allclose(embeddings.data, features)


def test_propagate_composes() -> None:
    """Test that two hops equal one hop applied twice."""
    graph = Graph.from_edges(4, [0, 1, 2, 0], [1, 2, 3, 2])
    features = np.random.default_rng(1).random((4, 5))
    once = propagate_features(_dataset(graph, features), hops=1)
    twice = propagate_features(_dataset(graph, once.data), hops=1)
    assert np.allclose(propagate_features(_dataset(graph, features), hops=2).data, twice.data)


def test_propagate_bounded_on_regular_graph() -> None:
    """Test max|E| <= max|X| for non-negative features on a cycle."""
    n = 8
    graph = Graph.from_edges(n, list(range(n)), [(i + 1) % n for i in range(n)])
    features = np.random.default_rng(2).random((n, 6))
    embeddings = propagate_features(_dataset(graph, features), hops=2)
    assert np.abs(embeddings.data).max() <= np.abs(features).max() + 1e-12


def test_propagate_is_deterministic() -> None:
    """Test bit-identical repeats."""
    graph = Graph.from_edges(4, [0, 1, 2], [1, 2, 3])
    features = np.random.default_rng(5).random((4, 3))
    first = propagate_features(_dataset(graph, features))
    second = propagate_features(_dataset(graph, features))
    assert np.array_equal(first.data, second.data)


def test_propagate_validation() -> None:
    """Test hop and feature validation."""
    dataset = _dataset(Graph.from_edges(2, [0], [1]), np.eye(2))
    with pytest.raises(InvalidConfig):
        propagate_features(dataset, hops=0)
    bad = _dataset(Graph.from_edges(2, [0], [1]), np.array([[1.0, np.inf], [0.0, 1.0]]))
    with pytest.raises(InvalidData):
        propagate_features(bad)


def test_embedding_matrix_rejects_non_finite() -> None:
    """Test the finiteness invariant."""
    with pytest.raises(InvalidData):
        EmbeddingMatrix(np.array([[np.nan, 1.0]]))
    with pytest.raises(InvalidData):
        EmbeddingMatrix(np.array([1.0, 2.0]))


def test_cosine_distance_examples() -> None:
    """Test identical, orthogonal and opposite vectors."""
    assert cosine_distance((1, 0), (1, 0)) == pytest.approx(0.0)
    assert cosine_distance((1, 0), (0, 1)) == pytest.approx(1.0)
    assert cosine_distance((1, 0), (-1, 0)) == pytest.approx(2.0)


def test_cosine_distance_properties() -> None:
    """Test symmetry and scale invariance."""
    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b = rng.normal(size=3), rng.normal(size=3)
        assert cosine_distance(a, b) == pytest.approx(cosine_distance(b, a), abs=1e-9)
        assert cosine_distance(3.5 * a, b) == pytest.approx(cosine_distance(a, b), abs=1e-9)
        assert 0.0 <= cosine_distance(a, b) <= 2.0


def test_cosine_distance_zero_vector() -> None:
    """Test the neutral distance of a zero vector."""
    assert cosine_distance((0, 0), (1, 0)) == 1.0
    with pytest.raises(InvalidData):
        cosine_distance((1, 0), (1, 0, 0))


def test_vectorized_distances_match_scalar() -> None:
    """Test the vector and matrix forms against the scalar one."""
    rng = np.random.default_rng(6)
    left = rng.normal(size=(5, 4))
    right = rng.normal(size=(3, 4))
    right[1] = 0.0
    pairwise = pairwise_cosine_distances(left, right)
    for i in range(5):
        row = cosine_distances(left[i], right)
        for j in range(3):
            expected = cosine_distance(left[i], right[j])
            assert pairwise[i, j] == pytest.approx(expected, abs=1e-12)
            assert row[j] == pytest.approx(expected, abs=1e-12)


def test_centroid_examples() -> None:
    """Test midpoint, single member and a three-member mean."""
    embeddings = EmbeddingMatrix(np.array([[0, 0], [2, 2], [1, 0], [0, 1]], dtype=np.float64))
    assert np.allclose(centroid(embeddings, [0, 1]).vector, (1, 1))
    single = centroid(embeddings, [2])
    assert np.array_equal(single.vector, (1, 0))
    assert single.member_count == 1
    assert np.allclose(centroid(embeddings, [2, 3, 1]).vector, (1, 1), atol=1e-9)
    with pytest.raises(InvalidData):
        centroid(embeddings, [])


def test_community_centroids() -> None:
    """Test one centroid row per community."""
    embeddings = EmbeddingMatrix(np.array([[0, 0], [2, 2], [1, 0]], dtype=np.float64))
    centroids = community_centroids(embeddings, Partition.from_labels([0, 0, 1]))
    assert np.allclose(centroids, [[1, 1], [1, 0]])


def test_normalize_rows() -> None:
    """Test unit rows and untouched zero rows."""
    normalized = normalize_rows(EmbeddingMatrix(np.array([[3.0, 4.0], [0.0, 0.0]])))
    assert np.allclose(normalized.data, [[0.6, 0.8], [0.0, 0.0]])


def test_parse_embeddings() -> None:
    """Test a 3x2 embedding file."""
    embeddings = parse_embeddings(["0.1,0.2", "1,2", "-3,4e-1"], 3)
    assert (embeddings.rows, embeddings.dim) == (3, 2)
    assert embeddings.data[2, 1] == pytest.approx(0.4)


def test_parse_embeddings_errors() -> None:
    """Test row count, column count, emptiness and cell errors."""
    with pytest.raises(InvalidData):
        parse_embeddings(["1,2", "3,4", "5,6", "7,8"], 3)
    with pytest.raises(InvalidData):
        parse_embeddings(["1,2", "3"], 2)
    with pytest.raises(InvalidData):
        parse_embeddings([], 0)
    with pytest.raises(ParseError, match="emb.csv:2:2"):
        parse_embeddings(["1,2", "3,x"], 2, source="emb.csv")


def test_load_embeddings(tmp_path: Path) -> None:
    """Test the synchronous and asynchronous loaders."""
    path = tmp_path / "embeddings.csv"
    path.write_text("1,0\n0,1\n0.5,0.5\n", encoding="utf-8")
    embeddings = load_embeddings(path, 3)
    loaded = asyncio.run(async_load_embeddings(path, 3))
    assert np.array_equal(embeddings.data, loaded.data)
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(InvalidData):
        load_embeddings(empty, 3)
