"""Tests for the accuracy metrics and the distance diagnostic."""

from __future__ import annotations

import numpy as np
import pytest

from embedlouvain.datasets import LabeledDataset
from embedlouvain.embeddings import EmbeddingMatrix
from embedlouvain.exceptions import InvalidConfig, InvalidData
from embedlouvain.graph import Graph, Partition
from embedlouvain.metrics import hypothesis_check, inter_accuracy, intra_accuracy


def _labeled(labels: list[int], class_names: tuple[str, ...]) -> LabeledDataset:
    n = len(labels)
    graph = Graph.from_edges(n, list(range(n - 1)), list(range(1, n)))
    return LabeledDataset(graph, np.eye(n), np.array(labels, dtype=np.int64), class_names)


def test_intra_accuracy_examples() -> None:
    """Test a pure community, a two-thirds majority and a tie."""
    labels = np.array([2, 2, 2, 0, 1])
    assert intra_accuracy([0, 1, 2], labels) == (1.0, 2)
    assert intra_accuracy([0, 1, 3], labels) == (pytest.approx(2 / 3), 2)
    assert intra_accuracy([3, 4], labels) == (0.5, 0)
    with pytest.raises(InvalidData):
        intra_accuracy([], labels)


def test_inter_accuracy_is_unweighted() -> None:
    """Test the plain mean of per-community accuracies."""
    labels = np.array([0, 0, 0, 0, 1, 0])
    report = inter_accuracy(Partition.from_labels([0, 0, 0, 0, 1, 1]), labels)
    assert report.inter_accuracy == pytest.approx(0.75)
    assert report.weighted_accuracy == pytest.approx(5 / 6)
    assert report.community_count == len(report.per_community) == 2
    assert report.modularity is None
    assert [row.size for row in report.per_community] == [4, 2]


def test_singleton_partition_is_pure() -> None:
    """Test that one-node communities score exactly 1."""
    report = inter_accuracy(Partition.singleton(5), np.array([0, 1, 2, 1, 0]))
    assert report.inter_accuracy == 1.0


def test_all_in_one_partition() -> None:
    """Test that one community scores the largest class share."""
    labels = np.array([0, 1, 1, 2, 1, 0, 1])
    report = inter_accuracy(Partition.from_labels([0] * 7), labels)
    assert report.inter_accuracy == 4 / 7
    assert report.per_community[0].majority_class == 1


def test_permuted_ids_keep_accuracy() -> None:
    """Test invariance under relabeling communities."""
    rng = np.random.default_rng(1)
    labels = rng.integers(0, 4, 50)
    assignment = rng.integers(0, 8, 50)
    permutation = rng.permutation(8)
    first = inter_accuracy(Partition.from_labels(assignment), labels)
    second = inter_accuracy(Partition.from_labels(permutation[assignment]), labels)
    assert first.inter_accuracy == pytest.approx(second.inter_accuracy, abs=1e-12)
    for row in first.per_community:
        assert 1 / len(set(labels)) <= row.intra_accuracy <= 1.0


def test_report_with_graph(two_triangles: Graph) -> None:
    """Test that the report carries modularity when a graph is given."""
    report = inter_accuracy(Partition.from_labels([0, 0, 0, 1, 1, 1]), np.zeros(6, dtype=np.int64), two_triangles)
    assert report.modularity == pytest.approx(0.5)
    document = report.as_dict(("only",))
    assert document["per_community"][0]["majority_class"] == "only"
    assert document["modularity"] == pytest.approx(0.5)


def test_labels_must_cover_partition() -> None:
    """Test the label length check."""
    with pytest.raises(InvalidData):
        inter_accuracy(Partition.singleton(3), np.array([0, 1]))


def test_hypothesis_orthogonal_classes() -> None:
    """Test classes on orthogonal axes."""
    labels = [0] * 5 + [1] * 5 + [2] * 5
    dataset = _labeled(labels, ("a", "b", "c"))
    embeddings = EmbeddingMatrix(np.eye(3)[labels])
    rows = hypothesis_check(dataset, embeddings, nodes_per_class=3, samples=4, seed=0)
    assert [row.class_name for row in rows] == ["a", "b", "c"]
    for row in rows:
        assert row.same_class_distance == pytest.approx(0.0, abs=1e-12)
        assert row.other_class_distance == pytest.approx(1.0)


def test_hypothesis_identical_embeddings() -> None:
    """Test that identical embeddings give zero distances everywhere."""
    dataset = _labeled([0, 0, 0, 1, 1, 1], ("a", "b"))
    embeddings = EmbeddingMatrix(np.ones((6, 4)))
    for row in hypothesis_check(dataset, embeddings, nodes_per_class=2, samples=3):
        assert row.same_class_distance == pytest.approx(0.0, abs=1e-12)
        assert row.other_class_distance == pytest.approx(0.0, abs=1e-12)


def test_hypothesis_is_deterministic() -> None:
    """Test identical tables for the same seed."""
    rng = np.random.default_rng(3)
    labels = [0] * 10 + [1] * 10
    dataset = _labeled(labels, ("a", "b"))
    embeddings = EmbeddingMatrix(rng.normal(size=(20, 5)))
    first = hypothesis_check(dataset, embeddings, 4, 5, seed=9)
    assert first == hypothesis_check(dataset, embeddings, 4, 5, seed=9)


def test_hypothesis_validation() -> None:
    """Test sample sizes, class sizes and class count."""
    dataset = _labeled([0, 0, 0, 1], ("big", "small"))
    embeddings = EmbeddingMatrix(np.ones((4, 2)))
    with pytest.raises(InvalidData, match="small"):
        hypothesis_check(dataset, embeddings, nodes_per_class=2)
    with pytest.raises(InvalidConfig):
        hypothesis_check(dataset, embeddings, nodes_per_class=0)
    with pytest.raises(InvalidData):
        hypothesis_check(dataset, EmbeddingMatrix(np.ones((3, 2))), nodes_per_class=1)
    with pytest.raises(InvalidData):
        hypothesis_check(_labeled([0, 0], ("one",)), EmbeddingMatrix(np.ones((2, 2))), nodes_per_class=1)
