"""Majority-class accuracy of a partition and the embedding-distance diagnostic."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from .datasets import LabeledDataset
from .embeddings import EmbeddingMatrix, centroid, cosine_distances
from .exceptions import InvalidConfig, InvalidData
from .graph import Graph, IntArray, Partition
from .louvain import modularity


@dataclass(frozen=True)
class CommunityAccuracy:
    """Majority class and intra-community accuracy of one community."""

    community: int
    size: int
    majority_class: int
    intra_accuracy: float


@dataclass(frozen=True)
class EvalReport:
    """Accuracy of a partition against ground-truth classes.

    ``inter_accuracy`` is the unweighted mean of the intra-community accuracies.
    ``weighted_accuracy`` weights them by community size and is reported alongside.
    """

    inter_accuracy: float
    weighted_accuracy: float
    per_community: tuple[CommunityAccuracy, ...]
    community_count: int
    modularity: float | None = None

    def as_dict(self, class_names: Sequence[str] | None = None) -> dict[str, Any]:
        """JSON-ready form; majority classes are named when ``class_names`` is given."""
        return {
            "community_count": self.community_count,
            "inter_accuracy": self.inter_accuracy,
            "weighted_accuracy": self.weighted_accuracy,
            "modularity": self.modularity,
            "per_community": [
                {
                    "community": row.community,
                    "size": row.size,
                    "majority_class": class_names[row.majority_class] if class_names else row.majority_class,
                    "intra_accuracy": row.intra_accuracy,
                }
                for row in self.per_community
            ],
        }


@dataclass(frozen=True)
class HypothesisRow:
    """Mean distance of same-class and other-class nodes to one class centroid."""

    class_id: int
    class_name: str
    same_class_distance: float
    other_class_distance: float


def intra_accuracy(community_members: Sequence[int] | IntArray, labels: IntArray) -> tuple[float, int]:
    """Share of a community's members carrying its majority class.

    Ties go to the lowest class id.

    :return: accuracy and majority class.
    :raises InvalidData: if the community is empty.
    """
    members = np.asarray(community_members, dtype=np.int64)
    if not len(members):
        raise InvalidData("Accuracy of an empty community")
    counts = np.bincount(np.asarray(labels)[members])
    majority = int(np.argmax(counts))
    return float(counts[majority] / len(members)), majority


def inter_accuracy(partition: Partition, labels: IntArray, graph: Graph | None = None) -> EvalReport:
    """Evaluate a partition: mean intra-community accuracy over all communities.

    :param graph: when given, the report also carries the partition's modularity.
    :raises InvalidData: if the labels do not cover the partition.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (partition.node_count,):
        raise InvalidData(f"{len(labels)} labels for {partition.node_count} nodes")
    rows = []
    for community, members in enumerate(partition.members()):
        accuracy, majority = intra_accuracy(members, labels)
        rows.append(CommunityAccuracy(community, len(members), majority, accuracy))
    accuracies = np.array([row.intra_accuracy for row in rows])
    sizes = np.array([row.size for row in rows])
    return EvalReport(
        inter_accuracy=float(accuracies.mean()),
        weighted_accuracy=float(np.dot(accuracies, sizes) / sizes.sum()),
        per_community=tuple(rows),
        community_count=partition.community_count,
        modularity=modularity(graph, partition) if graph is not None else None,
    )


def hypothesis_check(
    dataset: LabeledDataset,
    embeddings: EmbeddingMatrix,
    nodes_per_class: int = 50,
    samples: int = 50,
    seed: int = 0,
) -> list[HypothesisRow]:
    """Test whether nodes lie closer to the centroid of their own class.

    For every class a community of ``nodes_per_class`` random members is built. The
    mean cosine distance to its centroid is measured for ``samples`` random nodes of
    the same class and ``samples`` random nodes of other classes.

    :raises InvalidConfig: if ``nodes_per_class`` or ``samples`` is not positive.
    :raises InvalidData: if a class has fewer than ``nodes_per_class`` members, the
        dataset has a single class or the embeddings do not match it.
    """
    if nodes_per_class < 1 or samples < 1:
        raise InvalidConfig("nodes_per_class and samples must be positive")
    if embeddings.rows != dataset.graph.node_count:
        raise InvalidData(f"Embeddings have {embeddings.rows} rows, dataset has {dataset.graph.node_count} nodes")
    if dataset.class_count < 2:
        raise InvalidData("The diagnostic needs at least two classes")
    labels = dataset.labels
    for class_id, name in enumerate(dataset.class_names):
        size = int(np.count_nonzero(labels == class_id))
        if size < nodes_per_class:
            raise InvalidData(f"Class {name!r} has {size} members, {nodes_per_class} needed")

    rng = np.random.default_rng(seed)
    table = []
    for class_id, name in enumerate(dataset.class_names):
        members = np.flatnonzero(labels == class_id)
        others = np.flatnonzero(labels != class_id)
        center = centroid(embeddings, rng.choice(members, nodes_per_class, replace=False))
        same = rng.choice(members, min(samples, len(members)), replace=False)
        other = rng.choice(others, min(samples, len(others)), replace=False)
        table.append(
            HypothesisRow(
                class_id,
                name,
                float(cosine_distances(center.vector, embeddings.data[same]).mean()),
                float(cosine_distances(center.vector, embeddings.data[other]).mean()),
            )
        )
    return table
