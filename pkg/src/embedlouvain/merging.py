"""Iterative community merging with a decaying distance threshold."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from .const import LOGGER
from .embeddings import (
    Centroid,
    EmbeddingMatrix,
    community_centroids,
    cosine_distances,
    pairwise_cosine_distances,
)
from .exceptions import InvalidConfig, InvalidData
from .graph import FloatArray, IntArray, Partition


class StopReason(str, Enum):
    """Why an iterative merge stopped."""

    THRESHOLD_FLOOR = "threshold_floor"
    ITERATION_CAP = "iteration_cap"
    TARGET_REACHED = "target_reached"
    CONVERGED = "converged"


@dataclass(frozen=True)
class MergeConfig:
    """Parameters of the iterative merge.

    :param t_initial: starting distance threshold, in (0, 2].
    :param alpha: amount the threshold drops after a pass without merges.
    :param t_min: floor below which the merge stops.
    :param it_max: maximum number of merge passes per round.
    :param target_communities: optional community count to reach; enables outer rounds.
    :param outer_max: maximum number of outer rounds.
    """

    t_initial: float = 0.5
    alpha: float = 0.05
    t_min: float = 0.05
    it_max: int = 100
    target_communities: int | None = None
    outer_max: int = 10

    def __post_init__(self) -> None:
        """Validate ranges."""
        if not 0 < self.t_initial <= 2:
            raise InvalidConfig(f"t_initial must lie in (0, 2], got {self.t_initial}")
        if not self.alpha > 0:
            raise InvalidConfig(f"alpha must be > 0, got {self.alpha}")
        if not 0 <= self.t_min <= self.t_initial:
            raise InvalidConfig(f"t_min must lie in [0, t_initial], got {self.t_min}")
        if self.it_max < 1 or self.outer_max < 1:
            raise InvalidConfig("it_max and outer_max must be positive")
        if self.target_communities is not None and self.target_communities < 1:
            raise InvalidConfig(f"target_communities must be positive, got {self.target_communities}")


@dataclass(frozen=True)
class MergeRecord:
    """Outcome of one merge pass."""

    round: int
    threshold: float
    merges: int
    community_count: int


@dataclass
class MergeTrace:
    """Per-pass records of an iterative merge and the reason it stopped."""

    records: list[MergeRecord] = field(default_factory=list)
    stop_reason: StopReason = StopReason.CONVERGED

    def as_dict(self) -> dict[str, Any]:
        """JSON-ready form."""
        return {
            "stop_reason": self.stop_reason.value,
            "records": [
                {
                    "round": record.round,
                    "threshold": record.threshold,
                    "merges": record.merges,
                    "community_count": record.community_count,
                }
                for record in self.records
            ],
        }


class UnionFind:
    """Disjoint sets over 0..n-1 with union by rank and path compression."""

    def __init__(self, size: int) -> None:
        """Initialize ``size`` singleton sets."""
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, x: int) -> int:
        """Return the root of the set holding ``x``."""
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        """Join the sets of ``x`` and ``y``. Return False if they were already joined."""
        px, py = self.find(x), self.find(y)
        if px == py:
            return False
        if self.rank[px] < self.rank[py]:
            px, py = py, px
        self.parent[py] = px
        if self.rank[px] == self.rank[py]:
            self.rank[px] += 1
        return True


def community_pair_distance(
    embeddings: EmbeddingMatrix, members_i: Sequence[int] | IntArray, centroid_j: Centroid
) -> float:
    """Mean cosine distance from the members of one community to another community's centroid.

    :raises InvalidData: if ``members_i`` is empty.
    """
    index = np.asarray(members_i, dtype=np.int64)
    if not len(index):
        raise InvalidData("Distance from an empty member list")
    return float(cosine_distances(centroid_j.vector, embeddings.data[index]).mean())


def community_distance_matrix(embeddings: EmbeddingMatrix, partition: Partition) -> FloatArray:
    """Symmetric community-by-community merge distances.

    Entry (i, j) is the smaller of the two directed distances from the members of one
    community to the centroid of the other.
    """
    centroids = community_centroids(embeddings, partition)
    to_centroid = pairwise_cosine_distances(embeddings.data, centroids)
    directed = np.asarray(partition.indicator().T @ to_centroid) / partition.sizes[:, np.newaxis]
    return np.minimum(directed, directed.T)


def merge_pass(partition: Partition, embeddings: EmbeddingMatrix, threshold: float) -> tuple[Partition, int]:
    """Merge every community pair closer than ``threshold``, closest pairs first.

    :return: the coarsened partition (ids in order of first appearance) and the number
             of merges performed.
    """
    k = partition.community_count
    if k < 2 or threshold <= 0:
        return partition, 0
    distances = community_distance_matrix(embeddings, partition)
    rows, cols = np.triu_indices(k, 1)
    pair_distances = distances[rows, cols]
    below = pair_distances < threshold
    rows, cols, pair_distances = rows[below], cols[below], pair_distances[below]
    order = np.lexsort((cols, rows, pair_distances))

    sets = UnionFind(k)
    merges = sum(sets.union(int(rows[i]), int(cols[i])) for i in order)
    if not merges:
        return partition, 0
    roots = np.array([sets.find(c) for c in range(k)], dtype=np.int64)
    return Partition.by_first_appearance(roots[partition.assignment]), merges


def _merge_round(
    partition: Partition,
    embeddings: EmbeddingMatrix,
    config: MergeConfig,
    round_index: int,
    trace: MergeTrace,
) -> tuple[Partition, StopReason, int]:
    threshold = config.t_initial
    merged = 0
    for _ in range(config.it_max):
        if partition.community_count == 1:
            return partition, StopReason.CONVERGED, merged
        partition, merges = merge_pass(partition, embeddings, threshold)
        merged += merges
        trace.records.append(MergeRecord(round_index, threshold, merges, partition.community_count))
        LOGGER.debug(
            "Merge round %s: threshold %s, %s merges, %s communities",
            round_index,
            threshold,
            merges,
            partition.community_count,
        )
        target = config.target_communities
        if target is not None and partition.community_count <= target:
            return partition, StopReason.TARGET_REACHED, merged
        if not merges:
            threshold -= config.alpha
            if threshold < config.t_min:
                return partition, StopReason.THRESHOLD_FLOOR, merged
    return partition, StopReason.ITERATION_CAP, merged


def iterative_merge(
    partition: Partition, embeddings: EmbeddingMatrix, config: MergeConfig
) -> tuple[Partition, MergeTrace]:
    """Merge similar communities under a decaying threshold.

    Without a target one round runs. With a target, each further round replaces every
    node's embedding by the centroid of its community and starts again from
    ``t_initial``, until the target is reached, a round merges nothing or
    ``outer_max`` rounds have run.

    :raises InvalidData: if the partition does not cover the embedded nodes.
    """
    if partition.node_count != embeddings.rows:
        raise InvalidData(f"Partition covers {partition.node_count} nodes, embeddings have {embeddings.rows} rows")
    trace = MergeTrace()
    target = config.target_communities
    if target is not None:
        if target > partition.community_count:
            LOGGER.warning(
                "Target of %s communities exceeds the %s available, nothing to merge",
                target,
                partition.community_count,
            )
            return partition, trace
        if partition.community_count == target:
            trace.stop_reason = StopReason.TARGET_REACHED
            return partition, trace

    current = partition
    working = embeddings
    for round_index in range(config.outer_max if target is not None else 1):
        current, trace.stop_reason, merged = _merge_round(current, working, config, round_index, trace)
        if target is None or trace.stop_reason is StopReason.TARGET_REACHED:
            break
        if not merged:
            trace.stop_reason = StopReason.CONVERGED
            break
        working = EmbeddingMatrix(community_centroids(embeddings, current)[current.assignment])
    LOGGER.debug(
        "Merge stopped (%s): %s -> %s communities",
        trace.stop_reason.value,
        partition.community_count,
        current.community_count,
    )
    return current, trace
