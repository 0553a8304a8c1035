"""Louvain community detection with an optional embedding-distance objective."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from .const import LOGGER
from .embeddings import EmbeddingMatrix, community_centroids, cosine_distances
from .exceptions import InvalidConfig, InvalidData
from .graph import FloatArray, Graph, IntArray, Partition, collapse


class Objective(str, Enum):
    """Score used to pick the community a node moves to."""

    MODULARITY_ONLY = "modularity_only"
    COMBINED = "combined"


@dataclass(frozen=True)
class LouvainConfig:
    """Parameters of a Louvain run.

    :param objective: modularity gain alone, or gain combined with embedding distance.
    :param log_base_p: base of the logarithms in the combined objective.
    :param distance_epsilon: lower clamp on the distance before it is inverted.
    :param max_levels: maximum number of aggregation levels.
    :param max_passes: maximum number of local-move passes per level.
    :param min_gain: margin a move must win by to be taken.
    :param seed: seed of the initial community labeling.
    """

    objective: Objective = Objective.MODULARITY_ONLY
    log_base_p: float = math.e
    distance_epsilon: float = 1e-9
    max_levels: int = 20
    max_passes: int = 100
    min_gain: float = 1e-9
    seed: int = 0

    def __post_init__(self) -> None:
        """Coerce the objective and validate ranges."""
        try:
            object.__setattr__(self, "objective", Objective(self.objective))
        except ValueError as exc:
            raise InvalidConfig(f"Unknown objective {self.objective!r}") from exc
        if not self.log_base_p > 1:
            raise InvalidConfig(f"log_base_p must be > 1, got {self.log_base_p}")
        if not self.distance_epsilon > 0:
            raise InvalidConfig(f"distance_epsilon must be > 0, got {self.distance_epsilon}")
        if self.max_levels < 1 or self.max_passes < 1:
            raise InvalidConfig("max_levels and max_passes must be positive")
        if self.min_gain < 0:
            raise InvalidConfig(f"min_gain must be >= 0, got {self.min_gain}")


@dataclass(frozen=True, eq=False)
class LevelResult:
    """Partition of one level's graph and its modularity."""

    partition: Partition
    modularity: float
    levels_so_far: int


@dataclass(frozen=True, eq=False)
class MoveEvent:
    """A node move accepted during the local-move phase.

    ``assignment`` is a copy of the level's community labels before the move.
    """

    level: int
    graph: Graph
    assignment: IntArray
    node: int
    source: int
    target: int
    delta_q: float


@dataclass(frozen=True, eq=False)
class LouvainResult:
    """Flattened partition of the input graph and per-level history."""

    partition: Partition
    modularity: float
    community_embeddings: EmbeddingMatrix | None
    levels: tuple[LevelResult, ...]


class CommunityState:
    """Running per-community degree sums of a partition under local moves."""

    def __init__(self, graph: Graph, assignment: IntArray) -> None:
        """Initialize.

        :param graph: graph the assignment refers to.
        :param assignment: community id of every node; ids must be non-negative.
        """
        self.graph = graph
        self.assignment = np.array(assignment, dtype=np.int64)
        self.total_degree = np.bincount(
            self.assignment, weights=graph.degrees, minlength=graph.node_count
        ).astype(np.float64)

    def remove(self, node: int) -> int:
        """Take a node out of its community and return that community."""
        community = int(self.assignment[node])
        self.total_degree[community] -= self.graph.degrees[node]
        self.assignment[node] = -1
        return community

    def insert(self, node: int, community: int) -> None:
        """Put a removed node into a community."""
        self.total_degree[community] += self.graph.degrees[node]
        self.assignment[node] = community

    def link_weight(self, node: int, community: int) -> float:
        """Total weight of the edges from a node to the members of a community."""
        neighbors, weights = self.graph.neighbors(node)
        return float(weights[self.assignment[neighbors] == community].sum())


def modularity(graph: Graph, partition: Partition) -> float:
    """Newman modularity Q of a partition, summed per community.

    A graph without edge weight has Q = 0.

    :raises InvalidData: if the partition does not cover the graph.
    """
    if partition.node_count != graph.node_count:
        raise InvalidData(f"Partition covers {partition.node_count} nodes, graph has {graph.node_count}")
    m2 = graph.total_weight_2m
    if m2 <= 0:
        LOGGER.warning("Graph has no edge weight, modularity is defined as 0")
        return 0.0
    k = partition.community_count
    labels = partition.assignment
    coo = graph.adjacency.tocoo()
    same = labels[coo.row] == labels[coo.col]
    # bincount of an empty selection comes back as int64 even with weights.
    internal = np.bincount(labels[coo.row[same]], weights=coo.data[same], minlength=k).astype(np.float64)
    internal += 2.0 * np.bincount(labels, weights=graph.self_loops, minlength=k)
    total = np.bincount(labels, weights=graph.degrees, minlength=k)
    return float(np.sum(internal / m2 - (total / m2) ** 2))


def _gain(link_weight: float, community_degree: float, node_degree: float, m2: float) -> float:
    return 2.0 * link_weight / m2 - 2.0 * community_degree * node_degree / (m2 * m2)


def modularity_gain(graph: Graph, state: CommunityState, node: int, target_community: int) -> float:
    """Change in Q from inserting a removed node into a community.

    :raises InvalidData: if the node has not been removed from its community.
    """
    if state.assignment[node] != -1:
        raise InvalidData(f"Node {node} must be removed from its community first")
    if graph.total_weight_2m <= 0:
        return 0.0
    return _gain(
        state.link_weight(node, target_community),
        float(state.total_degree[target_community]),
        float(graph.degrees[node]),
        graph.total_weight_2m,
    )


def combined_objective(delta_q: float, distance: float, config: LouvainConfig) -> float:
    """Score a move by log-damped modularity gain and log-damped inverse distance."""
    inverse = 1.0 / max(abs(distance), config.distance_epsilon)
    return (math.log1p(abs(delta_q)) + math.log1p(inverse)) / math.log(config.log_base_p)


class _LocalMover:
    """Local-move phase of one level."""

    def __init__(
        self,
        graph: Graph,
        labels: IntArray,
        node_sums: FloatArray | None,
        node_sizes: FloatArray,
        config: LouvainConfig,
        level: int,
        on_move: Callable[[MoveEvent], None] | None,
    ) -> None:
        self._graph = graph
        self._labels = labels
        self._config = config
        self._level = level
        self._on_move = on_move
        self._m2 = graph.total_weight_2m
        self._degrees = graph.degrees
        self._total_degree = np.bincount(labels, weights=self._degrees, minlength=graph.node_count)
        self._node_sums = node_sums
        self._node_sizes = node_sizes
        self._community_sums: FloatArray | None = None
        self._community_sizes = np.zeros(graph.node_count)
        self._community_sizes[labels] = node_sizes
        if node_sums is not None:
            self._community_sums = np.zeros_like(node_sums)
            self._community_sums[labels] = node_sums

    def run(self) -> bool:
        """Move nodes until a pass changes nothing. Return whether any node moved."""
        if self._m2 <= 0:
            return False
        moved = False
        for pass_number in range(1, self._config.max_passes + 1):
            moves = sum(self._visit(node) for node in range(self._graph.node_count))
            LOGGER.debug("Level %s pass %s: %s moves", self._level, pass_number, moves)
            if not moves:
                return moved
            moved = True
        LOGGER.debug("Level %s stopped after %s passes", self._level, self._config.max_passes)
        return moved

    def _visit(self, node: int) -> bool:
        graph = self._graph
        own = int(self._labels[node])
        links: dict[int, float] = {}
        neighbors, weights = graph.neighbors(node)
        for neighbor, weight in zip(neighbors, weights):
            community = int(self._labels[neighbor])
            links[community] = links.get(community, 0.0) + float(weight)

        self._shift(node, own, -1.0)
        degree = float(self._degrees[node])
        own_gain = _gain(links.get(own, 0.0), float(self._total_degree[own]), degree, self._m2)
        deltas = [
            (community, _gain(weight, float(self._total_degree[community]), degree, self._m2) - own_gain)
            for community, weight in sorted(links.items())
            if community != own
        ]
        if self._community_sums is None:
            target, delta_q = self._best_by_modularity(own, deltas)
        else:
            target, delta_q = self._best_by_combined(node, own, deltas)

        if target != own and self._on_move is not None:
            self._on_move(
                MoveEvent(self._level, graph, self._labels.copy(), node, own, target, delta_q)
            )
        self._labels[node] = target
        self._shift(node, target, 1.0)
        return target != own

    def _shift(self, node: int, community: int, sign: float) -> None:
        self._total_degree[community] += sign * self._degrees[node]
        self._community_sizes[community] += sign * self._node_sizes[node]
        if self._community_sums is not None and self._node_sums is not None:
            self._community_sums[community] += sign * self._node_sums[node]

    def _best_by_modularity(self, own: int, deltas: list[tuple[int, float]]) -> tuple[int, float]:
        best, best_delta = own, 0.0
        for community, delta_q in deltas:
            if delta_q > best_delta:
                best, best_delta = community, delta_q
        if best_delta <= self._config.min_gain:
            return own, 0.0
        return best, best_delta

    def _best_by_combined(self, node: int, own: int, deltas: list[tuple[int, float]]) -> tuple[int, float]:
        assert self._community_sums is not None and self._node_sums is not None
        config = self._config
        # Only moves that raise modularity compete with staying.
        eligible = [(community, delta_q) for community, delta_q in deltas if delta_q > config.min_gain]
        if not eligible:
            return own, 0.0
        vector = self._node_sums[node]
        distances = cosine_distances(vector, self._community_sums[[community for community, _ in eligible]])
        if self._community_sizes[own] > 0:
            own_distance = float(cosine_distances(vector, self._community_sums[own : own + 1])[0])
        else:
            own_distance = 1.0
        stay = combined_objective(0.0, own_distance, config)

        best, best_delta, best_key = own, 0.0, (-math.inf, -math.inf)
        for (community, delta_q), distance in zip(eligible, distances):
            key = (combined_objective(delta_q, float(distance), config), delta_q)
            if key > best_key:
                best, best_delta, best_key = community, delta_q, key
        if best_key[0] > stay + config.min_gain:
            return best, best_delta
        return own, 0.0


def run_louvain(
    graph: Graph,
    embeddings: EmbeddingMatrix | None = None,
    config: LouvainConfig | None = None,
    on_move: Callable[[MoveEvent], None] | None = None,
) -> LouvainResult:
    """Run multi-level Louvain.

    Every level moves nodes (visited in ascending id order, labels seeded by
    ``config.seed``) until no move wins, then collapses communities into supernodes.
    In combined mode a supernode is represented by the mean embedding of the
    original nodes it contains.

    :param graph: input graph.
    :param embeddings: node embeddings, required by the combined objective.
    :param config: run parameters; defaults to modularity only.
    :param on_move: callback invoked with every accepted move.
    :return: partition of the input nodes (ids in order of first appearance), its
             modularity, community centroids (when embeddings are given) and levels.
    :raises InvalidConfig: if the combined objective is requested without embeddings.
    :raises InvalidData: if the graph has no nodes or the embeddings do not match it.
    """
    config = config or LouvainConfig()
    if graph.node_count == 0:
        raise InvalidData("Cannot partition a graph without nodes")
    if config.objective is Objective.COMBINED and embeddings is None:
        raise InvalidConfig("The combined objective needs node embeddings")
    if embeddings is not None and embeddings.rows != graph.node_count:
        raise InvalidData(f"Embeddings have {embeddings.rows} rows, graph has {graph.node_count} nodes")

    rng = np.random.default_rng(config.seed)
    node_sums: FloatArray | None = None
    if config.objective is Objective.COMBINED and embeddings is not None:
        node_sums = np.array(embeddings.data)
    node_sizes = np.ones(graph.node_count)
    flat = np.arange(graph.node_count, dtype=np.int64)
    level_graph = graph
    levels: list[LevelResult] = []

    for level in range(config.max_levels):
        labels = rng.permutation(level_graph.node_count).astype(np.int64)
        moved = _LocalMover(level_graph, labels, node_sums, node_sizes, config, level, on_move).run()
        level_partition = Partition.from_labels(labels)
        flat = level_partition.assignment[flat]
        level_q = modularity(level_graph, level_partition) if level_graph.total_weight_2m > 0 else 0.0
        levels.append(LevelResult(level_partition, level_q, level + 1))
        LOGGER.debug(
            "Level %s: %s nodes -> %s communities, Q=%s",
            level,
            level_graph.node_count,
            level_partition.community_count,
            level_q,
        )
        if not moved:
            break
        indicator = level_partition.indicator()
        level_graph = collapse(level_graph, level_partition)
        node_sizes = np.asarray(indicator.T @ node_sizes).ravel()
        if node_sums is not None:
            node_sums = np.asarray(indicator.T @ node_sums)

    partition = Partition.by_first_appearance(flat)
    q = modularity(graph, partition)
    community_embeddings = None
    if embeddings is not None:
        community_embeddings = EmbeddingMatrix(community_centroids(embeddings, partition))
    LOGGER.debug("Louvain finished: %s communities, Q=%s", partition.community_count, q)
    return LouvainResult(partition, q, community_embeddings, tuple(levels))
