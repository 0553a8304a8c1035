"""Sparse undirected weighted graphs, partitions and community collapse."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
import csv
from dataclasses import dataclass
from functools import cached_property
import io
from os import PathLike
from pathlib import Path

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from .const import LOGGER
from .exceptions import InvalidData, ParseError

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph in compressed sparse row form.

    Off-diagonal weights are stored in ``adjacency`` in both directions; self-loops
    are kept apart in ``self_loops``. A self-loop of weight w adds 2w to the degree
    of its node, so ``total_weight_2m`` is the sum of all degrees.
    """

    adjacency: sp.csr_matrix
    self_loops: FloatArray
    total_weight_2m: float
    node_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        """Validate shapes and symmetry."""
        rows, cols = self.adjacency.shape
        if rows != cols:
            raise InvalidData(f"Adjacency must be square, got {rows}x{cols}")
        if self.self_loops.shape != (rows,):
            raise InvalidData("Self-loop vector does not match the node count")
        if self.node_names is not None and len(self.node_names) != rows:
            raise InvalidData("Node name table does not match the node count")
        if (self.adjacency != self.adjacency.T).nnz:
            raise InvalidData("Adjacency must be symmetric")

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        sources: Sequence[int] | IntArray,
        targets: Sequence[int] | IntArray,
        weights: Sequence[float] | FloatArray | None = None,
        node_names: Sequence[str] | None = None,
    ) -> Graph:
        """Build a graph from an undirected edge list.

        Edges are symmetrized and duplicates are summed. Edges with ``source == target``
        become self-loops.

        :raises InvalidData: if an endpoint is out of range or a weight is negative.
        """
        src = np.asarray(sources, dtype=np.int64)
        dst = np.asarray(targets, dtype=np.int64)
        if weights is None:
            wts = np.ones(len(src), dtype=np.float64)
        else:
            wts = np.asarray(weights, dtype=np.float64)
        if not src.shape == dst.shape == wts.shape:
            raise InvalidData("Edge endpoint and weight arrays differ in length")
        if node_count < 0:
            raise InvalidData(f"Node count must be non-negative, got {node_count}")
        if len(src) and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= node_count):
            raise InvalidData(f"Edge endpoint outside [0, {node_count})")
        if not np.all(np.isfinite(wts)):
            raise InvalidData("Edge weights must be finite")
        if np.any(wts < 0):
            raise InvalidData("Edge weights must be non-negative")

        loop = src == dst
        self_loops = np.bincount(src[loop], weights=wts[loop], minlength=node_count).astype(np.float64)
        off = ~loop
        lower = np.minimum(src[off], dst[off])
        upper = np.maximum(src[off], dst[off])
        adjacency = _mirror(sp.csr_matrix((wts[off], (lower, upper)), shape=(node_count, node_count)))
        total = float(adjacency.sum() + 2.0 * self_loops.sum())
        return cls(adjacency, self_loops, total, tuple(node_names) if node_names is not None else None)

    @property
    def node_count(self) -> int:
        """Number of nodes."""
        return int(self.adjacency.shape[0])

    @property
    def edge_count(self) -> int:
        """Number of unique undirected edges, self-loops included."""
        return int(self.adjacency.nnz // 2 + np.count_nonzero(self.self_loops))

    @cached_property
    def degrees(self) -> FloatArray:
        """Weighted degree k_i of every node."""
        return np.asarray(self.adjacency.sum(axis=1), dtype=np.float64).ravel() + 2.0 * self.self_loops

    def neighbors(self, node: int) -> tuple[IntArray, FloatArray]:
        """Return the neighbor ids (ascending) and edge weights of a node, self-loop excluded."""
        start, end = self.adjacency.indptr[node], self.adjacency.indptr[node + 1]
        return self.adjacency.indices[start:end], self.adjacency.data[start:end]

    def name(self, node: int) -> str:
        """External name of a node."""
        return self.node_names[node] if self.node_names is not None else str(node)


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of every node to exactly one community with dense ids."""

    assignment: IntArray
    community_count: int

    def __post_init__(self) -> None:
        """Validate that community ids are exactly ``range(community_count)``."""
        assignment = np.array(self.assignment, dtype=np.int64)
        if assignment.ndim != 1 or not len(assignment):
            raise InvalidData("Partition needs a non-empty one-dimensional assignment")
        if self.community_count < 1:
            raise InvalidData(f"Community count must be positive, got {self.community_count}")
        if assignment.min() < 0 or assignment.max() >= self.community_count:
            raise InvalidData(f"Community ids must lie in [0, {self.community_count})")
        if np.any(np.bincount(assignment, minlength=self.community_count) == 0):
            raise InvalidData("Community ids must be dense")
        assignment.setflags(write=False)
        object.__setattr__(self, "assignment", assignment)

    @classmethod
    def singleton(cls, node_count: int) -> Partition:
        """Every node in its own community."""
        return cls(np.arange(node_count, dtype=np.int64), node_count)

    @classmethod
    def from_labels(cls, labels: Sequence[int] | IntArray) -> Partition:
        """Densify arbitrary integer labels, keeping ascending label order."""
        uniques, inverse = np.unique(np.asarray(labels, dtype=np.int64), return_inverse=True)
        return cls(inverse.ravel(), len(uniques))

    @classmethod
    def by_first_appearance(cls, labels: Sequence[int] | IntArray) -> Partition:
        """Densify arbitrary integer labels, numbering communities in order of first appearance."""
        uniques, first, inverse = np.unique(np.asarray(labels, dtype=np.int64), return_index=True, return_inverse=True)
        rank = np.empty(len(uniques), dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(len(uniques))
        return cls(rank[inverse.ravel()], len(uniques))

    @property
    def node_count(self) -> int:
        """Number of assigned nodes."""
        return len(self.assignment)

    @cached_property
    def sizes(self) -> IntArray:
        """Member count of every community."""
        return np.bincount(self.assignment, minlength=self.community_count).astype(np.int64)

    def members(self) -> list[IntArray]:
        """Member node ids (ascending) of every community, indexed by community id."""
        order = np.argsort(self.assignment, kind="stable")
        return np.split(order, np.cumsum(self.sizes)[:-1])

    def indicator(self) -> sp.csr_matrix:
        """Sparse node-by-community membership matrix."""
        n = self.node_count
        return sp.csr_matrix(
            (np.ones(n), (np.arange(n), self.assignment)),
            shape=(n, self.community_count),
        )


def collapse(graph: Graph, partition: Partition) -> Graph:
    """Collapse every community into a supernode.

    Inter-community weights are summed, intra-community weights become self-loops and
    ``total_weight_2m`` is carried over unchanged.

    :raises InvalidData: if the partition does not cover the graph.
    """
    if partition.node_count != graph.node_count:
        raise InvalidData(f"Partition covers {partition.node_count} nodes, graph has {graph.node_count}")
    k = partition.community_count
    indicator = partition.indicator()
    block = (indicator.T @ graph.adjacency @ indicator).tocoo()
    inside = block.row == block.col
    self_loops = np.bincount(partition.assignment, weights=graph.self_loops, minlength=k).astype(np.float64)
    # Each intra-community edge appears twice in the symmetric block.
    self_loops += np.bincount(block.row[inside], weights=block.data[inside], minlength=k) / 2.0
    above = block.row < block.col
    adjacency = _mirror(sp.csr_matrix((block.data[above], (block.row[above], block.col[above])), shape=(k, k)))
    return Graph(adjacency, self_loops, graph.total_weight_2m)


def _mirror(upper: sp.csr_matrix) -> sp.csr_matrix:
    # Both triangles share one set of summed weights, so symmetry is exact.
    upper.sum_duplicates()
    upper.eliminate_zeros()
    full = (upper + upper.T).tocsr()
    full.sort_indices()
    return full


def parse_edge_list(lines: Iterable[str], weighted: bool = False, source: str = "<edge list>") -> Graph:
    """Parse whitespace-separated node pairs, one per line, with an optional weight.

    Node names are mapped to dense ids in order of first appearance. Lines starting
    with ``#`` are comments.

    :raises ParseError: if a line does not hold a node pair or its weight is not a number.
    :raises InvalidData: if a weight is negative or the list has no edges.
    """
    ids: dict[str, int] = {}
    sources: list[int] = []
    targets: list[int] = []
    weights: list[float] = []
    for line_number, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ParseError(f"{source}:{line_number}: expected a node pair, got {line!r}")
        weight = 1.0
        if weighted and len(fields) > 2:
            try:
                weight = float(fields[2])
            except ValueError as exc:
                raise ParseError(f"{source}:{line_number}: invalid weight {fields[2]!r}") from exc
            if not np.isfinite(weight):
                raise ParseError(f"{source}:{line_number}: invalid weight {fields[2]!r}")
            if weight < 0:
                raise InvalidData(f"{source}:{line_number}: negative weight {weight}")
        u = ids.setdefault(fields[0], len(ids))
        v = ids.setdefault(fields[1], len(ids))
        sources.append(u)
        targets.append(v)
        weights.append(weight)
    if not ids:
        raise InvalidData(f"{source}: edge list has no edges")
    graph = Graph.from_edges(len(ids), sources, targets, weights, node_names=list(ids))
    LOGGER.debug(
        "Loaded %s: %s nodes, %s edges from %s records", source, graph.node_count, graph.edge_count, len(sources)
    )
    return graph


def load_edge_list(path: str | PathLike[str], weighted: bool = False) -> Graph:
    """Load an edge-list file.

    :param path: text file with one ``u v [w]`` record per line.
    :param weighted: read the third column as the edge weight.
    :raises ParseError: on a malformed line, naming the line number.
    :raises InvalidData: on a negative weight or an empty list.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_edge_list(text.splitlines(), weighted, str(path))


def write_edge_list(graph: Graph, path: str | PathLike[str]) -> None:
    """Write a graph as a weighted edge list using its node names.

    Isolated nodes have no line in this format and are not written.
    """
    lines: list[str] = []
    for u in range(graph.node_count):
        if graph.self_loops[u] > 0:
            lines.append(f"{graph.name(u)} {graph.name(u)} {float(graph.self_loops[u])!r}")
        for v, w in zip(*graph.neighbors(u)):
            if v > u:
                lines.append(f"{graph.name(u)} {graph.name(int(v))} {float(w)!r}")
    Path(path).write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")


def partition_to_csv(partition: Partition, node_names: Sequence[str]) -> str:
    """Render a partition as ``node_name,community_id`` CSV with header."""
    if len(node_names) != partition.node_count:
        raise InvalidData(f"{len(node_names)} node names for {partition.node_count} nodes")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("node_name", "community_id"))
    writer.writerows(zip(node_names, (int(c) for c in partition.assignment)))
    return buffer.getvalue()


def parse_partition_csv(lines: Iterable[str], node_names: Sequence[str], source: str = "<partition>") -> Partition:
    """Parse ``node_name,community_id`` CSV into a partition over ``node_names``.

    Community ids may be any integers; they are densified in ascending order.

    :raises ParseError: on a missing header, a short row or a non-integer community id.
    :raises InvalidData: if a node is unknown, repeated or missing.
    """
    index = {name: i for i, name in enumerate(node_names)}
    labels = np.full(len(node_names), -1, dtype=np.int64)
    seen = np.zeros(len(node_names), dtype=bool)
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or [cell.strip() for cell in header[:2]] != ["node_name", "community_id"]:
        raise ParseError(f"{source}:1: expected header 'node_name,community_id'")
    for row_number, row in enumerate(reader, 2):
        if not row:
            continue
        if len(row) < 2:
            raise ParseError(f"{source}:{row_number}: expected node_name,community_id")
        name = row[0].strip()
        try:
            community = int(row[1])
        except ValueError as exc:
            raise ParseError(f"{source}:{row_number}: invalid community id {row[1]!r}") from exc
        node = index.get(name)
        if node is None:
            raise InvalidData(f"{source}:{row_number}: unknown node {name!r}")
        if seen[node]:
            raise InvalidData(f"{source}:{row_number}: node {name!r} listed twice")
        seen[node] = True
        labels[node] = community
    if not seen.all():
        missing = node_names[int(np.flatnonzero(~seen)[0])]
        raise InvalidData(f"{source}: {int((~seen).sum())} nodes have no community, e.g. {missing!r}")
    return Partition.from_labels(labels)


def read_partition(path: str | PathLike[str], node_names: Sequence[str]) -> Partition:
    """Load a partition CSV written by :func:`partition_to_csv`."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_partition_csv(text.splitlines(), node_names, str(path))
