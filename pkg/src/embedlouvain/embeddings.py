"""Node embeddings, cosine distances and community centroids."""

from __future__ import annotations

import asyncio
from collections.abc import Iterable, Sequence
import csv
from dataclasses import dataclass
from os import PathLike
from pathlib import Path

import aiofiles
import numpy as np
import scipy.sparse as sp

from .const import LOGGER, NORM_EPSILON
from .datasets import LabeledDataset
from .exceptions import InvalidConfig, InvalidData, ParseError
from .graph import FloatArray, Graph, IntArray, Partition


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Dense matrix whose row i is the embedding of node i."""

    data: FloatArray

    def __post_init__(self) -> None:
        """Validate shape and finiteness, then freeze the array."""
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise InvalidData(f"Embeddings must be two-dimensional, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InvalidData("Embeddings contain non-finite values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def rows(self) -> int:
        """Number of embedded nodes."""
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        """Embedding dimension."""
        return int(self.data.shape[1])


@dataclass(frozen=True, eq=False)
class Centroid:
    """Arithmetic mean of the embeddings of a community's members."""

    vector: FloatArray
    member_count: int


def normalized_adjacency(graph: Graph) -> sp.csr_matrix:
    """Return D^-1/2 (A + I) D^-1/2 with D the row sums of A + I."""
    with_loops = graph.adjacency + sp.diags(graph.self_loops + 1.0)
    inv_sqrt = sp.diags(1.0 / np.sqrt(np.asarray(with_loops.sum(axis=1)).ravel()))
    return (inv_sqrt @ with_loops @ inv_sqrt).tocsr()


def propagate_features(dataset: LabeledDataset, hops: int = 2) -> EmbeddingMatrix:
    """Smooth the feature matrix over the graph: E = Â^hops X.

    :raises InvalidConfig: if hops is not positive.
    :raises InvalidData: if the features are empty or not finite.
    """
    if hops < 1:
        raise InvalidConfig(f"Propagation needs at least one hop, got {hops}")
    features = dataset.features
    if features.size == 0:
        raise InvalidData("Feature matrix is empty")
    if not np.all(np.isfinite(features)):
        raise InvalidData("Feature matrix contains non-finite values")
    operator = normalized_adjacency(dataset.graph)
    propagated = np.asarray(features, dtype=np.float64)
    for _ in range(hops):
        propagated = np.asarray(operator @ propagated)
    LOGGER.debug("Propagated %s features over %s hops", dataset.feature_dim, hops)
    return EmbeddingMatrix(propagated)


def normalize_rows(embeddings: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale every row to unit L2 norm. Zero rows stay zero."""
    norms = np.linalg.norm(embeddings.data, axis=1)
    safe = np.where(norms < NORM_EPSILON, 1.0, norms)
    return EmbeddingMatrix(embeddings.data / safe[:, np.newaxis])


def cosine_distance(a: Sequence[float] | FloatArray, b: Sequence[float] | FloatArray) -> float:
    """Return 1 - cos(a, b), or 1 when either vector has (near) zero norm.

    :raises InvalidData: if the vectors differ in length.
    """
    u = np.asarray(a, dtype=np.float64)
    v = np.asarray(b, dtype=np.float64)
    if u.shape != v.shape:
        raise InvalidData(f"Vector lengths differ: {u.shape} vs {v.shape}")
    norm_u = float(np.linalg.norm(u))
    norm_v = float(np.linalg.norm(v))
    if norm_u < NORM_EPSILON or norm_v < NORM_EPSILON:
        return 1.0
    return float(np.clip(1.0 - np.dot(u, v) / (norm_u * norm_v), 0.0, 2.0))


def cosine_distances(vector: FloatArray, matrix: FloatArray) -> FloatArray:
    """Cosine distance from one vector to every row of a matrix."""
    norm_v = float(np.linalg.norm(vector))
    norms = np.linalg.norm(matrix, axis=1)
    if norm_v < NORM_EPSILON:
        return np.ones(len(matrix))
    degenerate = norms < NORM_EPSILON
    similarity = (matrix @ vector) / (np.where(degenerate, 1.0, norms) * norm_v)
    return np.where(degenerate, 1.0, np.clip(1.0 - similarity, 0.0, 2.0))


def pairwise_cosine_distances(left: FloatArray, right: FloatArray) -> FloatArray:
    """Cosine distance between every row of ``left`` and every row of ``right``."""
    left_norms = np.linalg.norm(left, axis=1)
    right_norms = np.linalg.norm(right, axis=1)
    left_zero = left_norms < NORM_EPSILON
    right_zero = right_norms < NORM_EPSILON
    similarity = (left / np.where(left_zero, 1.0, left_norms)[:, np.newaxis]) @ (
        right / np.where(right_zero, 1.0, right_norms)[:, np.newaxis]
    ).T
    distances = np.clip(1.0 - similarity, 0.0, 2.0)
    distances[left_zero, :] = 1.0
    distances[:, right_zero] = 1.0
    return distances


def centroid(embeddings: EmbeddingMatrix, members: Sequence[int] | IntArray) -> Centroid:
    """Mean embedding of a set of nodes.

    :raises InvalidData: if ``members`` is empty or names an unknown node.
    """
    index = np.asarray(members, dtype=np.int64)
    if not len(index):
        raise InvalidData("Centroid of an empty member list")
    if index.min() < 0 or index.max() >= embeddings.rows:
        raise InvalidData(f"Member id outside [0, {embeddings.rows})")
    return Centroid(embeddings.data[index].mean(axis=0), len(index))


def community_centroids(embeddings: EmbeddingMatrix, partition: Partition) -> FloatArray:
    """Centroid of every community, one row per community id.

    :raises InvalidData: if the partition does not cover the embedded nodes.
    """
    if partition.node_count != embeddings.rows:
        raise InvalidData(f"Partition covers {partition.node_count} nodes, embeddings have {embeddings.rows} rows")
    sums = np.asarray(partition.indicator().T @ embeddings.data)
    return sums / partition.sizes[:, np.newaxis]


def parse_embeddings(lines: Iterable[str], expected_rows: int, source: str = "<embeddings>") -> EmbeddingMatrix:
    """Parse comma-separated embedding rows in dense-id order, without header.

    :raises ParseError: on a non-numeric cell, naming row and column.
    :raises InvalidData: on an empty input or a row/column count mismatch.
    """
    rows: list[list[float]] = []
    for row_number, cells in enumerate(csv.reader(lines), 1):
        if not cells:
            continue
        try:
            values = [float(cell) for cell in cells]
        except ValueError:
            column = next(i for i, cell in enumerate(cells, 1) if not _is_number(cell))
            raise ParseError(
                f"{source}:{row_number}:{column}: non-numeric cell {cells[column - 1]!r}"
            ) from None
        if rows and len(values) != len(rows[0]):
            raise InvalidData(f"{source}:{row_number}: {len(values)} columns, previous rows have {len(rows[0])}")
        rows.append(values)
    if not rows:
        raise InvalidData(f"{source}: no embedding rows")
    if len(rows) != expected_rows:
        raise InvalidData(f"{source}: {len(rows)} rows, expected {expected_rows}")
    return EmbeddingMatrix(np.array(rows, dtype=np.float64))


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_embeddings(path: str | PathLike[str], expected_rows: int) -> EmbeddingMatrix:
    """Load externally generated embeddings from a CSV file."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_embeddings(text.splitlines(), expected_rows, str(path))


async def async_load_embeddings(path: str | PathLike[str], expected_rows: int) -> EmbeddingMatrix:
    """Load externally generated embeddings without blocking the event loop."""
    async with aiofiles.open(path, encoding="utf-8") as fp:
        text = await fp.read()
    return await asyncio.get_running_loop().run_in_executor(
        None, parse_embeddings, text.splitlines(), expected_rows, str(path)
    )
