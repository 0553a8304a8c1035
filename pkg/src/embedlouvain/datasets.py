"""Citation-network datasets with node features and ground-truth classes."""

from __future__ import annotations

import asyncio
from collections.abc import Iterable
from dataclasses import dataclass
from os import PathLike
from pathlib import Path

import aiofiles
import numpy as np

from .const import LOGGER, REFERENCE_STATISTICS
from .exceptions import InvalidData, ParseError
from .graph import FloatArray, Graph, IntArray


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Graph plus feature matrix X and one class label per node."""

    graph: Graph
    features: FloatArray
    labels: IntArray
    class_names: tuple[str, ...]
    citation_count: int = 0
    dropped_citations: int = 0

    def __post_init__(self) -> None:
        """Validate that features and labels cover every node."""
        n = self.graph.node_count
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise InvalidData(f"Feature matrix has shape {self.features.shape}, expected {n} rows")
        if self.labels.shape != (n,):
            raise InvalidData(f"Label vector has shape {self.labels.shape}, expected ({n},)")
        if not self.class_names:
            raise InvalidData("Dataset needs at least one class")
        if n and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise InvalidData(f"Labels must lie in [0, {len(self.class_names)})")

    @property
    def class_count(self) -> int:
        """Number of ground-truth classes."""
        return len(self.class_names)

    @property
    def feature_dim(self) -> int:
        """Number of feature columns."""
        return int(self.features.shape[1])

    @property
    def node_names(self) -> tuple[str, ...]:
        """External node ids in dense-id order."""
        return self.graph.node_names or tuple(str(i) for i in range(self.graph.node_count))


def parse_citation_dataset(
    content_lines: Iterable[str],
    cites_lines: Iterable[str],
    content_source: str = "<content>",
    cites_source: str = "<cites>",
) -> LabeledDataset:
    """Parse the ``.content``/``.cites`` pair of a citation network.

    Content rows are ``node_id <tab> f_1 ... f_d <tab> class_name``; cites rows are
    ``cited_id <tab> citing_id``. Citations are treated as undirected edges and the
    ones naming unknown nodes are dropped. Class ids follow sorted class names.

    :raises ParseError: on a malformed row, naming file and line.
    :raises InvalidData: on an empty content file, a duplicate node id or rows whose
        feature dimension differs.
    """
    ids: dict[str, int] = {}
    rows: list[FloatArray] = []
    class_of_node: list[str] = []
    for line_number, raw in enumerate(content_lines, 1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split("\t") if "\t" in line else line.split()
        if len(fields) < 3:
            raise ParseError(f"{content_source}:{line_number}: expected id, features and class")
        try:
            row = np.asarray(fields[1:-1], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"{content_source}:{line_number}: non-numeric feature value") from exc
        if rows and len(row) != len(rows[0]):
            raise InvalidData(
                f"{content_source}:{line_number}: {len(row)} features, previous rows have {len(rows[0])}"
            )
        node_id = fields[0].strip()
        if node_id in ids:
            raise InvalidData(f"{content_source}:{line_number}: duplicate node id {node_id!r}")
        ids[node_id] = len(ids)
        rows.append(row)
        class_of_node.append(fields[-1].strip())
    if not rows:
        raise InvalidData(f"{content_source}: content file has no nodes")

    sources: list[int] = []
    targets: list[int] = []
    citation_count = 0
    dropped = 0
    for line_number, raw in enumerate(cites_lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"{cites_source}:{line_number}: expected cited and citing ids, got {line!r}")
        citation_count += 1
        cited, citing = fields
        if cited not in ids or citing not in ids:
            dropped += 1
            continue
        sources.append(ids[citing])
        targets.append(ids[cited])
    if dropped:
        LOGGER.warning(
            "Dropped %s of %s citations in %s referencing unknown node ids", dropped, citation_count, cites_source
        )

    class_names = tuple(sorted(set(class_of_node)))
    class_ids = {name: i for i, name in enumerate(class_names)}
    graph = Graph.from_edges(len(ids), sources, targets, node_names=list(ids))
    dataset = LabeledDataset(
        graph=graph,
        features=np.vstack(rows),
        labels=np.array([class_ids[name] for name in class_of_node], dtype=np.int64),
        class_names=class_names,
        citation_count=citation_count,
        dropped_citations=dropped,
    )
    LOGGER.debug(
        "Loaded %s: %s nodes, %s edges, %s features, %s classes",
        content_source,
        graph.node_count,
        graph.edge_count,
        dataset.feature_dim,
        dataset.class_count,
    )
    return dataset


def load_citation_dataset(content_path: str | PathLike[str], cites_path: str | PathLike[str]) -> LabeledDataset:
    """Load a citation network from its ``.content`` and ``.cites`` files."""
    content = Path(content_path).read_text(encoding="utf-8")
    cites = Path(cites_path).read_text(encoding="utf-8")
    return parse_citation_dataset(content.splitlines(), cites.splitlines(), str(content_path), str(cites_path))


async def async_load_citation_dataset(
    content_path: str | PathLike[str], cites_path: str | PathLike[str]
) -> LabeledDataset:
    """Load a citation network without blocking the event loop.

    Files are read with aiofiles; parsing runs in the default executor.
    """
    async with aiofiles.open(content_path, encoding="utf-8") as fp:
        content = await fp.read()
    async with aiofiles.open(cites_path, encoding="utf-8") as fp:
        cites = await fp.read()
    return await asyncio.get_running_loop().run_in_executor(
        None,
        parse_citation_dataset,
        content.splitlines(),
        cites.splitlines(),
        str(content_path),
        str(cites_path),
    )


def reference_deviations(dataset: LabeledDataset, name: str) -> dict[str, tuple[int, int]]:
    """Compare a dataset with its published statistics and log every deviation.

    Edges are counted as unique undirected edges, so reciprocal or repeated
    citations make the count fall below the published number of citation records.

    :param name: ``cora`` or ``citeseer``.
    :return: statistic name mapped to (observed, published) for each mismatch.
    :raises InvalidData: if no published statistics exist for ``name``.
    """
    reference = REFERENCE_STATISTICS.get(name.lower())
    if reference is None:
        raise InvalidData(f"No published statistics for dataset {name!r}")
    observed = {
        "nodes": dataset.graph.node_count,
        "edges": dataset.graph.edge_count,
        "features": dataset.feature_dim,
        "classes": dataset.class_count,
    }
    deviations = {key: (observed[key], value) for key, value in reference.items() if observed[key] != value}
    for key, (seen, published) in deviations.items():
        LOGGER.warning("%s %s: observed %s, published %s", name, key, seen, published)
    LOGGER.debug(
        "%s: %s citation records read, %s dropped", name, dataset.citation_count, dataset.dropped_citations
    )
    return deviations
