"""Pipeline stages shared by the command-line subcommands."""

from __future__ import annotations

import asyncio
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
import csv
from dataclasses import dataclass, field
import io
import json
import time
from typing import Any

from .config import RunConfig
from .const import LOGGER, REFERENCE_STATISTICS
from .datasets import LabeledDataset, async_load_citation_dataset, reference_deviations
from .embeddings import EmbeddingMatrix, async_load_embeddings, normalize_rows, propagate_features
from .exceptions import InvalidConfig
from .graph import Partition
from .louvain import LouvainResult, run_louvain
from .merging import MergeTrace, iterative_merge
from .metrics import EvalReport, HypothesisRow, hypothesis_check, inter_accuracy


@dataclass
class StageTimer:
    """Wall-clock seconds spent per pipeline stage."""

    timings: dict[str, float] = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Time the enclosed block under ``name``."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = time.perf_counter() - start
            LOGGER.debug("Stage %s took %.3f s", name, self.timings[name])


@dataclass(frozen=True, eq=False)
class DetectionResult:
    """Louvain output, the final (possibly merged) partition and its evaluation."""

    louvain: LouvainResult
    partition: Partition
    trace: MergeTrace | None
    report: EvalReport


@dataclass(frozen=True)
class SweepRow:
    """Outcome of merging from one initial threshold."""

    threshold: float
    community_count: int
    inter_accuracy: float


async def async_load_inputs(
    config: RunConfig, timer: StageTimer, with_embeddings: bool = True
) -> tuple[LabeledDataset, EmbeddingMatrix | None]:
    """Load the dataset and build or load L2-normalized embeddings.

    Datasets named like a published one (``cora.content``) are checked against its
    statistics.

    :raises InvalidConfig: if a dataset or embedding path is missing.
    """
    config.validate_paths()
    assert config.content is not None and config.cites is not None
    with timer.stage("load"):
        dataset = await async_load_citation_dataset(config.content, config.cites)
    name = config.content.stem.lower()
    if name in REFERENCE_STATISTICS:
        reference_deviations(dataset, name)
    if not with_embeddings:
        return dataset, None
    with timer.stage("embeddings"):
        if config.embeddings is not None:
            raw = await async_load_embeddings(config.embeddings, dataset.graph.node_count)
        else:
            raw = await asyncio.get_running_loop().run_in_executor(None, propagate_features, dataset, config.hops)
        embeddings = normalize_rows(raw)
    return dataset, embeddings


def detect(dataset: LabeledDataset, embeddings: EmbeddingMatrix, config: RunConfig, timer: StageTimer) -> DetectionResult:
    """Run Louvain, the optional merge and the evaluation."""
    with timer.stage("louvain"):
        louvain = run_louvain(dataset.graph, embeddings, config.louvain_config())
    partition, trace = louvain.partition, None
    if config.merge:
        with timer.stage("merge"):
            partition, trace = iterative_merge(partition, embeddings, config.merge_config())
    with timer.stage("metrics"):
        report = inter_accuracy(partition, dataset.labels, dataset.graph)
    LOGGER.info(
        "%s communities (Louvain: %s), inter accuracy %.4f, modularity %.4f",
        report.community_count,
        louvain.partition.community_count,
        report.inter_accuracy,
        report.modularity,
    )
    return DetectionResult(louvain, partition, trace, report)


def sweep_row(
    dataset: LabeledDataset,
    embeddings: EmbeddingMatrix,
    partition: Partition,
    config: RunConfig,
    threshold: float,
) -> SweepRow:
    """Merge a cached Louvain partition starting from one threshold."""
    merged, _ = iterative_merge(partition, embeddings, config.merge_config(threshold))
    report = inter_accuracy(merged, dataset.labels)
    return SweepRow(threshold, report.community_count, report.inter_accuracy)


async def async_sweep(
    dataset: LabeledDataset, embeddings: EmbeddingMatrix, config: RunConfig, timer: StageTimer
) -> list[SweepRow]:
    """Run Louvain once, then the merge once per threshold, concurrently.

    Rows come back in the order of ``config.thresholds``.

    :raises InvalidConfig: if no threshold is configured.
    """
    if not config.thresholds:
        raise InvalidConfig("A sweep needs at least one threshold")
    loop = asyncio.get_running_loop()
    with timer.stage("louvain"):
        louvain = await loop.run_in_executor(None, run_louvain, dataset.graph, embeddings, config.louvain_config())
    with timer.stage("sweep"):
        rows = await asyncio.gather(
            *(
                loop.run_in_executor(None, sweep_row, dataset, embeddings, louvain.partition, config, threshold)
                for threshold in config.thresholds
            )
        )
    return list(rows)


def run_hypothesis(dataset: LabeledDataset, embeddings: EmbeddingMatrix, config: RunConfig) -> list[HypothesisRow]:
    """Distance diagnostic with the configured sample sizes and seed."""
    return hypothesis_check(dataset, embeddings, config.nodes_per_class, config.samples, config.seed)


def result_document(
    dataset: LabeledDataset, result: DetectionResult, config: RunConfig, timings: dict[str, float]
) -> dict[str, Any]:
    """Result document with stable top-level fields."""
    metrics = result.report.as_dict(dataset.class_names)
    metrics["louvain_community_count"] = result.louvain.partition.community_count
    metrics["louvain_modularity"] = result.louvain.modularity
    metrics["louvain_levels"] = len(result.louvain.levels)
    document: dict[str, Any] = {
        "partition": dict(zip(dataset.node_names, (int(c) for c in result.partition.assignment))),
        "metrics": metrics,
        "trace": result.trace.as_dict() if result.trace is not None else None,
        "config": config.as_dict(),
    }
    if config.timings:
        document["timings"] = dict(timings)
    return document


def evaluation_document(
    dataset: LabeledDataset, report: EvalReport, config: RunConfig, timings: dict[str, float]
) -> dict[str, Any]:
    """Document for an evaluated partition file."""
    document: dict[str, Any] = {"metrics": report.as_dict(dataset.class_names), "config": config.as_dict()}
    if config.timings:
        document["timings"] = dict(timings)
    return document


def render_json(document: dict[str, Any]) -> str:
    """Serialize a document deterministically."""
    return json.dumps(document, indent=2) + "\n"


def _render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def per_community_csv(report: EvalReport, class_names: Sequence[str]) -> str:
    """Per-community accuracy table."""
    return _render_csv(
        ("community", "size", "majority_class", "intra_accuracy"),
        [(row.community, row.size, class_names[row.majority_class], repr(row.intra_accuracy)) for row in report.per_community],
    )


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    """Threshold sweep table."""
    return _render_csv(
        ("threshold", "community_count", "inter_accuracy"),
        [(repr(row.threshold), row.community_count, repr(row.inter_accuracy)) for row in rows],
    )


def hypothesis_csv(rows: Sequence[HypothesisRow]) -> str:
    """Diagnostic table, one row per class and comparison kind."""
    table: list[tuple[str, str, str]] = []
    for row in rows:
        table.append((row.class_name, "same", repr(row.same_class_distance)))
        table.append((row.class_name, "other", repr(row.other_class_distance)))
    return _render_csv(("class", "kind", "mean_distance"), table)
