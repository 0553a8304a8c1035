"""Command-line front-end: detect, sweep, hypothesis and eval."""

from __future__ import annotations

import argparse
import asyncio
from collections.abc import Awaitable, Callable, Sequence
import logging
from pathlib import Path
import sys
from typing import Any

import aiofiles
import aiofiles.os

from .config import OutputFormat, RunConfig, load_config_file
from .exceptions import EmbedLouvainError
from .graph import partition_to_csv, read_partition
from .louvain import Objective
from .metrics import inter_accuracy
from .pipeline import (
    StageTimer,
    async_load_inputs,
    async_sweep,
    detect,
    evaluation_document,
    hypothesis_csv,
    per_community_csv,
    render_json,
    result_document,
    run_hypothesis,
    sweep_csv,
)

_LOGGER = logging.getLogger(__name__)

# Flags whose destinations are not RunConfig fields.
_CLI_ONLY = ("command", "config", "verbose")


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return number


def _threshold_list(value: str) -> tuple[float, ...]:
    try:
        thresholds = tuple(float(part) for part in value.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {value!r}") from exc
    if not thresholds:
        raise argparse.ArgumentTypeError("empty threshold list")
    return thresholds


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, help="key = value file; flags override its values")
    parser.add_argument("--content", type=Path, help="dataset .content file (id, features, class)")
    parser.add_argument("--cites", type=Path, help="dataset .cites file (cited id, citing id)")
    parser.add_argument("--embeddings", type=Path, help="CSV of node embeddings; propagate features if unset")
    parser.add_argument("--hops", type=_positive_int, help="feature propagation hops")
    parser.add_argument("--seed", type=int, help="seed of every random choice")
    parser.add_argument("-o", "--output", type=Path, help="result file; standard output if unset")
    parser.add_argument(
        "--format", dest="output_format", choices=[f.value for f in OutputFormat], help="result document format"
    )
    parser.add_argument(
        "--timings", action=argparse.BooleanOptionalAction, default=None, help="write stage timings"
    )
    parser.add_argument("-v", "--verbose", help="enable verbose logging", action="store_true")
    return parser


def _louvain_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--objective", choices=[o.value for o in Objective], help="move objective")
    parser.add_argument("--log-base", dest="log_base_p", type=float, help="logarithm base of the combined objective")
    parser.add_argument("--distance-epsilon", type=float, help="lower clamp on embedding distances")
    parser.add_argument("--max-levels", type=_positive_int, help="maximum aggregation levels")
    parser.add_argument("--max-passes", type=_positive_int, help="maximum local-move passes per level")
    parser.add_argument("--min-gain", type=float, help="margin a move must win by")
    return parser


def _merge_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--alpha", type=float, help="threshold decrement after a pass without merges")
    parser.add_argument("--t-min", type=float, help="threshold floor")
    parser.add_argument("--it-max", type=_positive_int, help="maximum merge passes per round")
    parser.add_argument("--outer-max", type=_positive_int, help="maximum outer merge rounds")
    return parser


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per pipeline."""
    parser = argparse.ArgumentParser(prog="embedlouvain", description="Embedding-augmented Louvain community detection")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common, louvain, merge = _common_parser(), _louvain_parser(), _merge_parser()

    detect_parser = subparsers.add_parser(
        "detect", parents=[common, louvain, merge], help="detect communities and evaluate them"
    )
    detect_parser.add_argument(
        "--merge", action=argparse.BooleanOptionalAction, default=None, help="merge similar communities"
    )
    detect_parser.add_argument("--t-initial", type=float, help="initial merge threshold")
    detect_parser.add_argument("--target-communities", type=_positive_int, help="community count to merge down to")
    detect_parser.add_argument("--partition-out", type=Path, help="also write the partition as CSV")

    sweep_parser = subparsers.add_parser(
        "sweep", parents=[common, louvain, merge], help="merge from several initial thresholds"
    )
    sweep_parser.add_argument("--thresholds", type=_threshold_list, help="comma-separated initial thresholds")

    hypothesis_parser = subparsers.add_parser(
        "hypothesis", parents=[common], help="distance of nodes to their class centroid"
    )
    hypothesis_parser.add_argument("--nodes-per-class", type=_positive_int, help="members sampled per class")
    hypothesis_parser.add_argument("--samples", type=_positive_int, help="probe nodes per comparison")

    eval_parser = subparsers.add_parser("eval", parents=[common], help="evaluate a partition CSV")
    eval_parser.add_argument(
        "--partition", dest="partition_file", type=Path, required=True, help="node_name,community_id CSV"
    )
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    file_values = load_config_file(args.config) if args.config is not None else None
    overrides: dict[str, Any] = {key: value for key, value in vars(args).items() if key not in _CLI_ONLY}
    return RunConfig.from_sources(file_values, overrides)


async def _async_write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    async with aiofiles.open(path, "w", encoding="utf-8") as fp:
        await fp.write(text)


async def _async_write_all(outputs: Sequence[tuple[Path | None, str]]) -> None:
    """Write every output, standard output last, or leave none of the files behind."""
    written: list[Path] = []
    try:
        for path, text in sorted(outputs, key=lambda output: output[0] is None):
            await _async_write(path, text)
            if path is not None:
                written.append(path)
    except OSError:
        for path in written:
            await aiofiles.os.remove(path)
        raise


async def cmd_detect(config: RunConfig) -> int:
    """Detect communities, optionally merge them and write the result document."""
    timer = StageTimer()
    dataset, embeddings = await async_load_inputs(config, timer)
    assert embeddings is not None
    result = await asyncio.get_running_loop().run_in_executor(None, detect, dataset, embeddings, config, timer)
    if config.output_format is OutputFormat.CSV:
        text = per_community_csv(result.report, dataset.class_names)
    else:
        text = render_json(result_document(dataset, result, config, timer.timings))
    outputs = [(config.output, text)]
    if config.partition_out is not None:
        outputs.append((config.partition_out, partition_to_csv(result.partition, dataset.node_names)))
    await _async_write_all(outputs)
    return 0


async def cmd_sweep(config: RunConfig) -> int:
    """Merge one Louvain partition from every configured threshold and write the CSV."""
    timer = StageTimer()
    dataset, embeddings = await async_load_inputs(config, timer)
    assert embeddings is not None
    rows = await async_sweep(dataset, embeddings, config, timer)
    await _async_write(config.output, sweep_csv(rows))
    return 0


async def cmd_hypothesis(config: RunConfig) -> int:
    """Write the same-class versus other-class distance table."""
    timer = StageTimer()
    dataset, embeddings = await async_load_inputs(config, timer)
    assert embeddings is not None
    rows = run_hypothesis(dataset, embeddings, config)
    await _async_write(config.output, hypothesis_csv(rows))
    return 0


async def cmd_eval(config: RunConfig) -> int:
    """Score a partition file against the dataset classes."""
    timer = StageTimer()
    dataset, _ = await async_load_inputs(config, timer, with_embeddings=False)
    assert config.partition_file is not None
    with timer.stage("metrics"):
        partition = read_partition(config.partition_file, dataset.node_names)
        report = inter_accuracy(partition, dataset.labels, dataset.graph)
    if config.output_format is OutputFormat.CSV:
        text = per_community_csv(report, dataset.class_names)
    else:
        text = render_json(evaluation_document(dataset, report, config, timer.timings))
    await _async_write(config.output, text)
    return 0


_COMMANDS: dict[str, Callable[[RunConfig], Awaitable[int]]] = {
    "detect": cmd_detect,
    "sweep": cmd_sweep,
    "hypothesis": cmd_hypothesis,
    "eval": cmd_eval,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Run a subcommand and return its exit code.

    Usage errors exit through argparse with code 2.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

    try:
        config = _run_config(args)
    except (EmbedLouvainError, OSError) as exc:
        _LOGGER.error("Invalid configuration: %s", exc)
        return 1
    if args.command == "sweep" and not config.thresholds:
        parser.error("sweep needs at least one threshold")

    try:
        return asyncio.run(_COMMANDS[args.command](config))
    except (EmbedLouvainError, OSError) as exc:
        _LOGGER.error("%s failed: %s", args.command, exc)
        return 1
