"""Embedding-augmented Louvain community detection with community merging."""

from .datasets import LabeledDataset, async_load_citation_dataset, load_citation_dataset
from .embeddings import EmbeddingMatrix, normalize_rows, propagate_features
from .exceptions import EmbedLouvainError, InvalidConfig, InvalidData, ParseError
from .graph import Graph, Partition, load_edge_list
from .louvain import LouvainConfig, LouvainResult, Objective, modularity, run_louvain
from .merging import MergeConfig, MergeTrace, StopReason, iterative_merge
from .metrics import EvalReport, hypothesis_check, inter_accuracy

__all__ = [
    "EmbedLouvainError",
    "EmbeddingMatrix",
    "EvalReport",
    "Graph",
    "InvalidConfig",
    "InvalidData",
    "LabeledDataset",
    "LouvainConfig",
    "LouvainResult",
    "MergeConfig",
    "MergeTrace",
    "Objective",
    "ParseError",
    "Partition",
    "StopReason",
    "async_load_citation_dataset",
    "hypothesis_check",
    "inter_accuracy",
    "iterative_merge",
    "load_citation_dataset",
    "load_edge_list",
    "modularity",
    "normalize_rows",
    "propagate_features",
    "run_louvain",
]
