"""Datasets, reference retrieval, the top-10 AUC metric and run traces."""

from molopt.harness.dataset import DataError, Dataset, DatasetRecord, load_dataset, parse_dataset, sample_dataset
from molopt.harness.metrics import AucReport, Summary, SummaryRow, running_top10, summarize, top10_auc
from molopt.harness.retrieval import ReferencePool, ScoreStats, prescore, prescore_and_retrieve
from molopt.harness.trace import RunTrace, TraceError, load_trace, parse_trace, persist_trace

__all__ = [
    "AucReport",
    "DataError",
    "Dataset",
    "DatasetRecord",
    "ReferencePool",
    "RunTrace",
    "ScoreStats",
    "Summary",
    "SummaryRow",
    "TraceError",
    "load_dataset",
    "load_trace",
    "parse_dataset",
    "parse_trace",
    "persist_trace",
    "prescore",
    "prescore_and_retrieve",
    "running_top10",
    "sample_dataset",
    "summarize",
    "top10_auc",
]
