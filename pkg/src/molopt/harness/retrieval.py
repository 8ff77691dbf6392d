"""Unmetered pre-scoring of a dataset and top-k reference retrieval."""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from molopt import __version__
from molopt.chem import mol_from_smiles
from molopt.fingerprint import VERSION as FP_VERSION
from molopt.harness.dataset import Dataset, DatasetRecord
from molopt.oracle import OracleSpec, OracleUnavailable, is_scorable, score_molecule

CACHE_ENV = "MOLOPT_CACHE"


@dataclass(frozen=True)
class ScoreStats:
    n: int
    min: float
    max: float
    mean: float
    std: float  # population

    @classmethod
    def of(cls, values: list[float]) -> ScoreStats:
        n = len(values)
        mean = math.fsum(values) / n
        var = math.fsum((v - mean) ** 2 for v in values) / n
        return cls(n, min(values), max(values), mean, math.sqrt(var))

    def to_dict(self) -> dict[str, float]:
        return {"n": self.n, "min": self.min, "max": self.max, "mean": self.mean, "std": self.std}


@dataclass(frozen=True)
class ReferencePool:
    task_id: str
    entries: tuple[tuple[str, float], ...]  # (canonical SMILES, score), best first
    stats: ScoreStats
    from_cache: bool = False

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "entries": [list(e) for e in self.entries],
            "stats": self.stats.to_dict(),
            "note": "pre-scoring is unmetered and does not count against the oracle budget",
        }


def default_cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "molopt")


def cache_key(dataset: Dataset, spec: OracleSpec) -> str:
    data_hash = dataset.sha256 or hashlib.sha256("\n".join(r.canonical for r in dataset).encode()).hexdigest()
    payload = json.dumps([spec.to_dict(), data_hash, __version__, FP_VERSION], sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _score_chunk(args: tuple[OracleSpec, list[str]]) -> list[float]:
    spec, smiles = args
    return [score_molecule(spec, mol_from_smiles(s)) for s in smiles]


def prescore(
    dataset: Dataset, spec: OracleSpec, cache_dir: str | Path | None = None, workers: int = 1, use_cache: bool = True
) -> tuple[list[float], bool]:
    """Scores aligned with ``dataset``; (scores, served_from_cache)."""
    if not is_scorable(spec):
        raise OracleUnavailable(f"{spec.task_id} needs a registered external model")
    path = None
    if use_cache:
        path = Path(cache_dir or default_cache_dir()) / f"prescore-{spec.task_id}-{cache_key(dataset, spec)[:24]}.json"
        if path.exists():
            try:
                cached = json.loads(path.read_text(encoding="utf-8"))
                if cached.get("canonical_sha256") == _canon_hash(dataset):
                    return [float(v) for v in cached["scores"]], True
            except (OSError, ValueError, KeyError):
                pass
    smiles = [r.canonical for r in dataset]
    if workers > 1 and len(smiles) > 1000:
        size = math.ceil(len(smiles) / (workers * 4))
        chunks = [(spec, smiles[i : i + size]) for i in range(0, len(smiles), size)]
        with ProcessPoolExecutor(workers) as pool:
            scores = [v for part in pool.map(_score_chunk, chunks) for v in part]
    else:
        scores = _score_chunk((spec, smiles))
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps({"canonical_sha256": _canon_hash(dataset), "scores": scores}), encoding="utf-8")
        tmp.replace(path)
    return scores, False


def _canon_hash(dataset: Dataset) -> str:
    return hashlib.sha256("\n".join(r.canonical for r in dataset).encode("utf-8")).hexdigest()


def prescore_and_retrieve(
    dataset: Dataset,
    spec: OracleSpec,
    k: int = 100,
    cache_dir: str | Path | None = None,
    workers: int = 1,
    use_cache: bool = True,
) -> ReferencePool:
    """Top-k (canonical, score) by descending score, ties by canonical SMILES."""
    if k < 0:
        raise ValueError("k must be non-negative")
    scores, cached = prescore(dataset, spec, cache_dir, workers, use_cache)
    ranked = sorted(zip((r.canonical for r in dataset), scores), key=lambda e: (-e[1], e[0]))
    return ReferencePool(spec.task_id, tuple(ranked[:k]), ScoreStats.of(scores), cached)


def with_prescores(dataset: Dataset, scores: list[float]) -> Dataset:
    records = [DatasetRecord(r.smiles, r.canonical, s) for r, s in zip(dataset, scores)]
    return Dataset(records, dataset.warnings, dataset.sha256, dataset.source)
