"""Top-10 AUC over oracle calls and multi-seed summaries."""

from __future__ import annotations

import heapq
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from molopt.harness.trace import RunTrace

AUC_CONVENTIONS = (
    "m_i = mean of the 10 best scores after call i (mean of all when fewer than 10); "
    "after the last call m_i keeps its final value up to the budget; AUC = sum(m_i) / budget. "
    "Reference retrieval is unmetered."
)


@dataclass(frozen=True)
class AucReport:
    task_id: str
    auc_top10: float
    calls_used: int
    best_molecules: tuple[tuple[str, float], ...] = ()
    running_top10: tuple[float, ...] = field(default=(), repr=False)

    @property
    def final_top10(self) -> float:
        return self.running_top10[-1] if self.running_top10 else 0.0

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "auc_top10": self.auc_top10,
            "calls_used": self.calls_used,
            "final_top10_mean": self.final_top10,
            "best_molecules": [list(m) for m in self.best_molecules],
            "conventions": AUC_CONVENTIONS,
        }


def running_top10(scores: Sequence[float], k: int = 10) -> list[float]:
    """Mean of the k best scores after each call."""
    heap: list[float] = []
    total = 0.0
    out = []
    for s in scores:
        if len(heap) < k:
            heapq.heappush(heap, s)
            total += s
        elif s > heap[0]:
            total += s - heapq.heapreplace(heap, s)
        out.append(total / len(heap))
    return out


def _calls(trace) -> tuple[str, list[tuple[str, float]]]:
    if isinstance(trace, RunTrace):
        task = trace.header.get("task", {}).get("task_id", "")
        return task, [(e.get("canonical") or e.get("smiles", ""), float(e["score"])) for e in trace.oracle_calls()]
    calls = []
    for item in trace:
        calls.append(("", float(item)) if isinstance(item, (int, float)) else (str(item[0]), float(item[1])))
    return "", calls


def top10_auc(trace: RunTrace | Iterable, budget: int = 1000, task_id: str | None = None) -> AucReport:
    """Top-10 AUC of the budget-consuming calls in ``trace`` (or a score sequence)."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    task, calls = _calls(trace)
    if not calls:
        raise ValueError("trace holds no scored molecules")
    calls = calls[:budget]
    m = running_top10([s for _, s in calls])
    auc = (math.fsum(m) + m[-1] * (budget - len(m))) / budget
    best = tuple(sorted(calls, key=lambda c: (-c[1], c[0]))[:10])
    return AucReport(task_id or task, auc, len(calls), best, tuple(m))


@dataclass(frozen=True)
class SummaryRow:
    task_id: str
    mean: float
    std: float
    runs: int


@dataclass(frozen=True)
class Summary:
    rows: tuple[SummaryRow, ...]

    @property
    def total(self) -> float:
        return math.fsum(r.mean for r in self.rows)

    def to_text(self) -> str:
        width = max([len("sum")] + [len(r.task_id) for r in self.rows])
        lines = [
            "# AUC top-10 per task: mean ± population std (divide by n) across runs",
            f"# {AUC_CONVENTIONS}",
            f"{'task':<{width}}  {'mean':>7}  {'std':>7}  runs",
        ]
        lines += [f"{r.task_id:<{width}}  {r.mean:7.3f}  {r.std:7.3f}  {r.runs:4d}" for r in self.rows]
        lines.append(f"{'sum':<{width}}  {self.total:7.3f}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "rows": [r.__dict__ for r in self.rows],
            "sum": self.total,
            "std_convention": "population",
            "conventions": AUC_CONVENTIONS,
        }


def summarize(traces: Iterable[RunTrace], budget: int | None = None) -> Summary:
    """Per-task mean and population std of AUC top-10, plus the sum of task means.

    The budget defaults to each trace's configured budget.
    """
    by_task: dict[str, list[float]] = {}
    for tr in traces:
        b = budget or int(tr.header.get("config", {}).get("budget") or 1000)
        rep = top10_auc(tr, b)
        by_task.setdefault(rep.task_id, []).append(rep.auc_top10)
    rows = []
    for task in sorted(by_task):
        vals = by_task[task]
        mean = math.fsum(vals) / len(vals)
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / len(vals))
        rows.append(SummaryRow(task, mean, std, len(vals)))
    return Summary(tuple(rows))
