"""Oracle-call accounting: a canonical-SMILES cache with a hard budget."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from molopt.chem import canonical_smiles, smi2mol_with_errors
from molopt.oracle.scoring import OracleUnavailable, is_scorable, score_molecule
from molopt.oracle.tasks import OracleSpec

DEFAULT_BUDGET = 1000


class BudgetExhausted(RuntimeError):
    def __init__(self, budget: int):
        super().__init__(f"oracle budget of {budget} calls exhausted")
        self.budget = budget


@dataclass
class BudgetLedger:
    """Counts distinct canonical SMILES scored; cache hits and invalid input are free."""

    budget: int = DEFAULT_BUDGET
    consumed: int = 0
    cache: dict[str, float] = field(default_factory=dict)
    calls: list[tuple[str, float]] = field(default_factory=list)  # in consumption order
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise ValueError("budget must be non-negative")

    @property
    def remaining(self) -> int:
        return self.budget - self.consumed

    @property
    def exhausted(self) -> bool:
        return self.consumed >= self.budget


@dataclass(frozen=True)
class Evaluation:
    score: float
    consumed_call: bool
    canonical: str | None = None
    diagnostic: str = ""


def evaluate_detailed(ledger: BudgetLedger, spec: OracleSpec, smiles: str) -> Evaluation:
    mol, diag = smi2mol_with_errors(smiles)
    if mol is None:
        return Evaluation(0.0, False, None, "; ".join(diag.messages) or "invalid SMILES")
    key = canonical_smiles(mol)
    with ledger._lock:
        if key in ledger.cache:
            return Evaluation(ledger.cache[key], False, key)
        if ledger.exhausted:
            raise BudgetExhausted(ledger.budget)
        if not is_scorable(spec):
            raise OracleUnavailable(f"{spec.task_id} needs a registered external model")
        score = score_molecule(spec, mol)
        ledger.cache[key] = score
        ledger.calls.append((key, score))
        ledger.consumed += 1
    return Evaluation(score, True, key)


def evaluate(ledger: BudgetLedger, spec: OracleSpec, smiles: str) -> tuple[float, bool]:
    """(score, consumed_call). Raises BudgetExhausted on a new molecule once the budget is spent."""
    ev = evaluate_detailed(ledger, spec, smiles)
    return ev.score, ev.consumed_call
