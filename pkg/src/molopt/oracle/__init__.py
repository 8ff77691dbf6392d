"""Task oracles, score modifiers and the budget ledger."""

from molopt.oracle.budget import BudgetExhausted, BudgetLedger, Evaluation, evaluate, evaluate_detailed
from molopt.oracle.modifiers import ScoreModifier, clipped_linear, gaussian_modifier
from molopt.oracle.qed import qed, qed_properties
from molopt.oracle.scoring import (
    EXTERNAL_TASKS,
    OracleUnavailable,
    Scored,
    component_scores,
    is_scorable,
    isomer_score,
    mpo_score,
    qed_score,
    register_external_model,
    score_molecule,
    score_smiles,
    similarity_score,
    smarts_constraint_score,
    unregister_external_model,
)
from molopt.oracle.tasks import Component, Family, OracleSpec, UnknownTaskError, get_task, load_tasks, task_ids

__all__ = [
    "EXTERNAL_TASKS",
    "BudgetExhausted",
    "BudgetLedger",
    "Component",
    "Evaluation",
    "Family",
    "OracleSpec",
    "OracleUnavailable",
    "ScoreModifier",
    "Scored",
    "UnknownTaskError",
    "clipped_linear",
    "component_scores",
    "evaluate",
    "evaluate_detailed",
    "gaussian_modifier",
    "get_task",
    "is_scorable",
    "isomer_score",
    "load_tasks",
    "mpo_score",
    "qed",
    "qed_properties",
    "qed_score",
    "register_external_model",
    "score_molecule",
    "score_smiles",
    "similarity_score",
    "smarts_constraint_score",
    "task_ids",
    "unregister_external_model",
]
