"""Native scorers for each task family, plus the external-model hook."""

from __future__ import annotations

import math
import re
import threading
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass
from functools import cache

from molopt.chem import Molecule, canonical_smiles, element_counts, mol_from_smiles, smi2mol_with_errors
from molopt.descriptors import crippen, ring_counts, tpsa
from molopt.fingerprint import Fingerprint, circular_fingerprint, tanimoto
from molopt.oracle.modifiers import gaussian_modifier
from molopt.oracle.qed import qed
from molopt.oracle.tasks import Component, Family, OracleSpec, get_task
from molopt.smarts import SmartsPattern, has_match, parse_smarts

ExternalScorer = Callable[[str], float]

EXTERNAL_TASKS = frozenset({"drd2", "gsk3b", "jnk3"})
_external: dict[str, ExternalScorer] = {}
_external_lock = threading.Lock()


class OracleUnavailable(RuntimeError):
    """The task has no scorer in this engine (external model not registered)."""


@cache
def target_fingerprint(smiles: str) -> Fingerprint:
    return circular_fingerprint(mol_from_smiles(smiles))


@cache
def _pattern(smarts: str) -> SmartsPattern:
    return parse_smarts(smarts)


def parse_formula(formula: str) -> Counter[str]:
    counts: Counter[str] = Counter()
    for sym, n in re.findall(r"([A-Z][a-z]?)(\d*)", formula):
        counts[sym] += int(n) if n else 1
    return counts


def isomer_score(formula: str | OracleSpec, mol: Molecule) -> float:
    """1.0 on an exact formula match, else a geometric mean of per-element gaussians.

    Each target element scores gaussian(count; target, 1). Each element the
    molecule has but the target lacks adds one more factor at distance equal
    to its count.
    """
    if isinstance(formula, OracleSpec):
        if not formula.formula:
            raise ValueError(f"{formula.task_id} has no target formula")
        formula = formula.formula
    target = parse_formula(formula)
    have = element_counts(mol)
    if have == target:
        return 1.0
    factors = [gaussian_modifier(have.get(el, 0), n, 1.0) for el, n in target.items()]
    factors += [gaussian_modifier(n, 0, 1.0) for el, n in have.items() if el not in target]
    return math.exp(sum(math.log(f) for f in factors) / len(factors)) if all(factors) else 0.0


def measure(component: Component, mol: Molecule) -> float:
    """Raw value of a component's measure (before its modifier)."""
    m = component.measure
    if m == "similarity":
        return tanimoto(circular_fingerprint(mol), target_fingerprint(component.target))
    if m == "isomer":
        return isomer_score(component.formula, mol)
    if m == "tpsa":
        return tpsa(mol)
    if m == "logp":
        return crippen(mol)[0]
    if m == "num_rings":
        return ring_counts(mol)["rings"]
    if m == "num_aromatic_rings":
        return ring_counts(mol)["aromatic_rings"]
    if m == "num_fluorine":
        return sum(1 for a in mol.atoms if a.element == 9)
    if m == "qed":
        return qed(mol)
    raise AssertionError(m)


def component_scores(spec: OracleSpec, mol: Molecule) -> list[float]:
    return [c.modifier(measure(c, mol)) for c in spec.components]


def _geometric_mean(scores: list[float], weights: list[float]) -> float:
    if not scores:
        return 1.0
    if any(s <= 0 for s in scores):
        return 0.0
    return math.exp(sum(w * math.log(s) for s, w in zip(scores, weights)) / sum(weights))


def similarity_score(spec: OracleSpec, mol: Molecule) -> float:
    if spec.family not in (Family.REDISCOVERY, Family.SIMILARITY):
        raise ValueError(f"{spec.task_id} is not a similarity task")
    comp = spec.components[0]
    raw = measure(comp, mol)
    return raw if spec.family == Family.REDISCOVERY else comp.modifier(raw)


def mpo_score(spec: OracleSpec, mol: Molecule) -> float:
    """Weighted geometric mean of the modified components; any zero gives zero."""
    return _geometric_mean(component_scores(spec, mol), [c.weight for c in spec.components])


def qed_score(mol: Molecule) -> float:
    return qed(mol)


def smarts_constraint_score(spec: OracleSpec, mol: Molecule) -> float:
    """Gate on required/forbidden SMARTS, then the geometric mean of the rest.

    The similarity component's clipped-linear modifier maps similarity at or
    above the cap to 1.
    """
    if any(not has_match(_pattern(s), mol) for s in spec.required):
        return 0.0
    if any(has_match(_pattern(s), mol) for s in spec.forbidden):
        return 0.0
    return mpo_score(spec, mol)


def register_external_model(task_id: str, scorer: ExternalScorer) -> OracleSpec:
    """Install a caller-provided scorer (canonical SMILES -> [0, 1]) for drd2, gsk3b or jnk3."""
    if task_id not in EXTERNAL_TASKS:
        raise ValueError(f"{task_id!r} is not an external-model task")
    with _external_lock:
        _external[task_id] = scorer
    return get_task(task_id)


def unregister_external_model(task_id: str) -> None:
    with _external_lock:
        _external.pop(task_id, None)


def is_scorable(spec: OracleSpec) -> bool:
    return spec.family != Family.EXTERNAL_MODEL or spec.task_id in _external


def score_molecule(spec: OracleSpec, mol: Molecule) -> float:
    """Score a parsed molecule for ``spec``; always in [0, 1]."""
    fam = spec.family
    if fam in (Family.REDISCOVERY, Family.SIMILARITY):
        value = similarity_score(spec, mol)
    elif fam == Family.SMARTS_CONSTRAINT:
        value = smarts_constraint_score(spec, mol)
    elif fam == Family.QED:
        value = qed_score(mol)
    elif fam in (Family.MPO, Family.ISOMER):
        value = mpo_score(spec, mol)
    else:
        scorer = _external.get(spec.task_id)
        if scorer is None:
            raise OracleUnavailable(f"{spec.task_id} needs a registered external model")
        value = float(scorer(canonical_smiles(mol)))
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"external scorer for {spec.task_id} returned {value}, outside [0, 1]")
    return value


@dataclass(frozen=True)
class Scored:
    score: float
    canonical: str | None
    diagnostic: str = ""


def score_smiles(spec: OracleSpec, smiles: str) -> Scored:
    """Unmetered scoring of SMILES text; invalid input scores 0 with a diagnostic."""
    mol, diag = smi2mol_with_errors(smiles)
    if mol is None:
        return Scored(0.0, None, "; ".join(diag.messages) or "invalid SMILES")
    return Scored(score_molecule(spec, mol), canonical_smiles(mol))
