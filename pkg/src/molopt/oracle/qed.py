"""Quantitative estimate of drug-likeness (QED) with mean weights."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cache
from importlib import resources

from molopt.chem import elements
from molopt.chem.molecule import BondOrder, Molecule
from molopt.descriptors import crippen, hbond_counts, rotatable_bonds, tpsa
from molopt.descriptors.counts import AnchoredRule
from molopt.smarts import SmartsPattern, count_matches, find_matches, has_match, parse_smarts


@dataclass(frozen=True)
class Desirability:
    """Asymmetric double sigmoid, normalised by its maximum."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    dmax: float

    def __call__(self, x: float) -> float:
        exp1 = 1 + math.exp(-(x - self.c + self.d / 2) / self.e)
        exp2 = 1 + math.exp(-(x - self.c - self.d / 2) / self.f)
        return (self.a + self.b / exp1 * (1 - 1 / exp2)) / self.dmax


@dataclass(frozen=True)
class Alert:
    alternatives: tuple[SmartsPattern, ...]
    count: int = 1  # pairwise atom-disjoint matches required

    def fires(self, mol: Molecule) -> bool:
        if self.count == 1:
            return any(has_match(p, mol) for p in self.alternatives)
        sets = [frozenset(m) for p in self.alternatives for m in find_matches(p, mol).mappings]
        return _disjoint(sets, self.count, frozenset())


def _disjoint(sets: list[frozenset[int]], k: int, used: frozenset[int]) -> bool:
    if k == 0:
        return True
    for i, s in enumerate(sets):
        if not s & used and _disjoint(sets[i + 1 :], k - 1, used | s):
            return True
    return False


@dataclass(frozen=True)
class QedModel:
    weights: dict[str, float]
    desirability: dict[str, Desirability]
    acceptors: tuple[SmartsPattern, ...]
    acceptor_rules: tuple[AnchoredRule, ...]
    alerts: tuple[Alert, ...]


@dataclass(frozen=True)
class QedProperties:
    MW: float
    ALOGP: float
    HBA: int
    HBD: int
    PSA: float
    ROTB: int
    AROM: int
    ALERTS: int

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


@cache
def qed_model() -> QedModel:
    raw = json.loads(resources.files("molopt.oracle").joinpath("data").joinpath("qed.json").read_text())
    ads = {k: Desirability(*(v[p] for p in ("A", "B", "C", "D", "E", "F", "DMAX"))) for k, v in raw["ads"].items()}
    return QedModel(
        weights=raw["weights"],
        desirability=ads,
        acceptors=tuple(parse_smarts(s) for s in raw["acceptors"]),
        acceptor_rules=tuple(
            AnchoredRule(parse_smarts(r["include"]), parse_smarts(r["exclude"])) for r in raw["acceptor_rules"]
        ),
        alerts=tuple(Alert(tuple(parse_smarts(s) for s in a["smarts"]), a["count"]) for a in raw["alerts"]),
    )


def molecular_weight(mol: Molecule) -> float:
    """Average molecular weight including implicit hydrogens."""
    h = elements.atomic_mass(1)
    return sum(elements.atomic_mass(a.element) + a.total_h * h for a in mol.atoms)


def _aromatic_ring_count(mol: Molecule) -> int:
    """Circuit rank after deleting aliphatic ring atoms with a non-aromatic neighbour.

    The neighbour must be joined by a single or aromatic bond.
    """
    drop = set()
    for i, a in enumerate(mol.atoms):
        if a.aromatic or not a.in_ring:
            continue
        for nb, k in mol.neighbors[i]:
            if not mol.atoms[nb].aromatic and mol.bonds[k].order in (BondOrder.SINGLE, BondOrder.AROMATIC):
                drop.add(i)
                break
    keep = [i for i in range(len(mol.atoms)) if i not in drop]
    edges = [b for b in mol.bonds if b.begin not in drop and b.end not in drop]
    parent = {i: i for i in keep}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = len(keep)
    for b in edges:
        ra, rb = find(b.begin), find(b.end)
        if ra != rb:
            parent[ra] = rb
            components -= 1
    return len(edges) - len(keep) + components


def qed_properties(mol: Molecule) -> QedProperties:
    model = qed_model()
    hba = sum(count_matches(p, mol) for p in model.acceptors)
    hba += sum(1 for rule in model.acceptor_rules for i in range(len(mol.atoms)) if rule.accepts(mol, i))
    return QedProperties(
        MW=molecular_weight(mol),
        ALOGP=crippen(mol)[0],
        HBA=hba,
        HBD=hbond_counts(mol).hbd,
        PSA=tpsa(mol),
        ROTB=rotatable_bonds(mol, strict=True),
        AROM=_aromatic_ring_count(mol),
        ALERTS=sum(1 for alert in model.alerts if alert.fires(mol)),
    )


def qed(mol: Molecule, props: QedProperties | None = None) -> float:
    """Weighted geometric mean of the eight desirabilities, in (0, 1)."""
    model = qed_model()
    values = (props or qed_properties(mol)).as_dict()
    total = sum(model.weights[k] * math.log(model.desirability[k](v)) for k, v in values.items())
    return math.exp(total / sum(model.weights.values()))
