"""Additive atom-contribution descriptors: Wildman-Crippen logP/MR and TPSA."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache

from molopt.chem.molecule import BondOrder, Molecule
from molopt.chem.ops import with_explicit_hydrogens
from molopt.descriptors.counts import read_table
from molopt.smarts import SmartsPattern, match_context, matches_at, parse_smarts


@dataclass(frozen=True)
class ContributionRow:
    label: str
    pattern: SmartsPattern
    logp: float
    mr: float


@cache
def crippen_table() -> tuple[ContributionRow, ...]:
    return tuple(
        ContributionRow(r["type"], parse_smarts(r["smarts"]), float(r["logp"]), float(r["mr"]))
        for r in read_table("crippen.tsv")
    )


def crippen_types(mol: Molecule) -> list[ContributionRow | None]:
    """Contribution row per atom of the explicit-hydrogen form of ``mol``.

    Heavy atoms keep their indices; hydrogens follow. None marks an atom no
    row matches; it contributes 0.
    """
    hmol = with_explicit_hydrogens(mol)
    ctx = match_context(hmol)
    rows = crippen_table()
    out: list[ContributionRow | None] = []
    for i in range(len(hmol.atoms)):
        found = None
        for row in rows:
            # Cheap root test before the anchored search.
            if ctx.mask(row.pattern.atoms[0].expr) >> i & 1 and matches_at(row.pattern, hmol, i):
                found = row
                break
        out.append(found)
    return out


def crippen(mol: Molecule) -> tuple[float, float]:
    """(logP, molar refractivity) as sums of atom contributions."""
    logp = mr = 0.0
    for row in crippen_types(mol):
        if row is not None:
            logp += row.logp
            mr += row.mr
    return logp, mr


@cache
def _tpsa_rows() -> dict[tuple, list[tuple[str, float]]]:
    table: dict[tuple, list[tuple[str, float]]] = {}
    for r in read_table("tpsa.tsv"):
        z = {"N": 7, "O": 8}[r["element"]]
        key = (z, int(r["nbrs"]), int(r["h"]), int(r["charge"]), int(r["single"]), int(r["double"]), int(r["triple"]), int(r["aromatic"]))
        table.setdefault(key, []).append((r["ring3"], float(r["tpsa"])))
    return table


def _in_three_ring(mol: Molecule, idx: int) -> bool:
    return any(len(r) == 3 and idx in r for r in mol.rings.rings)


def tpsa_contribution(mol: Molecule, idx: int) -> float:
    atom = mol.atoms[idx]
    if atom.element not in (7, 8):
        return 0.0
    counts = {BondOrder.SINGLE: 0, BondOrder.DOUBLE: 0, BondOrder.TRIPLE: 0, BondOrder.AROMATIC: 0}
    heavy = 0
    h = atom.total_h
    for nb, k in mol.neighbors[idx]:
        if mol.atoms[nb].element == 1:
            h += 1
            continue
        heavy += 1
        counts[mol.bonds[k].order] += 1
    key = (
        atom.element,
        heavy,
        h,
        atom.formal_charge,
        counts[BondOrder.SINGLE],
        counts[BondOrder.DOUBLE],
        counts[BondOrder.TRIPLE],
        counts[BondOrder.AROMATIC],
    )
    for ring3, value in _tpsa_rows().get(key, ()):
        if ring3 == "*" or (ring3 == "1") == _in_three_ring(mol, idx):
            return value
    if atom.element == 7:
        return max(0.0, 30.5 - 8.2 * heavy + 1.5 * h)
    return max(0.0, 28.5 - 8.6 * heavy + 1.5 * h)


def tpsa(mol: Molecule) -> float:
    """Topological polar surface area in square angstroms (N and O only)."""
    return sum(tpsa_contribution(mol, i) for i in range(len(mol.atoms)))
