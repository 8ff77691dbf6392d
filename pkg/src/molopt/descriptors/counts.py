"""Counting descriptors: atoms, rings, hydrogen bonding, rotors, stereocenters."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cache
from importlib import resources

from molopt.chem.canon import symmetry_classes
from molopt.chem.molecule import BondOrder, Molecule
from molopt.descriptors.topology import UndefinedValueError
from molopt.smarts import SmartsPattern, matches_at, parse_smarts


@dataclass(frozen=True)
class AnchoredRule:
    """Atom-level rule: ``include`` matches at the atom and ``exclude`` does not."""

    include: SmartsPattern
    exclude: SmartsPattern | None = None

    def accepts(self, mol: Molecule, idx: int) -> bool:
        if not matches_at(self.include, mol, idx):
            return False
        return self.exclude is None or not matches_at(self.exclude, mol, idx)


def read_table(name: str) -> list[dict[str, str]]:
    """Rows of a tab-separated data file, skipping '#' comment lines."""
    text = resources.files("molopt.descriptors").joinpath("data").joinpath(name).read_text()
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return list(csv.DictReader(lines, delimiter="\t"))


@cache
def _hbond_rules() -> tuple[tuple[AnchoredRule, ...], tuple[AnchoredRule, ...]]:
    donors, acceptors = [], []
    for row in read_table("hbond.tsv"):
        rule = AnchoredRule(parse_smarts(row["pattern"]), parse_smarts(row["exclude"]) if row["exclude"] else None)
        (donors if row["role"] == "donor" else acceptors).append(rule)
    return tuple(donors), tuple(acceptors)


@dataclass(frozen=True)
class StructuralCounts:
    num_atoms: int
    num_heavy: int
    num_bonds: int
    num_heteroatoms: int
    num_aromatic_rings: int
    num_saturated_rings: int
    num_stereocenters_unassigned: int


@dataclass(frozen=True)
class HBondCounts:
    hbd: int
    hba: int
    lipinski_hbd: int
    lipinski_hba: int


@dataclass(frozen=True)
class RingClass:
    atoms: tuple[int, ...]
    aromatic: bool  # every bond aromatic
    saturated: bool  # every bond a non-aromatic single bond
    hetero: bool  # at least one non-carbon atom


def ring_classes(mol: Molecule) -> list[RingClass]:
    out = []
    for atoms, bonds in zip(mol.rings.rings, mol.rings.ring_bonds):
        orders = [mol.bonds[b].order for b in bonds]
        out.append(
            RingClass(
                atoms=tuple(atoms),
                aromatic=all(o == BondOrder.AROMATIC for o in orders),
                saturated=all(o == BondOrder.SINGLE for o in orders),
                hetero=any(mol.atoms[a].element != 6 for a in atoms),
            )
        )
    return out


def ring_counts(mol: Molecule) -> dict[str, int]:
    """Ring tallies by kind. Aliphatic rings contain at least one non-aromatic bond."""
    rc = ring_classes(mol)
    counts = {
        "rings": len(rc),
        "aromatic_rings": sum(r.aromatic for r in rc),
        "aromatic_carbocycles": sum(r.aromatic and not r.hetero for r in rc),
        "aromatic_heterocycles": sum(r.aromatic and r.hetero for r in rc),
        "aliphatic_rings": sum(not r.aromatic for r in rc),
        "aliphatic_carbocycles": sum(not r.aromatic and not r.hetero for r in rc),
        "aliphatic_heterocycles": sum(not r.aromatic and r.hetero for r in rc),
        "saturated_rings": sum(r.saturated for r in rc),
        "saturated_carbocycles": sum(r.saturated and not r.hetero for r in rc),
        "saturated_heterocycles": sum(r.saturated and r.hetero for r in rc),
        "heterocycles": sum(r.hetero for r in rc),
    }
    return counts


def num_atoms(mol: Molecule) -> int:
    """All atoms including implicit hydrogens."""
    return len(mol.atoms) + sum(a.total_h for a in mol.atoms)


def num_heavy_atoms(mol: Molecule) -> int:
    return sum(1 for a in mol.atoms if a.element != 1)


def num_heteroatoms(mol: Molecule) -> int:
    return sum(1 for a in mol.atoms if a.element not in (1, 6))


def structural_counts(mol: Molecule) -> StructuralCounts:
    rc = ring_counts(mol)
    _, unspecified = stereocenters(mol)
    return StructuralCounts(
        num_atoms=num_atoms(mol),
        num_heavy=num_heavy_atoms(mol),
        num_bonds=len(mol.bonds),
        num_heteroatoms=num_heteroatoms(mol),
        num_aromatic_rings=rc["aromatic_rings"],
        num_saturated_rings=rc["saturated_rings"],
        num_stereocenters_unassigned=unspecified,
    )


def _is_amide_bond(mol: Molecule, bidx: int) -> bool:
    """C(=O)-N bond with a non-aromatic carbonyl carbon and nitrogen."""
    b = mol.bonds[bidx]
    if b.order != BondOrder.SINGLE:
        return False
    for c, n in ((b.begin, b.end), (b.end, b.begin)):
        if mol.atoms[c].element != 6 or mol.atoms[n].element != 7:
            continue
        if mol.atoms[c].aromatic or mol.atoms[n].aromatic:
            continue
        for nb, k in mol.neighbors[c]:
            if mol.atoms[nb].element == 8 and mol.bonds[k].order == BondOrder.DOUBLE:
                return True
    return False


def amide_bonds(mol: Molecule) -> int:
    return sum(_is_amide_bond(mol, k) for k in range(len(mol.bonds)))


def _rigid_end(mol: Molecule, idx: int) -> bool:
    """Atoms that never anchor a strict rotor: sp atoms, CX3 groups, t-butyl."""
    if any(mol.bonds[k].order == BondOrder.TRIPLE for _, k in mol.neighbors[idx]):
        return True
    if mol.atoms[idx].element != 6 or mol.atoms[idx].aromatic:
        return False
    nbrs = [mol.atoms[nb] for nb, _ in mol.neighbors[idx]]
    for z in (9, 17, 35):
        if sum(a.element == z for a in nbrs) >= 3:
            return True
    methyls = sum(a.element == 6 and not a.aromatic and a.total_h == 3 for a in nbrs)
    return methyls >= 3


def _amide_like(mol: Molecule, c: int, x: int) -> bool:
    """C(=N,O,S)-X linkages: amides, esters, thioesters, amidines, carbamates."""
    carbon = mol.atoms[c]
    if carbon.element != 6 or carbon.aromatic or carbon.degree != 3:
        return False
    other = mol.atoms[x]
    hetero = other.element == 7 or (not other.aromatic and other.element in (8, 16))
    if not hetero:
        return False
    for nb, k in mol.neighbors[c]:
        a = mol.atoms[nb]
        if mol.bonds[k].order == BondOrder.DOUBLE and not a.aromatic and a.element in (7, 8, 16):
            return True
    return False


def rotatable_bonds(mol: Molecule, strict: bool = True) -> int:
    """Non-ring single bonds between atoms of heavy degree >= 2.

    Strict mode also drops bonds to triple-bonded atoms, CF3/CCl3/CBr3 and
    t-butyl carbons, and C(=N,O,S)-N/O/S linkages such as amides and esters.
    """
    rigid = [_rigid_end(mol, i) for i in range(len(mol.atoms))] if strict else []
    count = 0
    for b in mol.bonds:
        if b.order != BondOrder.SINGLE or b.in_ring:
            continue
        if mol.atoms[b.begin].degree < 2 or mol.atoms[b.end].degree < 2:
            continue
        if strict and (
            rigid[b.begin]
            or rigid[b.end]
            or _amide_like(mol, b.begin, b.end)
            or _amide_like(mol, b.end, b.begin)
        ):
            continue
        count += 1
    return count


def hbond_counts(mol: Molecule) -> HBondCounts:
    donors, acceptors = _hbond_rules()
    n = len(mol.atoms)
    hbd = sum(1 for i in range(n) if any(r.accepts(mol, i) for r in donors))
    hba = sum(1 for i in range(n) if any(r.accepts(mol, i) for r in acceptors))
    lip_hbd = sum(a.total_h for a in mol.atoms if a.element in (7, 8))
    lip_hba = sum(1 for a in mol.atoms if a.element in (7, 8))
    return HBondCounts(hbd=hbd, hba=hba, lipinski_hbd=lip_hbd, lipinski_hba=lip_hba)


def fraction_csp3(mol: Molecule) -> float:
    """Share of carbons that are non-aromatic with only single bonds."""
    carbons = [i for i, a in enumerate(mol.atoms) if a.element == 6]
    if not carbons:
        raise UndefinedValueError("fraction Csp3 undefined: no carbon atoms")
    sp3 = sum(
        1
        for i in carbons
        if not mol.atoms[i].aromatic and all(mol.bonds[k].order == BondOrder.SINGLE for _, k in mol.neighbors[i])
    )
    return sp3 / len(carbons)


_TETRAHEDRAL = frozenset({6, 7, 14, 15, 32})


def stereocenters(mol: Molecule) -> tuple[int, int]:
    """(all, unspecified) tetrahedral stereocenters.

    A candidate is a non-aromatic C, Si, Ge, or a four-connected N+/P with
    four single-bonded substituents (at most one hydrogen) that fall into four
    distinct symmetry classes. Specified centers carry a parsed chirality mark.
    """
    sym = symmetry_classes(mol)
    total = unspecified = 0
    for i, a in enumerate(mol.atoms):
        if a.element not in _TETRAHEDRAL or a.aromatic:
            continue
        if a.element == 7 and a.formal_charge != 1:
            continue
        if a.degree + a.total_h != 4 or a.total_h > 1:
            continue
        if any(mol.bonds[k].order != BondOrder.SINGLE for _, k in mol.neighbors[i]):
            continue
        classes = [sym[nb] for nb, _ in mol.neighbors[i]]
        if len(set(classes)) != len(classes):
            continue
        total += 1
        if a.chirality is None:
            unspecified += 1
    return total, unspecified
