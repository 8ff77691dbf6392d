"""Whole-molecule operations built on the core graph."""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence

from molopt.chem import elements
from molopt.chem.build import RawAtom, assemble
from molopt.chem.canon import canonical_smiles
from molopt.chem.molecule import Molecule


def element_counts(mol: Molecule) -> Counter[str]:
    counts: Counter[str] = Counter()
    for a in mol.atoms:
        counts[elements.symbol(a.element)] += 1
        if a.total_h:
            counts["H"] += a.total_h
    return counts


def molecular_formula(mol: Molecule) -> str:
    """Hill-order formula with implicit hydrogens and a net-charge suffix."""
    counts = element_counts(mol)
    if "C" in counts:
        order = ["C"] + (["H"] if "H" in counts else []) + sorted(k for k in counts if k not in ("C", "H"))
    else:
        order = sorted(counts)
    text = "".join(sym + (str(counts[sym]) if counts[sym] > 1 else "") for sym in order)
    charge = sum(a.formal_charge for a in mol.atoms)
    if charge:
        text += ("+" if charge > 0 else "-") + (str(abs(charge)) if abs(charge) > 1 else "")
    return text


def ring_stats(mol: Molecule) -> tuple[int, int, list[int]]:
    info = mol.rings
    return len(info.rings), info.max_size, list(info.spiro_atoms)


def submolecule(mol: Molecule, atom_ids: Sequence[int]) -> Molecule:
    """Induced subgraph on ``atom_ids`` (kept in the given order)."""
    remap = {a: i for i, a in enumerate(atom_ids)}
    raw = [
        RawAtom(
            element=mol.atoms[a].element,
            charge=mol.atoms[a].formal_charge,
            explicit_h=mol.atoms[a].explicit_h,
            implicit_h=mol.atoms[a].implicit_h,
            isotope=mol.atoms[a].isotope,
            chirality=mol.atoms[a].chirality,
        )
        for a in atom_ids
    ]
    edges, kekule, stereo = [], [], []
    for b in mol.bonds:
        if b.begin in remap and b.end in remap:
            edges.append((remap[b.begin], remap[b.end]))
            kekule.append(b.kekule)
            stereo.append(b.stereo)
    sub = assemble(raw, edges, kekule, "", stereo)
    return Molecule(sub.atoms, sub.bonds, sub.rings, canonical_smiles(sub), sub.neighbors)


def renumber_atoms(mol: Molecule, perm: Sequence[int]) -> Molecule:
    """Same graph with atom ``perm[i]`` of ``mol`` placed at index ``i``."""
    out = submolecule(mol, perm)
    return Molecule(out.atoms, out.bonds, out.rings, mol.source, out.neighbors)


def fragment_split(mol: Molecule) -> tuple[int, Molecule]:
    """Number of connected components and the largest one.

    Ties on atom count go to the lexicographically smallest canonical SMILES.
    """
    comps = mol.components
    if len(comps) == 1:
        return 1, mol
    subs = [submolecule(mol, c) for c in comps]
    best = min(subs, key=lambda s: (-len(s.atoms), s.source))
    return len(comps), best


def with_explicit_hydrogens(mol: Molecule) -> Molecule:
    """Copy of ``mol`` with every hydrogen promoted to a graph atom.

    Heavy atoms keep their indices; hydrogens are appended after them in
    parent order. Used by descriptors whose published atom typing assigns
    values to individual hydrogens.
    """
    raw = [
        RawAtom(element=a.element, charge=a.formal_charge, isotope=a.isotope, chirality=a.chirality)
        for a in mol.atoms
    ]
    edges = [(b.begin, b.end) for b in mol.bonds]
    kekule = [b.kekule for b in mol.bonds]
    for i, a in enumerate(mol.atoms):
        for _ in range(a.total_h):
            raw.append(RawAtom(element=1))
            edges.append((i, len(raw) - 1))
            kekule.append(1)
    return assemble(raw, edges, kekule, mol.source)
