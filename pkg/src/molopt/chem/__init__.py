"""Molecular graph core: SMILES in, annotated immutable molecules out."""

from molopt.chem.canon import canonical_ranks, canonical_smiles, random_smiles
from molopt.chem.edit import EditableMol, ValenceError
from molopt.chem.molecule import (
    Atom,
    Bond,
    BondOrder,
    Molecule,
    ParseDiagnostics,
    RingInfo,
    SmilesError,
)
from molopt.chem.ops import (
    element_counts,
    fragment_split,
    molecular_formula,
    renumber_atoms,
    ring_stats,
    submolecule,
    with_explicit_hydrogens,
)
from molopt.chem.smiles import mol_from_smiles, parse_smiles, smi2mol_with_errors


def canonicalize(text: str) -> str | None:
    """Canonical SMILES of ``text``, or None when it does not parse."""
    mol = parse_smiles(text)
    return canonical_smiles(mol) if isinstance(mol, Molecule) else None


__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "EditableMol",
    "Molecule",
    "ParseDiagnostics",
    "RingInfo",
    "SmilesError",
    "ValenceError",
    "canonical_ranks",
    "canonical_smiles",
    "canonicalize",
    "element_counts",
    "fragment_split",
    "mol_from_smiles",
    "molecular_formula",
    "parse_smiles",
    "random_smiles",
    "renumber_atoms",
    "ring_stats",
    "smi2mol_with_errors",
    "submolecule",
    "with_explicit_hydrogens",
]
