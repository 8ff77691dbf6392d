"""A small mutable Kekule graph for building and editing molecules.

Hydrogens are not stored: ``to_molecule`` fills every atom up to its lowest
allowed valence, the same rule the SMILES reader applies to organic-subset
atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from molopt.chem import elements
from molopt.chem.build import RawAtom, assemble
from molopt.chem.canon import canonical_smiles
from molopt.chem.molecule import Molecule


class ValenceError(ValueError):
    pass


@dataclass
class EditableMol:
    atoms: list[tuple[int, int]] = field(default_factory=list)  # (element, charge)
    bonds: dict[tuple[int, int], int] = field(default_factory=dict)

    @classmethod
    def from_molecule(cls, mol: Molecule) -> "EditableMol":
        em = cls([(a.element, a.formal_charge) for a in mol.atoms])
        for b in mol.bonds:
            em.bonds[_key(b.begin, b.end)] = b.kekule
        return em

    def copy(self) -> "EditableMol":
        return EditableMol(list(self.atoms), dict(self.bonds))

    def add_atom(self, element: int, charge: int = 0) -> int:
        self.atoms.append((element, charge))
        return len(self.atoms) - 1

    def set_element(self, idx: int, element: int) -> None:
        self.atoms[idx] = (element, self.atoms[idx][1])

    def add_bond(self, a: int, b: int, order: int = 1) -> None:
        if a == b:
            raise ValueError("self bond")
        self.bonds[_key(a, b)] = order

    def remove_bond(self, a: int, b: int) -> None:
        del self.bonds[_key(a, b)]

    def neighbors(self, idx: int) -> list[int]:
        return [b if a == idx else a for a, b in self.bonds if idx in (a, b)]

    def used_valence(self, idx: int) -> int:
        return sum(o for (a, b), o in self.bonds.items() if idx in (a, b))

    def free_valence(self, idx: int) -> int:
        z, q = self.atoms[idx]
        allowed = elements.allowed_valences(z, q)
        if allowed is None:
            return 0
        return max(allowed) - self.used_valence(idx) if self.used_valence(idx) <= max(allowed) else -1

    def hydrogens(self, idx: int) -> int:
        z, q = self.atoms[idx]
        allowed = elements.allowed_valences(z, q)
        if allowed is None:
            return 0
        used = self.used_valence(idx)
        for v in allowed:
            if v >= used:
                return v - used
        raise ValenceError(f"valence {used} not allowed for atom {idx} ({elements.symbol(z)})")

    def remove_atom(self, idx: int) -> None:
        self.atoms.pop(idx)
        fixed = {}
        for (a, b), o in self.bonds.items():
            if idx in (a, b):
                continue
            fixed[_key(a - (a > idx), b - (b > idx))] = o
        self.bonds = fixed

    def to_molecule(self) -> Molecule:
        raw = [RawAtom(element=z, charge=q, implicit_h=self.hydrogens(i)) for i, (z, q) in enumerate(self.atoms)]
        edges = list(self.bonds)
        kekule = [self.bonds[e] for e in edges]
        mol = assemble(raw, edges, kekule, "")
        return Molecule(mol.atoms, mol.bonds, mol.rings, canonical_smiles(mol), mol.neighbors)


def _key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)
