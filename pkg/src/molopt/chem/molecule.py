"""Immutable hydrogen-suppressed molecular graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property

from molopt.chem.elements import symbol


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4


class SmilesError(ValueError):
    """Raised by strict parsing entry points; carries the diagnostics."""

    def __init__(self, diagnostics: "ParseDiagnostics"):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics.messages))


@dataclass(frozen=True, slots=True)
class ParseDiagnostics:
    status: str
    messages: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == "valid"


@dataclass(frozen=True, slots=True)
class Atom:
    element: int
    formal_charge: int = 0
    explicit_h: int = 0
    implicit_h: int = 0
    aromatic: bool = False
    isotope: int | None = None
    in_ring: bool = False
    degree: int = 0
    chirality: str | None = None

    @property
    def total_h(self) -> int:
        return self.explicit_h + self.implicit_h

    @property
    def symbol(self) -> str:
        return symbol(self.element)


@dataclass(frozen=True, slots=True)
class Bond:
    begin: int
    end: int
    order: BondOrder
    # Order in the Kekule form; equal to ``order`` for non-aromatic bonds.
    kekule: int = 1
    in_ring: bool = False
    stereo: str | None = None

    def other(self, idx: int) -> int:
        return self.end if idx == self.begin else self.begin


@dataclass(frozen=True, slots=True)
class RingInfo:
    rings: tuple[tuple[int, ...], ...] = ()
    ring_bonds: tuple[tuple[int, ...], ...] = ()
    max_size: int = 0
    spiro_atoms: tuple[int, ...] = ()

    def atom_ring_count(self, n_atoms: int) -> list[int]:
        counts = [0] * n_atoms
        for ring in self.rings:
            for a in ring:
                counts[a] += 1
        return counts


@dataclass(frozen=True)
class Molecule:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    rings: RingInfo
    source: str = ""
    # neighbours[i] = ((neighbour index, bond index), ...)
    neighbors: tuple[tuple[tuple[int, int], ...], ...] = field(default=(), repr=False)

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @cached_property
    def bond_index(self) -> dict[tuple[int, int], int]:
        table: dict[tuple[int, int], int] = {}
        for i, b in enumerate(self.bonds):
            table[(b.begin, b.end)] = i
            table[(b.end, b.begin)] = i
        return table

    def bond_between(self, a: int, b: int) -> Bond | None:
        idx = self.bond_index.get((a, b))
        return None if idx is None else self.bonds[idx]

    @cached_property
    def ring_count(self) -> tuple[int, ...]:
        return tuple(self.rings.atom_ring_count(len(self.atoms)))

    @cached_property
    def ring_sizes(self) -> tuple[frozenset[int], ...]:
        sizes: list[set[int]] = [set() for _ in self.atoms]
        for ring in self.rings.rings:
            for a in ring:
                sizes[a].add(len(ring))
        return tuple(frozenset(s) for s in sizes)

    @cached_property
    def valence(self) -> tuple[int, ...]:
        """Total valence per atom: Kekule bond-order sum plus hydrogens."""
        val = [a.total_h for a in self.atoms]
        for b in self.bonds:
            val[b.begin] += b.kekule
            val[b.end] += b.kekule
        return tuple(val)

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            seen[start] = True
            stack, comp = [start], []
            while stack:
                a = stack.pop()
                comp.append(a)
                for n, _ in self.neighbors[a]:
                    if not seen[n]:
                        seen[n] = True
                        stack.append(n)
            comps.append(tuple(sorted(comp)))
        return tuple(comps)

    def __repr__(self) -> str:
        return f"Molecule({self.source!r}, atoms={len(self.atoms)}, bonds={len(self.bonds)})"
