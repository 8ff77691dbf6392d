"""Turn a Kekule graph with hydrogen counts into an annotated Molecule."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from molopt.chem.aromaticity import perceive_aromaticity
from molopt.chem.molecule import Atom, Bond, BondOrder, Molecule, RingInfo
from molopt.chem.rings import perceive_rings


@dataclass(slots=True)
class RawAtom:
    element: int
    charge: int = 0
    explicit_h: int = 0
    implicit_h: int = 0
    isotope: int | None = None
    chirality: str | None = None


def assemble(
    raw: Sequence[RawAtom],
    edges: Sequence[tuple[int, int]],
    kekule: Sequence[int],
    source: str = "",
    stereo: Sequence[str | None] | None = None,
) -> Molecule:
    n = len(raw)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for k, (u, v) in enumerate(edges):
        adj[u].append((v, k))
        adj[v].append((u, k))
    ring_flags, rings, ring_bonds, spiro = perceive_rings(n, edges, adj)
    total_h = [a.explicit_h + a.implicit_h for a in raw]
    arom_atoms, arom_bonds = perceive_aromaticity(
        [a.element for a in raw],
        [a.charge for a in raw],
        total_h,
        edges,
        kekule,
        ring_flags,
        rings,
        ring_bonds,
    )
    atom_in_ring = [False] * n
    for r in rings:
        for a in r:
            atom_in_ring[a] = True
    atoms = tuple(
        Atom(
            element=a.element,
            formal_charge=a.charge,
            explicit_h=a.explicit_h,
            implicit_h=a.implicit_h,
            aromatic=arom_atoms[i],
            isotope=a.isotope,
            in_ring=atom_in_ring[i],
            degree=len(adj[i]),
            chirality=a.chirality,
        )
        for i, a in enumerate(raw)
    )
    bonds = tuple(
        Bond(
            begin=u,
            end=v,
            order=BondOrder.AROMATIC if arom_bonds[k] else BondOrder(kekule[k]),
            kekule=kekule[k],
            in_ring=ring_flags[k],
            stereo=stereo[k] if stereo else None,
        )
        for k, (u, v) in enumerate(edges)
    )
    info = RingInfo(
        rings=rings,
        ring_bonds=ring_bonds,
        max_size=max((len(r) for r in rings), default=0),
        spiro_atoms=spiro,
    )
    neighbors = tuple(tuple(x) for x in adj)
    return Molecule(atoms=atoms, bonds=bonds, rings=info, source=source, neighbors=neighbors)
