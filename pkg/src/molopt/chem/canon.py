"""Canonical atom ranking and SMILES writing.

Ranking is Morgan-style refinement of atom invariants (element, isotope,
charge, heavy degree, hydrogen count, ring flag, aromatic flag) by sorted
neighbour ranks and bond types. Remaining ties are broken by individualizing
the lowest-indexed atom of the smallest tied class and refining again. The
SMILES writer is a depth-first traversal that visits neighbours in rank
order, so any ranking gives a valid SMILES and the canonical ranking gives
the canonical one. Stereo annotations are not written.
"""

from __future__ import annotations

import random
import sys
from collections.abc import Sequence

from molopt.chem import elements
from molopt.chem.molecule import BondOrder, Molecule

_BARE_AROMATIC = frozenset({"b", "c", "n", "o", "p", "s"})


def _dense(keys: Sequence) -> list[int]:
    table = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [table[k] for k in keys]


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    n_classes = len(set(ranks))
    while True:
        keys = [
            (ranks[i], tuple(sorted((int(mol.bonds[b].order), ranks[nb]) for nb, b in mol.neighbors[i])))
            for i in range(len(ranks))
        ]
        new = _dense(keys)
        count = len(set(new))
        ranks = new
        if count == n_classes:
            return ranks
        n_classes = count


def symmetry_classes(mol: Molecule) -> list[int]:
    """Refined invariant class per atom, before any tie-breaking."""
    inv = [
        (a.element, a.isotope or 0, a.formal_charge, a.degree, a.total_h, a.in_ring, a.aromatic)
        for a in mol.atoms
    ]
    return _refine(mol, _dense(inv))


def canonical_ranks(mol: Molecule) -> list[int]:
    """A rank per atom, all distinct, invariant under atom renumbering."""
    ranks = symmetry_classes(mol)
    n = len(ranks)
    while len(set(ranks)) < n:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        chosen = min(i for i in range(n) if ranks[i] == tied)
        ranks = _refine(mol, _dense([(ranks[i], 0 if i == chosen else 1) for i in range(n)]))
    return ranks


def implied_hydrogens(mol: Molecule, idx: int) -> int | None:
    """H count a bare (unbracketed) atom would receive when re-read, or None if it cannot be bare."""
    atom = mol.atoms[idx]
    sym = elements.symbol(atom.element)
    if atom.aromatic:
        if sym.lower() not in _BARE_AROMATIC:
            return None
    elif sym not in elements.ORGANIC_SUBSET:
        return None
    allowed = elements.allowed_valences(atom.element, 0)
    used = 0
    for _, b in mol.neighbors[idx]:
        bond = mol.bonds[b]
        used += 1 if bond.order == BondOrder.AROMATIC else bond.kekule
    v = next((x for x in allowed if x >= used), None)
    if v is None:
        return None
    free = v - used
    if atom.aromatic and any(mol.bonds[b].order == BondOrder.AROMATIC for _, b in mol.neighbors[idx]):
        return free - 1 if free >= 1 else 0
    return free


def atom_token(mol: Molecule, idx: int) -> str:
    atom = mol.atoms[idx]
    sym = elements.symbol(atom.element)
    if atom.aromatic:
        sym = sym.lower()
    if atom.element == 0:
        sym = "*"
    bare = (
        atom.formal_charge == 0
        and atom.isotope is None
        and atom.element not in (0, 1)
        and implied_hydrogens(mol, idx) == atom.total_h
    )
    if atom.element == 0 and atom.formal_charge == 0 and atom.isotope is None and atom.total_h == 0:
        return "*"
    if bare:
        return sym
    out = ["["]
    if atom.isotope is not None:
        out.append(str(atom.isotope))
    out.append(sym)
    h = atom.total_h
    if h:
        out.append("H" if h == 1 else f"H{h}")
    q = atom.formal_charge
    if q:
        out.append(("+" if q > 0 else "-") + (str(abs(q)) if abs(q) > 1 else ""))
    out.append("]")
    return "".join(out)


def _bond_token(mol: Molecule, b: int) -> str:
    bond = mol.bonds[b]
    if bond.order == BondOrder.AROMATIC:
        return ""
    if bond.order == BondOrder.SINGLE:
        both = mol.atoms[bond.begin].aromatic and mol.atoms[bond.end].aromatic
        return "-" if both else ""
    return "=" if bond.order == BondOrder.DOUBLE else "#"


def write_smiles(mol: Molecule, ranks: Sequence[int]) -> str:
    """SMILES for ``mol`` with traversal order driven by ``ranks`` (lower first)."""
    n = len(mol.atoms)
    if n == 0:
        return ""
    if n > 500:
        sys.setrecursionlimit(max(sys.getrecursionlimit(), 3 * n + 100))
    visited = [False] * n
    order = [0] * n
    children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    closures: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    tree_bond = [False] * len(mol.bonds)
    closure_seen: set[int] = set()
    counter = 0

    def dfs(u: int, via: int) -> None:
        nonlocal counter
        visited[u] = True
        order[u] = counter
        counter += 1
        for v, b in sorted(mol.neighbors[u], key=lambda t: ranks[t[0]]):
            if b == via:
                continue
            if not visited[v]:
                tree_bond[b] = True
                children[u].append((v, b))
                dfs(v, b)
            elif not tree_bond[b] and b not in closure_seen:
                closure_seen.add(b)
                closures[u].append((v, b))
                closures[v].append((u, b))

    roots = []
    for comp in sorted(mol.components, key=lambda c: min(ranks[a] for a in c)):
        root = min(comp, key=lambda a: ranks[a])
        roots.append(root)
        dfs(root, -1)

    digits: dict[int, int] = {}
    in_use: set[int] = set()
    parts: list[str] = []

    def emit(u: int) -> None:
        parts.append(atom_token(mol, u))
        closing = [(v, b) for v, b in closures[u] if order[v] < order[u]]
        opening = [(v, b) for v, b in closures[u] if order[v] > order[u]]
        freed = []
        for v, b in sorted(closing, key=lambda t: order[t[0]]):
            d = digits.pop(b)
            parts.append(_digit(d))
            freed.append(d)
        for v, b in sorted(opening, key=lambda t: ranks[t[0]]):
            d = 1
            while d in in_use:
                d += 1
            in_use.add(d)
            digits[b] = d
            parts.append(_bond_token(mol, b) + _digit(d))
        in_use.difference_update(freed)
        kids = children[u]
        for k, (v, b) in enumerate(kids):
            last = k == len(kids) - 1
            if not last:
                parts.append("(")
            parts.append(_bond_token(mol, b))
            emit(v)
            if not last:
                parts.append(")")

    for k, root in enumerate(roots):
        if k:
            parts.append(".")
        emit(root)
    return "".join(parts)


def _digit(d: int) -> str:
    return str(d) if d < 10 else f"%{d:02d}"


def canonical_smiles(mol: Molecule) -> str:
    """Canonical, stereo-free SMILES; the engine-wide key for caches and dedup."""
    return write_smiles(mol, canonical_ranks(mol))


def random_smiles(mol: Molecule, rng: random.Random) -> str:
    """A valid but non-canonical SMILES from a random traversal order."""
    ranks = list(range(len(mol.atoms)))
    rng.shuffle(ranks)
    return write_smiles(mol, ranks)
