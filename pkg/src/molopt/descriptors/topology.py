"""Path-based topological indices: Kier-Hall connectivity and Kier shape."""

from __future__ import annotations

import math

from molopt.chem import elements
from molopt.chem.molecule import Molecule


class UndefinedValueError(ValueError):
    """A descriptor is mathematically undefined for this molecule."""


def paths(mol: Molecule, length: int) -> list[tuple[int, ...]]:
    """All simple paths with ``length`` bonds, each listed once.

    A path is reported in the direction whose first atom index is smaller
    than its last; length 0 gives the single atoms.
    """
    if length == 0:
        return [(i,) for i in range(len(mol.atoms))]
    found: list[tuple[int, ...]] = []
    nbrs = [[nb for nb, _ in row] for row in mol.neighbors]

    def grow(path: list[int], seen: set[int]) -> None:
        if len(path) == length + 1:
            if path[0] < path[-1]:
                found.append(tuple(path))
            return
        for nb in nbrs[path[-1]]:
            if nb not in seen:
                path.append(nb)
                seen.add(nb)
                grow(path, seen)
                seen.discard(nb)
                path.pop()

    for start in range(len(mol.atoms)):
        grow([start], {start})
    return found


def delta(mol: Molecule, idx: int, valence: bool) -> float:
    """Kier-Hall atom delta.

    Simple delta is the heavy-atom degree. The valence delta is
    (Zv - h) / (Z - Zv - 1), with Zv the valence electron count corrected by
    the formal charge; for second-row atoms the denominator is 1.
    """
    atom = mol.atoms[idx]
    if not valence:
        return float(atom.degree)
    z = atom.element
    zv = elements.outer_electrons(z) - atom.formal_charge
    denom = z - zv - 1
    if denom <= 0:
        denom = 1
    return (zv - atom.total_h) / denom


def chi_index(mol: Molecule, order: int, valence: bool = False) -> float:
    """Connectivity index of the given path order (0-4).

    Atoms with delta <= 0 (isolated atoms, bare ions) make every term they
    appear in contribute 0.
    """
    if not 0 <= order <= 4:
        raise ValueError("chi order must be between 0 and 4")
    d = [delta(mol, i, valence) for i in range(len(mol.atoms))]
    total = 0.0
    for path in paths(mol, order):
        prod = 1.0
        for a in path:
            if d[a] <= 0:
                prod = 0.0
                break
            prod *= d[a]
        if prod > 0:
            total += 1.0 / math.sqrt(prod)
    return total


def kappa_index(mol: Molecule, order: int) -> float:
    """Kier shape index of order 1-3 without the heavy-atom alpha correction."""
    if order not in (1, 2, 3):
        raise ValueError("kappa order must be 1, 2 or 3")
    a = len(mol.atoms)
    p = len(paths(mol, order))
    if p == 0:
        raise UndefinedValueError(f"kappa{order} undefined: no paths of length {order}")
    if order == 1:
        return a * (a - 1) ** 2 / p**2
    if order == 2:
        return (a - 1) * (a - 2) ** 2 / p**2
    if a % 2:
        return (a - 1) * (a - 3) ** 2 / p**2
    return (a - 3) * (a - 2) ** 2 / p**2


def phi(mol: Molecule) -> float:
    """Kier flexibility index kappa1 * kappa2 / heavy atoms."""
    return kappa_index(mol, 1) * kappa_index(mol, 2) / len(mol.atoms)
