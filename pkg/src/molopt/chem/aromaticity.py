"""Kekulization of aromatic input and Huckel aromaticity perception."""

from __future__ import annotations

from collections.abc import Sequence
from itertools import combinations

# Elements that withdraw the pi pair of an exocyclic double bond.
_ELECTRONEGATIVE = frozenset({7, 8, 9, 15, 16, 17, 34, 35, 53})


def kekule_matching(nodes: Sequence[int], edges: Sequence[tuple[int, int, int]]) -> dict[int, int] | None:
    """Perfect matching of ``nodes`` using ``edges`` (atom, atom, bond index).

    Returns bond index per matched atom, or None when no perfect matching
    exists. Backtracking with most-constrained-first choice; forced atoms
    (one option left) are resolved before any branching.
    """
    want = set(nodes)
    if not want:
        return {}
    options: dict[int, list[tuple[int, int]]] = {a: [] for a in want}
    for u, v, b in edges:
        if u in want and v in want:
            options[u].append((v, b))
            options[v].append((u, b))
    matched: dict[int, int] = {}

    def solve(free: set[int]) -> bool:
        if not free:
            return True
        best, best_opts = None, None
        for a in sorted(free):
            opts = [(v, b) for v, b in options[a] if v in free]
            if not opts:
                return False
            if best_opts is None or len(opts) < len(best_opts):
                best, best_opts = a, opts
                if len(opts) == 1:
                    break
        for v, b in best_opts:
            matched[best] = matched[v] = b
            if solve(free - {best, v}):
                return True
            del matched[best], matched[v]
        return False

    return matched if solve(set(want)) else None


def _donation(z: int, charge: int, total_h: int, nbr_bonds: list[tuple[int, int, bool]], elements: Sequence[int]) -> int | None:
    """Pi electrons an atom contributes to a ring, None if it cannot take part.

    nbr_bonds: (neighbour, kekule order, bond is a ring bond).
    """
    if any(order == 3 for _, order, _ in nbr_bonds):
        return None
    doubles = [(n, ring) for n, order, ring in nbr_bonds if order == 2]
    if len(doubles) > 1:
        return None
    if len(nbr_bonds) + total_h > 3:
        return None
    if doubles:
        nbr, ring = doubles[0]
        if ring:
            return 1
        # Exocyclic double bonds only on carbon: C=X with X electronegative
        # leaves an empty p orbital, exocyclic C=C keeps one electron.
        if z != 6:
            return None
        return 0 if elements[nbr] in _ELECTRONEGATIVE else 1
    if z == 6:
        return {-1: 2, 1: 0}.get(charge)
    if z == 5:
        return 0 if charge == 0 else None
    if z in (7, 15, 33):
        if charge == -1:
            return 2
        return 2 if charge == 0 and len(nbr_bonds) + total_h == 3 else None
    if z in (8, 16, 34, 52):
        return 2 if charge == 0 else None
    return None


def perceive_aromaticity(
    elements: Sequence[int],
    charges: Sequence[int],
    total_h: Sequence[int],
    edges: Sequence[tuple[int, int]],
    kekule: Sequence[int],
    ring_bond: Sequence[bool],
    rings: Sequence[Sequence[int]],
    ring_bonds: Sequence[Sequence[int]],
) -> tuple[list[bool], list[bool]]:
    """Mark atoms and bonds aromatic using a 4n+2 count on SSSR rings.

    Fused pairs and triples of rings are checked as combined circuits so that
    systems like azulene are recognised.
    """
    n = len(elements)
    nbrs: list[list[tuple[int, int, bool]]] = [[] for _ in range(n)]
    for b, (u, v) in enumerate(edges):
        nbrs[u].append((v, kekule[b], ring_bond[b]))
        nbrs[v].append((u, kekule[b], ring_bond[b]))
    in_ring = [False] * n
    for r in rings:
        for a in r:
            in_ring[a] = True
    don = [
        _donation(elements[i], charges[i], total_h[i], nbrs[i], elements) if in_ring[i] else None
        for i in range(n)
    ]
    arom_atoms = [False] * n
    arom_bonds = [False] * len(edges)

    def huckel(atoms: set[int]) -> bool:
        total = 0
        for a in atoms:
            if don[a] is None:
                return False
            total += don[a]
        return total % 4 == 2

    def mark(ring_ids: Sequence[int]) -> None:
        for rid in ring_ids:
            for a in rings[rid]:
                arom_atoms[a] = True
            for b in ring_bonds[rid]:
                arom_bonds[b] = True

    done = [False] * len(rings)
    for rid, ring in enumerate(rings):
        if huckel(set(ring)):
            mark([rid])
            done[rid] = True

    # Fused combinations: rings sharing at least one bond.
    bond_sets = [set(rb) for rb in ring_bonds]
    candidates = [rid for rid in range(len(rings)) if all(don[a] is not None for a in rings[rid])]
    if len(candidates) > 1 and not all(done[r] for r in candidates):
        fused = {r: {s for s in candidates if s != r and bond_sets[r] & bond_sets[s]} for r in candidates}
        for size in (2, 3):
            for combo in combinations(candidates, size):
                if all(done[r] for r in combo):
                    continue
                if not _connected(combo, fused):
                    continue
                atoms = set().union(*(rings[r] for r in combo))
                if huckel(atoms):
                    mark(combo)
                    for r in combo:
                        done[r] = True
    return arom_atoms, arom_bonds


def _connected(combo: Sequence[int], fused: dict[int, set[int]]) -> bool:
    members = set(combo)
    seen = {combo[0]}
    stack = [combo[0]]
    while stack:
        r = stack.pop()
        for s in fused[r] & members:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen == members
