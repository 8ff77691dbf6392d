"""Ring perception: ring bonds, smallest set of smallest rings, spiro atoms."""

from __future__ import annotations

from collections import deque
from collections.abc import Sequence

# adjacency[i] = [(neighbour, bond index), ...]
Adjacency = Sequence[Sequence[tuple[int, int]]]


def ring_bond_flags(n_atoms: int, edges: Sequence[tuple[int, int]], adj: Adjacency) -> list[bool]:
    """A bond is a ring bond iff it is not a bridge (iterative Tarjan lowlink)."""
    disc = [-1] * n_atoms
    low = [0] * n_atoms
    flags = [True] * len(edges)
    timer = 0
    for root in range(n_atoms):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            node, via, it = stack[-1]
            advanced = False
            for nbr, bidx in it:
                if bidx == via:
                    continue
                if disc[nbr] == -1:
                    disc[nbr] = low[nbr] = timer
                    timer += 1
                    stack.append((nbr, bidx, iter(adj[nbr])))
                    advanced = True
                    break
                low[node] = min(low[node], disc[nbr])
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[node])
                if low[node] > disc[parent]:
                    flags[via] = False
    return flags


def _shortest_path(adj: Adjacency, src: int, dst: int, banned_bond: int, ring: list[bool]) -> list[int] | None:
    """Bond indices along a shortest src->dst path over ring bonds, avoiding one bond."""
    prev: dict[int, tuple[int, int]] = {src: (-1, -1)}
    queue = deque([src])
    while queue:
        node = queue.popleft()
        if node == dst:
            break
        for nbr, bidx in adj[node]:
            if bidx == banned_bond or not ring[bidx] or nbr in prev:
                continue
            prev[nbr] = (node, bidx)
            queue.append(nbr)
    if dst not in prev:
        return None
    path = []
    node = dst
    while node != src:
        node, bidx = prev[node]
        path.append(bidx)
    return path


def _horton_candidates(n_atoms: int, edges: Sequence[tuple[int, int]], adj: Adjacency, ring: list[bool]) -> list[frozenset[int]]:
    out: list[frozenset[int]] = []
    for root in range(n_atoms):
        if not any(ring[b] for _, b in adj[root]):
            continue
        parent: dict[int, tuple[int, int]] = {root: (-1, -1)}
        depth = {root: 0}
        queue = deque([root])
        while queue:
            node = queue.popleft()
            for nbr, bidx in adj[node]:
                if ring[bidx] and nbr not in parent:
                    parent[nbr] = (node, bidx)
                    depth[nbr] = depth[node] + 1
                    queue.append(nbr)

        def path_to_root(x: int) -> list[int]:
            bonds = []
            while x != root:
                x, b = parent[x]
                bonds.append(b)
            return bonds

        for bidx, (a, b) in enumerate(edges):
            if not ring[bidx] or a not in parent or b not in parent:
                continue
            if parent[a][1] == bidx or parent[b][1] == bidx:
                continue
            pa, pb = path_to_root(a), path_to_root(b)
            if set(pa) & set(pb):
                continue
            out.append(frozenset(pa + pb + [bidx]))
    return out


def _order_cycle(bond_set: frozenset[int], edges: Sequence[tuple[int, int]]) -> tuple[int, ...] | None:
    """Atom sequence around a cycle given as a bond set; None if not a simple cycle."""
    nbrs: dict[int, list[int]] = {}
    for b in bond_set:
        u, v = edges[b]
        nbrs.setdefault(u, []).append(v)
        nbrs.setdefault(v, []).append(u)
    if any(len(x) != 2 for x in nbrs.values()):
        return None
    start = min(nbrs)
    cycle = [start]
    prev, cur = start, min(nbrs[start])
    while cur != start:
        cycle.append(cur)
        a, b = nbrs[cur]
        prev, cur = cur, (b if a == prev else a)
    if len(cycle) != len(bond_set):
        return None
    return tuple(cycle)


def _select_basis(cands: list[frozenset[int]], rank: int, chosen: list[tuple[frozenset[int], int]]) -> None:
    """Greedy GF(2) independence selection; mutates ``chosen`` (set, reduced vector)."""
    pivots: dict[int, int] = {}
    for _, vec in chosen:
        pivots[vec.bit_length() - 1] = vec
    seen = {c for c, _ in chosen}
    for cand in cands:
        if len(chosen) >= rank:
            return
        if cand in seen:
            continue
        seen.add(cand)
        vec = 0
        for b in cand:
            vec |= 1 << b
        while vec:
            top = vec.bit_length() - 1
            if top not in pivots:
                break
            vec ^= pivots[top]
        if vec:
            pivots[vec.bit_length() - 1] = vec
            chosen.append((cand, vec))


def _cand_key(c: frozenset[int]) -> tuple[int, tuple[int, ...]]:
    return (len(c), tuple(sorted(c)))


def find_sssr(n_atoms: int, edges: Sequence[tuple[int, int]], adj: Adjacency, ring: list[bool]) -> list[frozenset[int]]:
    """Smallest set of smallest rings, as bond-index sets.

    The number of rings returned always equals the circuit rank. Candidates
    are the shortest cycle through each ring bond; when those are not enough
    to span the cycle space, Horton candidates are added.
    """
    n_ring_bonds = sum(ring)
    if n_ring_bonds == 0:
        return []
    ring_atoms = {a for b, (u, v) in enumerate(edges) if ring[b] for a in (u, v)}
    # Components of the ring-bond subgraph.
    comp = {}
    for a in ring_atoms:
        if a in comp:
            continue
        comp[a] = a
        stack = [a]
        while stack:
            x = stack.pop()
            for y, b in adj[x]:
                if ring[b] and y not in comp:
                    comp[y] = a
                    stack.append(y)
    rank = n_ring_bonds - len(ring_atoms) + len(set(comp.values()))

    cands: set[frozenset[int]] = set()
    for bidx, (u, v) in enumerate(edges):
        if not ring[bidx]:
            continue
        path = _shortest_path(adj, u, v, bidx, ring)
        if path is not None:
            cands.add(frozenset(path + [bidx]))
    chosen: list[tuple[frozenset[int], int]] = []
    _select_basis(sorted(cands, key=_cand_key), rank, chosen)
    if len(chosen) < rank:
        horton = set(_horton_candidates(n_atoms, edges, adj, ring)) | cands
        chosen = []
        _select_basis(sorted(horton, key=_cand_key), rank, chosen)
    return [c for c, _ in chosen]


def perceive_rings(n_atoms: int, edges: Sequence[tuple[int, int]], adj: Adjacency):
    """Return (ring bond flags, rings as atom cycles, rings as bond tuples, spiro atoms)."""
    ring = ring_bond_flags(n_atoms, edges, adj)
    sssr = find_sssr(n_atoms, edges, adj, ring)
    atom_rings = []
    bond_rings = []
    for bonds in sssr:
        cycle = _order_cycle(bonds, edges)
        if cycle is None:  # cannot happen for shortest cycles; keep the guard cheap
            continue
        atom_rings.append(cycle)
        bond_rings.append(tuple(sorted(bonds)))
    order = sorted(range(len(atom_rings)), key=lambda i: (len(atom_rings[i]), sorted(atom_rings[i])))
    atom_rings = [atom_rings[i] for i in order]
    bond_rings = [bond_rings[i] for i in order]
    spiro = spiro_atoms(atom_rings)
    return ring, tuple(atom_rings), tuple(bond_rings), spiro


def spiro_atoms(rings: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Atoms where two rings meet sharing only that atom."""
    found = set()
    sets = [set(r) for r in rings]
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            shared = sets[i] & sets[j]
            if len(shared) == 1:
                found |= shared
    return tuple(sorted(found))
