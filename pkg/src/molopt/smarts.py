"""SMARTS subset: parsing and subgraph matching.

Supported atom primitives: element symbols (aliphatic upper case, aromatic
lower case), ``#n``, ``a``, ``A``, ``*``, charge, ``H`` (total H), ``h``
(implicit H), ``D`` (heavy degree), ``X`` (total connections), ``v``
(valence), ``R``/``Rn`` (SSSR membership count), ``r``/``rn`` (SSSR ring size),
``x`` (ring bond count) and a leading isotope. Logic: ``!``, ``&``, ``,``,
``;`` and implicit conjunction. Bond primitives: ``-``, ``=``, ``#``, ``:``,
``~``, ``@`` with the same logic. Recursive SMARTS, chirality and
dot-separated components raise UnsupportedFeature.
"""

from __future__ import annotations

from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field

from molopt.chem import elements
from molopt.chem.molecule import BondOrder, Molecule


class SmartsError(ValueError):
    """Malformed SMARTS text."""


class UnsupportedFeature(SmartsError):
    """SMARTS uses a feature outside the supported subset."""

    def __init__(self, feature: str, pos: int):
        self.feature = feature
        self.pos = pos
        super().__init__(f"unsupported-feature: {feature} at position {pos}")


# Expression tree: ("prim", kind, value) | ("not", node) | ("and", nodes) | ("or", nodes)
Node = tuple


@dataclass(frozen=True)
class MatchContext:
    elem: list[int]
    arom: list[bool]
    charge: list[int]
    hcount: list[int]
    implicit: list[int]
    degree: list[int]
    conn: list[int]
    valence: tuple[int, ...]
    ringcount: tuple[int, ...]
    ringsizes: tuple[frozenset[int], ...]
    ringbonds: list[int]
    isotope: list[int | None]
    # expression -> bitmask of matching atoms, filled on demand
    masks: dict[Node, int] = field(default_factory=dict, repr=False, compare=False)

    def mask(self, expr: Node) -> int:
        m = self.masks.get(expr)
        if m is not None:
            return m
        tag = expr[0]
        if tag == "prim":
            test = _atom_prim(expr[1], expr[2])
            m = 0
            for i in range(len(self.elem)):
                if test(self, i):
                    m |= 1 << i
        elif tag == "not":
            m = ((1 << len(self.elem)) - 1) ^ self.mask(expr[1])
        elif tag == "and":
            m = (1 << len(self.elem)) - 1
            for sub in expr[1]:
                m &= self.mask(sub)
                if not m:
                    break
        else:
            m = 0
            for sub in expr[1]:
                m |= self.mask(sub)
        self.masks[expr] = m
        return m


def match_context(mol: Molecule) -> MatchContext:
    ctx = mol.__dict__.get("_smarts_ctx")
    if ctx is None:
        ringbonds = [0] * len(mol.atoms)
        # Hydrogens present as graph atoms count toward H, as in Daylight.
        hcount = [a.total_h for a in mol.atoms]
        for b in mol.bonds:
            if b.in_ring:
                ringbonds[b.begin] += 1
                ringbonds[b.end] += 1
            if mol.atoms[b.end].element == 1:
                hcount[b.begin] += 1
            if mol.atoms[b.begin].element == 1:
                hcount[b.end] += 1
        ctx = MatchContext(
            elem=[a.element for a in mol.atoms],
            arom=[a.aromatic for a in mol.atoms],
            charge=[a.formal_charge for a in mol.atoms],
            hcount=hcount,
            implicit=[a.implicit_h for a in mol.atoms],
            degree=[a.degree for a in mol.atoms],
            conn=[a.degree + a.total_h for a in mol.atoms],
            valence=mol.valence,
            ringcount=mol.ring_count,
            ringsizes=mol.ring_sizes,
            ringbonds=ringbonds,
            isotope=[a.isotope for a in mol.atoms],
        )
        mol.__dict__["_smarts_ctx"] = ctx
    return ctx


def _atom_prim(kind: str, value) -> Callable[[MatchContext, int], bool]:
    if kind == "elem":
        z, arom = value
        if arom is None:
            return lambda c, i: c.elem[i] == z
        return lambda c, i: c.elem[i] == z and c.arom[i] == arom
    if kind == "any":
        return lambda c, i: True
    if kind == "arom":
        return lambda c, i: c.arom[i] == value
    if kind == "H":
        return lambda c, i: c.hcount[i] == value
    if kind == "h":
        if value is None:
            return lambda c, i: c.implicit[i] > 0
        return lambda c, i: c.implicit[i] == value
    if kind == "D":
        return lambda c, i: c.degree[i] == value
    if kind == "X":
        return lambda c, i: c.conn[i] == value
    if kind == "v":
        return lambda c, i: c.valence[i] == value
    if kind == "R":
        if value is None:
            return lambda c, i: c.ringcount[i] > 0
        return lambda c, i: c.ringcount[i] == value
    if kind == "r":
        if value is None:
            return lambda c, i: c.ringcount[i] > 0
        if value == 0:
            return lambda c, i: c.ringcount[i] == 0
        return lambda c, i: value in c.ringsizes[i]
    if kind == "x":
        if value is None:
            return lambda c, i: c.ringbonds[i] > 0
        return lambda c, i: c.ringbonds[i] == value
    if kind == "charge":
        return lambda c, i: c.charge[i] == value
    if kind == "isotope":
        return lambda c, i: c.isotope[i] == value
    raise AssertionError(kind)


def _bond_prim(kind: str, value) -> Callable[[int, bool], bool]:
    if kind == "order":
        return lambda order, ring: order == value
    if kind == "any":
        return lambda order, ring: True
    if kind == "ring":
        return lambda order, ring: ring
    if kind == "default":
        return lambda order, ring: order == BondOrder.SINGLE or order == BondOrder.AROMATIC
    raise AssertionError(kind)


def _compile(node: Node, prim: Callable) -> Callable:
    tag = node[0]
    if tag == "prim":
        return prim(node[1], node[2])
    if tag == "not":
        inner = _compile(node[1], prim)
        return lambda *a: not inner(*a)
    parts = [_compile(n, prim) for n in node[1]]
    if tag == "and":
        return lambda *a: all(p(*a) for p in parts)
    return lambda *a: any(p(*a) for p in parts)


@dataclass(frozen=True)
class AtomPredicate:
    expr: Node
    test: Callable[[MatchContext, int], bool] = field(repr=False, compare=False)

    def matches(self, mol: Molecule, idx: int) -> bool:
        return self.test(match_context(mol), idx)


@dataclass(frozen=True)
class BondPredicate:
    expr: Node
    test: Callable[[int, bool], bool] = field(repr=False, compare=False)

    def matches(self, mol: Molecule, bond_idx: int) -> bool:
        b = mol.bonds[bond_idx]
        return self.test(b.order, b.in_ring)


@dataclass(frozen=True)
class SmartsPattern:
    text: str
    atoms: tuple[AtomPredicate, ...]
    bonds: tuple[tuple[int, int, BondPredicate], ...]

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def neighbors(self) -> list[list[tuple[int, BondPredicate]]]:
        adj: list[list[tuple[int, BondPredicate]]] = [[] for _ in self.atoms]
        for a, b, pred in self.bonds:
            adj[a].append((b, pred))
            adj[b].append((a, pred))
        return adj


@dataclass(frozen=True)
class MatchResult:
    mappings: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.mappings)


# ---------------------------------------------------------------- parsing

_ORGANIC = {"B": 5, "C": 6, "N": 7, "O": 8, "P": 15, "S": 16, "F": 9, "Cl": 17, "Br": 35, "I": 53}
_AROM_BARE = {"b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16}
_AROM_BRACKET = {"se": 34, "as": 33, "te": 52, "b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16}
_BOND_CHARS = set("-=#:~@!&,;/\\")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def peek(self, k: int = 0) -> str:
        j = self.i + k
        return self.text[j] if j < len(self.text) else ""

    def number(self) -> int | None:
        j = self.i
        while j < len(self.text) and self.text[j].isdigit():
            j += 1
        if j == self.i:
            return None
        val = int(self.text[self.i : j])
        self.i = j
        return val

    # atom expressions (inside brackets)
    def atom_expr(self, end: int) -> Node:
        node = self._low(end)
        if self.i != end:
            raise SmartsError(f"unexpected '{self.peek()}' at position {self.i}")
        return node

    def _low(self, end: int) -> Node:
        parts = [self._or(end)]
        while self.i < end and self.peek() == ";":
            self.i += 1
            parts.append(self._or(end))
        return parts[0] if len(parts) == 1 else ("and", tuple(parts))

    def _or(self, end: int) -> Node:
        parts = [self._high(end)]
        while self.i < end and self.peek() == ",":
            self.i += 1
            parts.append(self._high(end))
        return parts[0] if len(parts) == 1 else ("or", tuple(parts))

    def _high(self, end: int) -> Node:
        parts = [self._unary(end)]
        while self.i < end and self.peek() not in (",", ";"):
            if self.peek() == "&":
                self.i += 1
            parts.append(self._unary(end))
        return parts[0] if len(parts) == 1 else ("and", tuple(parts))

    def _unary(self, end: int) -> Node:
        if self.i >= end:
            raise SmartsError(f"empty atom primitive at position {self.i}")
        if self.peek() == "!":
            self.i += 1
            return ("not", self._unary(end))
        return self._primitive(end, first=False)

    def _primitive(self, end: int, first: bool) -> Node:
        t, i = self.text, self.i
        ch = t[i]
        if ch == "$":
            raise UnsupportedFeature("recursive SMARTS '$(...)'", i)
        if ch == "@":
            raise UnsupportedFeature("chirality '@'", i)
        if ch.isdigit():
            return ("prim", "isotope", self.number())
        if ch == "#":
            self.i += 1
            z = self.number()
            if z is None:
                raise SmartsError(f"'#' without atomic number at position {i}")
            return ("prim", "elem", (z, None))
        if ch == "*":
            self.i += 1
            return ("prim", "any", None)
        if ch in "+-":
            self.i += 1
            n = self.number()
            if n is None:
                n = 1
                while self.peek() == ch:
                    n += 1
                    self.i += 1
            return ("prim", "charge", n if ch == "+" else -n)
        two = t[i : i + 2]
        if ch.isupper():
            if len(two) == 2 and two[1].islower() and elements.is_element(two) and i + 1 < end:
                self.i += 2
                return ("prim", "elem", (elements.atomic_number(two), False))
            if ch in "HDXR":
                self.i += 1
                n = self.number()
                if ch == "H":
                    return ("prim", "H", 1 if n is None else n)
                if ch == "D":
                    return ("prim", "D", 1 if n is None else n)
                if ch == "X":
                    return ("prim", "X", 1 if n is None else n)
                return ("prim", "R", n)
            if ch == "A":
                self.i += 1
                return ("prim", "arom", False)
            if elements.is_element(ch):
                self.i += 1
                return ("prim", "elem", (elements.atomic_number(ch), False))
            raise SmartsError(f"unknown element '{ch}' at position {i}")
        if ch.islower():
            if two in ("se", "as", "te") and i + 1 < end:
                self.i += 2
                return ("prim", "elem", (_AROM_BRACKET[two], True))
            if ch in _AROM_BRACKET:
                self.i += 1
                return ("prim", "elem", (_AROM_BRACKET[ch], True))
            if ch == "a":
                self.i += 1
                return ("prim", "arom", True)
            if ch in "hrvx":
                self.i += 1
                n = self.number()
                if ch == "v":
                    return ("prim", "v", 1 if n is None else n)
                return ("prim", ch, n)
        raise SmartsError(f"unexpected '{ch}' at position {i}")

    # bond expressions
    def bond_expr(self) -> Node | None:
        start = self.i
        while self.peek() in _BOND_CHARS and self.peek():
            self.i += 1
        if self.i == start:
            return None
        sub = _Parser(self.text[start : self.i])
        node = sub._bond_low()
        if sub.i != len(sub.text):
            raise SmartsError(f"malformed bond expression at position {start}")
        return node

    def _bond_low(self) -> Node:
        parts = [self._bond_or()]
        while self.peek() == ";":
            self.i += 1
            parts.append(self._bond_or())
        return parts[0] if len(parts) == 1 else ("and", tuple(parts))

    def _bond_or(self) -> Node:
        parts = [self._bond_high()]
        while self.peek() == ",":
            self.i += 1
            parts.append(self._bond_high())
        return parts[0] if len(parts) == 1 else ("or", tuple(parts))

    def _bond_high(self) -> Node:
        parts = [self._bond_unary()]
        while self.peek() and self.peek() not in ",;":
            if self.peek() == "&":
                self.i += 1
            parts.append(self._bond_unary())
        return parts[0] if len(parts) == 1 else ("and", tuple(parts))

    def _bond_unary(self) -> Node:
        ch = self.peek()
        if ch == "!":
            self.i += 1
            return ("not", self._bond_unary())
        self.i += 1
        if ch in ("-", "/", "\\"):
            return ("prim", "order", BondOrder.SINGLE)
        if ch == "=":
            return ("prim", "order", BondOrder.DOUBLE)
        if ch == "#":
            return ("prim", "order", BondOrder.TRIPLE)
        if ch == ":":
            return ("prim", "order", BondOrder.AROMATIC)
        if ch == "~":
            return ("prim", "any", None)
        if ch == "@":
            return ("prim", "ring", None)
        raise SmartsError(f"bad bond primitive '{ch}'")


def parse_smarts(text: str) -> SmartsPattern:
    """Parse SMARTS text into a compiled pattern.

    Raises UnsupportedFeature for constructs outside the subset and
    SmartsError for malformed text.
    """
    if not text:
        raise SmartsError("empty SMARTS")
    p = _Parser(text)
    atoms: list[Node] = []
    bonds: list[tuple[int, int, Node]] = []
    prev: int | None = None
    stack: list[int] = []
    rings: dict[int, tuple[int, Node | None]] = {}
    n = len(text)
    while p.i < n:
        ch = p.peek()
        if ch == ".":
            raise UnsupportedFeature("disconnected pattern '.'", p.i)
        if ch == "(":
            if prev is None:
                raise SmartsError(f"branch without atom at position {p.i}")
            stack.append(prev)
            p.i += 1
            continue
        if ch == ")":
            if not stack:
                raise SmartsError(f"unmatched ')' at position {p.i}")
            prev = stack.pop()
            p.i += 1
            continue
        bond = p.bond_expr()
        ch = p.peek()
        if ch.isdigit() or ch == "%":
            if prev is None:
                raise SmartsError(f"ring closure without atom at position {p.i}")
            if ch == "%":
                digit = int(text[p.i + 1 : p.i + 3])
                p.i += 3
            else:
                digit = int(ch)
                p.i += 1
            if digit in rings:
                other, b0 = rings.pop(digit)
                bonds.append((other, prev, bond or b0 or ("prim", "default", None)))
            else:
                rings[digit] = (prev, bond)
            continue
        if not ch:
            raise SmartsError("dangling bond at end of SMARTS")
        if ch == "[":
            end = text.find("]", p.i)
            if end == -1:
                raise SmartsError(f"unmatched '[' at position {p.i}")
            p.i += 1
            if text[p.i : end] in ("H", "H+", "2H"):
                node: Node = ("prim", "elem", (1, None))
                p.i = end
            else:
                node = p.atom_expr(end)
            p.i = end + 1
        else:
            two = text[p.i : p.i + 2]
            if two in ("Cl", "Br"):
                node = ("prim", "elem", (_ORGANIC[two], False))
                p.i += 2
            elif ch in _ORGANIC:
                node = ("prim", "elem", (_ORGANIC[ch], False))
                p.i += 1
            elif ch in _AROM_BARE:
                node = ("prim", "elem", (_AROM_BARE[ch], True))
                p.i += 1
            elif ch == "*":
                node = ("prim", "any", None)
                p.i += 1
            elif ch == "a":
                node = ("prim", "arom", True)
                p.i += 1
            elif ch == "A":
                node = ("prim", "arom", False)
                p.i += 1
            else:
                raise SmartsError(f"unexpected '{ch}' at position {p.i}")
        idx = len(atoms)
        atoms.append(node)
        if prev is not None:
            bonds.append((prev, idx, bond or ("prim", "default", None)))
        elif bond is not None:
            raise SmartsError("bond without preceding atom")
        prev = idx
    if stack:
        raise SmartsError("unclosed branch '('")
    if rings:
        raise SmartsError(f"unclosed ring closure {min(rings)}")
    if not atoms:
        raise SmartsError("no atoms in SMARTS")
    return SmartsPattern(
        text=text,
        atoms=tuple(AtomPredicate(a, _compile(a, _atom_prim)) for a in atoms),
        bonds=tuple((a, b, BondPredicate(e, _compile(e, _bond_prim))) for a, b, e in bonds),
    )


# ---------------------------------------------------------------- matching


def _plan(pattern: SmartsPattern, cand_sizes: Sequence[int], root: int | None):
    """Atom visiting order: most constrained first, then grow along bonds."""
    n = pattern.num_atoms
    adj = pattern.neighbors()
    order: list[int] = []
    placed = [False] * n
    while len(order) < n:
        frontier = [p for p in range(n) if not placed[p] and any(placed[q] for q, _ in adj[p])]
        if not order and root is not None:
            nxt = root
        elif frontier:
            nxt = min(frontier, key=lambda p: (cand_sizes[p], -sum(placed[q] for q, _ in adj[p]), p))
        else:
            nxt = min((p for p in range(n) if not placed[p]), key=lambda p: (cand_sizes[p], p))
        placed[nxt] = True
        order.append(nxt)
    pos = {p: k for k, p in enumerate(order)}
    steps = []
    for k, p in enumerate(order):
        back = [(q, pred) for q, pred in adj[p] if pos[q] < k]
        back.sort(key=lambda t: pos[t[0]])
        steps.append((p, back))
    return steps


def _iter_matches(
    pattern: SmartsPattern, mol: Molecule, root: int | None = None, root_target: int | None = None
) -> Iterator[tuple[int, ...]]:
    ctx = match_context(mol)
    n_t = len(mol.atoms)
    if pattern.num_atoms > n_t:
        return
    masks = []
    for ap in pattern.atoms:
        m = ctx.mask(ap.expr)
        if not m:
            return
        masks.append(m)
    if root is not None:
        if not masks[root] >> root_target & 1:
            return
        sizes = [0] * len(masks)
    else:
        sizes = [m.bit_count() for m in masks]

    def check(p: int, t: int) -> bool:
        return masks[p] >> t & 1

    plans = pattern.__dict__.setdefault("_plans", {})
    key = (root, tuple(sizes))
    steps = plans.get(key)
    if steps is None:
        if len(plans) > 512:
            plans.clear()
        steps = plans[key] = _plan(pattern, sizes, root)
    bonds = mol.bonds
    bond_index = mol.bond_index
    nbrs = mol.neighbors
    mapping = [-1] * pattern.num_atoms
    used = [False] * n_t
    depth_max = len(steps)

    def extend(k: int) -> Iterator[None]:
        if k == depth_max:
            yield None
            return
        p, back = steps[k]
        if not back:
            if k == 0 and root is not None:
                pool = [root_target]
            else:
                pool = [i for i in range(n_t) if check(p, i)]
        else:
            q0, pred0 = back[0]
            pool = []
            for t, bidx in nbrs[mapping[q0]]:
                if not used[t] and check(p, t):
                    b = bonds[bidx]
                    if pred0.test(b.order, b.in_ring):
                        pool.append(t)
        for t in pool:
            if used[t]:
                continue
            good = True
            for q, pred in back[1:]:
                bidx = bond_index.get((mapping[q], t))
                if bidx is None:
                    good = False
                    break
                b = bonds[bidx]
                if not pred.test(b.order, b.in_ring):
                    good = False
                    break
            if not good:
                continue
            mapping[p] = t
            used[t] = True
            yield from extend(k + 1)
            used[t] = False
            mapping[p] = -1

    for _ in extend(0):
        yield tuple(mapping)


def find_matches(pattern: SmartsPattern, mol: Molecule, unique_sets: bool = True, limit: int | None = None) -> MatchResult:
    """All mappings (pattern atom -> target atom); with unique_sets, one per atom set."""
    out: list[tuple[int, ...]] = []
    seen: set[frozenset[int]] = set()
    for m in _iter_matches(pattern, mol):
        if unique_sets:
            key = frozenset(m)
            if key in seen:
                continue
            seen.add(key)
        out.append(m)
        if limit is not None and len(out) >= limit:
            break
    return MatchResult(tuple(out))


def count_matches(pattern: SmartsPattern, mol: Molecule, unique_sets: bool = True) -> int:
    return len(find_matches(pattern, mol, unique_sets))


def has_match(pattern: SmartsPattern, mol: Molecule) -> bool:
    for _ in _iter_matches(pattern, mol):
        return True
    return False


def matches_at(pattern: SmartsPattern, mol: Molecule, atom: int) -> bool:
    """True when some match maps pattern atom 0 onto ``atom``."""
    for _ in _iter_matches(pattern, mol, root=0, root_target=atom):
        return True
    return False
