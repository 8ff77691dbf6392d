"""SMILES reader: organic subset, bracket atoms, branches, ring closures.

Parsing never raises on bad input. ``parse_smiles`` returns either a
Molecule or ParseDiagnostics whose messages carry a character position.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from molopt.chem import elements
from molopt.chem.aromaticity import kekule_matching
from molopt.chem.build import RawAtom, assemble
from molopt.chem.molecule import Molecule, ParseDiagnostics, SmilesError
from molopt.chem.rings import ring_bond_flags

_BOND_SYMBOLS = {"-": 1, "=": 2, "#": 3, ":": 4, "/": 1, "\\": 1, "$": 5}
_ORGANIC_TWO = {"Cl", "Br"}
_ORGANIC_ONE = set("BCNOPSFI")
_AROMATIC_ONE = set("bcnops")


class _Fail(Exception):
    def __init__(self, pos: int, msg: str):
        self.pos = pos
        self.msg = msg


@dataclass
class _Atom:
    z: int
    aromatic: bool
    pos: int
    bracket: bool = False
    isotope: int | None = None
    charge: int = 0
    hcount: int = 0
    chirality: str | None = None


@dataclass
class _Bond:
    a: int
    b: int
    symbol: str | None
    pos: int


@dataclass
class _State:
    atoms: list[_Atom] = field(default_factory=list)
    bonds: list[_Bond] = field(default_factory=list)


def _read_bracket(text: str, i: int) -> tuple[_Atom, int]:
    """Parse ``[...]`` starting at the opening bracket; return atom and next index."""
    start = i
    i += 1
    n = len(text)
    end = text.find("]", i)
    if end == -1:
        raise _Fail(start, "unmatched '[' (bracket atom not closed)")
    j = i
    while j < end and text[j].isdigit():
        j += 1
    isotope = int(text[i:j]) if j > i else None
    i = j
    if i >= end:
        raise _Fail(start, "bracket atom without element symbol")
    ch = text[i]
    aromatic = False
    if ch == "*":
        z, i = 0, i + 1
    elif ch.islower():
        two = text[i : i + 2]
        if two in elements.AROMATIC_SYMBOLS:
            sym, i = two, i + 2
        elif ch in elements.AROMATIC_SYMBOLS:
            sym, i = ch, i + 1
        else:
            raise _Fail(i, f"unknown aromatic symbol '{ch}'")
        z = elements.atomic_number(sym)
        aromatic = True
    elif ch.isupper():
        two = text[i : i + 2]
        if len(two) == 2 and two[1].islower() and elements.is_element(two):
            sym, i = two, i + 2
        elif elements.is_element(ch):
            sym, i = ch, i + 1
        else:
            raise _Fail(i, f"unknown element symbol '{two if len(two) == 2 and two[1].isalpha() else ch}'")
        z = elements.atomic_number(sym)
    else:
        raise _Fail(i, f"unexpected character '{ch}' in bracket atom")
    atom = _Atom(z=z, aromatic=aromatic, pos=start, bracket=True, isotope=isotope)
    if i < end and text[i] == "@":
        k = i + 1
        if k < end and text[k] == "@":
            k += 1
        else:
            while k < end and (text[k].isupper() and text[k] != "H" or text[k].isdigit()):
                k += 1
        atom.chirality = text[i:k]
        i = k
    if i < end and text[i] == "H":
        i += 1
        j = i
        while j < end and text[j].isdigit():
            j += 1
        atom.hcount = int(text[i:j]) if j > i else 1
        i = j
    if i < end and text[i] in "+-":
        sign = 1 if text[i] == "+" else -1
        k = i + 1
        if k < end and text[k].isdigit():
            j = k
            while j < end and text[j].isdigit():
                j += 1
            atom.charge = sign * int(text[k:j])
            i = j
        else:
            count = 1
            while k < end and text[k] == text[i]:
                count += 1
                k += 1
            atom.charge = sign * count
            i = k
    if i < end and text[i] == ":":
        j = i + 1
        while j < end and text[j].isdigit():
            j += 1
        if j == i + 1:
            raise _Fail(i, "atom class without number")
        i = j
    if i != end:
        raise _Fail(i, f"unexpected character '{text[i]}' in bracket atom")
    return atom, end + 1


def _tokenize(text: str) -> _State:
    st = _State()
    prev: int | None = None
    pending: tuple[str, int] | None = None
    branches: list[tuple[int, int]] = []
    open_rings: dict[int, tuple[int, str | None, int]] = {}
    last_open_paren = -1
    i, n = 0, len(text)

    def add_atom(atom: _Atom) -> None:
        nonlocal prev, pending
        idx = len(st.atoms)
        st.atoms.append(atom)
        if prev is not None:
            sym, pos = pending if pending else (None, atom.pos)
            st.bonds.append(_Bond(prev, idx, sym, pos))
        elif pending is not None:
            raise _Fail(pending[1], "bond symbol without preceding atom")
        prev = idx
        pending = None

    while i < n:
        ch = text[i]
        if ch == "[":
            atom, i = _read_bracket(text, i)
            add_atom(atom)
            continue
        if ch in _ORGANIC_ONE or ch in _AROMATIC_ONE or ch == "*":
            two = text[i : i + 2]
            if two in _ORGANIC_TWO:
                add_atom(_Atom(z=elements.atomic_number(two), aromatic=False, pos=i))
                i += 2
                continue
            if ch == "*":
                add_atom(_Atom(z=0, aromatic=False, pos=i))
            else:
                add_atom(_Atom(z=elements.atomic_number(ch), aromatic=ch.islower(), pos=i))
            i += 1
            continue
        if ch in _BOND_SYMBOLS:
            if ch == "$":
                raise _Fail(i, "quadruple bonds are not supported")
            if pending is not None:
                raise _Fail(i, f"two consecutive bond symbols '{pending[0]}{ch}'")
            if prev is None:
                raise _Fail(i, f"bond symbol '{ch}' without preceding atom")
            pending = (ch, i)
            i += 1
            continue
        if ch == "(":
            if prev is None:
                raise _Fail(i, "branch opened without preceding atom")
            if pending is not None:
                raise _Fail(pending[1], "bond symbol before '('")
            branches.append((prev, i))
            last_open_paren = i
            i += 1
            continue
        if ch == ")":
            if not branches:
                raise _Fail(i, "unmatched ')'")
            if pending is not None:
                raise _Fail(pending[1], "dangling bond before ')'")
            if last_open_paren == i - 1:
                raise _Fail(i, "empty branch '()'")
            prev, _ = branches.pop()
            i += 1
            continue
        if ch.isdigit() or ch == "%":
            if prev is None:
                raise _Fail(i, "ring closure without preceding atom")
            if ch == "%":
                if len(text[i + 1 : i + 3]) == 2 and text[i + 1 : i + 3].isdigit():
                    digit, width = int(text[i + 1 : i + 3]), 3
                else:
                    raise _Fail(i, "'%' must be followed by two digits")
            else:
                digit, width = int(ch), 1
            sym = pending[0] if pending else None
            if digit in open_rings:
                partner, sym0, pos0 = open_rings.pop(digit)
                if partner == prev:
                    raise _Fail(i, f"ring closure {digit} bonds an atom to itself")
                if sym0 and sym and sym0 != sym and not {sym0, sym} <= {"/", "\\", "-"}:
                    raise _Fail(i, f"conflicting bond symbols on ring closure {digit}")
                st.bonds.append(_Bond(partner, prev, sym0 or sym, i))
            else:
                open_rings[digit] = (prev, sym, i)
            pending = None
            i += width
            continue
        if ch == ".":
            if pending is not None:
                raise _Fail(pending[1], "dangling bond before '.'")
            if branches:
                raise _Fail(i, "'.' inside a branch")
            prev = None
            i += 1
            continue
        if ch.isspace():
            raise _Fail(i, "whitespace inside SMILES")
        if ch == "]":
            raise _Fail(i, "unmatched ']'")
        if ch.isalpha():
            raise _Fail(i, f"unknown element symbol '{ch}' (bracket required)")
        raise _Fail(i, f"unexpected character '{ch}'")

    if pending is not None:
        raise _Fail(pending[1], "dangling bond at end of input")
    if branches:
        raise _Fail(branches[-1][1], "unmatched '(' (branch not closed)")
    if open_rings:
        digit, (_, _, pos) = min(open_rings.items(), key=lambda kv: kv[1][2])
        raise _Fail(pos, f"unclosed ring closure {digit}")
    if not st.atoms:
        raise _Fail(0, "no atoms")
    return st


def _merge_hydrogens(st: _State) -> _State:
    """Fold plain [H] atoms attached to one heavy atom into that atom's H count."""
    deg = [0] * len(st.atoms)
    for b in st.bonds:
        deg[b.a] += 1
        deg[b.b] += 1
    drop: set[int] = set()
    extra = [0] * len(st.atoms)
    for b in st.bonds:
        for h, other in ((b.a, b.b), (b.b, b.a)):
            ah, ao = st.atoms[h], st.atoms[other]
            if (
                ah.z == 1 and ah.isotope is None and ah.charge == 0 and ah.hcount == 0
                and deg[h] == 1 and ao.z != 1 and b.symbol in (None, "-")
            ):
                drop.add(h)
                extra[other] += 1
    if not drop:
        return st
    remap, atoms = {}, []
    for i, a in enumerate(st.atoms):
        if i in drop:
            continue
        remap[i] = len(atoms)
        a.hcount += extra[i]
        atoms.append(a)
    bonds = [_Bond(remap[b.a], remap[b.b], b.symbol, b.pos) for b in st.bonds if b.a not in drop and b.b not in drop]
    return _State(atoms, bonds)


def _smallest_valence(allowed: tuple[int, ...], used: int) -> int | None:
    for v in allowed:
        if v >= used:
            return v
    return None


def _build(text: str, st: _State) -> Molecule:
    st = _merge_hydrogens(st)
    atoms, bonds = st.atoms, st.bonds
    n = len(atoms)
    seen_pairs: set[tuple[int, int]] = set()
    for b in bonds:
        key = (min(b.a, b.b), max(b.a, b.b))
        if key in seen_pairs:
            raise _Fail(b.pos, "duplicate bond between the same pair of atoms")
        seen_pairs.add(key)

    orders = []
    for b in bonds:
        if b.symbol is None:
            orders.append(4 if atoms[b.a].aromatic and atoms[b.b].aromatic else 1)
        else:
            orders.append(_BOND_SYMBOLS[b.symbol])
    edges = [(b.a, b.b) for b in bonds]
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for k, (u, v) in enumerate(edges):
        adj[u].append((v, k))
        adj[v].append((u, k))
    ring = ring_bond_flags(n, edges, adj)
    for k, b in enumerate(bonds):
        if orders[k] == 4:
            if not (atoms[b.a].aromatic and atoms[b.b].aromatic):
                raise _Fail(b.pos, "aromatic bond between non-aromatic atoms")
            if not ring[k]:
                orders[k] = 1
    for i, a in enumerate(atoms):
        if a.aromatic and not any(ring[k] for _, k in adj[i]):
            raise _Fail(a.pos, f"aromatic atom '{elements.symbol(a.z).lower()}' outside a ring")

    # Which aromatic atoms need a double bond in the Kekule form.
    need: list[int] = []
    for i, a in enumerate(atoms):
        if not a.aromatic:
            continue
        if not any(orders[k] == 4 for _, k in adj[i]):
            continue
        used = sum(1 if orders[k] == 4 else orders[k] for _, k in adj[i])
        allowed = elements.allowed_valences(a.z, a.charge)
        if allowed is None:
            continue
        v = _smallest_valence(allowed, used + a.hcount)
        if v is not None and v - used - a.hcount >= 1:
            need.append(i)
    arom_edges = [(edges[k][0], edges[k][1], k) for k in range(len(edges)) if orders[k] == 4]
    matching = kekule_matching(need, arom_edges)
    if matching is None:
        first = atoms[need[0]].pos if need else 0
        raise _Fail(first, "cannot kekulize aromatic system")
    matched_bonds = set(matching.values())
    kekule = [
        (2 if k in matched_bonds else 1) if o == 4 else o
        for k, o in enumerate(orders)
    ]

    raw: list[RawAtom] = []
    for i, a in enumerate(atoms):
        used = sum(kekule[k] for _, k in adj[i])
        allowed = elements.allowed_valences(a.z, a.charge)
        if a.bracket:
            if allowed is not None and used + a.hcount > max(allowed):
                raise _Fail(a.pos, f"valence {used + a.hcount} not allowed for {_label(a)}")
            implicit = 0
        elif allowed is None:
            implicit = 0
        else:
            v = _smallest_valence(allowed, used + a.hcount)
            if v is None:
                raise _Fail(a.pos, f"valence {used + a.hcount} not allowed for {_label(a)}")
            implicit = v - used - a.hcount
        raw.append(
            RawAtom(
                element=a.z,
                charge=a.charge,
                explicit_h=a.hcount,
                implicit_h=implicit,
                isotope=a.isotope,
                chirality=a.chirality,
            )
        )
    stereo = [b.symbol if b.symbol in ("/", "\\") else None for b in bonds]
    return assemble(raw, edges, kekule, text, stereo)


def _label(a: _Atom) -> str:
    sym = elements.symbol(a.z)
    if a.charge:
        sym += ("+" if a.charge > 0 else "-") + (str(abs(a.charge)) if abs(a.charge) > 1 else "")
    return sym


def parse_smiles(text: str) -> Molecule | ParseDiagnostics:
    """Parse SMILES into a Molecule, or diagnostics describing the first error."""
    if not isinstance(text, str) or not text:
        return ParseDiagnostics("error", ("empty input at position 0",))
    try:
        st = _tokenize(text)
        return _build(text, st)
    except _Fail as exc:
        return ParseDiagnostics("error", (f"{exc.msg} at position {exc.pos}",))
    except RecursionError:
        return ParseDiagnostics("error", ("input too deeply nested at position 0",))


def smi2mol_with_errors(text: str) -> tuple[Molecule | None, ParseDiagnostics]:
    """Parse and always return diagnostics, with the molecule when valid."""
    result = parse_smiles(text)
    if isinstance(result, Molecule):
        return result, ParseDiagnostics("valid", ())
    return None, result


def mol_from_smiles(text: str) -> Molecule:
    """Strict variant of parse_smiles that raises SmilesError."""
    result = parse_smiles(text)
    if isinstance(result, ParseDiagnostics):
        raise SmilesError(result)
    return result
