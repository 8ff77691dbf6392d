"""Element table and the fixed valence model used by the SMILES parser."""

from __future__ import annotations

from importlib import resources

_SYMBOLS: dict[int, str] = {}
_NUMBERS: dict[str, int] = {}
_MASS: dict[int, float] = {}
_OUTER: dict[int, int] = {}


def _load() -> None:
    text = resources.files("molopt.chem").joinpath("data/elements.tsv").read_text()
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        z, sym, mass, outer = line.split("\t")
        _SYMBOLS[int(z)] = sym
        _NUMBERS[sym] = int(z)
        _MASS[int(z)] = float(mass)
        _OUTER[int(z)] = int(outer)


_load()

# Atoms the SMILES organic subset may write without brackets.
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})
AROMATIC_SYMBOLS = frozenset({"b", "c", "n", "o", "p", "s", "se", "as", "te"})

# Allowed valences of neutral atoms. Only the first ten entries are checked for
# their own element; the rest exist so charged atoms can borrow the valences of
# their isoelectronic neighbour (N+ behaves like C, O- like F, and so on).
_VALENCES: dict[int, tuple[int, ...]] = {
    5: (3,),
    6: (4,),
    7: (3,),
    8: (2,),
    15: (3, 5),
    16: (2, 4, 6),
    9: (1,),
    17: (1,),
    35: (1,),
    53: (1,),
    # isoelectronic lookups only
    1: (1,),
    2: (0,),
    3: (1,),
    4: (2,),
    10: (0,),
    14: (4,),
    18: (0,),
    32: (4,),
    33: (3, 5),
    34: (2, 4, 6),
    36: (0,),
    51: (3, 5),
    52: (2, 4, 6),
    54: (0,),
}
CHECKED_ELEMENTS = frozenset({5, 6, 7, 8, 15, 16, 9, 17, 35, 53})


def symbol(z: int) -> str:
    return _SYMBOLS[z] if z else "*"


def atomic_number(sym: str) -> int | None:
    """Atomic number for a symbol, accepting aromatic lowercase forms."""
    if sym == "*":
        return 0
    if sym in AROMATIC_SYMBOLS:
        sym = sym.capitalize()
    return _NUMBERS.get(sym)


def is_element(sym: str) -> bool:
    return sym in _NUMBERS


def atomic_mass(z: int) -> float:
    return _MASS.get(z, 0.0)


def outer_electrons(z: int) -> int:
    return _OUTER.get(z, 0)


def allowed_valences(z: int, charge: int = 0) -> tuple[int, ...] | None:
    """Valences permitted for element ``z`` carrying ``charge``.

    Returns None when the element is outside the checked table, in which case
    no valence check is applied and no implicit hydrogens are added.
    """
    if z not in CHECKED_ELEMENTS:
        return None
    if charge == 0:
        return _VALENCES[z]
    if z == 5 and charge == 1:
        return (2,)
    if z == 6 and abs(charge) == 1:
        return (3,)
    return _VALENCES.get(z - charge)
