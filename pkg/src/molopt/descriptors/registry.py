"""The analyst tool registry and the ``run_tool`` dispatcher."""

from __future__ import annotations

import json
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum
from functools import cache
from typing import Any

from molopt.chem import (
    Molecule,
    canonical_smiles,
    fragment_split,
    molecular_formula,
    smi2mol_with_errors,
)
from molopt.descriptors import contrib, counts, topology
from molopt.descriptors.counts import read_table
from molopt.smarts import SmartsPattern, count_matches, parse_smarts


class Category(str, Enum):
    STRUCTURAL = "structural"
    ELECTRONIC_TOPOLOGICAL = "electronic_topological"
    FRAGMENT = "fragment"
    IDENTIFIER = "identifier"
    MISC = "misc"


class Availability(str, Enum):
    NATIVE = "native"
    UNAVAILABLE = "unavailable"
    EXTERNAL = "external"


class UnknownToolError(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unknown tool: {self.name!r}"


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    category: Category
    description: str
    availability: Availability
    params: str = ""

    @property
    def available(self) -> bool:
        return self.availability == Availability.NATIVE

    @property
    def smarts(self) -> str | None:
        return self.params if self.name.startswith("fr_") else None

    def param_dict(self) -> dict[str, int]:
        if not self.params or self.name.startswith("fr_"):
            return {}
        return {k: int(v) for k, v in (kv.split("=") for kv in self.params.split(";"))}


@dataclass(frozen=True)
class ToolReport:
    tool: str
    value: Any
    units: str = ""
    available: bool = True
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"tool": self.tool, "value": self.value, "units": self.units, "available": self.available, "error": self.error}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Registry:
    tools: tuple[ToolDescriptor, ...]
    _by_name: dict[str, ToolDescriptor] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        table = {t.name: t for t in self.tools}
        if len(table) != len(self.tools):
            raise ValueError("duplicate tool names in registry")
        object.__setattr__(self, "_by_name", table)

    def __len__(self) -> int:
        return len(self.tools)

    def __iter__(self) -> Iterator[ToolDescriptor]:
        return iter(self.tools)

    def __contains__(self, name: object) -> bool:
        return name in self._by_name

    def get(self, name: str) -> ToolDescriptor:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownToolError(name) from None

    def by_category(self, category: Category | str) -> list[ToolDescriptor]:
        cat = Category(category)
        return [t for t in self.tools if t.category == cat]


@cache
def load_registry() -> Registry:
    rows = read_table("tools.tsv")
    return Registry(
        tuple(
            ToolDescriptor(
                name=r["name"],
                category=Category(r["category"]),
                description=r["description"],
                availability=Availability(r["availability"]),
                params=r["params"],
            )
            for r in rows
        )
    )


def list_tools(category: Category | str | None = None) -> list[ToolDescriptor]:
    reg = load_registry()
    return list(reg) if category is None else reg.by_category(category)


# ---------------------------------------------------------------- fragments


@cache
def fragment_patterns() -> dict[str, SmartsPattern]:
    """Compiled SMARTS of every available fr_* tool, in registry order."""
    return {
        t.name: parse_smarts(t.params)
        for t in load_registry()
        if t.name.startswith("fr_") and t.availability == Availability.NATIVE
    }


@dataclass(frozen=True)
class FragmentProfile(Mapping[str, int]):
    """Counts for available fragment tools; unavailable ones listed separately."""

    counts: dict[str, int]
    unavailable: tuple[str, ...]

    def __getitem__(self, key: str) -> int:
        return self.counts[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def nonzero(self) -> dict[str, int]:
        return {k: v for k, v in self.counts.items() if v}


def fragment_profile(mol: Molecule) -> FragmentProfile:
    found = {name: count_matches(p, mol) for name, p in fragment_patterns().items()}
    missing = tuple(
        t.name for t in load_registry() if t.name.startswith("fr_") and t.availability != Availability.NATIVE
    )
    return FragmentProfile(found, missing)


# ---------------------------------------------------------------- dispatch


def _rings(mol: Molecule, key: str) -> int:
    return counts.ring_counts(mol)[key]


_COUNT = "count"

# name -> (function of molecule, units)
_NATIVE: dict[str, tuple[Callable[[Molecule], Any], str]] = {
    # fragment-category utilities
    "remove_stereo_from_smiles": (canonical_smiles, "smiles"),
    "get_spiro_atoms": (lambda m: list(m.rings.spiro_atoms), "atom indices"),
    "max_ring_size": (lambda m: m.rings.max_size, "atoms"),
    "ring_stats": (lambda m: [len(m.rings.rings), m.rings.max_size], "[rings, largest ring size]"),
    "count_fragments": (lambda m: len(m.components), _COUNT),
    "get_largest_fragment": (lambda m: canonical_smiles(fragment_split(m)[1]), "smiles"),
    # identifiers and representations
    "get_rdkit_number_of_atoms": (counts.num_heavy_atoms, _COUNT),
    "get_rdkit_number_of_bonds": (lambda m: len(m.bonds), _COUNT),
    "get_rdkit_rotatable_bond_count": (lambda m: counts.rotatable_bonds(m, strict=True), _COUNT),
    "get_rdkit_h_bond_donor_count": (lambda m: counts.hbond_counts(m).hbd, _COUNT),
    "get_rdkit_h_bond_acceptor_count": (lambda m: counts.hbond_counts(m).hba, _COUNT),
    "get_rdkit_molecular_formula": (molecular_formula, "formula"),
    "get_rdkit_canonical_smiles": (canonical_smiles, "smiles"),
    # miscellaneous
    "calcmolformula": (molecular_formula, "formula"),
    "calccrippendescriptors": (lambda m: list(contrib.crippen(m)), "[logP, MR]"),
    "calcfractioncsp3": (counts.fraction_csp3, "fraction"),
    "calcphi": (topology.phi, ""),
    # structural
    "calcnumaliphaticcarbocycles": (lambda m: _rings(m, "aliphatic_carbocycles"), _COUNT),
    "calcnumaliphaticheterocycles": (lambda m: _rings(m, "aliphatic_heterocycles"), _COUNT),
    "calcnumaliphaticrings": (lambda m: _rings(m, "aliphatic_rings"), _COUNT),
    "calcnumamidebonds": (counts.amide_bonds, _COUNT),
    "calcnumaromaticcarbocycles": (lambda m: _rings(m, "aromatic_carbocycles"), _COUNT),
    "calcnumaromaticheterocycles": (lambda m: _rings(m, "aromatic_heterocycles"), _COUNT),
    "calcnumaromaticrings": (lambda m: _rings(m, "aromatic_rings"), _COUNT),
    "calcnumatomstereocenters": (lambda m: counts.stereocenters(m)[0], _COUNT),
    "calcnumatoms": (counts.num_atoms, _COUNT),
    "calcnumhba": (lambda m: counts.hbond_counts(m).hba, _COUNT),
    "calcnumhbd": (lambda m: counts.hbond_counts(m).hbd, _COUNT),
    "calcnumheavyatoms": (counts.num_heavy_atoms, _COUNT),
    "calcnumheteroatoms": (counts.num_heteroatoms, _COUNT),
    "calcnumheterocycles": (lambda m: _rings(m, "heterocycles"), _COUNT),
    "calcnumlipinskihba": (lambda m: counts.hbond_counts(m).lipinski_hba, _COUNT),
    "calcnumlipinskihbd": (lambda m: counts.hbond_counts(m).lipinski_hbd, _COUNT),
    "calcnumrings": (lambda m: _rings(m, "rings"), _COUNT),
    "calcnumsaturatedcarbocycles": (lambda m: _rings(m, "saturated_carbocycles"), _COUNT),
    "calcnumsaturatedheterocycles": (lambda m: _rings(m, "saturated_heterocycles"), _COUNT),
    "calcnumsaturatedrings": (lambda m: _rings(m, "saturated_rings"), _COUNT),
    "calcnumunspecifiedatomstereocenters": (lambda m: counts.stereocenters(m)[1], _COUNT),
}


def _connectivity_invariants(mol: Molecule) -> list[int]:
    from molopt.fingerprint import atom_invariants

    return atom_invariants(mol)


def _implementation(tool: ToolDescriptor) -> tuple[Callable[[Molecule], Any], str]:
    name = tool.name
    if name in _NATIVE:
        return _NATIVE[name]
    if name.startswith("fr_"):
        pattern = fragment_patterns()[name]
        return (lambda m: count_matches(pattern, m)), _COUNT
    params = tool.param_dict()
    if name.startswith("calcchi"):
        return (lambda m: topology.chi_index(m, params["order"], bool(params["valence"]))), ""
    if name.startswith("calckappa"):
        return (lambda m: topology.kappa_index(m, params["order"])), ""
    if name == "calcnumrotatablebonds":
        return (lambda m: counts.rotatable_bonds(m, strict=bool(params["strict"]))), _COUNT
    if name == "getconnectivityinvariants":
        return _connectivity_invariants, "per-atom hashes"
    raise AssertionError(f"native tool without implementation: {name}")


def run_tool(name: str, mol: Molecule | str) -> ToolReport:
    """Run one registry tool on a molecule (or SMILES text).

    Unavailable tools give an explicit unavailable report, never a silent
    zero. Unknown names raise UnknownToolError.
    """
    tool = load_registry().get(name)
    if tool.availability != Availability.NATIVE:
        return ToolReport(name, None, available=False, error=f"{name} is not available in this engine")
    if isinstance(mol, str):
        parsed, diag = smi2mol_with_errors(mol)
        if name == "smi2mol_with_errors":
            return ToolReport(name, {"status": diag.status, "messages": list(diag.messages)}, "validation")
        if parsed is None:
            return ToolReport(name, None, error="; ".join(diag.messages))
        mol = parsed
    if name == "smi2mol_with_errors":
        return ToolReport(name, {"status": "valid", "messages": []}, "validation")
    fn, units = _implementation(tool)
    try:
        value = fn(mol)
    except topology.UndefinedValueError as exc:
        return ToolReport(name, None, units, error=str(exc))
    if isinstance(value, float):
        value = round(value, 6)
    return ToolReport(name, value, units)
