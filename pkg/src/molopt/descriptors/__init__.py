"""Analyst tool registry and molecular descriptors."""

from molopt.descriptors.contrib import crippen, crippen_types, tpsa, tpsa_contribution
from molopt.descriptors.counts import (
    HBondCounts,
    StructuralCounts,
    amide_bonds,
    fraction_csp3,
    hbond_counts,
    num_atoms,
    num_heavy_atoms,
    num_heteroatoms,
    ring_counts,
    rotatable_bonds,
    stereocenters,
    structural_counts,
)
from molopt.descriptors.registry import (
    Availability,
    Category,
    FragmentProfile,
    ToolDescriptor,
    ToolReport,
    UnknownToolError,
    fragment_profile,
    list_tools,
    load_registry,
    run_tool,
)
from molopt.descriptors.topology import UndefinedValueError, chi_index, kappa_index, paths, phi

__all__ = [
    "Availability",
    "Category",
    "FragmentProfile",
    "HBondCounts",
    "StructuralCounts",
    "ToolDescriptor",
    "ToolReport",
    "UndefinedValueError",
    "UnknownToolError",
    "amide_bonds",
    "chi_index",
    "crippen",
    "crippen_types",
    "fraction_csp3",
    "fragment_profile",
    "hbond_counts",
    "kappa_index",
    "list_tools",
    "load_registry",
    "num_atoms",
    "num_heavy_atoms",
    "num_heteroatoms",
    "paths",
    "phi",
    "ring_counts",
    "rotatable_bonds",
    "run_tool",
    "stereocenters",
    "structural_counts",
    "tpsa",
    "tpsa_contribution",
]
