"""Walk one molecule through the chemistry layer and the analyst tool registry.

Run: python3 demos/01_describe_a_molecule.py
"""

from molopt.chem import SmilesError, canonical_smiles, mol_from_smiles, molecular_formula
from molopt.descriptors import Category, fragment_profile, list_tools, run_tool
from molopt.fingerprint import circular_fingerprint, tanimoto

ALBUTEROL = "CC(C)(C)NCC(O)c1ccc(O)c(CO)c1"

print("Parsing albuterol, written the way a chemist might type it:")
mol = mol_from_smiles(ALBUTEROL)
print(f"  formula {molecular_formula(mol)}, {len(mol.atoms)} heavy atoms, {len(mol.rings.rings)} ring")
print(f"  canonical form: {canonical_smiles(mol)}")

# The same molecule written from the other end canonicalizes identically.
reversed_form = "OCc1cc(C(O)CNC(C)(C)C)ccc1O"
print(f"  {reversed_form} -> {canonical_smiles(mol_from_smiles(reversed_form))}")

print("\nBroken input is rejected with a position:")
for bad in ("CC(C", "C1CC", "c1cccc1"):
    try:
        mol_from_smiles(bad)
    except SmilesError as exc:
        print(f"  {bad!r}: {exc}")

print("\nThe registry groups tools the way the analysts see them:")
for cat in Category:
    tools = list_tools(cat)
    live = sum(t.available for t in tools)
    print(f"  {cat.value:<24} {len(tools):>3} tools, {live} computable here")

print("\nA few structural and topological readings:")
for name in ("calcnumhbd", "calcnumhba", "calcnumrotatablebonds", "calcfractioncsp3", "calcchi1v", "calckappa2", "calccrippendescriptors"):
    rep = run_tool(name, mol)
    shown = rep.value if rep.available else f"unavailable ({rep.error})"
    print(f"  {name:<24} {shown}")

print("\nFragment counters that fire:")
profile = fragment_profile(mol)
for name, count in sorted(profile.items()):
    if count:
        print(f"  {name:<18} {count}")
print(f"  ({len(profile.unavailable)} counters need recursive SMARTS and are reported unavailable)")

print("\nFingerprint similarity to a few neighbours:")
ref = circular_fingerprint(mol)
for smi in ("CC(C)(C)NCC(O)c1ccc(O)cc1", "CC(C)NCC(O)c1ccc(O)c(O)c1", "c1ccccc1", ALBUTEROL):
    print(f"  {smi:<34} {tanimoto(ref, circular_fingerprint(mol_from_smiles(smi))):.3f}")
