from __future__ import annotations

import csv
import random
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _corpus import small_molecules
from molopt.chem import Molecule, mol_from_smiles, renumber_atoms
from molopt.smarts import UnsupportedFeature, count_matches, find_matches, has_match, parse_smarts

HAND_PATTERNS = (
    "[O;H1]",
    "c1ccccc1",
    "[n]",
    "C=O",
    "[#6]~[#7]",
    "[C;R]",
    "[C;R0]",
    "[N+]",
    "[O-]",
    "[#6]-,=[#8]",
    "*~*~*",
    "[!#6;!#1]",
    "[CH3]",
    "[D3]",
    "a:a",
    "C@C",
    "[c,n]1[c,n][c,n][c,n][c,n][c,n]1",
)


def _fragment_patterns() -> list[str]:
    text = resources.files("molopt.descriptors").joinpath("data/tools.tsv").read_text(encoding="utf-8")
    rows = csv.reader(text.splitlines(), delimiter="\t")
    return sorted({r[3] for r in rows if len(r) > 3 and r[1] == "fragment" and r[2] == "native" and r[3]})


def naive_matches(pattern, mol: Molecule) -> list[tuple[int, ...]]:
    """All injective assignments, filled in pattern-index order, that satisfy every predicate."""
    bond_at = {}
    for i, b in enumerate(mol.bonds):
        bond_at[(b.begin, b.end)] = bond_at[(b.end, b.begin)] = i
    n, p = len(mol.atoms), len(pattern.atoms)
    out: list[tuple[int, ...]] = []
    assign: list[int] = []

    def ok() -> bool:
        k = len(assign) - 1
        if not pattern.atoms[k].matches(mol, assign[k]):
            return False
        for a, b, pred in pattern.bonds:
            if max(a, b) != k:
                continue
            bi = bond_at.get((assign[a], assign[b]))
            if bi is None or not pred.matches(mol, bi):
                return False
        return True

    def dfs() -> None:
        if len(assign) == p:
            out.append(tuple(assign))
            return
        for t in range(n):
            if t in assign:
                continue
            assign.append(t)
            if ok():
                dfs()
            assign.pop()

    dfs()
    return out


def test_hydroxyl_predicate():
    p = parse_smarts("[O;H1]")
    assert p.num_atoms == 1 and not p.bonds
    assert count_matches(p, mol_from_smiles("CCO")) == 1
    assert count_matches(p, mol_from_smiles("CCOC")) == 0


def test_benzene_pattern_shape():
    p = parse_smarts("c1ccccc1")
    assert p.num_atoms == 6 and len(p.bonds) == 6


def test_recursive_smarts_unsupported():
    with pytest.raises(UnsupportedFeature) as err:
        parse_smarts("[$(cc)]")
    assert "unsupported-feature" in str(err.value) and "$(" in err.value.feature


def test_benzene_counts_once_with_twelve_raw_mappings():
    p, m = parse_smarts("c1ccccc1"), mol_from_smiles("c1ccccc1")
    assert count_matches(p, m) == 1
    assert count_matches(p, m, unique_sets=False) == 12


def test_spec_examples():
    assert count_matches(parse_smarts("[O;H1]"), mol_from_smiles("CCCC")) == 0
    assert count_matches(parse_smarts("c[OH1]"), mol_from_smiles("Oc1ccccc1")) == 1
    assert has_match(parse_smarts("c1ccccc1"), mol_from_smiles("Cc1ccccc1"))
    assert not has_match(parse_smarts("*1******1"), mol_from_smiles("c1ccccc1"))
    assert has_match(parse_smarts("[n]"), mol_from_smiles("c1ccncc1"))


def test_all_native_fragment_patterns_parse():
    pats = _fragment_patterns()
    assert len(pats) > 50
    for s in pats:
        parse_smarts(s)


def test_matcher_equals_brute_force():
    patterns = [parse_smarts(s) for s in HAND_PATTERNS + tuple(_fragment_patterns())]
    mols = small_molecules()
    checked = nonzero = 0
    for m in mols:
        for p in patterns:
            if p.num_atoms > len(m.atoms):
                continue
            raw = naive_matches(p, m)
            assert count_matches(p, m, unique_sets=False) == len(raw), (p.text, m)
            assert count_matches(p, m) == len({frozenset(r) for r in raw}), (p.text, m)
            assert has_match(p, m) == bool(raw)
            checked += 1
            nonzero += bool(raw)
    # Guard against a vacuous comparison.
    assert checked > 5000 and nonzero > 500


def test_mappings_are_injective_and_bond_consistent():
    p = parse_smarts("[#6]~[#6]~[#8]")
    m = mol_from_smiles("OCC(O)CC=O")
    res = find_matches(p, m, unique_sets=False)
    assert len(res) > 0
    for mp in res.mappings:
        assert len(set(mp)) == len(mp)
        for a, b, _ in p.bonds:
            assert m.bond_between(mp[a], mp[b]) is not None


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(HAND_PATTERNS), st.integers(0, 10**6))
def test_renumbering_invariance(idx, smarts, seed):
    mols = small_molecules()
    m = mols[idx % len(mols)]
    perm = list(range(len(m.atoms)))
    random.Random(seed).shuffle(perm)
    p = parse_smarts(smarts)
    shuffled = renumber_atoms(m, perm)
    assert has_match(p, shuffled) == has_match(p, m)
    assert count_matches(p, shuffled) == count_matches(p, m)
    assert count_matches(p, m) <= count_matches(p, m, unique_sets=False)
