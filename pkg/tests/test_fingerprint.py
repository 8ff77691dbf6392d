from __future__ import annotations

import json
import random
import struct
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _corpus import moses, small_molecules
from molopt.chem import canonical_smiles, mol_from_smiles, renumber_atoms
from molopt.fingerprint import (
    VERSION,
    Fingerprint,
    FingerprintMismatch,
    circular_fingerprint,
    feature_ids,
    mix32,
    tanimoto,
)

GOLDEN = Path(__file__).parent / "data" / "fingerprint_golden.json"


def murmur3_32(data: bytes, seed: int, length: int | None = None) -> int:
    """Byte-oriented MurmurHash3 x86_32; ``length`` overrides the finalizer length term."""
    mask = 0xFFFFFFFF
    h = seed
    nblocks = len(data) // 4
    for (k,) in struct.iter_unpack("<I", data[: nblocks * 4]):
        k = (k * 0xCC9E2D51) & mask
        k = ((k << 15) | (k >> 17)) & mask
        k = (k * 0x1B873593) & mask
        h ^= k
        h = ((h << 13) | (h >> 19)) & mask
        h = (h * 5 + 0xE6546B64) & mask
    tail = data[nblocks * 4 :]
    if tail:
        k = int.from_bytes(tail, "little")
        k = (k * 0xCC9E2D51) & mask
        k = ((k << 15) | (k >> 17)) & mask
        h ^= (k * 0x1B873593) & mask
    h ^= len(data) if length is None else length
    h ^= h >> 16
    h = (h * 0x85EBCA6B) & mask
    h ^= h >> 13
    h = (h * 0xC2B2AE35) & mask
    return h ^ (h >> 16)


@pytest.mark.parametrize(
    "data, seed, expected",
    [(b"", 0, 0), (b"", 1, 0x514E28B7), (b"hello", 0, 0x248BFA47), (b"The quick brown fox jumps over the lazy dog", 0x9747B28C, 0x2FA826CD)],
)
def test_reference_murmur_vectors(data, seed, expected):
    assert murmur3_32(data, seed) == expected


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(-(2**40), 2**40), max_size=12))
def test_mix32_is_murmur3_over_uint32_words(values):
    words = b"".join(struct.pack("<I", v & 0xFFFFFFFF) for v in values)
    assert mix32(values) == murmur3_32(words, 0x9747B28C, length=len(values))


def test_ethanol_radius0_bits_are_its_three_atom_classes():
    # (element, heavy degree, total H, charge, ring, aromatic) per atom, by hand.
    classes = [(6, 1, 3, 0, 0, 0), (6, 2, 2, 0, 0, 0), (8, 1, 1, 0, 0, 0)]
    fp = circular_fingerprint(mol_from_smiles("CCO"), radius=0)
    assert fp.on_bits() == sorted({mix32(c) % 2048 for c in classes})
    assert fp.popcount() == 3


def test_methane_and_benzene_are_disjoint():
    a = circular_fingerprint(mol_from_smiles("C"))
    b = circular_fingerprint(mol_from_smiles("c1ccccc1"))
    assert a.bits & b.bits == 0
    assert tanimoto(a, b) == 0.0


def test_benzene_has_one_feature_per_radius():
    # Every ring atom is equivalent, so each round adds one identifier.
    assert len(set(feature_ids(mol_from_smiles("c1ccccc1")))) == 3


def test_tanimoto_examples():
    f = circular_fingerprint(mol_from_smiles("CCO"))
    assert tanimoto(f, f) == 1.0
    assert tanimoto(Fingerprint.from_bits([1, 2]), Fingerprint.from_bits([3, 4])) == 0.0
    a, b = Fingerprint.from_bits(range(4)), Fingerprint.from_bits(range(8))
    assert tanimoto(a, b) == 0.5
    assert tanimoto(Fingerprint(0), Fingerprint(0)) == 1.0


def test_mismatch_raises():
    with pytest.raises(FingerprintMismatch):
        tanimoto(Fingerprint(1, width=2048), Fingerprint(1, width=1024))
    with pytest.raises(FingerprintMismatch):
        tanimoto(Fingerprint(1), Fingerprint(1, version="other-1"))


@pytest.mark.parametrize("radius, width", [(5, 2048), (2, 100), (2, 128), (-1, 2048)])
def test_bad_parameters(radius, width):
    with pytest.raises(ValueError):
        circular_fingerprint(mol_from_smiles("CC"), radius, width)


def test_hex_round_trip():
    fp = circular_fingerprint(mol_from_smiles("CC(=O)Oc1ccccc1C(=O)O"))
    assert len(fp.to_hex()) == 512
    assert Fingerprint.from_hex(fp.to_hex()) == fp


def test_golden_bitsets():
    golden = json.loads(GOLDEN.read_text(encoding="utf-8"))
    assert golden["version"] == VERSION, "scheme changed: bump VERSION and refreeze the golden file"
    assert len(golden["molecules"]) == 10
    for smi, hexbits in golden["molecules"].items():
        assert circular_fingerprint(mol_from_smiles(smi)).to_hex() == hexbits, smi


def test_canonical_stability():
    for s in moses()[:300]:
        m = mol_from_smiles(s)
        assert circular_fingerprint(mol_from_smiles(canonical_smiles(m))) == circular_fingerprint(m)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_permutation_invariance_and_symmetry(i, j, seed):
    mols = small_molecules()
    m, other = mols[i % len(mols)], mols[j % len(mols)]
    perm = list(range(len(m.atoms)))
    random.Random(seed).shuffle(perm)
    fa = circular_fingerprint(m)
    assert circular_fingerprint(renumber_atoms(m, perm)) == fa
    fb = circular_fingerprint(other)
    t = tanimoto(fa, fb)
    assert t == tanimoto(fb, fa) and 0.0 <= t <= 1.0
    assert fa.popcount() <= fa.width
