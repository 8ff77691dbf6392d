"""Circular (ECFP-style) fingerprints and Tanimoto similarity.

The scheme is fully specified here so bitsets can be reproduced in any
language:

* ``mix32(values)`` hashes a sequence of integers. Each value is reduced to
  32 bits and folded in with the multiply-rotate steps of MurmurHash3
  (constants C1 = 0xCC9E2D51, C2 = 0x1B873593; rotate 15 on the block,
  rotate 13 on the state, then ``h = h*5 + 0xE6546B64``). The seed is
  0x9747B28C. The state is finalised with the length and the standard
  fmix32 avalanche (shift 16, * 0x85EBCA6B, shift 13, * 0xC2B2AE35, shift 16).
* Initial atom identifier = ``mix32((element, heavy degree, total H,
  charge, ring flag, aromatic flag))``.
* Round r (1..radius): the new identifier of atom i is
  ``mix32((r, id_i, o1, n1, o2, n2, ...))`` over its neighbours sorted by
  (bond code, neighbour id), bond codes 1/2/3/4 for single/double/triple/
  aromatic.
* Every radius-0 identifier is a feature. From round 1 on, an identifier is
  kept only if the bond set it covers was not produced before; ties within
  a round go to the smaller identifier.
* Each feature sets bit ``id mod width``.

Changing any of the above must change ``VERSION``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from molopt.chem.molecule import Molecule

VERSION = "molopt-ecfp-1"
DEFAULT_RADIUS = 2
DEFAULT_WIDTH = 2048

_MASK = 0xFFFFFFFF
_C1 = 0xCC9E2D51
_C2 = 0x1B873593
_SEED = 0x9747B28C


class FingerprintMismatch(ValueError):
    """Fingerprints of different width or scheme cannot be compared."""


def _rotl(x: int, r: int) -> int:
    return ((x << r) | (x >> (32 - r))) & _MASK


def mix32(values: Sequence[int]) -> int:
    h = _SEED
    for v in values:
        k = (v & _MASK) * _C1 & _MASK
        k = _rotl(k, 15) * _C2 & _MASK
        h ^= k
        h = (_rotl(h, 13) * 5 + 0xE6546B64) & _MASK
    h ^= len(values)
    h ^= h >> 16
    h = h * 0x85EBCA6B & _MASK
    h ^= h >> 13
    h = h * 0xC2B2AE35 & _MASK
    h ^= h >> 16
    return h


@dataclass(frozen=True)
class Fingerprint:
    bits: int
    width: int = DEFAULT_WIDTH
    radius: int = DEFAULT_RADIUS
    version: str = VERSION

    def popcount(self) -> int:
        return self.bits.bit_count()

    def on_bits(self) -> list[int]:
        return [i for i in range(self.width) if self.bits >> i & 1]

    def to_hex(self) -> str:
        return format(self.bits, f"0{self.width // 4}x")

    @classmethod
    def from_hex(cls, text: str, radius: int = DEFAULT_RADIUS, version: str = VERSION) -> Fingerprint:
        return cls(int(text, 16), width=len(text) * 4, radius=radius, version=version)

    @classmethod
    def from_bits(cls, on: Iterable[int], width: int = DEFAULT_WIDTH, radius: int = DEFAULT_RADIUS) -> Fingerprint:
        bits = 0
        for i in on:
            bits |= 1 << (i % width)
        return cls(bits, width, radius)


def atom_invariants(mol: Molecule) -> list[int]:
    """Radius-0 identifiers, one per atom."""
    return [
        mix32((a.element, a.degree, a.total_h, a.formal_charge, int(a.in_ring), int(a.aromatic)))
        for a in mol.atoms
    ]


def feature_ids(mol: Molecule, radius: int = DEFAULT_RADIUS) -> list[int]:
    """Identifiers of every retained environment, before folding."""
    ids = atom_invariants(mol)
    features = list(ids)
    seen: set[frozenset[int]] = set()
    envs = [frozenset[int]() for _ in mol.atoms]
    for r in range(1, radius + 1):
        new_ids = []
        new_envs = []
        for i, row in enumerate(mol.neighbors):
            pairs = sorted((int(mol.bonds[k].order), ids[nb]) for nb, k in row)
            flat = [r, ids[i]]
            for o, n in pairs:
                flat += (o, n)
            new_ids.append(mix32(flat))
            env = set(envs[i])
            for nb, k in row:
                env.add(k)
                env |= envs[nb]
            new_envs.append(frozenset(env))
        for h, env in sorted(zip(new_ids, new_envs), key=lambda t: t[0]):
            if env and env not in seen:
                seen.add(env)
                features.append(h)
        ids, envs = new_ids, new_envs
    return features


def circular_fingerprint(mol: Molecule, radius: int = DEFAULT_RADIUS, width: int = DEFAULT_WIDTH) -> Fingerprint:
    if not 0 <= radius <= 4:
        raise ValueError("radius must be between 0 and 4")
    if width < 256 or width & (width - 1):
        raise ValueError("width must be a power of two >= 256")
    return Fingerprint.from_bits(feature_ids(mol, radius), width, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a & b| / |a | b|, with two empty fingerprints scoring 1.0."""
    if a.width != b.width or a.version != b.version:
        raise FingerprintMismatch(f"cannot compare {a.version}/{a.width} with {b.version}/{b.width}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union
