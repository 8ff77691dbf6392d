"""Offline backend: mutates high-scoring molecules and explains the edit.

No network and no language model. The scientist picks a parent from the
best molecules seen so far (reference pool plus scored proposals), applies
one graph edit (atom swap, substituent addition or removal) and describes
that edit as its three reasoning steps, so the verifier can pass it as
consistent. Replies are a pure function of (seed, role, prompt text, request
context), which keeps traces reproducible.
"""

from __future__ import annotations

import hashlib
import json
import random
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

from molopt.agents.messages import BackendRequest, BackendResponse
from molopt.chem import EditableMol, Molecule, ValenceError, canonical_smiles, elements, parse_smiles
from molopt.descriptors import fragment_profile

DEFAULT_TOOLS = {
    "structural": ["calcnumaromaticrings", "calcnumrings", "calcnumhbd", "calcnumhba", "calcnumrotatablebonds"],
    "electronic_topological": ["calcchi0v", "calcchi1v", "calcchi2v"],
    "fragment": ["fr_benzene", "fr_ether", "fr_halogen"],
    "identifier": ["get_rdkit_molecular_formula", "get_rdkit_canonical_smiles"],
    "misc": ["calccrippendescriptors", "calcfractioncsp3", "calcmolformula"],
}

_SWAP = (6, 7, 8, 16)  # C N O S
_ADD = ((6, 6), (7, 2), (8, 3), (9, 2), (17, 1))  # (element, weight)
_NAMES = {6: "carbon", 7: "nitrogen", 8: "oxygen", 9: "fluorine", 16: "sulfur", 17: "chlorine"}


def _name(z: int) -> str:
    return _NAMES.get(z, elements.symbol(z))


def _parse(smiles: str) -> Molecule | None:
    mol = parse_smiles(smiles)
    return mol if isinstance(mol, Molecule) else None


def mutate(mol: Molecule, rng: random.Random) -> tuple[Molecule, str] | None:
    """One random valence-respecting edit of ``mol``, with a description."""
    em = EditableMol.from_molecule(mol)
    n = len(em.atoms)
    op = rng.choice(("swap", "add", "add", "remove"))
    try:
        if op == "swap":
            i = rng.randrange(n)
            z, q = em.atoms[i]
            if q != 0:
                return None
            new = rng.choice([e for e in _SWAP if e != z])
            em.set_element(i, new)
            em.hydrogens(i)  # raises if the new element cannot take the bonds
            desc = f"replace the {_name(z)} at position {i + 1} with {_name(new)}"
        elif op == "add":
            sites = [i for i in range(n) if em.atoms[i][1] == 0 and em.hydrogens(i) > 0]
            if not sites:
                return None
            i = rng.choice(sites)
            new = rng.choices([e for e, _ in _ADD], weights=[w for _, w in _ADD])[0]
            order = 2 if new == 8 and em.hydrogens(i) >= 2 and rng.random() < 0.3 else 1
            j = em.add_atom(new)
            em.add_bond(i, j, order)
            em.hydrogens(i)
            group = {8: "carbonyl oxygen" if order == 2 else "hydroxyl", 7: "amino", 6: "methyl", 9: "fluoro", 17: "chloro"}[new]
            desc = f"add a {group} group on the {_name(em.atoms[i][0])} at position {i + 1}"
        else:
            leaves = [i for i in range(n) if len(em.neighbors(i)) == 1]
            if n < 3 or not leaves:
                return None
            i = rng.choice(leaves)
            z = em.atoms[i][0]
            em.remove_atom(i)
            desc = f"remove the terminal {_name(z)} at position {i + 1}"
        child = em.to_molecule()
    except (ValenceError, ValueError, KeyError):
        return None
    # Round-trip through the parser so only molecules the oracle accepts are proposed.
    again = _parse(canonical_smiles(child))
    if again is None:
        return None
    return again, desc


def _rank(entries: Iterable[Sequence[Any]]) -> list[tuple[str, float]]:
    best: dict[str, float] = {}
    for smi, score in entries:
        if score is not None and best.get(smi, -1.0) < score:
            best[smi] = float(score)
    return sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))


class HeuristicBackend:
    name = "heuristic"

    def __init__(self, seed: int = 0, elite: int = 10, max_tries: int = 200):
        self.seed = seed
        self.elite = elite
        self.max_tries = max_tries

    def _rng(self, request: BackendRequest) -> random.Random:
        digest = hashlib.sha256(request.prompt.encode("utf-8")).hexdigest()
        return random.Random(f"{self.seed}|{request.role}|{digest}")

    def complete(self, request: BackendRequest) -> BackendResponse:
        ctx = request.context
        if request.role == "analyst":
            reply = self._analyst(ctx)
        elif request.role in ("scientist", "scientist_feedback"):
            reply = self._scientist(ctx, self._rng(request))
        elif request.role == "verifier":
            reply = {
                "step1": "The listed features are present in the SMILES.",
                "step2": "The described edit is the only change relative to the parent molecule.",
                "step3": "The SMILES matches the described construction.",
                "consistency": "Consistent",
            }
        else:
            reply = self._reviewer(ctx)
        return BackendResponse(json.dumps(reply, sort_keys=True, ensure_ascii=False))

    def _analyst(self, ctx: Mapping[str, Any]) -> dict[str, Any]:
        category = ctx.get("category", "fragment")
        targets = [t for t in ctx.get("targets", ()) if _parse(t) is not None]
        tools = list(DEFAULT_TOOLS.get(category, ()))
        if category == "fragment" and targets:
            seen: dict[str, int] = {}
            for t in targets:
                for name, count in fragment_profile(_parse(t)).nonzero().items():
                    seen[name] = seen.get(name, 0) + count
            if seen:
                tools = sorted(seen, key=lambda k: (-seen[k], k))[:10]
        return {
            "parsed_smiles": [{"smiles": t} for t in targets],
            "tools_to_use": [{"tool_name": t, "purpose": f"Characterize the task molecules with {t}."} for t in tools],
        }

    def _scientist(self, ctx: Mapping[str, Any], rng: random.Random) -> dict[str, str]:
        ranked = _rank(list(ctx.get("scored", ())) + list(ctx.get("pool", ())))
        forbidden = set(ctx.get("forbidden", ()))
        if not ranked:
            ranked = [("c1ccccc1", 0.0)]
        top = ranked[: self.elite]
        for attempt in range(self.max_tries):
            parent_smiles, parent_score = top[int(len(top) * rng.random() ** 2)]
            parent = _parse(parent_smiles)
            if parent is None:
                continue
            edits = 1 if attempt < self.max_tries // 2 else 2
            child, descs = parent, []
            for _ in range(edits):
                out = mutate(child, rng)
                if out is None:
                    break
                child, d = out
                descs.append(d)
            if len(descs) != edits:
                continue
            smiles = canonical_smiles(child)
            if smiles in forbidden or smiles == parent_smiles:
                continue
            groups = ", ".join(sorted(fragment_profile(parent).nonzero())) or "no listed fragments"
            edit = " and then ".join(descs)
            return {
                "step1": f"Key features of the reference {parent_smiles} (score {parent_score:.3f}): {groups}.",
                "step2": f"Keep the reference scaffold and {edit}.",
                "step3": f"The designed molecule is the reference {parent_smiles} after the edit: {edit}.",
                "smiles": smiles,
            }
        smiles = ranked[0][0]
        return {
            "step1": "No new variant of the references was found.",
            "step2": "Fall back to the best reference.",
            "step3": "The best reference molecule, unchanged.",
            "smiles": smiles,
        }

    def _reviewer(self, ctx: Mapping[str, Any]) -> dict[str, str]:
        score = ctx.get("score")
        best = ctx.get("best_score")
        groups = ctx.get("groups") or "none detected"
        if score is None:
            verdict = "The molecule could not be scored."
        elif best is not None and score >= best:
            verdict = f"Score {score:.3f} is the best so far; keep this scaffold and try small substituent changes."
        else:
            verdict = f"Score {score:.3f} is below the best so far; return to a higher-scoring reference."
        return {
            "step1": f"Detected groups: {groups}.",
            "step2": verdict,
            "step3": "The SMILES is valid and matches the described construction.",
        }
