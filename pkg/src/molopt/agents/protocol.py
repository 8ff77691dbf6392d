"""The four-role optimization loop.

Analysts pick descriptor tools once per campaign. Each iteration the
scientist proposes a molecule with three reasoning steps, the verifier
checks reasoning against the SMILES (up to ``t`` regenerations), the oracle
scores the result, and the reviewer critiques it for the next iteration.
Every message, verdict and oracle call is appended to a RunTrace.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass
from typing import Any

from molopt import __version__
from molopt.agents.backends import Backend, BackendError
from molopt.agents.messages import (
    INCONSISTENT,
    SCHEMA_IDS,
    AnalystReport,
    BackendRequest,
    ConversationState,
    ReviewerFeedback,
    SchemaError,
    ScientistProposal,
    VerifierVerdict,
    parse_structured_response,
)
from molopt.agents.prompts import CATEGORIES, render_prompt, template_hashes
from molopt.chem import Molecule, canonical_smiles, molecular_formula, smi2mol_with_errors
from molopt.descriptors import (
    UnknownToolError,
    crippen,
    fragment_profile,
    hbond_counts,
    load_registry,
    ring_counts,
    run_tool,
    tpsa,
)
from molopt.harness.trace import RunTrace
from molopt.oracle import BudgetExhausted, BudgetLedger, OracleSpec, OracleUnavailable, evaluate_detailed, is_scorable

log = logging.getLogger("molopt.agents")

DUPLICATE_NOTICE = (
    "\n\nNOTE: your previous answer {smiles} repeats a previously generated SMILES. "
    "Propose a different molecule."
)
NOT_SCORED = "not scored yet"
RETRIEVAL_NOTE = "reference retrieval is unmetered: dataset pre-scoring does not count against the oracle budget"


@dataclass(frozen=True)
class CampaignConfig:
    budget: int = 1000
    iterations: int | None = None  # N; defaults to the budget, one scored molecule per iteration
    verifier_rounds: int = 3  # t
    parse_retries: int = 3  # R, attempts per message
    seed: int = 0
    top_k: int = 100
    use_analysts: bool = True
    use_verifier: bool = True
    use_reviewer: bool = True
    record_prompts: bool = False

    def __post_init__(self) -> None:
        if self.budget < 0 or (self.iterations is not None and self.iterations < 0):
            raise ValueError("budget and iterations must be non-negative")
        if self.verifier_rounds < 0 or self.parse_retries < 1:
            raise ValueError("verifier_rounds must be >= 0 and parse_retries >= 1")

    @property
    def n_iterations(self) -> int:
        return self.budget if self.iterations is None else self.iterations

    @property
    def calls_per_iteration(self) -> int:
        """Hard cap on backend calls in one iteration.

        One scientist call, t verifier calls, t regenerations and one review,
        plus R calls of slack shared by parse retries and duplicate re-prompts.
        """
        return 2 * self.verifier_rounds + self.parse_retries + 2

    def max_backend_calls(self) -> int:
        return self.n_iterations * self.calls_per_iteration + len(CATEGORIES)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> CampaignConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)


class RoundAborted(RuntimeError):
    """A message could not be obtained within the retry allowance."""


class CampaignAborted(RuntimeError):
    """The backend failed on every attempt; the campaign stops."""


class _CallCapReached(RuntimeError):
    pass


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    if isinstance(value, str):
        return value
    return json.dumps(value, sort_keys=True)


def task_description(spec: OracleSpec) -> str:
    """The task text shown to agents: the description, then any target SMILES."""
    if not spec.targets:
        return spec.description
    return f"{spec.description} Target molecule SMILES: {', '.join(spec.targets)}"


def pool_entries(pool: Any) -> list[tuple[str, float]]:
    if pool is None:
        return []
    entries = getattr(pool, "entries", pool)
    return [(str(s), float(v)) for s, v in entries]


def format_pool(entries: Sequence[tuple[str, float]]) -> str:
    return "\n".join(f"({s}, {v:.4f})" for s, v in entries)


def describe_molecule(mol: Molecule, tools: Sequence[str] = ()) -> str:
    """Tool-based summary of one molecule: fragment counts, core descriptors, chosen tools."""
    frags = fragment_profile(mol).nonzero()
    lines = [f"{k}: {v}" for k, v in sorted(frags.items())] or ["no fragment matches"]
    logp, _ = crippen(mol)
    hb = hbond_counts(mol)
    rings = ring_counts(mol)
    lines.append(
        f"formula {molecular_formula(mol)}, logP {logp:.2f}, TPSA {tpsa(mol):.2f}, "
        f"HBD {hb.hbd}, HBA {hb.hba}, rings {rings['rings']}, aromatic rings {rings['aromatic_rings']}"
    )
    for name in tools:
        if name.startswith("fr_"):
            continue
        report = run_tool(name, mol)
        if report.available and report.error is None:
            lines.append(f"{name}: {_fmt(report.value)}")
    return "\n".join(lines)


def _tool_section(name: str, category: str, purpose: str, targets: Sequence[str]) -> str:
    head = f"## {name} ({category})" + (f": {purpose}" if purpose else "")
    if not targets:
        return head + "\n- no target molecules in the task"
    rows = []
    for smi in targets:
        report = run_tool(name, smi)
        if not report.available:
            rows.append(f"- {smi}: unavailable in this engine")
        elif report.error:
            rows.append(f"- {smi}: error: {report.error}")
        else:
            rows.append(f"- {smi}: {_fmt(report.value)}" + (f" {report.units}" if report.units else ""))
    return "\n".join([head, *rows])


def analyst_phase(
    spec: OracleSpec, backend: Backend, trace: RunTrace | None = None, record_prompts: bool = False
) -> tuple[str, list[AnalystReport]]:
    """Run the five category analysts and aggregate their tool results on the targets."""
    registry = load_registry()
    sections, reports = [], []
    for category in CATEGORIES:
        prompt = render_prompt(
            "analyst", {"category": category, "task name": spec.task_id, "task description": task_description(spec)}
        )
        catalog = tuple(
            (t.name, t.description + ("" if t.available else " (unavailable)")) for t in registry.by_category(category)
        )
        request = BackendRequest(
            "analyst", prompt, SCHEMA_IDS["analyst"], catalog, context={"category": category, "targets": spec.targets}
        )
        event: dict[str, Any] = {"category": category, "prompt_sha256": _sha(prompt)}
        if record_prompts:
            event["prompt"] = prompt
        raw = None
        try:
            raw = backend.complete(request).text
            parsed = parse_structured_response("analyst", raw)
        except (BackendError, SchemaError) as exc:
            log.warning("%s analyst failed: %s", category, exc)
            parsed = AnalystReport(category)
            event["error"] = str(exc)
        kept, dropped = [], []
        for name, purpose in parsed.tools_to_use:
            try:
                tool = registry.get(name)
            except UnknownToolError:
                log.warning("%s analyst chose unknown tool %r; dropped", category, name)
                dropped.append({"tool_name": name, "reason": "unknown tool"})
                continue
            if tool.category.value != category:
                log.warning("%s analyst chose %r from category %s; dropped", category, name, tool.category.value)
                dropped.append({"tool_name": name, "reason": f"belongs to {tool.category.value}"})
                continue
            if name not in [k for k, _ in kept]:
                kept.append((name, purpose))
        report = AnalystReport(category, parsed.parsed_smiles, tuple(kept))
        reports.append(report)
        targets = list(report.parsed_smiles) or list(spec.targets)
        sections += [_tool_section(name, category, purpose, targets) for name, purpose in kept]
        if trace is not None:
            trace.append("analyst", raw=raw, report=report.to_dict(), dropped=dropped, **event)
    return "\n\n".join(sections), reports


class Campaign:
    """State machine for one campaign. Use ``run_campaign`` unless stepping manually."""

    def __init__(self, spec: OracleSpec, backend: Backend, config: CampaignConfig, pool: Any = None):
        if not is_scorable(spec):
            raise OracleUnavailable(f"{spec.task_id} needs a registered external model")
        self.spec = spec
        self.backend = backend
        self.config = config
        self.pool = pool_entries(pool)[: config.top_k]
        self.ledger = BudgetLedger(config.budget)
        self.state = ConversationState()
        self.tool_analysis = ""
        self.tools: list[str] = []
        self.backend_calls = 0
        self._iter_calls = 0
        self._last_mol: Molecule | None = None
        self.trace = RunTrace(
            header={
                "task": spec.to_dict(),
                "config": config.to_dict(),
                "backend": getattr(backend, "name", type(backend).__name__),
                "seed": config.seed,
                "templates": template_hashes(),
                "pool": [[s, v] for s, v in self.pool],
                "notes": [RETRIEVAL_NOTE],
                "version": __version__,
            }
        )

    # --------------------------------------------------------------- backend

    def _call(self, role: str, prompt: str, context: Mapping[str, Any]) -> str:
        if self._iter_calls >= self.config.calls_per_iteration:
            raise _CallCapReached(role)
        self._iter_calls += 1
        self.backend_calls += 1
        return self.backend.complete(BackendRequest(role, prompt, SCHEMA_IDS[role], context=context)).text

    def _ask(self, role: str, prompt: str, context: Mapping[str, Any], event: dict[str, Any]):
        """Send ``prompt`` up to R times until the reply parses. Returns (message, raw)."""
        failures = backend_failures = 0
        for attempt in range(1, self.config.parse_retries + 1):
            try:
                raw = self._call(role, prompt, context)
            except BackendError as exc:
                backend_failures += 1
                failures += 1
                self.trace.append("backend_error", role=role, attempt=attempt, error=str(exc), **event)
                continue
            try:
                return parse_structured_response(role, raw), raw
            except SchemaError as exc:
                failures += 1
                self.trace.append("parse_error", role=role, attempt=attempt, error=str(exc), raw=raw, **event)
        if backend_failures == failures:
            raise CampaignAborted(f"{role} backend failed {failures} times")
        raise RoundAborted(f"{role} reply unusable after {failures} attempts")

    def _event_prompt(self, prompt: str) -> dict[str, Any]:
        out: dict[str, Any] = {"prompt_sha256": _sha(prompt)}
        if self.config.record_prompts:
            out["prompt"] = prompt
        return out

    # -------------------------------------------------------------- contexts

    def _scientist_context(self) -> dict[str, Any]:
        scored = [[s, v] for s, v in self.ledger.calls]
        return {
            "pool": [[s, v] for s, v in self.pool],
            "scored": scored,
            "forbidden": sorted(set(self.state.history) | {s for s, _ in self.pool}),
        }

    def _plain_prompt(self) -> str:
        return render_prompt(
            "scientist",
            {
                "task description": task_description(self.spec),
                "result of tool analysis": self.tool_analysis,
                "top100 SMLIES": format_pool(self.pool),
                "smiles_history": "\n".join(self.state.history),
            },
        )

    def _feedback_prompt(self, source: str, proposal: ScientistProposal, score: str, groups: str, feedback) -> str:
        f1, f2, f3 = feedback.steps
        return render_prompt(
            "scientist_feedback",
            {
                "smiles_history": "\n".join(self.state.history),
                "verifier/reviewer": source,
                "task description": task_description(self.spec),
                "target functional groups": self.tool_analysis,
                "topk smiles": format_pool(self.pool),
                "previous smiles": proposal.smiles,
                "score": score,
                "functional groups": groups,
                "scientist step1 reasoning": proposal.step1,
                "verifier/reviewer step1 feedback": f1,
                "scientist step2 think": proposal.step2,
                "verifier/reviewer step2 feedback": f2,
                "verifier/scientist step3 think": proposal.step3,
                "verifier/reviewer step3 feedback": f3,
            },
        )

    def _groups(self, smiles: str) -> tuple[Molecule | None, str]:
        mol, diag = smi2mol_with_errors(smiles)
        if mol is None:
            return None, "invalid SMILES: " + "; ".join(diag.messages)
        return mol, describe_molecule(mol, self.tools)

    # ----------------------------------------------------------------- roles

    def scientist_propose(self, prompt: str, role: str, verifier_round: int) -> tuple[ScientistProposal, bool]:
        """Ask for a proposal; on a repeat, re-prompt once. Returns (proposal, still_duplicate)."""
        ctx = self._scientist_context()
        base = {"iteration": self.state.iteration, "verifier_round": verifier_round}
        proposal, raw = self._ask(role, prompt, ctx, base)
        canonical = self._canonical(proposal.smiles)
        self.trace.append("proposal", role=role, raw=raw, proposal=proposal.to_dict(), canonical=canonical,
                          retry=False, **base, **self._event_prompt(prompt))
        if canonical is None or canonical not in self.state.history:
            return proposal, False
        self.trace.append("duplicate", canonical=canonical, action="reprompt", **base)
        prompt = prompt + DUPLICATE_NOTICE.format(smiles=canonical)
        proposal, raw = self._ask(role, prompt, ctx, base)
        canonical = self._canonical(proposal.smiles)
        self.trace.append("proposal", role=role, raw=raw, proposal=proposal.to_dict(), canonical=canonical,
                          retry=True, **base, **self._event_prompt(prompt))
        if canonical is not None and canonical in self.state.history:
            self.trace.append("duplicate", canonical=canonical, action="skip", **base)
            return proposal, True
        return proposal, False

    @staticmethod
    def _canonical(smiles: str) -> str | None:
        mol, _ = smi2mol_with_errors(smiles)
        return canonical_smiles(mol) if mol is not None else None

    def verifier_check(self, proposal: ScientistProposal) -> VerifierVerdict:
        mol, groups = self._groups(proposal.smiles)
        base = {"iteration": self.state.iteration, "verifier_round": self.state.verifier_round}
        if mol is None:
            # Unparseable SMILES never reaches the backend: the parser diagnostic is the feedback.
            verdict = VerifierVerdict(groups, groups, groups, INCONSISTENT)
            self.trace.append("verdict", verdict=verdict.to_dict(), synthetic=True, raw=None, **base)
            return verdict
        prompt = render_prompt(
            "verifier",
            {
                "task description": task_description(self.spec),
                "target functional groups": self.tool_analysis,
                "thinking['step1']": proposal.step1,
                "thinking['step2']": proposal.step2,
                "thinking['step3']": proposal.step3,
                "smiles": proposal.smiles,
                "functional groups": groups,
            },
        )
        verdict, raw = self._ask("verifier", prompt, {"smiles": proposal.smiles}, base)
        self.trace.append("verdict", verdict=verdict.to_dict(), synthetic=False, raw=raw, **base, **self._event_prompt(prompt))
        return verdict

    def reviewer_review(self, proposal: ScientistProposal, score: float | None) -> ReviewerFeedback:
        mol, groups = self._groups(proposal.smiles)
        best = max((v for _, v in self.ledger.calls), default=None)
        prompt = render_prompt(
            "reviewer",
            {
                "task description": task_description(self.spec),
                "scientist step1 reasoning": proposal.step1,
                "scientist step2 reasoning": proposal.step2,
                "scientist step3 reasoning": proposal.step3,
                "scientist proposed SMILES": proposal.smiles,
                "score": _fmt(score) if score is not None else "0.0000",
                "functional groups": groups,
            },
        )
        ctx = {"score": score, "best_score": best, "groups": ", ".join(sorted(fragment_profile(mol).nonzero())) if mol else ""}
        base = {"iteration": self.state.iteration, "verifier_round": self.state.verifier_round}
        try:
            review, raw = self._ask("reviewer", prompt, ctx, base)
        except (RoundAborted, CampaignAborted, _CallCapReached) as exc:
            log.warning("reviewer failed in iteration %d: %s", self.state.iteration, exc)
            self.trace.append("review", review=ReviewerFeedback().to_dict(), failed=True, error=str(exc) or "call cap", **base)
            return ReviewerFeedback()
        self.trace.append("review", review=review.to_dict(), failed=False, raw=raw, **base, **self._event_prompt(prompt))
        return review

    # ------------------------------------------------------------- iteration

    def _initial_prompt(self) -> tuple[str, str]:
        st = self.state
        if self.config.use_reviewer and st.last_proposal is not None and st.last_review is not None:
            _, groups = self._groups(st.last_proposal.smiles)
            score = _fmt(st.last_score) if st.last_score is not None else "0.0000"
            return "scientist_feedback", self._feedback_prompt("reviewer", st.last_proposal, score, groups, st.last_review)
        return "scientist", self._plain_prompt()

    def step(self) -> None:
        """One iteration: propose, verify, score, review."""
        st = self.state
        st.iteration += 1
        st.verifier_round = 0
        self._iter_calls = 0
        base = lambda: {"iteration": st.iteration, "verifier_round": st.verifier_round}  # noqa: E731
        proposal: ScientistProposal | None = None
        verified: bool | None = None
        try:
            role, prompt = self._initial_prompt()
            proposal, dup = self.scientist_propose(prompt, role, 0)
            if dup:
                return
            if self.config.use_verifier:
                verified = False
                while st.verifier_round < self.config.verifier_rounds:
                    st.verifier_round += 1
                    verdict = self.verifier_check(proposal)
                    st.last_verdict = verdict
                    if verdict.consistent:
                        verified = True
                        break
                    _, groups = self._groups(proposal.smiles)
                    prompt = self._feedback_prompt("verifier", proposal, NOT_SCORED, groups, verdict)
                    proposal, dup = self.scientist_propose(prompt, "scientist_feedback", st.verifier_round)
                    if dup:
                        return
                if not verified:
                    self.trace.append("unverified", reason="verifier rounds exhausted", smiles=proposal.smiles, **base())
        except _CallCapReached:
            if proposal is None:
                self.trace.append("round_aborted", reason="backend call cap reached", **base())
                return
            verified = False if self.config.use_verifier else None
            self.trace.append("unverified", reason="backend call cap reached", smiles=proposal.smiles, **base())
        except RoundAborted as exc:
            if proposal is None:
                self.trace.append("round_aborted", reason=str(exc), **base())
                return
            verified = False
            self.trace.append("unverified", reason=str(exc), smiles=proposal.smiles, **base())

        ev = evaluate_detailed(self.ledger, self.spec, proposal.smiles)
        if ev.canonical is not None:
            st.remember(ev.canonical)
        self.trace.append(
            "oracle",
            smiles=proposal.smiles,
            canonical=ev.canonical,
            score=ev.score,
            consumed_call=ev.consumed_call,
            diagnostic=ev.diagnostic,
            verified=verified,
            ledger_consumed=self.ledger.consumed,
            ledger_remaining=self.ledger.remaining,
            **base(),
        )
        st.last_proposal, st.last_score, st.last_smiles = proposal, ev.score, proposal.smiles
        if self.config.use_reviewer:
            st.last_review = self.reviewer_review(proposal, ev.score)

    def run(self) -> RunTrace:
        cfg = self.config
        reason = "iterations"
        try:
            if cfg.use_analysts:
                self.tool_analysis, reports = analyst_phase(self.spec, self.backend, self.trace, cfg.record_prompts)
                self.backend_calls += len(CATEGORIES)
                self.tools = [name for r in reports for name, _ in r.tools_to_use]
                self.trace.append("tool_analysis", text=self.tool_analysis, tools=self.tools)
            while self.state.iteration < cfg.n_iterations:
                if self.ledger.exhausted:
                    reason = "budget"
                    break
                self.step()
        except BudgetExhausted:
            reason = "budget"
        except CampaignAborted as exc:
            reason = "backend_abort"
            log.error("campaign aborted: %s", exc)
            self.trace.append("abort", error=str(exc), iteration=self.state.iteration)
        self.trace.append(
            "end",
            reason=reason,
            iterations=self.state.iteration,
            backend_calls=self.backend_calls,
            ledger_consumed=self.ledger.consumed,
        )
        return self.trace


def run_campaign(spec: OracleSpec, backend: Backend, config: CampaignConfig | None = None, pool: Any = None) -> RunTrace:
    """Run analysts once, then N iterations or until the oracle budget is spent."""
    return Campaign(spec, backend, config or CampaignConfig(), pool).run()
