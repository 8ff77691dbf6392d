from __future__ import annotations

import copy
import json
from pathlib import Path

import httpx
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from molopt.agents import (
    BackendError,
    BackendRequest,
    CampaignConfig,
    MissingPlaceholderError,
    NoJsonError,
    SchemaError,
    UnknownRoleError,
    create_backend,
    extract_json,
    parse_structured_response,
    render_prompt,
    run_campaign,
    task_description,
)
from molopt.agents.backends.heuristic import HeuristicBackend
from molopt.agents.backends.http import HttpBackend
from molopt.agents.backends.mock import MockBackend
from molopt.harness import parse_trace
from molopt.oracle import get_task

FIXTURE = Path(__file__).parent / "data" / "mock_script.json"
ALBUTEROL = get_task("albuterol_similarity")
CONSISTENT = {"step1": "ok", "step2": "ok", "step3": "ok", "consistency": "Consistent"}
INCONSISTENT = {"step1": "no", "step2": "no", "step3": "no", "consistency": "Inconsistent"}
POOL = [("CC(C)(C)NCC(O)c1ccc(O)cc1", 0.5), ("c1ccccc1O", 0.1)]


def fixture() -> dict:
    return json.loads(FIXTURE.read_text(encoding="utf-8"))


def proposal(smiles: str) -> dict:
    return {"step1": "Read the target.", "step2": "Edit one group.", "step3": "Check the result.", "smiles": smiles}


def alcohols(n: int) -> list[dict]:
    """n distinct proposals: methanol, ethanol, propanol, ..."""
    return [proposal("C" * k + "O") for k in range(1, n + 1)]


def script(**roles) -> dict:
    out = fixture()
    out.update(roles)
    return out


def run(s: dict, **cfg):
    backend = MockBackend(copy.deepcopy(s))
    trace = run_campaign(ALBUTEROL, backend, CampaignConfig(**cfg), POOL)
    return trace, backend


def types(trace) -> list[str]:
    return [e["type"] for e in trace.events]


# ---------------------------------------------------------------- prompts


def test_scientist_prompt_embeds_task_verbatim():
    text = render_prompt(
        "scientist",
        {"task description": task_description(ALBUTEROL), "result of tool analysis": "TOOLS", "top100 SMLIES": "POOL"},
    )
    assert ALBUTEROL.description in text
    assert "Target molecule SMILES: " + ALBUTEROL.targets[0] in text
    assert "PREVIOUSLY GENERATED SMILES" not in text
    assert "[" + "task description]" not in text


def test_history_adds_repeat_block():
    ctx = {"task description": "T", "result of tool analysis": "A", "top100 SMLIES": "P", "smiles_history": "CCO\nCCN"}
    text = render_prompt("scientist", ctx)
    assert text.startswith("YOU MUST NOT REPEAT ANY OF THE PREVIOUSLY GENERATED SMILES:\nCCO\nCCN\n")
    assert "[smiles_history]" not in text


def test_prompt_errors():
    with pytest.raises(UnknownRoleError):
        render_prompt("chemist", {})
    with pytest.raises(MissingPlaceholderError) as err:
        render_prompt("scientist", {"task description": "T"})
    assert "result of tool analysis" in str(err.value)


def test_placeholder_values_are_not_rescanned():
    ctx = {"task description": "[top100 SMLIES]", "result of tool analysis": "A", "top100 SMLIES": "POOL"}
    assert "[top100 SMLIES]" in render_prompt("scientist", ctx)


# ---------------------------------------------------------------- parsing


def test_parse_fenced_reply():
    raw = "Sure.\n```json\n" + json.dumps(proposal("CCO")) + "\n```\nDone."
    p = parse_structured_response("scientist", raw)
    assert p.smiles == "CCO" and p.steps == ("Read the target.", "Edit one group.", "Check the result.")


def test_parse_bare_object_after_prose():
    raw = "thinking... " + json.dumps(CONSISTENT) + " trailing"
    assert parse_structured_response("verifier", raw).consistent


def test_missing_smiles_is_schema_error():
    bad = proposal("CCO")
    del bad["smiles"]
    with pytest.raises(SchemaError) as err:
        parse_structured_response("scientist", json.dumps(bad))
    assert err.value.key == "smiles"


def test_lowercase_inconsistent():
    v = parse_structured_response("verifier", json.dumps({**INCONSISTENT, "consistency": "inconsistent"}))
    assert not v.consistent


def test_no_json():
    with pytest.raises(NoJsonError):
        parse_structured_response("reviewer", "I think it is fine.")
    assert extract_json("x {\"a\": 1} y") == {"a": 1}


def test_request_validates_role():
    with pytest.raises(UnknownRoleError):
        BackendRequest("chemist", "p", "scientist.v1")


# ---------------------------------------------------------- mock scenarios


def test_always_consistent_gives_n_proposals_and_n_calls():
    trace, _ = run(fixture(), budget=100, iterations=10)
    assert sum(1 for e in trace.of_type("proposal") if e["verifier_round"] == 0) == 10
    assert len(trace.of_type("proposal")) == 10
    assert len(trace.oracle_calls()) == 10
    assert all(e["verified"] is True for e in trace.of_type("oracle"))
    end = trace.events[-1]
    assert end["reason"] == "iterations" and end["ledger_consumed"] == 10


def test_always_inconsistent_regenerates_t_times_and_flags_unverified():
    trace, backend = run(script(scientist=alcohols(40), verifier=[INCONSISTENT]), budget=100, iterations=5, verifier_rounds=3)
    for it in range(1, 6):
        regens = [e for e in trace.of_type("proposal") if e["iteration"] == it and e["verifier_round"] > 0]
        assert len(regens) == 3
        assert len([e for e in trace.of_type("verdict") if e["iteration"] == it]) == 3
        assert [e["reason"] for e in trace.of_type("unverified") if e["iteration"] == it] == ["verifier rounds exhausted"]
    assert [e["verified"] for e in trace.of_type("oracle")] == [False] * 5
    assert backend.calls["verifier"] == 15
    assert backend.calls["scientist"] == 20  # feedback requests share the scientist list


def test_alternating_verdicts():
    trace, _ = run(script(scientist=alcohols(40), verifier=[INCONSISTENT, CONSISTENT], exhausted="cycle"), budget=100, iterations=4)
    for it in range(1, 5):
        verdicts = [e["verdict"]["consistency"] for e in trace.of_type("verdict") if e["iteration"] == it]
        assert verdicts == ["Inconsistent", "Consistent"]
    assert all(e["verified"] for e in trace.of_type("oracle"))
    assert not trace.of_type("unverified")


def test_malformed_json_twice_then_valid():
    replies = ["not json at all", "{\"step1\": \"x\"", *alcohols(10)]
    trace, _ = run(script(scientist=replies), budget=100, iterations=2, parse_retries=3)
    errors = trace.of_type("parse_error")
    assert [e["attempt"] for e in errors] == [1, 2]
    assert len(trace.oracle_calls()) == 2


def test_parse_retries_exhausted_aborts_round():
    replies = ["garbage", "garbage", *alcohols(10)]
    trace, _ = run(script(scientist=replies), budget=100, iterations=2, parse_retries=2)
    aborted = trace.of_type("round_aborted")
    assert len(aborted) == 1 and aborted[0]["iteration"] == 1
    assert len(trace.oracle_calls()) == 1


def test_duplicate_is_reprompted_then_skipped():
    replies = [proposal("CCO"), proposal("OCC"), proposal("CCN"), proposal("NCC"), proposal("C(C)N"), proposal("CCCl")]
    trace, _ = run(script(scientist=replies), budget=100, iterations=3)
    dups = trace.of_type("duplicate")
    # Iteration 2: OCC repeats CCO, the re-prompt gives CCN. Iteration 3: NCC and C(C)N both repeat CCN.
    assert [(d["iteration"], d["action"]) for d in dups] == [(2, "reprompt"), (3, "reprompt"), (3, "skip")]
    assert [e["canonical"] for e in trace.oracle_calls()] == ["CCO", "CCN"]
    retry = [e for e in trace.of_type("proposal") if e["retry"]]
    assert len(retry) == 2


def test_unparseable_smiles_gets_synthetic_verdict():
    replies = [proposal("C1CC"), proposal("CCO")]
    trace, backend = run(script(scientist=replies), budget=100, iterations=1)
    v = trace.of_type("verdict")
    assert v[0]["synthetic"] and v[0]["verdict"]["consistency"] == "Inconsistent"
    assert "unclosed ring closure 1" in v[0]["verdict"]["step1"]
    assert not v[1]["synthetic"]
    assert backend.calls["verifier"] == 1
    assert trace.oracle_calls()[0]["canonical"] == "CCO"


def test_budget_three_halts_ten_iterations():
    trace, _ = run(script(scientist=alcohols(20)), budget=3, iterations=10)
    assert len(trace.oracle_calls()) == 3
    end = trace.events[-1]
    assert end["reason"] == "budget" and end["iterations"] < 10 and end["ledger_consumed"] == 3
    assert len({e["canonical"] for e in trace.oracle_calls()}) == 3


def test_backend_failure_aborts_campaign():
    trace, _ = run(script(scientist=[{"__error__": "connection refused"}]), budget=10, iterations=3)
    assert trace.events[-1]["reason"] == "backend_abort"
    assert len(trace.of_type("backend_error")) == 3
    assert trace.of_type("abort")


def test_reviewer_failure_gives_empty_feedback():
    trace, _ = run(script(reviewer=["nonsense"]), budget=10, iterations=2)
    reviews = trace.of_type("review")
    assert reviews and all(r["failed"] and r["review"] == {"step1": "", "step2": "", "step3": ""} for r in reviews)
    assert len(trace.oracle_calls()) == 2


def test_analysts_run_once_and_drop_bad_tools():
    s = fixture()
    s["analyst"][0]["tools_to_use"].append({"tool_name": "fr_benzene", "purpose": "wrong category"})
    s["analyst"][1]["tools_to_use"].append({"tool_name": "no_such_tool", "purpose": "made up"})
    trace, backend = run(s, budget=10, iterations=3)
    assert backend.calls["analyst"] == 5
    tools = trace.of_type("tool_analysis")[0]["tools"]
    assert "no_such_tool" not in tools and tools.count("fr_benzene") == 1
    text = trace.of_type("tool_analysis")[0]["text"]
    assert "## fr_Ar_OH (fragment):" in text and ALBUTEROL.targets[0] in text


def test_feedback_prompt_follows_review():
    trace, backend = run(fixture(), budget=10, iterations=3, record_prompts=True)
    roles = [e["role"] for e in trace.of_type("proposal")]
    assert roles == ["scientist", "scientist_feedback", "scientist_feedback"]
    second = trace.of_type("proposal")[1]["prompt"]
    assert second.startswith("YOU MUST NOT REPEAT ANY OF THE PREVIOUSLY GENERATED SMILES:")
    assert "Try keeping every albuterol substituent" in second


@pytest.mark.parametrize("reviewer", [True, False])
def test_recorded_prompts_have_no_unfilled_placeholders(reviewer):
    from molopt.agents.prompts import OPTIONAL, PLACEHOLDERS

    names = {n for role in PLACEHOLDERS for n in PLACEHOLDERS[role]} | {n for v in OPTIONAL.values() for n in v}
    trace, _ = run(script(verifier=[INCONSISTENT, CONSISTENT], exhausted="cycle"), budget=10, iterations=4,
                   record_prompts=True, use_reviewer=reviewer)
    prompts = [e["prompt"] for e in trace.events if "prompt" in e]
    assert len(prompts) > 10
    for text in prompts:
        assert not [n for n in names if f"[{n}]" in text]
    later = [e["prompt"] for e in trace.of_type("proposal") if e["iteration"] == 3]
    first = trace.oracle_calls()[0]["canonical"]
    assert all(first in p.split("\n\n")[0] for p in later)


def test_traces_byte_identical_across_reruns():
    a, _ = run(script(scientist=alcohols(12), verifier=[INCONSISTENT, CONSISTENT], exhausted="cycle"), budget=8, iterations=10)
    b, _ = run(script(scientist=alcohols(12), verifier=[INCONSISTENT, CONSISTENT], exhausted="cycle"), budget=8, iterations=10)
    assert a.to_jsonl() == b.to_jsonl()
    assert parse_trace(a.to_jsonl()).to_jsonl() == a.to_jsonl()


def test_heuristic_backend_is_seed_deterministic():
    cfg = CampaignConfig(budget=15, iterations=15, seed=3)
    a = run_campaign(ALBUTEROL, HeuristicBackend(seed=3), cfg, POOL).to_jsonl()
    b = run_campaign(ALBUTEROL, HeuristicBackend(seed=3), cfg, POOL).to_jsonl()
    c = run_campaign(ALBUTEROL, HeuristicBackend(seed=4), cfg, POOL).to_jsonl()
    assert a == b and a != c


@pytest.mark.parametrize(
    "flag, absent",
    [("use_analysts", {"analyst", "tool_analysis"}), ("use_verifier", {"verdict"}), ("use_reviewer", {"review"})],
)
def test_ablation_flags(flag, absent):
    full, _ = run(fixture(), budget=10, iterations=4)
    ablated, backend = run(fixture(), budget=10, iterations=4, **{flag: False})
    assert absent <= set(types(full))
    assert not absent & set(types(ablated))
    assert len(ablated.oracle_calls()) == 4
    if flag == "use_verifier":
        assert all(e["verified"] is None for e in ablated.of_type("oracle"))
        assert backend.calls["verifier"] == 0


# ------------------------------------------------------ random schedules

_SCI = st.one_of(
    st.sampled_from([proposal(s) for s in ("CCO", "OCC", "CCN", "c1ccccc1O", "CC(=O)O", "C1CC", "CCCCO", "CC(C)O")]),
    st.just("garbage"),
    st.just({"__error__": "timeout"}),
)
_VER = st.sampled_from([CONSISTENT, INCONSISTENT, {**INCONSISTENT, "consistency": "INCONSISTENT"}, "junk", {"__error__": "503"}])
_REV = st.sampled_from([{"step1": "a", "step2": "b", "step3": "c"}, "junk", {"__error__": "500"}])


@settings(max_examples=120, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(
    st.lists(_SCI, min_size=1, max_size=12),
    st.lists(_VER, min_size=1, max_size=6),
    st.lists(_REV, min_size=1, max_size=3),
    st.integers(1, 6),
    st.integers(1, 8),
    st.integers(0, 3),
    st.integers(1, 3),
    st.sampled_from(["repeat_last", "cycle"]),
)
def test_random_schedules_respect_budget_and_call_bound(sci, ver, rev, budget, n, t, r, policy):
    s = script(scientist=sci, verifier=ver, reviewer=rev, exhausted=policy)
    cfg = dict(budget=budget, iterations=n, verifier_rounds=t, parse_retries=r)
    trace, backend = run(s, **cfg)
    config = CampaignConfig(**cfg)
    end = trace.events[-1]
    assert end["type"] == "end"
    assert end["ledger_consumed"] <= budget
    assert len(trace.oracle_calls()) == end["ledger_consumed"]
    assert end["iterations"] <= n
    assert end["backend_calls"] == sum(backend.calls.values())
    assert end["backend_calls"] <= config.max_backend_calls()
    # Each backend call leaves exactly one event: a parsed reply or a logged failure.
    per_iter: dict[int, int] = {}
    for e in trace.events:
        if e["type"] in ("proposal", "verdict", "review", "parse_error", "backend_error") and "iteration" in e:
            if e.get("synthetic") or e.get("failed"):
                continue
            per_iter[e["iteration"]] = per_iter.get(e["iteration"], 0) + 1
    assert sum(per_iter.values()) + backend.calls["analyst"] == end["backend_calls"]
    assert all(c <= config.calls_per_iteration for c in per_iter.values())
    seqs = [e["seq"] for e in trace.events]
    assert seqs == sorted(seqs)
    assert parse_trace(trace.to_jsonl()).to_jsonl() == trace.to_jsonl()


# ------------------------------------------------------------ backends


def test_create_backend_kinds():
    assert create_backend("mock", script=str(FIXTURE)).name == "mock"
    assert create_backend("heuristic", seed=1).name == "heuristic"
    with pytest.raises(ValueError):
        create_backend("telepathy")


def test_mock_exhaustion_policies():
    req = BackendRequest("reviewer", "p", "reviewer.v1")
    m = MockBackend({"reviewer": ["a", "b"]}, exhausted="error")
    assert [m.complete(req).text for _ in range(2)] == ["a", "b"]
    with pytest.raises(BackendError):
        m.complete(req)
    m = MockBackend({"reviewer": ["a", "b"], "exhausted": "cycle"})
    assert [m.complete(req).text for _ in range(3)] == ["a", "b", "a"]
    with pytest.raises(ValueError):
        MockBackend({"exhausted": "explode"})


def _http(handler, **kw) -> HttpBackend:
    return HttpBackend("test-model", "sk-test", "https://llm.invalid/v1", backoff=0.0, transport=httpx.MockTransport(handler), **kw)


def _ok(content: str) -> httpx.Response:
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": content}}]})


def test_http_backend_request_shape():
    seen = []

    def handler(request: httpx.Request) -> httpx.Response:
        seen.append(request)
        return _ok(json.dumps(CONSISTENT))

    b = _http(handler, json_mode=True)
    out = b.complete(BackendRequest("analyst", "PROMPT", "analyst.v1", tool_catalog=(("fr_benzene", "Number of benzene rings"),)))
    assert json.loads(out.text) == CONSISTENT
    req = seen[0]
    assert str(req.url) == "https://llm.invalid/v1/chat/completions"
    assert req.headers["authorization"] == "Bearer sk-test"
    body = json.loads(req.content)
    assert body["model"] == "test-model" and body["response_format"] == {"type": "json_object"}
    assert body["messages"][0]["role"] == "system" and "fr_benzene" in body["messages"][0]["content"]
    assert body["messages"][-1] == {"role": "user", "content": "PROMPT"}


def test_http_backend_retries_transient_errors():
    codes = iter([429, 503])

    def handler(request):
        code = next(codes, 200)
        return _ok("done") if code == 200 else httpx.Response(code)

    assert _http(handler).complete(BackendRequest("reviewer", "p", "reviewer.v1")).text == "done"


def test_http_backend_errors():
    with pytest.raises(BackendError):
        _http(lambda r: httpx.Response(400, text="bad request")).complete(BackendRequest("reviewer", "p", "reviewer.v1"))
    with pytest.raises(BackendError):
        _http(lambda r: httpx.Response(503), max_retries=1).complete(BackendRequest("reviewer", "p", "reviewer.v1"))
    with pytest.raises(BackendError):
        _http(lambda r: httpx.Response(200, json={"oops": 1})).complete(BackendRequest("reviewer", "p", "reviewer.v1"))


def test_http_backend_from_env(monkeypatch):
    monkeypatch.delenv("MOLOPT_API_KEY", raising=False)
    with pytest.raises(BackendError):
        HttpBackend.from_env(model="m")
    monkeypatch.setenv("MOLOPT_API_KEY", "k")
    monkeypatch.delenv("MOLOPT_MODEL", raising=False)
    with pytest.raises(BackendError):
        HttpBackend.from_env()
    monkeypatch.setenv("MOLOPT_MODEL", "m")
    assert HttpBackend.from_env().model == "m"


def test_campaign_over_http_backend():
    replies = iter(
        [json.dumps(a) for a in fixture()["analyst"]]
        + [json.dumps(proposal("CCO")), json.dumps(CONSISTENT), json.dumps({"step1": "", "step2": "", "step3": "more OH"})]
    )

    def handler(request):
        return _ok(next(replies))

    trace = run_campaign(ALBUTEROL, _http(handler), CampaignConfig(budget=5, iterations=1), POOL)
    assert trace.oracle_calls()[0]["canonical"] == "CCO"
    assert trace.header["backend"] == "http"
