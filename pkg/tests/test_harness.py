from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molopt.cli import main
from molopt.harness import (
    DataError,
    RunTrace,
    TraceError,
    load_dataset,
    load_trace,
    parse_dataset,
    parse_trace,
    persist_trace,
    prescore,
    prescore_and_retrieve,
    running_top10,
    sample_dataset,
    summarize,
    top10_auc,
)
from molopt.oracle import get_task


def naive_auc(scores: list[float], budget: int) -> float:
    """Reference: re-sort the prefix after every call."""
    means = []
    for i in range(1, min(len(scores), budget) + 1):
        best = sorted(scores[:i], reverse=True)[:10]
        means.append(sum(best) / len(best))
    means += [means[-1]] * (budget - len(means))
    return sum(means) / budget


# ----------------------------------------------------------------- datasets


def test_invalid_row_dropped_with_warning():
    ds = parse_dataset("CCO\nC1CC\nc1ccccc1\n", "three.smi")
    assert [r.canonical for r in ds] == ["CCO", "c1ccccc1"]
    assert len(ds.warnings) == 1 and "three.smi:2" in ds.warnings[0]


def test_canonical_duplicates_collapse_to_first():
    ds = parse_dataset("CCO\nOCC\n")
    assert len(ds) == 1 and ds[0].smiles == "CCO"


def test_empty_file_is_error(tmp_path):
    p = tmp_path / "empty.smi"
    p.write_text("")
    with pytest.raises(DataError):
        load_dataset(p)
    with pytest.raises(DataError):
        load_dataset(tmp_path / "missing.smi")


def test_csv_with_header_and_quoted_newlines(tmp_path):
    p = tmp_path / "zinc.csv"
    p.write_text('smiles,logP,qed\n"CCO\n",0.1,0.4\n"c1ccccc1\n",1.7,0.44\n')
    ds = load_dataset(p)
    assert [r.canonical for r in ds] == ["CCO", "c1ccccc1"]


def test_plain_file_with_header_and_comments():
    ds = parse_dataset("smiles\n# note\nCCO extra-column\nCCN\n")
    assert [r.canonical for r in ds] == ["CCO", "CCN"]


def test_bundled_sample():
    ds = sample_dataset()
    assert len(ds) > 1900 and not ds.warnings


# ---------------------------------------------------------------- retrieval


def test_retrieval_sorted_with_tie_rule(tmp_path):
    ds = parse_dataset("CCO\nOCC\nCCN\nc1ccccc1\nCC\nCCC\n")
    pool = prescore_and_retrieve(ds, get_task("qed"), k=3, cache_dir=tmp_path)
    scores = [s for _, s in pool.entries]
    assert len(pool.entries) == 3 and scores == sorted(scores, reverse=True)
    big = prescore_and_retrieve(ds, get_task("qed"), k=100, cache_dir=tmp_path)
    assert len(big.entries) == len(ds)
    keyed = [(-s, smi) for smi, s in big.entries]
    assert keyed == sorted(keyed)


def test_retrieval_cache(tmp_path):
    ds = sample_dataset()
    spec = get_task("albuterol_similarity")
    first = prescore_and_retrieve(ds, spec, cache_dir=tmp_path)
    assert not first.from_cache and list(tmp_path.iterdir())
    second = prescore_and_retrieve(ds, spec, cache_dir=tmp_path)
    assert second.from_cache and second.entries == first.entries
    fresh, cached = prescore(ds, spec, cache_dir=tmp_path, use_cache=False)
    assert not cached and max(fresh) == first.entries[0][1]
    assert first.stats.n == len(ds)
    assert first.stats.min <= first.stats.mean <= first.stats.max


def test_retrieval_refuses_unscorable_task(tmp_path):
    from molopt.oracle import OracleUnavailable

    with pytest.raises(OracleUnavailable):
        prescore_and_retrieve(parse_dataset("CCO\n"), get_task("jnk3"), cache_dir=tmp_path)


# ---------------------------------------------------------------------- AUC


def test_auc_examples():
    assert top10_auc([0.3] * 25, budget=40).auc_top10 == pytest.approx(0.3)
    assert top10_auc([1.0], budget=10).auc_top10 == 1.0
    assert top10_auc([0.0, 1.0], budget=4).auc_top10 == 0.375


def test_auc_thousand_call_ramp_matches_reference():
    scores = [i / 1000 for i in range(1, 1001)]
    assert abs(top10_auc(scores, 1000).auc_top10 - naive_auc(scores, 1000)) < 1e-9


def test_auc_rejects_empty():
    with pytest.raises(ValueError):
        top10_auc([], 10)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=60), st.integers(1, 80))
def test_auc_matches_reference_and_bounds(scores, budget):
    rep = top10_auc(scores, budget)
    assert rep.auc_top10 == pytest.approx(naive_auc(scores, budget), abs=1e-9)
    m = running_top10(scores[:budget])
    assert min(m) - 1e-12 <= rep.auc_top10 <= max(m) + 1e-12
    assert rep.auc_top10 <= max(scores) + 1e-12
    # Once ten calls exist the running mean can only rise.
    assert all(b >= a - 1e-12 for a, b in zip(m[9:], m[10:]))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 0.9), min_size=10, max_size=30), st.integers(0, 40))
def test_auc_monotone_under_better_call(scores, spare):
    budget = len(scores) + 1 + spare
    better = sorted(scores, reverse=True)[9] + 0.05
    assert top10_auc(scores + [better], budget).auc_top10 > top10_auc(scores, budget).auc_top10


# -------------------------------------------------------------------- traces


def _trace() -> RunTrace:
    t = RunTrace(header={"task": {"task_id": "qed"}, "config": {"budget": 10}, "seed": 0})
    t.append("oracle", smiles="CCO", canonical="CCO", score=0.4, consumed_call=True)
    t.append("oracle", smiles="OCC", canonical="CCO", score=0.4, consumed_call=False)
    t.append("end", reason="iterations")
    return t


def test_persist_load_round_trip(tmp_path):
    t = _trace()
    path = persist_trace(t, tmp_path / "run.jsonl")
    back = load_trace(path)
    assert back.header == t.header and back.events == t.events
    first = path.read_text().splitlines()[0]
    assert json.loads(first)["format"] == "molopt-trace-1"


def test_truncated_final_line_names_line(tmp_path):
    text = _trace().to_jsonl()
    broken = text[: text.rstrip("\n").rfind("\n") + 12]
    with pytest.raises(TraceError) as err:
        parse_trace(broken)
    assert err.value.line == 4 and "line 4" in str(err.value)


def test_malformed_middle_line():
    lines = _trace().to_jsonl().splitlines()
    lines[2] = "{not json"
    with pytest.raises(TraceError) as err:
        parse_trace("\n".join(lines) + "\n")
    assert err.value.line == 3


def test_trace_keys_sorted_and_non_finite_rejected():
    line = _trace().to_jsonl().splitlines()[1]
    obj = json.loads(line)
    assert line == json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    t = RunTrace()
    t.append("oracle", score=float("nan"))
    with pytest.raises(TraceError):
        t.to_jsonl()


_json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6) | st.floats(allow_nan=False, allow_infinity=False) | st.text(max_size=8),
    lambda inner: st.lists(inner, max_size=3) | st.dictionaries(st.text(max_size=5), inner, max_size=3),
    max_leaves=8,
)


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.text(min_size=1, max_size=6).filter(lambda k: k != "format"), _json_values, max_size=4),
       st.lists(st.dictionaries(st.text(min_size=1, max_size=6).filter(lambda k: k not in ("seq", "type")), _json_values, max_size=4), max_size=6))
def test_persist_load_identity_property(header, events):
    t = RunTrace(header=header)
    for e in events:
        t.append("custom", **e)
    back = parse_trace(t.to_jsonl())
    assert back.header == header and back.events == t.events
    assert back.to_jsonl() == t.to_jsonl()


# ----------------------------------------------------------------- summaries


def _scored_trace(task: str, scores: list[float], budget: int) -> RunTrace:
    t = RunTrace(header={"task": {"task_id": task}, "config": {"budget": budget}})
    for i, s in enumerate(scores):
        t.append("oracle", smiles=f"C{i}", canonical=f"C{i}", score=s, consumed_call=True)
    return t


def test_summary_population_std_and_sum():
    traces = [_scored_trace("qed", [v], 1) for v in (0.1, 0.2, 0.3)] + [_scored_trace("median1", [0.5], 1)]
    s = summarize(traces)
    rows = {r.task_id: r for r in s.rows}
    assert rows["qed"].mean == pytest.approx(0.2)
    assert rows["qed"].std == pytest.approx(math.sqrt(0.02 / 3))
    assert rows["median1"].std == 0.0
    assert s.total == pytest.approx(0.7)
    assert "population std" in s.to_text()


# ---------------------------------------------------------------------- CLI


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["score", "--task", "qed", "--smiles", "CCO"]) == 0
    assert json.loads(capsys.readouterr().out)["score"] == pytest.approx(0.4068, abs=1e-4)
    assert main(["score", "--task", "nope", "--smiles", "CCO"]) == 2
    assert main(["bogus"]) == 2
    assert main(["score", "--task", "qed", "--smiles", "C1CC"]) == 3
    bad = tmp_path / "bad.smi"
    bad.write_text("xx\n")
    assert main(["retrieve", "--task", "qed", "--data", str(bad)]) == 3
    assert main(["run", "--task", "qed", "--backend", "mock"]) == 2
    assert main(["run", "--task", "drd2", "--budget", "2"]) == 3


def test_cli_run_eval_and_report(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MOLOPT_CACHE", str(tmp_path / "cache"))
    out = tmp_path / "run.jsonl"
    assert main(["run", "--task", "albuterol_similarity", "--budget", "12", "--seed", "1", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["oracle_calls"] == 12 and 0 < summary["auc_top10"] <= 1
    assert main(["eval-trace", str(out), "--budget", "12"]) == 0
    assert json.loads(capsys.readouterr().out)["auc_top10"] == pytest.approx(summary["auc_top10"])
    assert main(["report", str(out), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["rows"][0]["task_id"] == "albuterol_similarity"
    # Budget spent before the requested iterations: exit 5.
    assert main(["run", "--task", "albuterol_similarity", "--budget", "3", "--iters", "10"]) == 5


def test_cli_tools_and_describe(capsys):
    assert main(["tools", "list", "--category", "identifier"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 9
    assert main(["describe", "--smiles", "Oc1ccccc1", "--tools", "fr_phenol,calcnumhbd"]) == 0
    tools = json.loads(capsys.readouterr().out)["tools"]
    assert tools["fr_phenol"]["value"] == 1 and tools["calcnumhbd"]["value"] == 1
    assert main(["describe", "--smiles", "CCO", "--tools", "nope"]) == 2
    assert main(["tools", "list", "--category", "nope"]) == 2
