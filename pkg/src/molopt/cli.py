"""Command-line entry point: ``molopt <command> ...``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 backend error,
5 oracle budget exhausted before the requested iterations finished.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BACKEND, EXIT_BUDGET = 0, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _emit(obj: Any) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False))


def _task(task_id: str):
    from molopt.oracle import UnknownTaskError, get_task

    try:
        return get_task(task_id)
    except UnknownTaskError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None


def _dataset(path: str | None):
    from molopt.harness import DataError, load_dataset, sample_dataset

    try:
        return load_dataset(path) if path else sample_dataset()
    except DataError as exc:
        raise CliError(str(exc), EXIT_DATA) from None


def _config(args: argparse.Namespace):
    from molopt.agents import CampaignConfig

    base: dict[str, Any] = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}", EXIT_DATA) from None
    overrides = {
        "budget": args.budget,
        "iterations": args.iters,
        "seed": args.seed,
        "verifier_rounds": args.verifier_rounds,
        "parse_retries": args.parse_retries,
        "top_k": args.k,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_analysts:
        base["use_analysts"] = False
    if args.no_verifier:
        base["use_verifier"] = False
    if args.no_reviewer:
        base["use_reviewer"] = False
    if args.record_prompts:
        base["record_prompts"] = True
    try:
        return CampaignConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad config: {exc}", EXIT_USAGE) from None


def cmd_run(args: argparse.Namespace) -> int:
    from molopt.agents import BackendError, create_backend, run_campaign
    from molopt.harness import persist_trace, prescore_and_retrieve, top10_auc
    from molopt.oracle import OracleUnavailable

    spec = _task(args.task)
    config = _config(args)
    options: dict[str, Any] = {}
    if args.backend == "mock":
        if not args.script:
            raise CliError("--backend mock needs --script FIXTURE.json", EXIT_USAGE)
        options["script"] = args.script
    elif args.backend == "heuristic":
        options["seed"] = config.seed
    elif args.model:
        options["model"] = args.model
    try:
        backend = create_backend(args.backend, **options)
        pool = prescore_and_retrieve(_dataset(args.data), spec, config.top_k, workers=args.workers)
        trace = run_campaign(spec, backend, config, pool)
    except BackendError as exc:
        raise CliError(f"backend error: {exc}", EXIT_BACKEND) from None
    except OracleUnavailable as exc:
        raise CliError(str(exc), EXIT_DATA) from None
    if args.out:
        persist_trace(trace, args.out)
    end = trace.events[-1]
    summary: dict[str, Any] = {"task": spec.task_id, "end": end["reason"], "iterations": end["iterations"],
                               "oracle_calls": end["ledger_consumed"], "backend_calls": end["backend_calls"]}
    if trace.oracle_calls():
        summary.update(top10_auc(trace, config.budget).to_dict())
    _emit(summary)
    if end["reason"] == "backend_abort":
        return EXIT_BACKEND
    if end["reason"] == "budget" and end["iterations"] < config.n_iterations:
        return EXIT_BUDGET
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    from molopt.oracle import OracleUnavailable, score_smiles

    spec = _task(args.task)
    try:
        scored = score_smiles(spec, args.smiles)
    except OracleUnavailable as exc:
        raise CliError(str(exc), EXIT_DATA) from None
    _emit({"task": spec.task_id, "smiles": args.smiles, "canonical": scored.canonical, "score": scored.score,
           "diagnostic": scored.diagnostic})
    return EXIT_OK if scored.canonical is not None else EXIT_DATA


def cmd_describe(args: argparse.Namespace) -> int:
    from molopt.chem import smi2mol_with_errors
    from molopt.descriptors import UnknownToolError, list_tools, run_tool

    mol, diag = smi2mol_with_errors(args.smiles)
    if mol is None:
        raise CliError(f"invalid SMILES: {'; '.join(diag.messages)}", EXIT_DATA)
    names = [t.strip() for t in args.tools.split(",") if t.strip()] if args.tools else [t.name for t in list_tools()]
    out = {}
    for name in names:
        try:
            out[name] = run_tool(name, mol).to_dict()
        except UnknownToolError as exc:
            raise CliError(str(exc), EXIT_USAGE) from None
    _emit({"smiles": args.smiles, "tools": out})
    return EXIT_OK


def cmd_retrieve(args: argparse.Namespace) -> int:
    from molopt.harness import prescore_and_retrieve
    from molopt.oracle import OracleUnavailable

    spec = _task(args.task)
    data = _dataset(args.data)
    try:
        pool = prescore_and_retrieve(data, spec, args.k, workers=args.workers, use_cache=not args.no_cache)
    except OracleUnavailable as exc:
        raise CliError(str(exc), EXIT_DATA) from None
    result = {**pool.to_dict(), "dataset": data.source, "records": len(data), "skipped_rows": len(data.warnings)}
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _emit(result if not args.out else {"stats": result["stats"], "written": args.out})
    return EXIT_OK


def cmd_eval_trace(args: argparse.Namespace) -> int:
    from molopt.harness import TraceError, load_trace, top10_auc

    try:
        trace = load_trace(args.trace)
        report = top10_auc(trace, args.budget)
    except TraceError as exc:
        raise CliError(str(exc), EXIT_DATA) from None
    except ValueError as exc:
        raise CliError(f"{args.trace}: {exc}", EXIT_DATA) from None
    _emit(report.to_dict())
    return EXIT_OK


def cmd_tools(args: argparse.Namespace) -> int:
    from molopt.descriptors import list_tools

    try:
        tools = list_tools(args.category)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    for t in tools:
        print(f"{t.name}\t{t.category.value}\t{t.availability.value}\t{t.description}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    from molopt.harness import TraceError, load_trace, summarize

    try:
        traces = [load_trace(p) for p in args.traces]
        summary = summarize(traces, args.budget)
    except (TraceError, ValueError) as exc:
        raise CliError(str(exc), EXIT_DATA) from None
    if args.json:
        _emit(summary.to_dict())
    else:
        print(summary.to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="molopt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an optimization campaign")
    r.add_argument("--task", required=True)
    r.add_argument("--backend", choices=("http", "mock", "heuristic"), default="heuristic")
    r.add_argument("--budget", type=int)
    r.add_argument("--iters", type=int, help="campaign iterations N (default: the budget)")
    r.add_argument("--seed", type=int)
    r.add_argument("--verifier-rounds", type=int)
    r.add_argument("--parse-retries", type=int)
    r.add_argument("--k", type=int, help="reference pool size (default 100)")
    r.add_argument("--data", help="SMILES dataset for the reference pool (default: bundled MOSES sample)")
    r.add_argument("--config", help="JSON file of campaign settings; flags override it")
    r.add_argument("--script", help="fixture file for the mock backend")
    r.add_argument("--model", help="model name for the http backend (else MOLOPT_MODEL)")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--no-analysts", action="store_true")
    r.add_argument("--no-verifier", action="store_true")
    r.add_argument("--no-reviewer", action="store_true")
    r.add_argument("--record-prompts", action="store_true", help="store full prompt text in the trace")
    r.add_argument("--out", help="write the trace (JSONL) here")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("score", help="score one SMILES for a task (unmetered)")
    s.add_argument("--task", required=True)
    s.add_argument("--smiles", required=True)
    s.set_defaults(func=cmd_score)

    d = sub.add_parser("describe", help="run descriptor tools on a SMILES")
    d.add_argument("--smiles", required=True)
    d.add_argument("--tools", help="comma-separated tool names (default: all)")
    d.set_defaults(func=cmd_describe)

    rt = sub.add_parser("retrieve", help="pre-score a dataset and print the top-k pool with statistics")
    rt.add_argument("--task", required=True)
    rt.add_argument("--data", help="SMILES dataset (default: bundled MOSES sample)")
    rt.add_argument("--k", type=int, default=100)
    rt.add_argument("--workers", type=int, default=1)
    rt.add_argument("--no-cache", action="store_true")
    rt.add_argument("--out")
    rt.set_defaults(func=cmd_retrieve)

    e = sub.add_parser("eval-trace", help="top-10 AUC of a saved trace")
    e.add_argument("trace")
    e.add_argument("--budget", type=int, default=1000)
    e.set_defaults(func=cmd_eval_trace)

    t = sub.add_parser("tools", help="descriptor tool registry")
    tsub = t.add_subparsers(dest="tools_command", required=True)
    tl = tsub.add_parser("list", help="list registered tools")
    tl.add_argument("--category")
    tl.set_defaults(func=cmd_tools)

    rp = sub.add_parser("report", help="mean and std of AUC top-10 per task across traces")
    rp.add_argument("traces", nargs="+")
    rp.add_argument("--budget", type=int, help="override each trace's configured budget")
    rp.add_argument("--json", action="store_true")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"molopt: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
