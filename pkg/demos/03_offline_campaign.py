"""Run a full agent campaign offline with the mutation-based backend.

The heuristic backend stands in for a language model: it answers every role
with well-formed JSON and proposes edits of the best molecules seen so far.
Run: python3 demos/03_offline_campaign.py [budget]
"""

import sys
import tempfile
from pathlib import Path

from molopt.agents import CampaignConfig, run_campaign
from molopt.agents.backends.heuristic import HeuristicBackend
from molopt.harness import persist_trace, prescore_and_retrieve, running_top10, sample_dataset, top10_auc
from molopt.oracle import get_task

budget = int(sys.argv[1]) if len(sys.argv) > 1 else 100
spec = get_task("albuterol_similarity")

print(f"Task: {spec.description}\n")
data = sample_dataset()
pool = prescore_and_retrieve(data, spec, k=100)
print(f"Reference pool: top {len(pool.entries)} of {len(data)} bundled molecules")
print(f"  dataset mean {pool.stats.mean:.3f}, best {pool.entries[0][1]:.3f} ({pool.entries[0][0]})\n")

runs = {
    "full team": {},
    "no analysts": {"use_analysts": False},
    "no verifier": {"use_verifier": False},
    "no reviewer": {"use_reviewer": False},
}
for label, flags in runs.items():
    config = CampaignConfig(budget=budget, seed=0, **flags)
    trace = run_campaign(spec, HeuristicBackend(seed=0), config, pool)
    scores = trace.scores()
    report = top10_auc(trace, budget)
    kinds = sorted({e["type"] for e in trace.events})
    print(f"{label:<12} calls {len(scores):>4}  AUC top-10 {report.auc_top10:.3f}  final top-10 {running_top10(scores)[-1]:.3f}")
    print(f"{'':<12} event types: {', '.join(kinds)}")
    if label == "full team":
        best = sorted(trace.oracle_calls(), key=lambda e: -e["score"])[:3]
        for e in best:
            print(f"{'':<12} {e['score']:.3f}  {e['canonical']}")
        out = persist_trace(trace, Path(tempfile.gettempdir()) / "molopt-demo-trace.jsonl")
        print(f"{'':<12} trace written to {out}")
