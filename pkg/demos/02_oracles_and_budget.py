"""Score molecules against benchmark tasks and watch the call budget.

Run: python3 demos/02_oracles_and_budget.py
"""

from molopt.chem import mol_from_smiles
from molopt.oracle import BudgetExhausted, BudgetLedger, Family, evaluate, get_task, score_molecule, task_ids

CANDIDATES = {
    "albuterol": "CC(C)(C)NCC(O)c1ccc(O)c(CO)c1",
    "aspirin": "CC(=O)Oc1ccccc1C(=O)O",
    "caffeine": "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    "celecoxib": "Cc1ccc(-c2cc(C(F)(F)F)nn2-c2ccc(S(N)(=O)=O)cc2)cc1",
}

print("The task suite, by family:")
by_family: dict[Family, list[str]] = {}
for t in task_ids():
    by_family.setdefault(get_task(t).family, []).append(t)
for fam, ids in by_family.items():
    print(f"  {fam.value:<18} {', '.join(ids)}")

print("\nUnmetered scores (exploration only, no budget involved):")
tasks = ["qed", "albuterol_similarity", "celecoxib_rediscovery", "isomers_c7h8n2o2", "osimertinib_mpo"]
print("  " + " " * 10 + "".join(f"{t[:14]:>16}" for t in tasks))
for name, smi in CANDIDATES.items():
    mol = mol_from_smiles(smi)
    print(f"  {name:<10}" + "".join(f"{score_molecule(get_task(t), mol):>16.3f}" for t in tasks))

print("\nMetered evaluation: only new canonical molecules cost a call.")
ledger = BudgetLedger(budget=3)
spec = get_task("qed")
for smi in ("CCO", "OCC", "C1CC", "c1ccccc1", "C1=CC=CC=C1", "CC(=O)O", "CCN"):
    try:
        score, consumed = evaluate(ledger, spec, smi)
        print(f"  {smi:<14} score {score:.3f}  charged={consumed}  used {ledger.consumed}/{ledger.budget}")
    except BudgetExhausted:
        print(f"  {smi:<14} refused: budget exhausted")

print("\nExternal-model tasks stay explicit until a scorer is registered:")
print(f"  drd2 family: {get_task('drd2').family.value}")
