"""Bodies separate numerical classes.

Two divisors with the same class have identical bodies for every flag.
O(1,0) and O(0,1) on P1 x P1 are separated by a fibre flag: one body is a
horizontal segment, the other a vertical one.  The search below is over a
bounded family (all invariant flags plus seeded generic ones); it reports
separation, it does not prove anything about all flags.
"""
from pathlib import Path

from okbody.config import load_config
from okbody.lab_cli import theorem_a_experiment

cfg = load_config(Path(__file__).resolve().parents[1] / "configs" / "p1xp1_theorem_a.toml")
rep = theorem_a_experiment(cfg)
print(f"flags searched: {len(rep.details['flags'])}")
for row in rep.details["pairs"]:
    flags = [s["flag"] for s in row["separating_flags"]]
    print(f"  {row['label']}: equivalent={row['equivalent']} separated={row['separated']} {flags[:3]}")
print(f"verdict: {rep.verdict}")
