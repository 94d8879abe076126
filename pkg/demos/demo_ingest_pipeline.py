"""
From survey extracts to stability reports
==========================================

Build the two input CSVs by hand, ingest them into a canonical market,
inspect the constructed quantities, and run the sole-custody analysis.
The same flow is available on the command line:

    stablehh ingest --agents agents.csv --households households.csv --out market.json
    stablehh stability --market market.json --model spc --out report.json
    stablehh bounds --market market.json --report report.json --model spc --out bounds.csv
    stablehh report --stability report.json --bounds bounds.csv
"""

import tempfile
from pathlib import Path

from stablehh import SoleCustody, ingest_markets, solve_stability_indices, validate_market

AGENTS = """id,gender,wage,work_hours,age,region,n_children,spouse_id
m1,male,14,44,41,north,2,w1
w1,female,11,30,39,north,2,m1
m2,male,22,50,52,north,0,w2
w2,female,18,38,47,north,0,m2
m3,male,9,35,33,north,1,w3
w3,female,8,25,31,north,1,m3
sf1,female,12,32,38,north,0,
sm1,male,16,41,49,north,0,
"""

HOUSEHOLDS = """household_id,member_ids,total_expenditure,assignable_private_m,assignable_private_w,big_decision_share
h1,m1;w1,1900,120,90,0.5
h2,m2;w2,2600,200,210,0.5
h3,m3;w3,1100,60,70,0.5
h4,sf1,700,,,
h5,sm1,900,,,
"""

workdir = Path(tempfile.mkdtemp())
(workdir / "agents.csv").write_text(AGENTS)
(workdir / "households.csv").write_text(HOUSEHOLDS)

(market,) = ingest_markets(str(workdir / "agents.csv"), str(workdir / "households.csv"))
print("violations:", validate_market(market))

# Bundles: children's spending is imputed from the equivalence-scale
# table, the adult remainder splits evenly into private and public.
bundle = market.bundles["h1"]
print(f"couple h1: children {bundle.child_total_C:.0f}, private {bundle.q_priv:.0f}, "
      f"public {bundle.Q_pub:.0f}, leisure ({bundle.leisure_m:.0f}, {bundle.leisure_w:.0f})")

# Non-labor income is full spending minus potential labor income; the
# consideration window is the 1st/99th percentile of matched couples'
# age differences.
print("household non-labor income:", round(market.grid.nonlabor_household["h1"], 2))
print("consideration window:", tuple(round(x, 2) for x in market.consideration.window))
print("single female sf1 is considered by:",
      [a for a in market.agents if "sf1" in market.consideration.sets[a]])

report = solve_stability_indices(market, SoleCustody())
print(f"\nsole custody: {len(report.options)} exit options, sum of indices {report.sum_indices:.4f}")
for couple in report.couples:
    print(f"  {couple.household_id}: average {couple.average_index:.4f}, minimum {couple.minimum_index:.4f}")
