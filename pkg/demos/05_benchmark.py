"""Desk-scale benchmark: the bundled suite on a 3x3 grid, SABRE vs MIRAGE.

Reports geometric-mean critical-path depth over independent seeds.  Run the
same comparison from the shell with:

    mirage bench --topology grid:3x3 --modes sabre,mirage --seed 1
"""

import json
from pathlib import Path

from mirage import cli

suite = Path(cli.__file__).parent / "data" / "bench"
out = Path("bench_report.json")
args = ["bench", "--suite", str(suite), "--topology", "grid:3x3",
        "--modes", "sabre,mirage", "--instances", "3", "--trials", "8",
        "--layout-trials", "4", "--layout-passes", "2", "--seed", "1",
        "--out", str(out)]
print("running:", "mirage " + " ".join(args), "\n")
assert cli.main(args) == 0

record = json.loads(out.read_text())["record"]
print(f"{'circuit':18s} {'sabre depth':>12s} {'mirage depth':>13s} "
      f"{'sabre swaps':>12s} {'mirage swaps':>13s}")
for row in record["circuits"]:
    if "error" in row:
        print(f"{row['name']:18s} error: {row['error']['message']}")
        continue
    s, m = row["modes"]["sabre"], row["modes"]["mirage"]
    print(f"{row['name']:18s} {s['geomean_pulse_depth']:12.2f} "
          f"{m['geomean_pulse_depth']:13.2f} {s['mean_swap_count']:12.1f} "
          f"{m['mean_swap_count']:13.1f}")
print("\nsuite geometric means:", record["summary"])
print("full report written to", out)
