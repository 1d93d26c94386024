"""
The command line front end
==========================

The same computations are available as ``domain-metrics`` subcommands that
read a domain spec from JSON.  This script drives them through ``run``.
"""

# %%
import json
import sys

from domain_metrics.cli import run

with open("disk.json", "w") as fh:
    json.dump({"kind": "ball", "n": 2, "center": [0, 0], "radius": 1}, fh)

# %%
# All seven metrics for one pair, as a table.
run(["dist", "--domain", "disk.json", "--x", "0,0", "--y", "0.5,0", "--h", "0.02", "--m", "4000"])

# %%
# The inequality suite on a small sample; exit status 3 would signal failures.
code = run(["verify", "--domain", "disk.json", "--pairs", "20", "--h", "0.05", "--m", "2000",
            "--out", "verify.json", "--csv", "pairs.csv"])
print("exit status", code, "passed:", json.load(open("verify.json"))["passed"])

# %%
# A grid coarser than the domain is a numerical failure, exit status 2.
sys.stdout.flush()
print("exit status", run(["dist", "--domain", "disk.json", "--x", "0,0", "--y", "0.5,0", "--h", "3"]))
