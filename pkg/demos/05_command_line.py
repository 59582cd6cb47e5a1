"""
Command-line round trip
=======================

Simulate a data set, fit it, score the fit and sweep the trimming level,
all through the ``cwrm`` entry point (called in-process here).
"""

import json
import tempfile
from pathlib import Path

from cwrm.cli import main

work = Path(tempfile.mkdtemp())
data = work / "simdata1.csv"
report = work / "fit.json"

main(["simulate", "--preset", "simdata1", "--seed", "3", "--out", str(data)])
main(["fit", str(data), "--groups", "2", "--alpha", "0.1", "--starts", "16", "--seed", "7",
      "--out", str(report)])
fitted = json.loads(report.read_text())
print(f"retained {fitted['retained']} of {fitted['n']}, objective {fitted['objective']:.2f}")
print("per-row table starts with:")
print("".join((work / "fit_rows.csv").read_text().splitlines(keepends=True)[:4]))

print("evaluation against the generating preset:")
main(["evaluate", str(data), str(report), "--preset", "simdata1"])

print("sweep over alpha:")
main(["sweep", str(data), "--alpha", "0,0.05,0.1,0.15", "--starts", "8"])
