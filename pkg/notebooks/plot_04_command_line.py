"""
Command-line workflow
=====================

The ``capdist`` command writes a preset channel to JSON, sweeps it, and checks
the resulting curve.  This script drives it through ``main`` so it runs
anywhere the package is installed.
"""

import tempfile
from pathlib import Path

from capdist.cli import main

work = Path(tempfile.mkdtemp())

# %%
# Export the binary example, then sweep it from the file.
main(["preset", "binary", "--q", "0.4", "--out", str(work / "binary.json")])
main(["sweep", "--channel", str(work / "binary.json"), "--out", str(work / "curve.csv")])
print((work / "curve.csv").read_text())

# %%
# Structural check of the stored curve.  Exit status 0 means it passed.
status = main(["check", str(work / "curve.csv")])
print("check exit status:", status)

# %%
# A single point, with the per-iteration trace sent to stderr.
main(["solve", "--preset", "binary", "--mu", "0.5", "--format", "json"])
