"""
Driving runs from the command line
==================================

The ``qkud`` entry point writes one CSV per run, prefixed by a JSON line
holding the resolved settings, and a summary for sweeps. The same calls
are made here through ``cli.main``.
"""

import tempfile
from pathlib import Path

from qkud import cli

out = Path(tempfile.mkdtemp())

cli.main(["exact", "--model", "hubbard:3,1,4"])

# %%
code = cli.main(["run", "--model", "tfim:4,1,1", "--param", "1e-6", "--delta", "1e-9",
                 "--out", str(out / "tfim.csv")])
print("exit code", code)
print((out / "tfim.csv").read_text()[:400])

# %%
code = cli.main(["sweep", "--model", "hubbard:3,1,4", "--psi0", "9", "--method", "qrte",
                 "--param", "0.1,0.5,1.0", "--max-iter", "50", "--jobs", "3", "--out", str(out / "sweep")])
print("exit code", code)
print((out / "sweep" / "summary.csv").read_text())
