"""Driving the command line from Python and reading its files back.

Run: python demos/06_cli_roundtrip.py
The same commands work from a shell, e.g. ``asymadmit analyze --out out``.
"""
import csv
import json
import tempfile
from pathlib import Path

from asymadmit.cli import main

out = Path(tempfile.mkdtemp())

# %% Exit code 0 for a stable damper, 2 for an unstable one.
print("analyze d=0.34 ->", main(["analyze", "--out", str(out)]))
print("analyze d=0.30 ->", main(["analyze", "--out", str(out), "--override", "d=0.30"]))
print(json.loads((out / "report.json").read_text())["verdict"])

# %% A config file plus overrides; every JSON output carries the config hash.
cfg = out / "cfg.json"
cfg.write_text(json.dumps({"ka": 0.0, "m": 1.0}))
main(["rootlocus", "--config", str(cfg), "--out", str(out), "--override", "ks=40"])
with open(out / "rootlocus.csv") as fh:
    rows = list(csv.reader(fh))
print(rows[0], rows[1], len(rows) - 1, "samples")
print(json.loads((out / "rootlocus.json").read_text())["config_sha256"])

# %% A bad field is reported by name with exit code 1.
print("unknown key ->", main(["analyze", "--out", str(out), "--override", "mass=1"]))
