"""Reproducible artifact generation through the command line front end.

Drives the installed entry point in-process: a single run, then a sweep
that fans three torsion levels into per-run subdirectories.  Everything
lands under demo_out/ as CSV/JSON; byte-identical on repeat runs.
"""
import json
import pathlib

from grflab import cli

out = pathlib.Path("demo_out")

code = cli.main(["cylinder-flow", "--h0sq", "0.5", "--out", str(out / "single")])
assert code == 0

sweep = out / "sweep.json"
out.mkdir(exist_ok=True)
sweep.write_text(json.dumps({
    "runs": [
        {"name": "low", "parameters": {"h0sq": 0.05}},
        {"name": "mid", "parameters": {"h0sq": 0.5}},
        {"name": "high", "parameters": {"h0sq": 1.5}},
    ],
}))
code = cli.main(["blowup", "--sweep", str(sweep), "--out", str(out / "fan")])
assert code == 0

print()
print("artifacts:")
for path in sorted(out.rglob("*")):
    if path.is_file():
        print(f"  {path}")
