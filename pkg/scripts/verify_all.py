"""Run `pctlsat verify` over the bundled machines and print a summary table."""

from __future__ import annotations

import contextlib
import io
import json
import sys
from pathlib import Path

from pctlsat.cli import main

ROOT = Path(__file__).resolve().parent.parent
M = ROOT / "machines"

RUNS = [
    ("param n=5", ["param", "--n", "5"]),
    ("param n=5 (3n+1 layout)", ["param", "--n", "5", "--printed"]),
    *[(f"one-counter {name}", ["one-counter", "--machine", str(M / f"{name}.mm")])
      for name in ("loop", "count3", "nondet", "zeroskip", "unbounded")],
    ("product loop x loop +rec", ["product", "--m1", str(M / "loop.mm"), "--m2", str(M / "loop.mm"),
                                  "--partition", str(M / "loop_partition.json"), "--recurrence"]),
    ("product sink +rec", ["product", "--m1", str(M / "sink.mm"), "--m2", str(M / "sink_partner.mm"),
                           "--partition", str(M / "sink_partition.json"), "--recurrence"]),
    *[(f"two-counter {name}", ["product", "--machine", str(M / f"{name}.mm")])
      for name in ("swap2", "transfer2", "grow2")],
]


def run(args):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["verify", *args, "--json"])
    text = buf.getvalue()
    try:
        return code, json.loads(text)
    except json.JSONDecodeError:
        return code, {}


def main_():
    print(f"{'run':32} {'exit':>4} {'states':>7} {'sat':>6}  notes")
    worst = 0
    for name, args in RUNS:
        code, rep = run(args)
        worst = max(worst, code)
        note = "no finite witness" if rep.get("witness", 0) is None else ""
        if "label1_recurs" in rep:
            note = f"label 1 recurs: {rep['label1_recurs']}"
        print(f"{name:32} {code:>4} {rep.get('states', '-'):>7} {str(rep.get('sat', '-')):>6}  {note}")
    return worst


if __name__ == "__main__":
    sys.exit(1 if main_() > 1 else 0)
