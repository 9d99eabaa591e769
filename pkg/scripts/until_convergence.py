"""How fast does P(A U<=k B) approach P(A U B) on small random chains?

Prints, for seeded random chains with at most 6 states and denominators at
most 8, the distribution of the gap after 64 steps and the worst offenders.
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from chains import restricted_acyclic  # noqa: E402
from test_acceptance import random_chain  # noqa: E402

from pctlsat.pctl import prob_until_bounded, prob_until_unbounded  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--chains", type=int, default=100)
    ap.add_argument("--k", type=int, default=64)
    args = ap.parse_args()
    eps = Fraction(1, 2**20)
    for seed in range(args.seeds):
        rng = random.Random(seed)
        cyclic, over, worst = 0, 0, Fraction(0)
        for _ in range(args.chains):
            mc = random_chain(rng)
            A = {s for s in mc.states if "a" in mc.props[s]}
            B = {s for s in mc.states if "b" in mc.props[s]}
            if restricted_acyclic(mc, A, B):
                continue
            cyclic += 1
            gap = max(prob_until_unbounded(mc, s, A, B) - prob_until_bounded(mc, s, A, B, args.k)
                      for s in mc.states)
            over += gap >= eps
            worst = max(worst, gap)
        print(f"seed {seed}: {cyclic} cyclic chains, {over} with gap >= 2^-20 after {args.k} steps, "
              f"worst gap {float(worst):.3e}")


if __name__ == "__main__":
    main()
