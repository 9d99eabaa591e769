from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from pctlsat.geometry import Vec2, default_constants
from pctlsat.minsky import load_machine

MACHINES = Path(__file__).resolve().parent.parent / "machines"


@pytest.fixture(scope="session")
def c():
    return default_constants()


@pytest.fixture(scope="session")
def machine():
    def _load(name, counters=None):
        return load_machine(MACHINES / name, counters)
    return _load


def rationals(lo, hi, max_den=200, open_lo=True, open_hi=True):
    """Rationals in an interval, built from integer numerators and denominators."""
    lo, hi = Fraction(lo), Fraction(hi)

    def between(den):
        a = math.floor(lo * den) + 1 if open_lo else math.ceil(lo * den)
        b = math.ceil(hi * den) - 1 if open_hi else math.floor(hi * den)
        if a > b:
            return st.just((lo + hi) / 2)
        return st.integers(a, b).map(lambda n: Fraction(n, den))

    return st.integers(1, max_den).flatmap(between)


# points of W for the default constants: x1 in (1/4, 3/4), x2 in [0, 2]
w_points = st.builds(Vec2, rationals("1/4", "3/4"), rationals(0, 2, open_lo=False, open_hi=False))
