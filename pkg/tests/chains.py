"""Random small chains and brute-force probability oracles shared by the checker tests."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from pctlsat.pctl import MarkovChain


@st.composite
def small_chains(draw, max_states=6, max_den=8, props=("a", "b")):
    n = draw(st.integers(1, max_states))
    states = [f"s{i}" for i in range(n)]
    trans, valuation = {}, {}
    for s in states:
        den = draw(st.integers(1, max_den))
        k = draw(st.integers(1, min(den, n)))
        targets = draw(st.permutations(states))[:k]
        cuts = sorted(draw(st.sets(st.integers(1, den - 1), min_size=k - 1, max_size=k - 1))) if k > 1 else []
        parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
        trans[s] = [(t, Fraction(w, den)) for t, w in zip(targets, parts)]
        valuation[s] = draw(st.sets(st.sampled_from(props)))
    return MarkovChain(states, valuation, trans, start=states[0])


def paths_until(mc, s, A, B, k):
    """P(A U<=k B) from s by summing over every path prefix of length <= k."""
    if s in B:
        return Fraction(1)
    if k == 0 or s not in A:
        return Fraction(0)
    return sum((p * paths_until(mc, t, A, B, k - 1) for t, p in mc.trans[s]), Fraction(0))


def restricted_acyclic(mc, A, B):
    """True when the graph on A-states that are not B-states has no cycle."""
    inner = [s for s in mc.states if s in A and s not in B]
    colour = {}

    def visit(s):
        colour[s] = 1
        for t, _ in mc.trans[s]:
            if t in A and t not in B:
                if colour.get(t) == 1 or (t not in colour and not visit(t)):
                    return False
        colour[s] = 2
        return True

    return all(s in colour or visit(s) for s in inner)
