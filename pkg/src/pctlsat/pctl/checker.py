"""Exact PCTL model checking over finite Markov chains.

State sets are Python ints used as bitmasks (bit i is ``mc.states[i]``).
Qualitative bounds (0 and 1) are decided on the transition graph; every
other comparison is made against an exact rational probability.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

from ..geometry import Vec2
from .chain import MarkovChain
from .formula import (
    And, Atom, BoundedUntil, Const, ExactMatch, Implies, Next, Not, Or, PathFormula,
    Prob, StateFormula, Until, flatten,
)

StateSet = Union[int, Iterable[str]]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _compare(x, cmp: str, bound) -> bool:
    if cmp == "=":
        return x == bound
    if cmp == ">=":
        return x >= bound
    if cmp == ">":
        return x > bound
    if cmp == "<=":
        return x <= bound
    return x < bound


def _qualitative(cmp: str, bound: Fraction) -> str | None:
    """Classify a bound that only needs the prob-0 / prob-1 state sets.

    Returns one of "all", "none", "pos", "zero", "one", "notone" or None.
    """
    if bound == 0:
        return {">=": "all", ">": "pos", "<=": "zero", "<": "none", "=": "zero"}[cmp]
    if bound == 1:
        return {">=": "one", ">": "none", "<=": "all", "<": "notone", "=": "one"}[cmp]
    return None


class ModelChecker:
    """Bottom-up labelling with memoisation over (shared) subformulae."""

    def __init__(self, mc: MarkovChain):
        self.mc = mc
        self.n = len(mc.states)
        self.full = (1 << self.n) - 1
        self._sat: dict = {}
        self._vec: dict = {}
        masks: dict[str, int] = {}
        for i, s in enumerate(mc.states):
            for p in mc.props[s]:
                masks[p] = masks.get(p, 0) | (1 << i)
        self._prop_masks = masks

    # state formulae ------------------------------------------------------
    def sat(self, f: StateFormula) -> int:
        hit = self._sat.get(f)
        if hit is not None:
            return hit
        t = type(f)
        if t is And:
            out = self.full
            for g in flatten(f, And):
                out &= self.sat(g)
                if not out:
                    break
        elif t is Or:
            out = 0
            for g in flatten(f, Or):
                out |= self.sat(g)
                if out == self.full:
                    break
        elif t is Not:
            out = self.full & ~self.sat(f.sub)
        elif t is Implies:
            left = self.sat(f.left)
            out = (self.full & ~left) | (self.sat(f.right) if left else 0)
        elif t is Atom:
            out = self._prop_masks.get(f.name, 0)
        elif t is Const:
            out = self.full if f.value else 0
        elif t is ExactMatch:
            out = self._exact_match(f.props)
        elif t is Prob:
            out = self._prob(f)
        else:
            raise TypeError(f"not a state formula: {f!r}")
        self._sat[f] = out
        return out

    def holds(self, state: str, f: StateFormula) -> bool:
        return bool(self.sat(f) >> self.mc.index(state) & 1)

    def sat_states(self, f: StateFormula) -> frozenset:
        return frozenset(self.mc.states_of(self.sat(f)))

    def _exact_match(self, props) -> int:
        q = frozenset(props)
        mc = self.mc
        keys = [mc.props[s] & q for s in mc.states]
        out = 0
        for i, row in enumerate(mc.succ_idx):
            k = keys[i]
            if all(keys[j] == k for j in row):
                out |= 1 << i
        return out

    def _prob(self, f: Prob) -> int:
        path = f.path
        kind = _qualitative(f.cmp, f.bound)
        if kind == "all":
            return self.full
        if kind == "none":
            return 0
        if kind is not None and isinstance(path, (Next, Until)):
            pos, one = self._qualitative_sets(path)
            return {"pos": pos, "zero": self.full & ~pos,
                    "one": one, "notone": self.full & ~one}[kind]
        if isinstance(path, Next):
            return self._next_compare(self.sat(path.sub), f.cmp, f.bound)
        vec = self.path_probabilities(path)
        out = 0
        for i, x in enumerate(vec):
            if _compare(x, f.cmp, f.bound):
                out |= 1 << i
        return out

    def _qualitative_sets(self, path: PathFormula) -> tuple[int, int]:
        """(states with probability > 0, states with probability 1)."""
        if isinstance(path, Next):
            target = self.sat(path.sub)
            pos = one = 0
            for i, m in enumerate(self.mc.succ_mask):
                if m & target:
                    pos |= 1 << i
                    if not m & ~target:
                        one |= 1 << i
            return pos, one
        a, b = self.sat(path.left), self.sat(path.right)
        pos = self._can_reach(b, a & ~b)
        bad = self._can_reach(self.full & ~pos, a & ~b)
        return pos, self.full & ~bad

    def _can_reach(self, target: int, through: int) -> int:
        """States that reach ``target`` along a path whose earlier states lie in ``through``."""
        preds = self.mc.pred_idx
        seen = target
        stack = [i for i in range(self.n) if target >> i & 1]
        while stack:
            j = stack.pop()
            for i in preds[j]:
                bit = 1 << i
                if not seen & bit and through & bit:
                    seen |= bit
                    stack.append(i)
        return seen

    def _next_compare(self, target: int, cmp: str, bound: Fraction) -> int:
        bn, bd = bound.numerator, bound.denominator
        out = 0
        for i, (den, row) in enumerate(self.mc.int_rows):
            num = 0
            for j, w in row:
                if target >> j & 1:
                    num += w
            if _compare(num * bd, cmp, bn * den):
                out |= 1 << i
        return out

    # path formulae --------------------------------------------------------
    def path_probabilities(self, path: PathFormula) -> list[Fraction]:
        """Exact probability of ``path`` from every state, in state order."""
        hit = self._vec.get(path)
        if hit is not None:
            return hit
        if isinstance(path, Next):
            out = self.next_vector(self.sat(path.sub))
        elif isinstance(path, BoundedUntil):
            out = self.bounded_until_vector(self.sat(path.left), self.sat(path.right), path.k)
        elif isinstance(path, Until):
            out = self.until_vector(self.sat(path.left), self.sat(path.right))
        else:
            raise TypeError(f"not a path formula: {path!r}")
        self._vec[path] = out
        return out

    def next_vector(self, target: int) -> list[Fraction]:
        out = []
        for den, row in self.mc.int_rows:
            num = sum(w for j, w in row if target >> j & 1)
            out.append(Fraction(num, den))
        return out

    def bounded_until_vector(self, a: int, b: int, k: int) -> list[Fraction]:
        rows = self.mc.trans
        idx = self.mc.succ_idx
        p = [_ONE if b >> i & 1 else _ZERO for i in range(self.n)]
        live = [i for i in range(self.n) if a >> i & 1 and not b >> i & 1]
        for _ in range(k):
            new = list(p)
            for i in live:
                total = _ZERO
                for (_, w), j in zip(rows[self.mc.states[i]], idx[i]):
                    pj = p[j]
                    if pj:
                        total += w * pj
                new[i] = total
            p = new
        return p

    def until_vector(self, a: int, b: int) -> list[Fraction]:
        pos = self._can_reach(b, a & ~b)
        bad = self._can_reach(self.full & ~pos, a & ~b)
        one = self.full & ~bad
        unknown = [i for i in range(self.n) if pos >> i & 1 and not one >> i & 1]
        x = [_ONE if one >> i & 1 else _ZERO for i in range(self.n)]
        if not unknown:
            return x
        col = {i: c for c, i in enumerate(unknown)}
        size = len(unknown)
        matrix = []
        for i in unknown:
            row = [_ZERO] * (size + 1)
            row[col[i]] = _ONE
            for (_, w), j in zip(self.mc.trans[self.mc.states[i]], self.mc.succ_idx[i]):
                if j in col:
                    row[col[j]] -= w
                elif one >> j & 1:
                    row[size] += w
            matrix.append(row)
        sol = solve_linear(matrix)
        for i, v in zip(unknown, sol):
            x[i] = v
        return x


def solve_linear(aug: list[list[Fraction]]) -> list[Fraction]:
    """Solve a square system given as an augmented matrix, exactly.

    Gauss-Jordan elimination; the pivot is the candidate entry with the
    smallest numerator+denominator bit length (lowest row on ties).
    """
    n = len(aug)
    m = [list(r) for r in aug]
    for c in range(n):
        best, best_cost = None, None
        for r in range(c, n):
            v = m[r][c]
            if v:
                cost = v.numerator.bit_length() + v.denominator.bit_length()
                if best is None or cost < best_cost:
                    best, best_cost = r, cost
        if best is None:
            raise ZeroDivisionError("singular system")
        m[c], m[best] = m[best], m[c]
        piv = m[c][c]
        prow = [v / piv for v in m[c]]
        m[c] = prow
        for r in range(n):
            if r != c:
                factor = m[r][c]
                if factor:
                    rr = m[r]
                    for j in range(c, n + 1):
                        if prow[j]:
                            rr[j] -= factor * prow[j]
    return [m[r][n] for r in range(n)]


# module-level conveniences --------------------------------------------------

def _mask(mc: MarkovChain, states: StateSet) -> int:
    return states if isinstance(states, int) else mc.mask_of(states)


def sat_states(mc: MarkovChain, f: StateFormula) -> frozenset:
    return ModelChecker(mc).sat_states(f)


def holds(mc: MarkovChain, state: str, f: StateFormula) -> bool:
    return ModelChecker(mc).holds(state, f)


def prob_next(mc: MarkovChain, s: str, target: StateSet) -> Fraction:
    t = _mask(mc, target)
    return sum((p for u, p in mc.trans[s] if t >> mc.index(u) & 1), _ZERO)


def prob_until_bounded(mc: MarkovChain, s: str, a: StateSet, b: StateSet, k: int) -> Fraction:
    vec = ModelChecker(mc).bounded_until_vector(_mask(mc, a), _mask(mc, b), k)
    return vec[mc.index(s)]


def prob_until_unbounded(mc: MarkovChain, s: str, a: StateSet, b: StateSet) -> Fraction:
    vec = ModelChecker(mc).until_vector(_mask(mc, a), _mask(mc, b))
    return vec[mc.index(s)]


def characteristic_vector(mc: MarkovChain, t: str, prop_a: str = "a", prop_b: str = "b") -> Vec2:
    """(P(X prop_a), P(X prop_b)) at t."""
    pa = sum((p for u, p in mc.trans[t] if prop_a in mc.props[u]), _ZERO)
    pb = sum((p for u, p in mc.trans[t] if prop_b in mc.props[u]), _ZERO)
    return Vec2(pa, pb)
