"""Explicit finite models for the compiled formulae, and checks against them.

One-counter states are triples ``(index, props, n)``; product states are
``(index, props1, props2, n1, n2)``.  ``None`` plays the role of the star
(index or counter irrelevant).  Ids render canonically, e.g.
``[3|a,r2,l1|5]``, ``[*|h,c,r4,e|*]`` and ``[0|a,r0,l1|a,r0,l1|0|0]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import ConstantsError, DomainError, UnsupportedInput
from .geometry import GeometryConstants, Vec2, default_constants, in_W, sigma_n, tau
from .minsky import Computation, Config, Inc, JzDec, Machine, SyncProduct, step_function
from .pctl.chain import MarkovChain
from .pctl.checker import ModelChecker, characteristic_vector
from .pctl.formula import And, Atom, G1, Not, conj, disj
from .reduction import R, tag

# ids -------------------------------------------------------------------------


def _prop_key(p: str):
    order = {"h": 0, "a": 1, "b": 2, "c": 3}
    if p in order:
        return (0, order[p], "")
    if p[0] in "rl" and p[1:].isdigit():
        return (1 if p[0] == "r" else 2, int(p[1:]), "")
    return (3, 0, p)


def fmt_props(props) -> str:
    return ",".join(sorted(props, key=_prop_key))


def _star(x) -> str:
    return "*" if x is None else str(x)


def state_id(state: tuple) -> str:
    if len(state) == 3:
        idx, props, n = state
        return f"[{_star(idx)}|{fmt_props(props)}|{_star(n)}]"
    idx, p1, p2, n1, n2 = state
    return f"[{_star(idx)}|{fmt_props(p1)}|{fmt_props(p2)}|{_star(n1)}|{_star(n2)}]"


def _r(i: int, s: int = 0) -> str:
    return f"r{(i + s) % R}"


def _r_index(props) -> int:
    found = [int(p[1:]) for p in props if p[0] == "r"]
    if len(found) != 1:
        raise DomainError(f"expected exactly one r-proposition in {fmt_props(props)}")
    return found[0]


def _label(props) -> int | None:
    labels = [int(p[1:]) for p in props if p[0] == "l"]
    if len(labels) > 1:
        raise DomainError(f"state carries several labels: {sorted(labels)}")
    return labels[0] if labels else None


def _S(*props) -> frozenset:
    return frozenset(props)


def _valuation(t: tuple) -> frozenset:
    if len(t) == 3:
        return t[1]
    return frozenset(tag(p, 1) for p in t[1]) | frozenset(tag(p, 2) for p in t[2])


def _closure(start: tuple, successors: Callable, max_states: int, meta: dict) -> MarkovChain:
    """Least chain containing ``start`` and closed under ``successors`` (BFS order)."""
    order, seen, rows = [start], {start}, {}
    i = 0
    while i < len(order):
        t = order[i]
        i += 1
        row: dict = {}
        for u, p in successors(t):
            if p < 0:
                raise ConstantsError(f"negative probability {p} from {state_id(t)}")
            if p:
                row[u] = row.get(u, Fraction(0)) + p
        rows[t] = row
        for u in row:
            if u not in seen:
                seen.add(u)
                order.append(u)
                if len(order) > max_states:
                    raise UnsupportedInput(f"witness exceeds {max_states} states")
    ids = {t: state_id(t) for t in order}
    return MarkovChain([ids[t] for t in order], {ids[t]: _valuation(t) for t in order},
                       {ids[t]: [(ids[u], p) for u, p in rows[t].items()] for t in order},
                       start=ids[start], meta=meta)


# counter values ---------------------------------------------------------------

def p_n(c: GeometryConstants, n: int, printed: bool = False) -> Fraction:
    """Probability of the d-successor of a c-state with counter n >= 1.

    The default divides by 1 - sigma^(n-1)_1 - sigma^(n-1)_2, which makes both
    gamma-valued F<=2 constraints of an inc step exact.  ``printed=True``
    divides by 1 - sigma^n_1 - sigma^n_2 instead.
    """
    if n < 1:
        raise ValueError("p_n needs n >= 1")
    prev, cur = sigma_n(c, n - 1), sigma_n(c, n)
    den = cur if printed else prev
    value = (c.gamma - (1 - c.q) * prev.x2) / (1 - den.x1 - den.x2)
    if not 0 < value < 1 - cur.x1 - cur.x2:
        raise ConstantsError(f"p_{n} = {value} outside (0, 1 - sigma^{n}_1 - sigma^{n}_2)")
    return value


def counter_of(c: GeometryConstants, v: Vec2, cap: int = 10_000) -> int | None:
    """n with v = sigma^n(kappa), found by applying tau until kappa is reached."""
    for n in range(cap + 1):
        if v == c.kappa:
            return n
        if not in_W(c, v) or v.x1 >= c.kappa.x1:
            return None
        v = tau(c, v)
    return None


# the parameterised model ---------------------------------------------------------

def model_param(c: GeometryConstants | None = None, n: int = 0, printed: bool = False) -> MarkovChain:
    """Chain whose state t_n should satisfy psi at sigma^n(kappa).

    ``printed=True`` gives the 3n+1-state layout where t_0 is a free
    self-loop.  The default makes t_0 a final state {a, r_(n mod 5)} with three
    free successors carrying kappa, giving 3n+4 states.
    """
    c = c or default_constants()
    if n < 0:
        raise ValueError("n must be non-negative")
    states, props, trans = [], {}, {}

    def add(name, ps, row):
        states.append(name)
        props[name] = ps
        trans[name] = row

    j0 = n % R
    if printed:
        add("t0", {"h", "a", _r(j0)}, [("t0", 1)])
    else:
        k1, k2 = c.kappa.x1, c.kappa.x2
        add("t0", {"a", _r(j0)}, [("fa", k1), ("fb", k2), ("fc", 1 - k1 - k2)])
    for i in range(1, n + 1):
        j = (n - i) % R
        v = sigma_n(c, i)
        add(f"t{i}", {"a", _r(j)},
            [(f"t{i - 1}", v.x1), (f"b{i - 1}", v.x2), (f"c{i - 1}", 1 - v.x1 - v.x2)])
    for i in range(1, n + 1):
        j = (n - i) % R
        add(f"b{i - 1}", {"h", "b", _r(j, 2)}, [(f"b{i - 1}", 1)])
    for i in range(1, n + 1):
        j = (n - i) % R
        add(f"c{i - 1}", {"h", "c", _r(j, 2)}, [(f"c{i - 1}", 1)])
    if not printed:
        add("fa", {"h", "a", _r(j0, 1)}, [("fa", 1)])
        add("fb", {"h", "b", _r(j0, 2)}, [("fb", 1)])
        add("fc", {"h", "c", _r(j0, 2)}, [("fc", 1)])
    meta = {"family": "param", "n": n, "layout": "printed" if printed else "final-t0"}
    return MarkovChain(states, props, trans, start=f"t{n}", meta=meta)


# one-counter rules -------------------------------------------------------------

@dataclass
class _Projection:
    """What the one-counter rules need: a machine, a stored run and constants."""

    c: GeometryConstants
    machine: Machine
    configs: Callable  # index -> (label, counter)
    next_index: Callable
    pn: Callable

    def rule_I(self, t: tuple) -> list:
        k, props, n = t
        i = _r_index(props)
        j = _label(props)
        jc, nc = self.configs(k)
        if (jc, nc) != (j, n):
            raise DomainError(f"{state_id(t)} does not match configuration ({jc},{nc})")
        k2 = self.next_index(k)
        j2, n2 = self.configs(k2)
        if n2 == n - 1:
            t2 = (k2, _S("a", _r(i, 1), f"l{j2}"), n2)
        else:
            t2 = (k2, _S("b", _r(i, 2), f"l{j2}"), n2)
        c, q = self.c, self.c.q
        r1, r2 = _r(i, 1), _r(i, 2)
        ins = self.machine.ins(j)
        v = sigma_n(c, n)
        if isinstance(ins, JzDec):
            if n2 != max(n - 1, 0):
                raise DomainError(f"counter {n} -> {n2} is not a jzdec step")
            if n == 0:  # case A
                return [((None, _S("h", "a", r1), None), v.x1), (t2, v.x2),
                        ((None, _S("h", "c", r2, "e"), None), 1 - q),
                        ((None, _S("h", "c", r2), None), q - v.x1 - v.x2)]
            return [(t2, v.x1), ((None, _S("h", "b", r2), None), v.x2),  # case B
                    ((None, _S("h", "c", r2, "e"), None), 1 - q),
                    ((None, _S("h", "c", r2), None), q - v.x1 - v.x2)]
        if n2 != n + 1:
            raise DomainError(f"counter {n} -> {n2} is not an inc step")
        if n == 0:  # case C
            first = ((None, _S("h", "a", r1), None), v.x1)
        else:  # case D
            first = ((None, _S("a", r1), n - 1), v.x1)
        return [first, (t2, v.x2), ((None, _S("c", r2, "e"), n + 1), 1 - q),
                ((None, _S("c", r2), n + 1), q - v.x1 - v.x2)]

    def unlabeled(self, t: tuple) -> list:
        idx, props, n = t
        if n is None:  # free state
            return [(t, Fraction(1))]
        i = _r_index(props)
        r1, r2 = _r(i, 1), _r(i, 2)
        v = sigma_n(self.c, n)
        if "a" in props:
            first = (((None, _S("h", "a", r1), None) if n == 0 else (None, _S("a", r1), n - 1)),
                     v.x1)
            return [first, ((None, _S("h", "b", r2), None), v.x2),
                    ((None, _S("h", "c", r2), None), 1 - v.x1 - v.x2)]
        if "c" in props and n > 0:
            p = self.pn(n)
            return [((None, _S("a", r1), n - 1), v.x1), ((None, _S("h", "b", r2), None), v.x2),
                    ((None, _S("h", "c", r2, "d"), None), p),
                    ((None, _S("h", "c", r2), None), 1 - v.x1 - v.x2 - p)]
        raise DomainError(f"no rule applies to {state_id(t)}")

    def abandon(self, t: tuple) -> list:
        """Successors of a labeled state whose simulation is dropped."""
        _, props, n = t
        i = _r_index(props)
        r1, r2 = _r(i, 1), _r(i, 2)
        q = self.c.q
        v = sigma_n(self.c, n)
        first = (None, _S("h", "a", r1), None) if n == 0 else (None, _S("a", r1), n - 1)
        return [(first, v.x1), ((None, _S("h", "b", r2), None), v.x2),
                ((None, _S("h", "c", r2, "e"), None), 1 - q),
                ((None, _S("h", "c", r2), None), q - v.x1 - v.x2)]

    def successors(self, t: tuple) -> list:
        idx, props, n = t
        if _label(props) is not None and idx is not None:
            return self.rule_I(t)
        return self.unlabeled(t)


def _require_periodic(comp: Computation) -> None:
    if not comp.periodic:
        raise UnsupportedInput("no finite witness; formula compiled only")


def _pn_fn(c: GeometryConstants, printed: bool) -> Callable:
    cache: dict = {}

    def pn(n):
        if n not in cache:
            cache[n] = p_n(c, n, printed)
        return cache[n]
    return pn


def model_one_counter(c: GeometryConstants | None, machine: Machine, comp: Computation,
                      printed_pn: bool = False, max_states: int = 100_000) -> MarkovChain:
    c = c or default_constants()
    _require_periodic(comp)
    if machine.counters != 1:
        raise ValueError("one-counter witness needs a one-counter machine")
    proj = _Projection(c, machine, lambda k: (comp[k].label, comp[k].counters[0]),
                       comp.next_index, _pn_fn(c, printed_pn))
    start = (0, _S("a", "r0", "l1"), 0)
    meta = {"family": "one-counter", "alpha": comp.alpha, "beta": comp.beta,
            "pn": "printed" if printed_pn else "corrected"}
    return _closure(start, proj.successors, max_states, meta)


# products -----------------------------------------------------------------------

def _join(u1: tuple, u2: tuple) -> tuple:
    idx = u1[0] if u1[0] is not None else u2[0]
    return (idx, u1[1], u2[1], u1[2], u2[2])


def _is_tc(u: tuple) -> bool:
    props = u[1]
    return "c" in props and "d" not in props and "e" not in props


def _split_tc(dist: list) -> tuple:
    tcs = [(u, p) for u, p in dist if _is_tc(u)]
    if len(tcs) != 1:
        raise DomainError("successor set must contain exactly one plain c-state")
    return tcs[0][0], [(u, p) for u, p in dist if not _is_tc(u)]


def _absorb(tc1: tuple, rest1: list, tc2: tuple, rest2: list, first: list) -> list:
    """Pair non-c successors of one side with the other side's plain c-state.

    ``first`` holds pairs already placed; the residual mass goes to tc1 x tc2.
    """
    out = list(first)
    out += [(_join(u, tc2), p) for u, p in rest1]
    out += [(_join(tc1, u), p) for u, p in rest2]
    residual = 1 - sum(p for _, p in out)
    if residual <= 0:
        raise ConstantsError(f"residual probability {residual} <= 0 when pairing successors")
    out.append((_join(tc1, tc2), residual))
    return out


class _ProductRules:
    def __init__(self, c: GeometryConstants, product: SyncProduct, comp: Computation,
                 printed_pn: bool):
        pn = _pn_fn(c, printed_pn)
        self.sides = {
            k: _Projection(c, m, (lambda k: lambda i: (comp[i].label, comp[i].counters[k - 1]))(k),
                           comp.next_index, pn)
            for k, m in ((1, product.m1), (2, product.m2))}

    def successors(self, t: tuple) -> list:
        idx, p1, p2, n1, n2 = t
        t1, t2 = (idx, p1, n1), (idx, p2, n2)
        free1, free2 = "h" in p1, "h" in p2
        if free1 and free2:  # rule G
            return [(t, Fraction(1))]
        lab1, lab2 = _label(p1), _label(p2)
        s1, s2 = self.sides[1], self.sides[2]
        if lab1 is not None and lab1 == lab2 and idx is not None:  # rule A
            d1, d2 = s1.rule_I(t1), s2.rule_I(t2)
            (u1, q1), = [(u, p) for u, p in d1 if _label(u[1]) is not None]
            (u2, q2), = [(u, p) for u, p in d2 if _label(u[1]) is not None]
            tc1, rest1 = _split_tc(d1)
            tc2, rest2 = _split_tc(d2)
            first = [(_join(u1, u2), min(q1, q2))]
            if q1 > q2:
                first.append((_join(u1, tc2), q1 - q2))
            elif q2 > q1:
                first.append((_join(tc1, u2), q2 - q1))
            rest1 = [(u, p) for u, p in rest1 if u != u1]
            rest2 = [(u, p) for u, p in rest2 if u != u2]
            return _absorb(tc1, rest1, tc2, rest2, first)
        d1 = self._side(s1, t1, lab1)
        d2 = self._side(s2, t2, lab2)
        if free2:  # rule E
            return [(_join(u, t2), p) for u, p in d1]
        if free1:  # rule F
            return [(_join(t1, u), p) for u, p in d2]
        return _absorb(*_split_tc(d1), *_split_tc(d2), [])  # rules B, C, D

    @staticmethod
    def _side(proj: _Projection, t: tuple, label) -> list:
        if label is not None:
            return proj.abandon(t)
        return proj.unlabeled(t)


def model_product(c: GeometryConstants | None, product: SyncProduct, comp: Computation,
                  printed_pn: bool = False, max_states: int = 200_000) -> MarkovChain:
    c = c or default_constants()
    _require_periodic(comp)
    rules = _ProductRules(c, product, comp, printed_pn)
    start = (0, _S("a", "r0", "l1"), _S("a", "r0", "l1"), 0, 0)
    meta = {"family": "product", "alpha": comp.alpha, "beta": comp.beta,
            "pn": "printed" if printed_pn else "corrected"}
    return _closure(start, rules.successors, max_states, meta)


# relations between chains and machines ----------------------------------------------

def _labels_in(mc: MarkovChain, t: str, k: int | None) -> list:
    out = []
    for p in mc.props[t]:
        base = p
        if k is not None:
            suffix = f"_{k}" if p[-2:] == f"_{k}" else None
            if suffix is None:
                continue
            base = p[:-2]
        if base[0] == "l" and base[1:].isdigit():
            out.append(int(base[1:]))
    return out


def represented(c: GeometryConstants, mc: MarkovChain, t: str, mode: str = "one-counter"):
    """The configuration t represents, or None."""
    if mode == "one-counter":
        labels = _labels_in(mc, t, None)
        if len(labels) != 1:
            return None
        n = counter_of(c, characteristic_vector(mc, t, "a", "b"))
        return None if n is None else Config(labels[0], (n,))
    l1, l2 = _labels_in(mc, t, 1), _labels_in(mc, t, 2)
    if len(l1) != 1 or l1 != l2:
        return None
    n1 = counter_of(c, characteristic_vector(mc, t, "a1", "b1"))
    n2 = counter_of(c, characteristic_vector(mc, t, "a2", "b2"))
    if n1 is None or n2 is None:
        return None
    return Config(l1[0], (n1, n2))


def represents(c: GeometryConstants, mc: MarkovChain, t: str, config: Config,
               mode: str = "one-counter") -> bool:
    return represented(c, mc, t, mode) == config


@dataclass
class Report:
    ok: bool
    checked: int = 0
    violations: list = field(default_factory=list)

    def __str__(self) -> str:
        head = "PASS" if self.ok else "FAIL"
        return "\n".join([f"{head} ({self.checked} states checked)"] + self.violations)


def _no_label_forever(mode: str, m: int):
    if mode == "one-counter":
        return G1(conj(Not(Atom(f"l{j}")) for j in range(1, m + 1)))
    return G1(conj(Not(And(Atom(tag(f"l{j}", 1)), Atom(tag(f"l{j}", 2))))
                   for j in range(1, m + 1)))


def simulates(c: GeometryConstants, mc: MarkovChain, s: str, system, mode: str = "one-counter",
              max_states: int = 200_000) -> Report:
    """Every representing state reached from s has a successor representing a machine step,
    and its other successors never see a (joint) label again."""
    reach = mc.reachable(s)
    if len(reach) > max_states:
        raise UnsupportedInput(f"{len(reach)} reachable states exceed the cap {max_states}")
    step = step_function(system)
    checker = ModelChecker(mc)
    quiet = checker.sat(_no_label_forever(mode, system.m))
    report = Report(ok=True)
    for t in reach:
        cfg = represented(c, mc, t, mode)
        if cfg is None:
            continue
        report.checked += 1
        allowed = set(step(cfg))
        found = False
        for u, _ in mc.trans[t]:
            cu = represented(c, mc, u, mode)
            if cu is not None and cu in allowed:
                found = True
            elif not quiet >> mc.index(u) & 1:
                report.violations.append(f"{t}: successor {u} is neither a step nor label-free")
        if not found:
            report.violations.append(f"{t}: no successor represents a successor of {cfg}")
    report.ok = not report.violations
    return report


def covers(c: GeometryConstants, mc: MarkovChain, s: str, comp: Computation, steps: int,
           mode: str = "one-counter") -> bool:
    """A run from s whose first ``steps`` states represent comp[0..steps-1]."""
    if steps <= 0:
        return True
    if represented(c, mc, s, mode) != comp[0]:
        return False
    memo: dict = {}
    stack = [(s, 0)]
    seen = {(s, 0)}
    while stack:
        t, i = stack.pop()
        if i == steps - 1:
            return True
        want = comp[i + 1]
        for u, _ in mc.trans[t]:
            key = (u, i + 1)
            if key in seen:
                continue
            rep = memo.get(u, ...)
            if rep is ...:
                rep = memo[u] = represented(c, mc, u, mode)
            if rep == want:
                seen.add(key)
                stack.append(key)
    return False


# invariants ----------------------------------------------------------------------

def _sides(mc: MarkovChain) -> list:
    """(a, b, h) proposition names per side present in the chain."""
    props = mc.prop_universe()
    if props & {"a1", "b1", "h1", "a2", "b2", "h2"}:
        return [("a1", "b1", "h1"), ("a2", "b2", "h2")]
    return [("a", "b", "h")]


def area_premises(c: GeometryConstants, mc: MarkovChain) -> list[str]:
    """Check the convex-combination premises and the tau conclusion on non-free states.

    For each side, T is the set of states without h.  Every t in T needs
    v[t]_1 <= kappa_1; when v[t] != kappa its a-successors lie in T, both
    balance equations hold, and each a-successor has vector tau(v[t]).
    """
    problems = []
    for a, b, h in _sides(mc):
        vec = {t: characteristic_vector(mc, t, a, b) for t in mc.states}
        T = {t for t in mc.states if h not in mc.props[t]}
        for t in T:
            v = vec[t]
            if v.x1 > c.kappa.x1:
                problems.append(f"{t}: v1 = {v.x1} exceeds kappa_1")
                continue
            if v == c.kappa:
                continue
            succ_a = [(u, p) for u, p in mc.trans[t] if a in mc.props[u]]
            outside = [u for u, _ in succ_a if u not in T]
            if outside:
                problems.append(f"{t}: a-successors outside T: {outside}")
                continue
            eq1 = 1 - v.x1 + sum(p * vec[u].x1 for u, p in succ_a)
            eq2 = 1 - v.x1 - v.x2 + sum(p * (vec[u].x1 + vec[u].x2) for u, p in succ_a)
            if eq1 != c.q or eq2 != c.q:
                problems.append(f"{t}: balance equations give {eq1}, {eq2} instead of {c.q}")
                continue
            if not in_W(c, v):
                problems.append(f"{t}: vector {v} outside W")
                continue
            image = tau(c, v)
            for u, _ in succ_a:
                if vec[u] != image:
                    problems.append(f"{t}: a-successor {u} has {vec[u]}, expected {image}")
    return problems


def vector_classes(c: GeometryConstants, mc: MarkovChain) -> list[str]:
    """Every non-free state (per side) has vector kappa or some sigma^n(kappa)."""
    problems = []
    for a, b, h in _sides(mc):
        for t in mc.states:
            if h in mc.props[t]:
                continue
            if counter_of(c, characteristic_vector(mc, t, a, b)) is None:
                problems.append(f"{t}: vector is not on the sigma orbit of kappa")
    return problems


def inc_measurements(c: GeometryConstants, mc: MarkovChain, machine: Machine) -> list:
    """(state, P(F<=2 a&S^3 r), P(F<=2 (b&S^4 r)|d), P(F<=2 (c&S^4 r&e)|d)) at inc-labeled states."""
    from .pctl.formula import F

    checker = ModelChecker(mc)
    out = []
    for t in mc.states:
        props = mc.props[t]
        j = _label(props)
        if j is None or not isinstance(machine.ins(j), Inc) or "h" in props:
            continue
        i = _r_index(props)
        r3, r4 = Atom(_r(i, 3)), Atom(_r(i, 4))
        d = Atom("d")
        forms = [
            F("=", 0, And(Atom("a"), r3), 2),
            F("=", 0, disj(And(Atom("b"), r4), d), 2),
            F("=", 0, disj(conj(Atom("c"), r4, Atom("e")), d), 2),
        ]
        values = [checker.path_probabilities(f.path)[mc.index(t)] for f in forms]
        out.append((t, *values))
    return out
