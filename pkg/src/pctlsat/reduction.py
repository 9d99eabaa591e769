"""Compile counter machines into PCTL formulae over the X / F<=2 fragment.

Three families:

* ``param``: psi(x, y), whose instances at sigma^n(kappa) force models of size O(n);
* ``one-counter``: psi for a one-counter machine;
* ``product``: Psi for a synchronised product of two one-counter machines,
  optionally with a recurrence conjunct on label 1.

Propositions: h a b c r0..r4 (plus l1..lm d e for machines).  In products,
each proposition p gets a copy per side: ``p1``/``p2``, or ``p_1``/``p_2``
when p already ends in a digit (``r0_1``, ``l3_2``).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .geometry import GeometryConstants, default_constants, format_rat, sigma_n
from .minsky import JzDec, Machine, SyncProduct, format_machine, partition_json
from .pctl.formula import (
    And, Atom, ExactMatch, F, G1, Implies, Not, StateFormula, X, atom_names, conj, disj,
)
from .pctl.lint import fragment_lint
from .pctl.parser import print_formula

R = 5
BASE = ("h", "a", "b", "c") + tuple(f"r{i}" for i in range(R))


def succ_prop(r: str, k: int = 1) -> str:
    """S^k(r_i) = r_{(i+k) mod 5}."""
    if not (r.startswith("r") and r[1:].isdigit() and int(r[1:]) < R):
        raise ValueError(f"not an r-proposition: {r!r}")
    return f"r{(int(r[1:]) + k) % R}"


def tag(name: str, k: int | None) -> str:
    if k is None:
        return name
    return f"{name}_{k}" if name[-1].isdigit() else f"{name}{k}"


def universe(m: int | None = None, k: int | None = None) -> tuple:
    """Proposition names in canonical order; m=None gives the base set."""
    names = BASE if m is None else BASE + tuple(f"l{j}" for j in range(1, m + 1)) + ("d", "e")
    return tuple(tag(p, k) for p in names)


def exactly(univ, props) -> StateFormula:
    """Exactly the propositions of ``props`` hold among ``univ``."""
    wanted = set(props)
    unknown = wanted - set(univ)
    if unknown:
        raise ValueError(f"propositions outside the universe: {sorted(unknown)}")
    return conj(Atom(p) if p in wanted else Not(Atom(p)) for p in univ)


@dataclass(frozen=True)
class CompileOptions:
    """Choices where the printed construction is ambiguous or defective.

    interval_bound: "kappa1" (X<=kappa_1 a) or "kappa2" (printed variant).
    inc_scoping: "top" puts the three F<=2 conjuncts of an inc step at top
        level; "nonzero" places them under the !Zero implication.
    guard_ltrans: in products, require some label before the LTrans
        implications can hold (otherwise they hold vacuously).
    recurrence: "strict" uses P>0 [ X P>0 [ F l ] ] so the current state does
        not count; "literal" emits P>0 [ F l ], which the state itself satisfies.
    """

    interval_bound: str = "kappa1"
    inc_scoping: str = "top"
    guard_ltrans: bool = True
    recurrence: str = "strict"

    def __post_init__(self):
        if self.interval_bound not in ("kappa1", "kappa2"):
            raise ValueError("interval_bound must be 'kappa1' or 'kappa2'")
        if self.inc_scoping not in ("top", "nonzero"):
            raise ValueError("inc_scoping must be 'top' or 'nonzero'")
        if self.recurrence not in ("strict", "literal"):
            raise ValueError("recurrence must be 'strict' or 'literal'")

    @classmethod
    def printed(cls) -> CompileOptions:
        return cls("kappa2", "nonzero", False, "literal")


@dataclass
class CompiledFormula:
    formula: StateFormula
    universe: tuple
    family: str
    info: dict = field(default_factory=dict)

    def text(self) -> str:
        return print_formula(self.formula)

    def sidecar(self) -> dict:
        return {"family": self.family, "universe": list(self.universe), **self.info}

    def lint(self):
        return fragment_lint(self.formula)


class _Side:
    """Formula builders over one copy of the proposition set (shared subterms built once)."""

    def __init__(self, c: GeometryConstants, m: int | None, k: int | None, opts: CompileOptions):
        self.c, self.m, self.k, self.opts = c, m, k, opts
        self.univ = universe(m, k)
        self._memo: dict = {}
        a, b = self.p("a"), self.p("b")
        self.zero = And(X("=", c.kappa.x1, a), X("=", c.kappa.x2, b))
        upper = c.kappa.x1 if opts.interval_bound == "kappa1" else c.kappa.x2
        self.interval = conj(X(">", c.iq_lower, a), X("<=", upper, a), X(">", 0, b))
        self.free = And(self.p("h"), ExactMatch(self.univ))

    def p(self, name: str) -> Atom:
        return Atom(tag(name, self.k))

    def r(self, i: int, s: int = 0) -> str:
        return f"r{(i + s) % R}"

    def ex(self, *props: str) -> StateFormula:
        key = ("ex",) + tuple(sorted(props))
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo[key] = exactly(self.univ, [tag(p, self.k) for p in props])
        return hit

    def eq(self, i: int) -> StateFormula:
        key = ("eq", i)
        hit = self._memo.get(key)
        if hit is None:
            s2, s3, b = self.p(self.r(i, 2)), self.p(self.r(i, 3)), self.p("b")
            hit = self._memo[key] = And(
                F("=", self.c.q, s2, 2),
                F("=", self.c.q, disj(And(s2, Not(b)), And(s3, b)), 2))
        return hit

    # shared pieces ------------------------------------------------------------
    def fsuc(self, i: int) -> StateFormula:
        r1, r2 = self.r(i, 1), self.r(i, 2)
        return X("=", 1, disj(self.ex("h", "a", r1), self.ex("h", "b", r2), self.ex("h", "c", r2)))

    def suc(self, i: int) -> StateFormula:
        r1, r2 = self.r(i, 1), self.r(i, 2)
        return X("=", 1, disj(self.ex("a", r1), self.ex("h", "b", r2), self.ex("h", "c", r2)))

    def fin(self) -> StateFormula:
        return disj(conj(self.ex("a", self.r(i)), self.fsuc(i), self.zero) for i in range(R))

    def trans(self) -> StateFormula:
        return disj(conj(self.ex("a", self.r(i)), self.suc(i), self.interval, self.eq(i))
                    for i in range(R))

    def ctrans(self) -> StateFormula:
        parts = []
        for i in range(R):
            r1, r2 = self.r(i, 1), self.r(i, 2)
            csuc = X("=", 1, disj(self.ex("a", r1), self.ex("h", "b", r2), self.ex("h", "c", r2),
                                  self.ex("h", "c", r2, "d")))
            parts.append(conj(self.p("c"), self.p(self.r(i)), Not(self.p("h")), csuc,
                              self.interval, self.eq(i)))
        return disj(parts)

    # machine steps ------------------------------------------------------------
    def _targets(self, first: tuple, tail, labels) -> StateFormula:
        """OR over l' in labels of X=1 (first-disjuncts | tail(l'))."""
        return disj(X("=", 1, disj(*first, tail(lab))) for lab in labels)

    def step(self, i: int, ins, zero_labels=None, pos_labels=None) -> StateFormula:
        """Step_{i,l} for instruction ``ins``; label sets may be overridden (Step[L])."""
        q = self.c.q
        r1, r2, r3, r4 = (self.r(i, s) for s in (1, 2, 3, 4))
        zero = self.zero
        if isinstance(ins, JzDec):
            zl = ins.zero if zero_labels is None else zero_labels
            pl = ins.nonzero if pos_labels is None else pos_labels
            ce = self.ex("h", "c", r2, "e")
            zsuc = And(self._targets((self.ex("h", "a", r1), self.ex("h", "c", r2), ce),
                                     lambda lab: self.ex("b", r2, f"l{lab}"), zl),
                       X("=", 1 - q, ce))
            psuc = And(self._targets((self.ex("h", "b", r2), self.ex("h", "c", r2), ce),
                                     lambda lab: self.ex("a", r1, f"l{lab}"), pl),
                       X("=", 1 - q, ce))
            return And(Implies(zero, And(zsuc, X("=", 1, Implies(self.p("b"), zero)))),
                       Implies(Not(zero), conj(psuc, self.interval, self.eq(i))))
        labels = ins.targets if zero_labels is None else zero_labels
        ce = self.ex("c", r2, "e")
        rest = (self.ex("c", r2), ce)
        izsuc = And(self._targets((self.ex("h", "a", r1),) + rest,
                                  lambda lab: self.ex("b", r2, f"l{lab}"), labels),
                    X("=", 1 - q, ce))
        ipsuc = And(self._targets((self.ex("a", r1),) + rest,
                                  lambda lab: self.ex("b", r2, f"l{lab}"), labels),
                    X("=", 1 - q, ce))
        d = self.p("d")
        gamma_part = conj(
            F("=", 1 - q, And(self.p("a"), self.p(r3)), 2),
            F("=", self.c.gamma, disj(And(self.p("b"), self.p(r4)), d), 2),
            F("=", self.c.gamma, disj(conj(self.p("c"), self.p(r4), self.p("e")), d), 2))
        positive = conj(ipsuc, self.interval, self.eq(i))
        if self.opts.inc_scoping == "top":
            return conj(Implies(zero, izsuc), Implies(Not(zero), positive), gamma_part)
        return And(Implies(zero, izsuc), Implies(Not(zero), And(positive, gamma_part)))

    def ltrans(self, machine: Machine) -> StateFormula:
        parts = []
        for i in range(R):
            for j, ins in enumerate(machine.instructions, 1):
                step = self.step(i, ins)
                for x in ("a", "b"):
                    parts.append(And(self.ex(x, self.r(i), f"l{j}"), step))
        return disj(parts)

    # abandoning a simulation (products) ---------------------------------------
    def abandon(self) -> StateFormula:
        q = self.c.q
        ozer, opos = [], []
        for i in range(R):
            r1, r2 = self.r(i, 1), self.r(i, 2)
            ce = self.ex("h", "c", r2, "e")
            tail = (self.ex("h", "b", r2), self.ex("h", "c", r2), ce)
            ozsuc = And(X("=", 1, disj(self.ex("h", "a", r1), *tail)), X("=", 1 - q, ce))
            opsuc = And(X("=", 1, disj(self.ex("a", r1), *tail)), X("=", 1 - q, ce))
            ri = self.p(self.r(i))
            ozer.append(And(ri, ozsuc))
            opos.append(conj(ri, opsuc, self.interval, self.eq(i)))
        return And(Implies(self.zero, disj(ozer)), Implies(Not(self.zero), disj(opos)))


def _info(c: GeometryConstants, opts: CompileOptions, **extra) -> dict:
    return {"constants": c.to_json(), "options": asdict(opts), **extra}


def build_psi_parameterized(c: GeometryConstants | None = None, n: int = 0,
                            opts: CompileOptions | None = None):
    """psi at x = sigma^n(kappa)_1, y = sigma^n(kappa)_2; returns (compiled, x, y)."""
    c = c or default_constants()
    opts = opts or CompileOptions()
    if n < 0:
        raise ValueError("n must be non-negative")
    v = sigma_n(c, n)
    side = _Side(c, None, None, opts)
    init = conj(side.ex("a", "r0"), X("=", v.x1, side.p("a")), X("=", v.x2, side.p("b")))
    invariant = disj(side.fin(), side.trans(), side.free)
    phi = And(init, G1(invariant))
    info = _info(c, opts, n=n, x=format_rat(v.x1), y=format_rat(v.x2))
    return CompiledFormula(phi, side.univ, "param", info), v.x1, v.x2


def build_psi_one_counter(c: GeometryConstants | None, machine: Machine,
                          opts: CompileOptions | None = None) -> CompiledFormula:
    c = c or default_constants()
    opts = opts or CompileOptions()
    if machine.counters != 1:
        raise ValueError("one-counter compilation needs a one-counter machine")
    side = _Side(c, machine.m, None, opts)
    init = And(side.ex("a", "r0", "l1"), side.zero)
    transient = disj(side.trans(), side.ctrans(), side.ltrans(machine))
    invariant = disj(side.fin(), transient, side.free)
    info = _info(c, opts, machine=format_machine(machine))
    return CompiledFormula(And(init, G1(invariant)), side.univ, "one-counter", info)


def _label_pairs(m: int, k: int, kk: int, same: bool) -> StateFormula:
    parts = []
    for j in range(1, m + 1):
        other = Atom(tag(f"l{j}", kk))
        parts.append(And(Atom(tag(f"l{j}", k)), other if same else Not(other)))
    return disj(parts)


def joint_label(m: int) -> StateFormula:
    """Some l_j holds on both sides."""
    return _label_pairs(m, 1, 2, True)


def build_Psi_product(c: GeometryConstants | None, product: SyncProduct,
                      opts: CompileOptions | None = None) -> CompiledFormula:
    c = c or default_constants()
    opts = opts or CompileOptions()
    m = product.m
    sides = {k: _Side(c, m, k, opts) for k in (1, 2)}
    machines = {1: product.m1, 2: product.m2}
    owned = {1: product.I1, 2: product.I2}
    invariant_parts = []
    for k in (1, 2):
        kk = 3 - k
        side, other = sides[k], sides[kk]
        sim = []
        for i in range(R):
            for j, ins in enumerate(machines[k].instructions, 1):
                if j in owned[k]:
                    step = side.step(i, ins)
                else:
                    partner = machines[kk].ins(j)
                    if isinstance(partner, JzDec):
                        step = And(Implies(other.zero, side.step(i, ins, partner.zero, partner.zero)),
                                   Implies(Not(other.zero),
                                           side.step(i, ins, partner.nonzero, partner.nonzero)))
                    else:
                        step = side.step(i, ins, partner.targets, partner.targets)
                for x in ("a", "b"):
                    sim.append(And(side.ex(x, side.r(i), f"l{j}"), step))
        ltrans = And(Implies(_label_pairs(m, k, kk, True), disj(sim)),
                     Implies(_label_pairs(m, k, kk, False), side.abandon()))
        if opts.guard_ltrans:
            some_label = disj(Atom(tag(f"l{j}", k)) for j in range(1, m + 1))
            ltrans = And(some_label, ltrans)
        transient = disj(side.trans(), side.ctrans(), ltrans)
        invariant_parts.append(disj(side.fin(), transient, side.free))
    both = joint_label(m)
    lpass = Implies(both, X(">", 0, both))
    init = conj(And(sides[k].ex("a", "r0", "l1"), sides[k].zero) for k in (1, 2))
    phi = And(init, G1(conj(*invariant_parts, lpass)))
    univ = sides[1].univ + sides[2].univ
    info = _info(c, opts, m1=format_machine(product.m1), m2=format_machine(product.m2),
                 partition=partition_json(product.I1, product.I2))
    return CompiledFormula(phi, univ, "product", info)


def recurrence_conjunct(opts: CompileOptions | None = None) -> StateFormula:
    opts = opts or CompileOptions()
    target = And(Atom(tag("l1", 1)), Atom(tag("l1", 2)))
    if opts.recurrence == "literal":
        later = F(">", 0, target)
    else:
        later = X(">", 0, F(">", 0, target))
    return G1(Implies(target, later))


def recurrence_extension(compiled: CompiledFormula,
                         opts: CompileOptions | None = None) -> CompiledFormula:
    """Psi & P=1 [ G (l1 on both sides => label 1 is seen again) ]."""
    if compiled.family != "product":
        raise ValueError("the recurrence extension applies to product formulae")
    opts = opts or CompileOptions(**compiled.info.get("options", {}))
    phi = And(compiled.formula, recurrence_conjunct(opts))
    info = dict(compiled.info, recurrence=opts.recurrence)
    return CompiledFormula(phi, compiled.universe, "product+recurrence", info)


def universe_closed(compiled: CompiledFormula) -> bool:
    return atom_names(compiled.formula) <= set(compiled.universe)


__all__ = [
    "BASE", "CompileOptions", "CompiledFormula", "build_Psi_product", "build_psi_one_counter",
    "build_psi_parameterized", "exactly", "joint_label", "recurrence_conjunct",
    "recurrence_extension", "succ_prop", "tag", "universe", "universe_closed",
]
