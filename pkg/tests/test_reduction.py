from __future__ import annotations

from dataclasses import fields
from fractions import Fraction

import pytest

from pctlsat.minsky import Inc, Machine, SyncProduct, parse_machine
from pctlsat.pctl import (
    And, Atom, F, G1, Implies, Not, Prob, X, conj, disj, fragment_lint, is_G1, parse_formula,
)
from pctlsat.pctl.formula import atom_names, flatten
from pctlsat.pctl.lint import RECURRENCE_NOTE
from pctlsat.reduction import (
    BASE, CompileOptions, build_Psi_product, build_psi_one_counter, build_psi_parameterized,
    exactly, joint_label, recurrence_extension, succ_prop, tag, universe, universe_closed,
)

R = Fraction
LOOP = "1: inc c1 goto {2}\n2: jzdec c1 zero {1} else {1}"


def subformulas(f):
    seen, stack = set(), [f]
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        yield g
        for fld in fields(g):
            child = getattr(g, fld.name)
            if hasattr(child, "__dataclass_fields__"):
                stack.append(child)


def contains(f, target):
    return any(g == target for g in subformulas(f))


def test_succ_prop():
    assert succ_prop(succ_prop("r3")) == "r0"
    assert succ_prop("r2", 0) == "r2"
    assert succ_prop("r1", 5) == "r1"
    with pytest.raises(ValueError):
        succ_prop("a")


def test_tags():
    assert [tag(p, 1) for p in ("a", "r0", "l3", "d")] == ["a1", "r0_1", "l3_1", "d1"]
    assert tag("a", None) == "a"
    assert universe() == BASE
    assert universe(2, 2)[-4:] == ("l1_2", "l2_2", "d2", "e2")


def test_exactly():
    f = exactly(BASE, {"a", "r0"})
    want = [Not(Atom("h")), Atom("a"), Not(Atom("b")), Not(Atom("c")), Atom("r0")] + \
        [Not(Atom(f"r{i}")) for i in range(1, 5)]
    assert flatten(f, And) == want
    assert all(isinstance(g, Not) for g in flatten(exactly(BASE, ()), And))
    side1 = exactly(universe(1, 1), {"a1", "r0_1", "l1_1"})
    assert not any(name.endswith("2") and name != "r2_1" for name in atom_names(side1))
    with pytest.raises(ValueError):
        exactly(BASE, {"zz"})


def test_param_instance_values(c):
    _, x, y = build_psi_parameterized(c, 0)
    assert (x, y) == (R(17, 64), R(1, 32))
    compiled, x, y = build_psi_parameterized(c, 1)
    assert (x, y) == (R(12, 47), R(3, 376))
    assert compiled.sidecar()["x"] == "12/47"
    init = flatten(compiled.formula, And)
    assert X("=", R(12, 47), Atom("a")) in init and X("=", R(3, 376), Atom("b")) in init


def test_interval_variants(c):
    kappa1, _, _ = build_psi_parameterized(c, 2)
    kappa2, _, _ = build_psi_parameterized(c, 2, CompileOptions(interval_bound="kappa2"))
    assert contains(kappa1.formula, X("<=", R(17, 64), Atom("a")))
    assert not contains(kappa1.formula, X("<=", R(1, 32), Atom("a")))
    assert contains(kappa2.formula, X("<=", R(1, 32), Atom("a")))


def test_fin_and_trans_successors_differ_only_in_h():
    compiled, _, _ = build_psi_parameterized(None, 0)
    for i in range(5):
        r1, r2 = f"r{(i + 1) % 5}", f"r{(i + 2) % 5}"
        fsuc = X("=", 1, disj(exactly(BASE, {"h", "a", r1}), exactly(BASE, {"h", "b", r2}),
                              exactly(BASE, {"h", "c", r2})))
        suc = X("=", 1, disj(exactly(BASE, {"a", r1}), exactly(BASE, {"h", "b", r2}),
                             exactly(BASE, {"h", "c", r2})))
        assert contains(compiled.formula, fsuc) and contains(compiled.formula, suc)


def test_one_counter_init_and_inc_step(c):
    m = parse_machine(LOOP)
    compiled = build_psi_one_counter(c, m)
    init = compiled.formula.left.left
    assert init == exactly(universe(2), {"a", "r0", "l1"})
    assert {"l1", "l2", "d", "e"} <= set(compiled.universe)
    for i in range(5):
        r4 = f"r{(i + 4) % 5}"
        target = F("=", c.gamma, disj(conj(Atom("c"), Atom(r4), Atom("e")), Atom("d")), 2)
        assert contains(compiled.formula, target)
        assert contains(compiled.formula, F("=", 1 - c.q, And(Atom("a"), Atom(f"r{(i + 3) % 5}")), 2))


def test_inc_scoping_variants(c):
    m = parse_machine(LOOP)
    gamma = F("=", c.gamma, disj(And(Atom("b"), Atom("r4")), Atom("d")), 2)
    zero = And(X("=", c.kappa.x1, Atom("a")), X("=", c.kappa.x2, Atom("b")))

    def under_nonzero(compiled):
        return any(isinstance(g, Implies) and g.left == Not(zero) and contains(g.right, gamma)
                   for g in subformulas(compiled.formula))

    top = build_psi_one_counter(c, m)
    nested = build_psi_one_counter(c, m, CompileOptions(inc_scoping="nonzero"))
    assert contains(top.formula, gamma) and not under_nonzero(top)
    assert under_nonzero(nested)


@pytest.mark.parametrize("family", ["param", "one-counter", "product"])
def test_lint_and_closure(c, family):
    m = parse_machine(LOOP)
    if family == "param":
        compiled = build_psi_parameterized(c, 3)[0]
    elif family == "one-counter":
        compiled = build_psi_one_counter(c, m)
    else:
        compiled = build_Psi_product(c, SyncProduct(m, m, {1}, {2}))
    report = fragment_lint(compiled.formula)
    assert report.ok and not report.notes
    assert universe_closed(compiled)


def test_deterministic_and_roundtrip(c):
    m = parse_machine(LOOP)
    for build in (lambda: build_psi_parameterized(c, 4)[0], lambda: build_psi_one_counter(c, m)):
        a, b = build(), build()
        assert a.text() == b.text()
        assert parse_formula(a.text()) == a.formula


def test_product_lpass_once(c):
    m = parse_machine(LOOP)
    compiled = build_Psi_product(c, SyncProduct(m, m, {1}, {2}))
    top = flatten(compiled.formula, And)
    body = top[-1]
    assert is_G1(body)
    both = joint_label(2)
    lpass = Implies(both, X(">", 0, both))
    assert flatten(body.path.right.sub, And).count(lpass) == 1
    assert sum(1 for g in subformulas(compiled.formula) if g == lpass) == 1
    assert atom_names(compiled.formula) <= set(universe(2, 1) + universe(2, 2))


def test_product_inc_partner_has_no_zero_test(c):
    """For j owned by side 1 with an inc partner, side 2's STEP carries no test of side 1's Zero."""
    m1 = Machine((Inc(1, (2,)), Inc(1, (1,))), 1)
    m2 = Machine((Inc(1, (1,)), Inc(1, (2,))), 1)
    compiled = build_Psi_product(c, SyncProduct(m1, m2, {1, 2}, set()))
    zero1 = And(X("=", c.kappa.x1, Atom("a1")), X("=", c.kappa.x2, Atom("b1")))
    for g in subformulas(compiled.formula):
        if isinstance(g, Implies) and g.left == zero1:
            # only side 1's own Step and Abandon test its Zero
            assert all(n in universe(2, 1) for n in atom_names(g.right))


def test_recurrence_extension(c):
    m = parse_machine(LOOP)
    psi = build_Psi_product(c, SyncProduct(m, m, {1}, {2}))
    ext = recurrence_extension(psi)
    parts = flatten(ext.formula, And)
    assert parts[:-1] == flatten(psi.formula, And)
    assert atom_names(parts[-1]) == {"l1_1", "l1_2"}
    report = ext.lint()
    assert report.ok and report.notes == [RECURRENCE_NOTE]
    literal = recurrence_extension(psi, CompileOptions(recurrence="literal"))
    target = And(Atom("l1_1"), Atom("l1_2"))
    assert flatten(literal.formula, And)[-1] == G1(Implies(target, F(">", 0, target)))
    with pytest.raises(ValueError):
        recurrence_extension(ext)


def test_strict_variants_compile(c):
    opts = CompileOptions.printed()
    m = parse_machine(LOOP)
    assert opts == CompileOptions("kappa2", "nonzero", False, "literal")
    for compiled in (build_psi_parameterized(c, 2, opts)[0], build_psi_one_counter(c, m, opts),
                     recurrence_extension(build_Psi_product(c, SyncProduct(m, m, {1}, {2}), opts))):
        assert isinstance(compiled.formula, And)
        assert compiled.lint().ok


def test_bad_options():
    with pytest.raises(ValueError):
        CompileOptions(interval_bound="kappa3")
    with pytest.raises(ValueError):
        CompileOptions(recurrence="eventually")


def test_prob_bounds_are_exact(c):
    compiled = build_psi_one_counter(c, parse_machine(LOOP))
    bounds = {g.bound for g in subformulas(compiled.formula) if isinstance(g, Prob)}
    assert {c.q, 1 - c.q, c.gamma, c.kappa.x1, c.kappa.x2, c.iq_lower} <= bounds
