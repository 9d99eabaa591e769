from __future__ import annotations

import json

import pytest
from hypothesis import given, settings, strategies as st

from pctlsat.errors import MachineError
from pctlsat.minsky import (
    Computation, Inc, JzDec, Machine, Strategy, SyncProduct, check_computation, config,
    decode_label, encode_pair, format_machine, initial_config, induced_trace, parse_machine,
    product_successors, run_with_period_detection, successors, two_counter_to_product,
    validate_machine,
)

LOOP = "1: inc c1 goto {2}; 2: jzdec c1 zero {1} else {1}"


def test_parse_and_format():
    m = parse_machine("1: inc c1 goto {2,3}  # branch\n2: jzdec c1 zero {1} else {2}\n3: inc c1 goto {2}")
    assert m.ins(1) == Inc(1, (2, 3))
    assert m.ins(2) == JzDec(1, (1,), (2,))
    assert parse_machine(format_machine(m)) == m
    assert not m.is_deterministic()


@pytest.mark.parametrize("text", [
    "1: inc c1 goto {0}",
    "1: inc c1 goto {1,1,1}",
    "1: inc c3 goto {1}",
    "2: inc c1 goto {1}",
    "1: dec c1 goto {1}",
    "",
])
def test_parse_rejects(text):
    with pytest.raises(MachineError):
        parse_machine(text)


def test_validate_machine():
    ok = parse_machine(LOOP)
    assert validate_machine(ok) == []
    assert validate_machine(Machine((Inc(1, (0,)),), 1))
    assert any("one or two" in p for p in validate_machine(Machine((Inc(1, (1, 1, 1)),), 1)))


def test_successors():
    m = parse_machine("1: inc c1 goto {2,3}\n2: jzdec c1 zero {1} else {2}\n3: inc c1 goto {2}")
    assert set(successors(m, config(1, 0))) == {config(2, 1), config(3, 1)}
    assert successors(m, config(2, 0)) == (config(1, 0),)
    assert successors(m, config(2, 5)) == (config(2, 4),)


def _prod(ins1, ins2, I1, m=9):
    pad = [Inc(1, (1,))] * m
    a, b = list(pad), list(pad)
    for j, ins in ins1.items():
        a[j - 1] = ins
    for j, ins in ins2.items():
        b[j - 1] = ins
    I1 = frozenset(I1)
    return SyncProduct(Machine(tuple(a), 1), Machine(tuple(b), 1), I1, frozenset(range(1, m + 1)) - I1)


def test_product_successors():
    p = _prod({4: Inc(1, (2,))}, {4: Inc(1, (5,))}, {4})
    assert product_successors(p, config(4, 0, 0)) == (config(2, 1, 1),)
    q = _prod({4: Inc(1, (2,))}, {4: Inc(1, (5,))}, {1})
    assert product_successors(q, config(4, 0, 0)) == (config(5, 1, 1),)
    r = _prod({4: JzDec(1, (1,), (3,))}, {4: JzDec(1, (9,), (9,))}, {4})
    assert product_successors(r, config(4, 0, 4)) == (config(1, 0, 3),)


def test_product_rejects_bad_partition():
    m = parse_machine(LOOP)
    with pytest.raises(MachineError):
        SyncProduct(m, m, {1}, {1, 2})
    with pytest.raises(MachineError):
        SyncProduct(m, m, {1}, set())


def test_period_of_loop():
    comp = run_with_period_detection(parse_machine(LOOP))
    assert [str(c) for c in comp.configs] == ["(1,0)", "(2,1)", "(1,0)"]
    assert comp.period == (1, 3)
    assert [str(comp[i]) for i in range(6)] == ["(1,0)", "(2,1)", "(1,0)", "(2,1)", "(1,0)", "(2,1)"]
    assert check_computation(parse_machine(LOOP), comp, extra=20) == []
    assert comp.recurs(1) and comp.recurs(2)


def test_unbounded_machine_has_no_period():
    comp = run_with_period_detection(parse_machine("1: inc c1 goto {1}"), max_steps=500)
    assert not comp.periodic
    assert comp.configs[-1] == config(1, 500)
    with pytest.raises(MachineError):
        comp.recurs(1)


def test_strategy():
    m = parse_machine("1: inc c1 goto {2,3}\n2: jzdec c1 zero {1} else {2}\n3: inc c1 goto {2}")
    first = run_with_period_detection(m)
    other = run_with_period_detection(m, strategy=Strategy.parse("1"))
    assert first[1] == config(2, 1)
    assert other[1] == config(3, 1)
    assert check_computation(m, other, extra=10) == []
    with pytest.raises(MachineError):
        Strategy.parse("x")


def test_computation_json():
    comp = run_with_period_detection(parse_machine(LOOP))
    assert Computation.from_json(json.loads(json.dumps(comp.to_json()))) == comp


two_counter_machines = {
    "swap": "1: inc c1 goto {2}\n2: inc c2 goto {3}\n3: jzdec c1 zero {4} else {3}\n4: jzdec c2 zero {1} else {4}",
    "grow": "1: inc c1 goto {2}\n2: inc c2 goto {3}\n3: inc c2 goto {1}",
    "transfer": "1: inc c1 goto {2}\n2: inc c1 goto {3}\n3: jzdec c1 zero {5} else {4}\n"
                "4: inc c2 goto {3}\n5: jzdec c2 zero {1} else {5}",
    "pair": "1: inc c2 goto {2}\n2: jzdec c2 zero {1} else {1}",
}


def _direct(m, steps):
    out, cur = [], initial_config(m)
    for _ in range(steps):
        out.append(cur)
        cur = successors(m, cur)[0]
    return out


@pytest.mark.parametrize("name", sorted(two_counter_machines))
def test_translation(name):
    m = parse_machine(two_counter_machines[name], counters=2)
    tr = two_counter_to_product(m)
    p = tr.product
    assert p.m1.m == p.m2.m == 6 * m.m
    assert tr.hat.m == 3 * m.m
    assert p.m1.is_deterministic() and p.m2.is_deterministic()
    assert p.I1 | p.I2 == set(range(1, 6 * m.m + 1))
    run = run_with_period_detection(p, max_steps=3000)
    induced = induced_trace(tr, run.prefix(3000) if run.periodic else run.configs)
    assert induced[:100] == _direct(m, 100)


def test_label_encoding():
    assert [encode_pair(1, False), encode_pair(1, True), encode_pair(3, False)] == [1, 2, 5]
    for x in range(1, 40):
        assert encode_pair(*decode_label(x)) == x


def test_translation_needs_two_counters():
    with pytest.raises(MachineError):
        two_counter_to_product(parse_machine(LOOP))


@st.composite
def one_counter_machines(draw):
    m = draw(st.integers(1, 4))
    labels = st.lists(st.integers(1, m), min_size=1, max_size=2, unique=True).map(tuple)
    ins = []
    for _ in range(m):
        if draw(st.booleans()):
            ins.append(Inc(1, draw(labels)))
        else:
            ins.append(JzDec(1, draw(labels), draw(labels)))
    return Machine(tuple(ins), 1)


@settings(max_examples=80)
@given(one_counter_machines(), st.lists(st.integers(0, 1), max_size=6))
def test_runs_follow_the_step_relation(m, choices):
    comp = run_with_period_detection(m, max_steps=200, strategy=Strategy(tuple(choices)))
    assert check_computation(m, comp, extra=2 * len(comp.configs)) == []
    for cfg in comp.configs:
        assert 1 <= len(successors(m, cfg)) <= 2


@settings(max_examples=50)
@given(one_counter_machines(), one_counter_machines(), st.data())
def test_product_successors_share_counters(m1, m2, data):
    if m1.m != m2.m:
        return
    I1 = frozenset(data.draw(st.sets(st.integers(1, m1.m))))
    p = SyncProduct(m1, m2, I1, frozenset(range(1, m1.m + 1)) - I1)
    comp = run_with_period_detection(p, max_steps=100)
    for d in comp.configs:
        succ = product_successors(p, d)
        assert len({s.counters for s in succ}) == 1
