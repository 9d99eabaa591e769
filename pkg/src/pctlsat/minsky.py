"""Non-deterministic Minsky machines, synchronised products and their runs.

Text format (.mm), one instruction per line, labels 1-based::

    1: inc c1 goto {2}
    2: jzdec c1 zero {1} else {2,3}

Lines may also be separated by ';'; '#' starts a comment.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Sequence, Union

from .errors import MachineError

MAX_COUNTERS = 2


@dataclass(frozen=True)
class Inc:
    counter: int
    targets: tuple

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))

    def target_sets(self) -> tuple:
        return (self.targets,)

    def retarget(self, *sets) -> Inc:
        (t,) = sets
        return Inc(self.counter, t)

    def __str__(self) -> str:
        return f"inc c{self.counter} goto {_fmt_set(self.targets)}"


@dataclass(frozen=True)
class JzDec:
    counter: int
    zero: tuple
    nonzero: tuple

    def __post_init__(self):
        object.__setattr__(self, "zero", tuple(self.zero))
        object.__setattr__(self, "nonzero", tuple(self.nonzero))

    def target_sets(self) -> tuple:
        return (self.zero, self.nonzero)

    def retarget(self, *sets) -> JzDec:
        z, nz = sets
        return JzDec(self.counter, z, nz)

    def __str__(self) -> str:
        return f"jzdec c{self.counter} zero {_fmt_set(self.zero)} else {_fmt_set(self.nonzero)}"


Instruction = Union[Inc, JzDec]


def _fmt_set(labels) -> str:
    return "{" + ",".join(str(x) for x in labels) + "}"


@dataclass(frozen=True)
class Machine:
    instructions: tuple
    counters: int = 1

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))

    @property
    def m(self) -> int:
        return len(self.instructions)

    def ins(self, label: int) -> Instruction:
        return self.instructions[label - 1]

    def is_deterministic(self) -> bool:
        return all(len(s) == 1 for ins in self.instructions for s in ins.target_sets())

    def __str__(self) -> str:
        return format_machine(self)


@dataclass(frozen=True)
class Config:
    label: int
    counters: tuple

    def __post_init__(self):
        object.__setattr__(self, "counters", tuple(self.counters))

    def as_tuple(self) -> tuple:
        return (self.label,) + self.counters

    def __str__(self) -> str:
        return "(" + ",".join(str(x) for x in self.as_tuple()) + ")"


def config(*values: int) -> Config:
    return Config(values[0], values[1:])


@dataclass(frozen=True)
class SyncProduct:
    """Two one-counter machines over the same labels; I1 labels take the next label from m1."""

    m1: Machine
    m2: Machine
    I1: frozenset
    I2: frozenset

    def __post_init__(self):
        object.__setattr__(self, "I1", frozenset(self.I1))
        object.__setattr__(self, "I2", frozenset(self.I2))
        problems = validate_product(self)
        if problems:
            raise MachineError("; ".join(problems))

    @property
    def m(self) -> int:
        return self.m1.m

    def owner(self, label: int) -> int:
        return 1 if label in self.I1 else 2


# parsing and printing -------------------------------------------------------

_LINE = re.compile(
    r"^\s*(\d+)\s*:\s*(?:"
    r"inc\s+c(\d+)\s+goto\s*\{([^}]*)\}"
    r"|jzdec\s+c(\d+)\s+zero\s*\{([^}]*)\}\s*else\s*\{([^}]*)\}"
    r")\s*$")


def _labels(text: str, lineno: int) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise MachineError(f"line {lineno}: bad label set {{{text}}}") from None


def parse_machine(text: str, counters: int | None = None) -> Machine:
    """Parse the .mm format; the counter count defaults to the largest index used."""
    entries = []
    lineno = 0
    for raw in text.replace(";", "\n").splitlines():
        lineno += 1
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if m is None:
            raise MachineError(f"line {lineno}: cannot parse {line!r}")
        label = int(m.group(1))
        if m.group(2) is not None:
            ins = Inc(int(m.group(2)), _labels(m.group(3), lineno))
        else:
            ins = JzDec(int(m.group(4)), _labels(m.group(5), lineno), _labels(m.group(6), lineno))
        entries.append((label, ins))
    if not entries:
        raise MachineError("machine has no instructions")
    labels = [lab for lab, _ in entries]
    if labels != list(range(1, len(entries) + 1)):
        raise MachineError(f"labels must be 1..{len(entries)} in order, got {labels}")
    used = max(ins.counter for _, ins in entries)
    machine = Machine(tuple(ins for _, ins in entries), counters or used)
    problems = validate_machine(machine)
    if problems:
        raise MachineError("; ".join(problems))
    return machine


def format_machine(m: Machine) -> str:
    return "".join(f"{i}: {ins}\n" for i, ins in enumerate(m.instructions, 1))


def load_machine(path, counters: int | None = None) -> Machine:
    with open(path) as fh:
        return parse_machine(fh.read(), counters)


def validate_machine(m: Machine) -> list[str]:
    problems = []
    if not m.instructions:
        problems.append("machine has no instructions")
    if not 1 <= m.counters <= MAX_COUNTERS:
        problems.append(f"machines have 1..{MAX_COUNTERS} counters, not {m.counters}")
    for i, ins in enumerate(m.instructions, 1):
        if not isinstance(ins, (Inc, JzDec)):
            problems.append(f"{i}: unknown instruction {ins!r}")
            continue
        if not 1 <= ins.counter <= m.counters:
            problems.append(f"{i}: counter c{ins.counter} outside 1..{m.counters}")
        for labels in ins.target_sets():
            if not 1 <= len(labels) <= 2:
                problems.append(f"{i}: label set {_fmt_set(labels)} must have one or two elements")
            if len(set(labels)) != len(labels):
                problems.append(f"{i}: label set {_fmt_set(labels)} repeats a label")
            for lab in labels:
                if not 1 <= lab <= m.m:
                    problems.append(f"{i}: label {lab} outside 1..{m.m}")
    return problems


def validate_product(p: SyncProduct) -> list[str]:
    problems = []
    for name, mach in (("m1", p.m1), ("m2", p.m2)):
        if mach.counters != 1:
            problems.append(f"{name} must be a one-counter machine")
        problems += [f"{name}: {x}" for x in validate_machine(mach)]
    if p.m1.m != p.m2.m:
        problems.append("m1 and m2 must have the same number of instructions")
    labels = set(range(1, p.m1.m + 1))
    if p.I1 & p.I2:
        problems.append("partition blocks overlap")
    if p.I1 | p.I2 != labels:
        problems.append(f"partition must cover exactly 1..{p.m1.m}")
    return problems


def load_partition(path) -> tuple[frozenset, frozenset]:
    with open(path) as fh:
        data = json.load(fh)
    try:
        return frozenset(int(x) for x in data["I1"]), frozenset(int(x) for x in data["I2"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MachineError(f"malformed partition JSON: {exc}") from exc


def partition_json(I1, I2) -> dict:
    return {"I1": sorted(I1), "I2": sorted(I2)}


# semantics --------------------------------------------------------------------

def _apply(ins: Instruction, value: int) -> tuple[tuple, int]:
    """(next labels, new counter value) for one instruction on one counter."""
    if isinstance(ins, Inc):
        return ins.targets, value + 1
    if value == 0:
        return ins.zero, 0
    return ins.nonzero, value - 1


def successors(m: Machine, c: Config) -> tuple:
    """Successor configurations in target-set order."""
    ins = m.ins(c.label)
    j = ins.counter - 1
    labels, value = _apply(ins, c.counters[j])
    counters = c.counters[:j] + (value,) + c.counters[j + 1:]
    return tuple(Config(lab, counters) for lab in labels)


def product_successors(p: SyncProduct, d: Config) -> tuple:
    j = d.label
    (n1, n2) = d.counters
    labels1, n1p = _apply(p.m1.ins(j), n1)
    labels2, n2p = _apply(p.m2.ins(j), n2)
    labels = labels1 if j in p.I1 else labels2
    return tuple(Config(lab, (n1p, n2p)) for lab in labels)


def step_function(system):
    if isinstance(system, SyncProduct):
        return lambda c: product_successors(system, c)
    return lambda c: successors(system, c)


def initial_config(system) -> Config:
    k = 2 if isinstance(system, SyncProduct) else system.counters
    return Config(1, (0,) * k)


@dataclass(frozen=True)
class Strategy:
    """Resolves two-way branching: the i-th branching step takes choices[i], then 0."""

    choices: tuple = ()

    @classmethod
    def parse(cls, text: str | None) -> Strategy:
        if text is None or text.strip() in ("", "first"):
            return cls()
        try:
            return cls(tuple(int(x) for x in text.split(",")))
        except ValueError:
            raise MachineError(f"bad strategy {text!r}; use 'first' or e.g. '0,1,1'") from None

    def __str__(self) -> str:
        return ",".join(map(str, self.choices)) or "first"


@dataclass(frozen=True)
class Computation:
    """A run prefix C_0..C_{beta-1}; with a period, C_n for n >= beta is C_{alpha+(n-alpha) mod (beta-alpha)}."""

    configs: tuple
    alpha: int | None = None
    beta: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "configs", tuple(self.configs))
        if (self.alpha is None) != (self.beta is None):
            raise MachineError("alpha and beta must be given together")
        if self.alpha is not None:
            if not 1 <= self.alpha < self.beta:
                raise MachineError("need 1 <= alpha < beta")
            if len(self.configs) != self.beta:
                raise MachineError("a periodic computation stores exactly C_0..C_{beta-1}")

    @property
    def periodic(self) -> bool:
        return self.beta is not None

    @property
    def period(self) -> tuple | None:
        return (self.alpha, self.beta) if self.periodic else None

    def __getitem__(self, n: int) -> Config:
        if n < len(self.configs):
            return self.configs[n]
        if not self.periodic:
            raise IndexError(f"aperiodic computation has only {len(self.configs)} configurations")
        a, b = self.alpha, self.beta
        return self.configs[a + (n - a) % (b - a)]

    def next_index(self, k: int) -> int:
        """Index that follows k among the stored configurations (wraps beta-1 to alpha)."""
        if self.periodic and k == self.beta - 1:
            return self.alpha
        return k + 1

    def recurs(self, label: int) -> bool:
        """Whether ``label`` occurs infinitely often (only decidable for periodic runs)."""
        if not self.periodic:
            raise MachineError("recurrence is only determined for periodic computations")
        return any(c.label == label for c in self.configs[self.alpha:self.beta])

    def prefix(self, n: int) -> list:
        return [self[i] for i in range(n)]

    def to_json(self) -> dict:
        data = {"configurations": [list(c.as_tuple()) for c in self.configs]}
        if self.periodic:
            data["alpha"] = self.alpha
            data["beta"] = self.beta
        return data

    @classmethod
    def from_json(cls, data: dict) -> Computation:
        configs = [Config(c[0], tuple(c[1:])) for c in data["configurations"]]
        return cls(configs, data.get("alpha"), data.get("beta"))


def run_with_period_detection(system, start: Config | None = None, max_steps: int = 10_000,
                              strategy: Strategy | None = None) -> Computation:
    """Run until a configuration repeats (same choice position) or max_steps is hit.

    On the first repeat C_j = C_i (i < j) the stored prefix is C_0..C_j and
    the period is alpha = i+1, beta = j+1, so that C_{alpha-1}.. and
    C_{beta-1}.. coincide.
    """
    strategy = strategy or Strategy()
    step = step_function(system)
    current = start or initial_config(system)
    configs = [current]
    ptr = 0
    seen = {(current, 0): 0}
    for _ in range(max_steps):
        succ = step(current)
        if len(succ) > 1:
            pick = strategy.choices[ptr] if ptr < len(strategy.choices) else 0
            if not 0 <= pick < len(succ):
                raise MachineError(f"strategy choice {pick} out of range at {current}")
            ptr += 1
        else:
            pick = 0
        current = succ[pick]
        key = (current, min(ptr, len(strategy.choices)))
        if key in seen:
            configs.append(current)
            return Computation(configs, seen[key] + 1, len(configs))
        seen[key] = len(configs)
        configs.append(current)
    return Computation(configs)


def check_computation(system, comp: Computation, extra: int = 0) -> list[str]:
    """Step-relation violations on the stored prefix (plus `extra` unrolled steps)."""
    step = step_function(system)
    problems = []
    n = len(comp.configs) + (extra if comp.periodic else 0)
    if comp[0] != initial_config(system):
        problems.append(f"computation starts at {comp[0]}, not {initial_config(system)}")
    upto = n if not comp.periodic else max(n, comp.beta + 1)
    for i in range(upto - 1):
        if comp[i + 1] not in step(comp[i]):
            problems.append(f"step {i}: {comp[i]} -> {comp[i + 1]} is not a machine step")
    if comp.periodic:
        for off in range(comp.beta - comp.alpha + 1):
            if comp[comp.alpha - 1 + off] != comp[comp.beta - 1 + off]:
                problems.append(f"suffixes from alpha-1 and beta-1 differ at offset {off}")
                break
    return problems


# two-counter machines to synchronised products ------------------------------

def encode_pair(label: int, plus: bool) -> int:
    """(l,0) -> 2l-1 and (l,+) -> 2l."""
    return 2 * label if plus else 2 * label - 1


def decode_label(x: int) -> tuple[int, bool]:
    return (x + 1) // 2, x % 2 == 0


def hat_machine(m: Machine) -> Machine:
    """Append, for each j, 'm+j: jzdec c1 zero {1} else {j}' and the c2 twin at 2m+j."""
    if m.counters != 2:
        raise MachineError("translation needs a two-counter machine")
    n = m.m
    extra1 = [JzDec(1, (1,), (j,)) for j in range(1, n + 1)]
    extra2 = [JzDec(2, (1,), (j,)) for j in range(1, n + 1)]
    return Machine(m.instructions + tuple(extra1) + tuple(extra2), 2)


@dataclass(frozen=True)
class Translation:
    product: SyncProduct
    hat: Machine
    source: Machine
    encoding: str = "(l,0) -> 2l-1, (l,+) -> 2l"
    meta: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {"m1": format_machine(self.product.m1), "m2": format_machine(self.product.m2),
                **partition_json(self.product.I1, self.product.I2),
                "encoding": self.encoding, "start": encode_pair(1, False)}


def two_counter_to_product(m: Machine) -> Translation:
    hat = hat_machine(m)
    size = hat.m
    on1 = {lab for lab in range(1, size + 1) if hat.ins(lab).counter == 1}

    def first_visit(u, owner_set, other_offset):
        # target of a (l,0) instruction: (u,+) when u stays with the same owner
        return encode_pair(u, True) if u in owner_set else encode_pair(other_offset + u, False)

    idle_inc = Inc(1, (1,))
    idle_dec = JzDec(1, (1,), (1,))
    ins1: dict[int, Instruction] = {}
    ins2: dict[int, Instruction] = {}
    for lab in range(1, size + 1):
        src = hat.ins(lab)
        zero_lab, plus_lab = encode_pair(lab, False), encode_pair(lab, True)
        if lab in on1:
            mine = {lab2 for lab2 in on1}
            other_offset = 2 * m.m  # jump to the c2 restore block
        else:
            mine = set(range(1, size + 1)) - on1
            other_offset = m.m  # jump to the c1 restore block
        at_zero = src.retarget(*[tuple(first_visit(u, mine, other_offset) for u in ts)
                                 for ts in src.target_sets()])
        at_plus = src.retarget(*[tuple(encode_pair(u, False) for u in ts)
                                 for ts in src.target_sets()])
        at_zero = _with_counter(at_zero, 1)
        at_plus = _with_counter(at_plus, 1)
        active, idle = (ins1, ins2) if lab in on1 else (ins2, ins1)
        active[zero_lab], active[plus_lab] = at_zero, at_plus
        idle[zero_lab], idle[plus_lab] = idle_inc, idle_dec
    total = 2 * size
    m1 = Machine(tuple(ins1[i] for i in range(1, total + 1)), 1)
    m2 = Machine(tuple(ins2[i] for i in range(1, total + 1)), 1)
    I1 = frozenset(x for lab in on1 for x in (encode_pair(lab, False), encode_pair(lab, True)))
    I2 = frozenset(range(1, total + 1)) - I1
    return Translation(SyncProduct(m1, m2, I1, I2), hat, m)


def _with_counter(ins: Instruction, counter: int) -> Instruction:
    if isinstance(ins, Inc):
        return Inc(counter, ins.targets)
    return JzDec(counter, ins.zero, ins.nonzero)


def induced_trace(tr: Translation, configs: Sequence[Config]) -> list[Config]:
    """Project product configurations onto configurations of the source machine.

    Only steps at labels (l, flag) with l among the original labels count; when
    the flag is + the idle counter carries one pending increment.
    """
    m = tr.source.m
    out = []
    for d in configs:
        lab, plus = decode_label(d.label)
        if lab > m:
            continue
        n1, n2 = d.counters
        if plus:
            if tr.hat.ins(lab).counter == 1:
                n2 -= 1
            else:
                n1 -= 1
        out.append(Config(lab, (n1, n2)))
    return out
