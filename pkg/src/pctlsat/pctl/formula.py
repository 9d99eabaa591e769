"""PCTL abstract syntax.

State formulae are frozen dataclasses with a cached structural hash, so that
large formulae built with heavy subterm sharing can be memoised cheaply.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Iterable

COMPARISONS = (">=", ">", "<=", "<", "=")


class _Node:
    """Structural equality and a hash computed once per node."""

    def _values(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + self._values())
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(other) is not type(self) or hash(self) != hash(other):
            return False
        return self._values() == other._values()

    def __ne__(self, other) -> bool:
        return not self == other

    def __str__(self) -> str:
        from .parser import print_formula
        return print_formula(self)


class StateFormula(_Node):
    pass


class PathFormula(_Node):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Const(StateFormula):
    value: bool

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


@dataclass(frozen=True, eq=False)
class Atom(StateFormula):
    name: str


@dataclass(frozen=True, eq=False)
class Not(StateFormula):
    sub: StateFormula


@dataclass(frozen=True, eq=False)
class And(StateFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True, eq=False)
class Or(StateFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True, eq=False)
class Implies(StateFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True, eq=False)
class Prob(StateFormula):
    cmp: str
    bound: Fraction
    path: PathFormula

    def __post_init__(self):
        if self.cmp not in COMPARISONS:
            raise ValueError(f"unknown comparison {self.cmp!r}")
        bound = Fraction(self.bound)
        if not 0 <= bound <= 1:
            raise ValueError(f"probability bound {bound} outside [0,1]")
        object.__setattr__(self, "bound", bound)


@dataclass(frozen=True, eq=False)
class ExactMatch(StateFormula):
    """Holds where every successor agrees with the state on the propositions in ``props``."""

    props: tuple

    def __post_init__(self):
        object.__setattr__(self, "props", tuple(self.props))


@dataclass(frozen=True, eq=False)
class Next(PathFormula):
    sub: StateFormula


@dataclass(frozen=True, eq=False)
class Until(PathFormula):
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True, eq=False)
class BoundedUntil(PathFormula):
    left: StateFormula
    right: StateFormula
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("step bound must be non-negative")


TRUE = Const(True)
FALSE = Const(False)


def conj(*parts: StateFormula | Iterable[StateFormula]) -> StateFormula:
    """Left-nested conjunction; the empty conjunction is true."""
    items = _flat_args(parts)
    if not items:
        return TRUE
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disj(*parts: StateFormula | Iterable[StateFormula]) -> StateFormula:
    """Left-nested disjunction; the empty disjunction is false."""
    items = _flat_args(parts)
    if not items:
        return FALSE
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


def _flat_args(parts) -> list:
    items = []
    for p in parts:
        if isinstance(p, StateFormula):
            items.append(p)
        else:
            items.extend(p)
    return items


def neg(f: StateFormula) -> StateFormula:
    return Not(f)


def implies(f: StateFormula, g: StateFormula) -> StateFormula:
    return Implies(f, g)


def atoms(*names: str) -> list[Atom]:
    return [Atom(n) for n in names]


def X(cmp: str, bound, f: StateFormula) -> Prob:
    return Prob(cmp, Fraction(bound), Next(f))


def F(cmp: str, bound, f: StateFormula, k: int | None = None) -> Prob:
    """P cmp bound [ F f ] or, with k, [ F<=k f ]."""
    path = Until(TRUE, f) if k is None else BoundedUntil(TRUE, f, k)
    return Prob(cmp, Fraction(bound), path)


def G1(f: StateFormula) -> Prob:
    """Almost-sure globally: P=0 [ F !f ]."""
    return Prob("=", Fraction(0), Until(TRUE, Not(f)))


def is_G1(f: StateFormula) -> bool:
    return (isinstance(f, Prob) and f.cmp == "=" and f.bound == 0
            and isinstance(f.path, Until) and f.path.left == TRUE
            and isinstance(f.path.right, Not))


def flatten(f: StateFormula, kind: type) -> list[StateFormula]:
    """Operands of a nested And/Or tree, left to right, without recursion."""
    out, stack = [], [f]
    while stack:
        g = stack.pop()
        if type(g) is kind:
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def atom_names(f: StateFormula | PathFormula) -> set[str]:
    """All proposition names mentioned, including ExactMatch sets."""
    seen: set[int] = set()
    names: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        if isinstance(g, Atom):
            names.add(g.name)
        elif isinstance(g, ExactMatch):
            names.update(g.props)
        elif isinstance(g, Const):
            pass
        else:
            for fld in fields(g):
                v = getattr(g, fld.name)
                if isinstance(v, _Node):
                    stack.append(v)
    return names


def size(f: StateFormula | PathFormula) -> int:
    """Number of distinct nodes (shared subterms counted once)."""
    seen: set[int] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        for fld in fields(g):
            v = getattr(g, fld.name)
            if isinstance(v, _Node):
                stack.append(v)
    return len(seen)
