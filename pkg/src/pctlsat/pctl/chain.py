"""Finite Markov chains with rational transition rows."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from ..errors import ChainError
from ..geometry import format_rat, parse_rat


@dataclass
class MarkovChain:
    """States in a fixed order, a valuation and one stochastic row per state.

    Rows are validated on construction: positive entries, declared targets,
    no repeated target, and an exact sum of 1.
    """

    states: tuple
    props: dict
    trans: dict
    start: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.states = tuple(self.states)
        index = {}
        for i, s in enumerate(self.states):
            if s in index:
                raise ChainError(f"duplicate state {s!r}")
            index[s] = i
        self._index = index
        self.props = {s: frozenset(self.props.get(s, ())) for s in self.states}
        rows = {}
        for s in self.states:
            if s not in self.trans:
                raise ChainError(f"state {s!r} has no transition row")
            row = []
            seen = set()
            total = Fraction(0)
            for t, p in self.trans[s]:
                p = parse_rat(p)
                if t not in index:
                    raise ChainError(f"{s!r} -> undeclared state {t!r}")
                if t in seen:
                    raise ChainError(f"{s!r} lists target {t!r} twice")
                if p <= 0:
                    raise ChainError(f"{s!r} -> {t!r} has non-positive probability {p}")
                seen.add(t)
                total += p
                row.append((t, p))
            if total != 1:
                raise ChainError(f"row of {s!r} sums to {total}, not 1")
            rows[s] = tuple(row)
        extra = set(self.trans) - set(index)
        if extra:
            raise ChainError(f"rows for undeclared states: {sorted(extra)}")
        self.trans = rows
        if self.start is not None and self.start not in index:
            raise ChainError(f"start state {self.start!r} is not declared")

    def __len__(self) -> int:
        return len(self.states)

    def index(self, s: str) -> int:
        try:
            return self._index[s]
        except KeyError:
            raise ChainError(f"unknown state {s!r}") from None

    def successors(self, s: str) -> tuple:
        return self.trans[s]

    def prob(self, s: str, t: str) -> Fraction:
        for u, p in self.trans[s]:
            if u == t:
                return p
        return Fraction(0)

    def reachable(self, s: str) -> list[str]:
        """States reachable from s in BFS order (s first)."""
        seen = {s}
        order = [s]
        i = 0
        while i < len(order):
            for t, _ in self.trans[order[i]]:
                if t not in seen:
                    seen.add(t)
                    order.append(t)
            i += 1
        return order

    def restrict(self, s: str) -> MarkovChain:
        """The sub-chain of states reachable from s."""
        keep = self.reachable(s)
        return MarkovChain(keep, {t: self.props[t] for t in keep},
                           {t: self.trans[t] for t in keep}, start=s, meta=dict(self.meta))

    # indexed views used by the checker
    @cached_property
    def succ_idx(self) -> tuple:
        return tuple(tuple(self._index[t] for t, _ in self.trans[s]) for s in self.states)

    @cached_property
    def succ_mask(self) -> tuple:
        out = []
        for row in self.succ_idx:
            m = 0
            for j in row:
                m |= 1 << j
            out.append(m)
        return tuple(out)

    @cached_property
    def int_rows(self) -> tuple:
        """Per state: (common denominator, ((target index, integer numerator), ...))."""
        out = []
        for s in self.states:
            row = self.trans[s]
            den = math.lcm(*(p.denominator for _, p in row))
            out.append((den, tuple((self._index[t], p.numerator * (den // p.denominator))
                                   for t, p in row)))
        return tuple(out)

    @cached_property
    def pred_idx(self) -> tuple:
        preds = [[] for _ in self.states]
        for i, row in enumerate(self.succ_idx):
            for j in row:
                preds[j].append(i)
        return tuple(tuple(p) for p in preds)

    def mask_of(self, states: Iterable[str]) -> int:
        m = 0
        for s in states:
            m |= 1 << self.index(s)
        return m

    def states_of(self, mask: int) -> list[str]:
        return [s for i, s in enumerate(self.states) if mask >> i & 1]

    def prop_universe(self) -> set[str]:
        out = set()
        for ps in self.props.values():
            out |= ps
        return out

    # serialisation
    def to_json(self) -> dict:
        data = {"states": [
            {"id": s, "props": sorted(self.props[s]),
             "trans": [[t, format_rat(p)] for t, p in self.trans[s]]}
            for s in self.states]}
        if self.start is not None:
            data["start"] = self.start
        if self.meta:
            data["meta"] = self.meta
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, data: Mapping) -> MarkovChain:
        try:
            entries = data["states"]
            states = [e["id"] for e in entries]
            props = {e["id"]: e.get("props", []) for e in entries}
            trans = {e["id"]: [(t, parse_rat(p)) for t, p in e["trans"]] for e in entries}
        except (KeyError, TypeError, ValueError) as exc:
            raise ChainError(f"malformed chain JSON: {exc}") from exc
        return cls(states, props, trans, start=data.get("start"), meta=dict(data.get("meta", {})))

    @classmethod
    def loads(cls, text: str) -> MarkovChain:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ChainError(f"invalid JSON: {exc}") from exc
        return cls.from_json(data)

    @classmethod
    def load(cls, path) -> MarkovChain:
        with open(path) as fh:
            return cls.loads(fh.read())

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps() + "\n")

    def to_dot(self, name: str = "chain") -> str:
        lines = [f"digraph {_dot_id(name)} {{", "  rankdir=LR;"]
        for s in self.states:
            label = s + "\\n{" + ",".join(sorted(self.props[s])) + "}"
            shape = "doublecircle" if s == self.start else "ellipse"
            lines.append(f"  {_dot_id(s)} [label={_dot_str(label)}, shape={shape}];")
        for s in self.states:
            for t, p in self.trans[s]:
                lines.append(f"  {_dot_id(s)} -> {_dot_id(t)} [label={_dot_str(format_rat(p))}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_str(text: str) -> str:
    return '"' + text.replace('"', '\\"') + '"'


def _dot_id(text: str) -> str:
    return _dot_str(text)
