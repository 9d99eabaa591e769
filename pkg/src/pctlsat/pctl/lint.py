"""Check that a formula lies in the X / F<=2 fragment.

Accepted shape: phi1 & P=1 [ G phi2 ], where phi1 and phi2 use only X and
bounded until with step bound at most 2.  One extra G-conjunct may use
unbounded F (the recurrence extension); it is accepted with a note.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .formula import (
    And, Atom, BoundedUntil, Const, ExactMatch, Next, Prob, StateFormula, Until, flatten,
    is_G1,
)

MAX_STEPS = 2
RECURRENCE_NOTE = "recurrence conjunct uses unbounded F"


@dataclass
class LintReport:
    ok: bool
    notes: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def __str__(self) -> str:
        lines = ["PASS" if self.ok else "FAIL"]
        lines += [f"note: {n}" for n in self.notes]
        lines += [f"error: {e}" for e in self.errors]
        return "\n".join(lines)


def _offenders(f, where: str) -> list[str]:
    """Locations of operators outside the fragment inside f (shared nodes visited once)."""
    out: list[str] = []
    seen: set[int] = set()
    stack = [(f, where)]
    while stack:
        g, loc = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        if isinstance(g, (Atom, Const, ExactMatch)):
            continue
        if isinstance(g, Until):
            out.append(f"{loc}: unbounded U")
        elif isinstance(g, BoundedUntil) and g.k > MAX_STEPS:
            out.append(f"{loc}: U<={g.k} exceeds step bound {MAX_STEPS}")
        for fld in fields(g):
            child = getattr(g, fld.name)
            if isinstance(child, (StateFormula, Next, Until, BoundedUntil)):
                stack.append((child, f"{loc}.{fld.name}"))
    return sorted(out)


def _is_recurrence_body(body: StateFormula) -> bool:
    """Body with unbounded until only under P>0 (positive reachability)."""
    stack, seen = [body], set()
    found = False
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        if isinstance(g, Prob) and isinstance(g.path, Until):
            if not (g.cmp == ">" and g.bound == 0):
                return False
            found = True
        if isinstance(g, (Atom, Const, ExactMatch)):
            continue
        for fld in fields(g):
            child = getattr(g, fld.name)
            if isinstance(child, (StateFormula, Next, Until, BoundedUntil)):
                stack.append(child)
    return found


def fragment_lint(phi: StateFormula) -> LintReport:
    conjuncts = flatten(phi, And)
    report = LintReport(ok=True)
    globals_ = [(n, c) for n, c in enumerate(conjuncts) if is_G1(c)]
    if not globals_:
        report.ok = False
        report.errors.append("no top-level P=1 [ G ... ] conjunct")
    main_seen = recurrence_seen = False
    for n, c in enumerate(conjuncts):
        loc = f"conjunct[{n}]"
        if is_G1(c):
            body = c.path.right.sub
            bad = _offenders(body, f"{loc}.G")
            if not bad:
                main_seen = True
                continue
            only_unbounded = all(b.endswith("unbounded U") for b in bad)
            if only_unbounded and not recurrence_seen and _is_recurrence_body(body):
                recurrence_seen = True
                report.notes.append(RECURRENCE_NOTE)
                continue
        else:
            bad = _offenders(c, loc)
        if bad:
            report.ok = False
            report.errors.extend(bad)
    if globals_ and not main_seen:
        report.ok = False
        report.errors.append("no G-conjunct lies inside the fragment")
    return report
