"""Command-line front end.

Exit codes: 0 pass/SAT, 1 fail/UNSAT, 2 usage or I/O problems, 3 invariant violations.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import reduction, witness
from .errors import ChainError, ConstantsError, DomainError, MachineError, ParseError, UnsupportedInput
from .geometry import GeometryConstants, area_contains, default_constants, format_rat
from .minsky import (
    Strategy, SyncProduct, format_machine, load_machine, load_partition, partition_json,
    run_with_period_detection, two_counter_to_product,
)
from .pctl import MarkovChain, ModelChecker, Prob, characteristic_vector, fragment_lint, parse_formula
from .pctl.formula import And, flatten

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3
FAMILIES = ("param", "one-counter", "product")


class UsageError(Exception):
    pass


# helpers ------------------------------------------------------------------------

def _constants(args) -> GeometryConstants:
    path = getattr(args, "constants", None)
    if not path:
        return default_constants()
    return GeometryConstants.from_json(json.loads(_read(path)))


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _options(args) -> reduction.CompileOptions:
    if getattr(args, "strict_paper", False):
        return reduction.CompileOptions.printed()
    return reduction.CompileOptions()


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _machine(path, counters=None):
    try:
        return load_machine(path, counters)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _product(args) -> SyncProduct:
    """From --m1/--m2/--partition, or by translating a two-counter --machine."""
    if getattr(args, "machine", None) and not args.m1:
        return two_counter_to_product(_machine(args.machine, 2)).product
    _need(args, "m1", "m2", "partition")
    try:
        I1, I2 = load_partition(args.partition)
    except OSError as exc:
        raise UsageError(f"cannot read {args.partition}: {exc.strerror}") from None
    return SyncProduct(_machine(args.m1, 1), _machine(args.m2, 1), I1, I2)


def _system(args):
    if args.family == "one-counter":
        _need(args, "machine")
        return _machine(args.machine, 1)
    return _product(args)


def _compile(args, c):
    opts = _options(args)
    if args.family == "param":
        _need(args, "n")
        compiled, _, _ = reduction.build_psi_parameterized(c, args.n, opts)
        return compiled
    system = _system(args)
    if args.family == "one-counter":
        return reduction.build_psi_one_counter(c, system, opts)
    compiled = reduction.build_Psi_product(c, system, opts)
    if args.recurrence:
        compiled = reduction.recurrence_extension(compiled, opts)
    return compiled


def _run(args, system):
    return run_with_period_detection(system, max_steps=args.max_steps,
                                     strategy=Strategy.parse(args.strategy))


def _emit(args, report: dict, lines: list[str]) -> None:
    if getattr(args, "json", False):
        sys.stdout.write(json.dumps(report, indent=1, sort_keys=True) + "\n")
    else:
        sys.stdout.write("\n".join(lines) + "\n")


# commands -----------------------------------------------------------------------

def cmd_compile(args) -> int:
    c = _constants(args)
    compiled = _compile(args, c)
    _write(args.out, compiled.text() + "\n")
    if args.out and args.out != "-":
        _write(args.out + ".json", json.dumps(compiled.sidecar(), indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_witness(args) -> int:
    c = _constants(args)
    if args.family == "param":
        _need(args, "n")
        mc = witness.model_param(c, args.n, printed=args.printed)
    else:
        system = _system(args)
        comp = _run(args, system)
        if not comp.periodic:
            sys.stderr.write("no finite witness; the computation is not periodic within "
                             f"{args.max_steps} steps\n")
            return EXIT_FAIL
        build = witness.model_one_counter if args.family == "one-counter" else witness.model_product
        mc = build(c, system, comp, printed_pn=args.printed)
    _write(args.out, mc.dumps() + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    mc = MarkovChain.loads(_read(args.model))
    phi = parse_formula(_read(args.formula))
    state = args.state or mc.start
    if state is None:
        raise UsageError("the chain has no start state; pass --state")
    mc.index(state)
    checker = ModelChecker(mc)
    sat = checker.holds(state, phi)
    report = {"state": state, "result": "SAT" if sat else "UNSAT"}
    lines = [f"{'SAT' if sat else 'UNSAT'} at {state}"]
    if args.table:
        table = []
        for n, f in enumerate(flatten(phi, And)):
            if not isinstance(f, Prob):
                continue
            probs = checker.path_probabilities(f.path)
            rows = {s: format_rat(p) for s, p in zip(mc.states, probs)}
            table.append({"conjunct": n, "bound": f"{f.cmp}{format_rat(f.bound)}", "probs": rows})
            lines.append(f"conjunct[{n}] P{f.cmp}{format_rat(f.bound)}:")
            lines += [f"  {s}: {p}" for s, p in rows.items()]
        report["table"] = table
    _emit(args, report, lines)
    return EXIT_OK if sat else EXIT_FAIL


def cmd_lint(args) -> int:
    phi = parse_formula(_read(args.formula))
    report = fragment_lint(phi)
    _emit(args, {"ok": report.ok, "notes": report.notes, "errors": report.errors}, [str(report)])
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_export(args) -> int:
    mc = MarkovChain.loads(_read(args.model))
    text = mc.to_dot() if args.format == "dot" else mc.dumps() + "\n"
    _write(args.out, text)
    return EXIT_OK


def cmd_translate(args) -> int:
    tr = two_counter_to_product(_machine(args.machine, 2))
    if args.out:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise UsageError(f"cannot create {out}: {exc.strerror}") from None
        _write(out / "m1.mm", format_machine(tr.product.m1))
        _write(out / "m2.mm", format_machine(tr.product.m2))
        _write(out / "partition.json",
               json.dumps(partition_json(tr.product.I1, tr.product.I2)) + "\n")
        _write(out / "translation.json", json.dumps(tr.to_json(), indent=1) + "\n")
    else:
        sys.stdout.write(json.dumps(tr.to_json(), indent=1) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    c = _constants(args)
    compiled = _compile(args, c)
    lint = compiled.lint()
    report = {"family": compiled.family, "lint": lint.ok, "lint_notes": lint.notes}
    lines = [f"family: {compiled.family}", f"lint: {'PASS' if lint.ok else 'FAIL'}"
             + "".join(f" ({n})" for n in lint.notes)]
    failures = [] if lint.ok else ["lint"]
    mode = "product" if args.family == "product" else "one-counter"
    if args.family == "param":
        mc = witness.model_param(c, args.n, printed=args.printed)
        comp = system = None
    else:
        system = _system(args)
        comp = _run(args, system)
        report["period"] = list(comp.period) if comp.periodic else None
        if not comp.periodic:
            lines.append("no finite witness; formula compiled only")
            report["witness"] = None
            _emit(args, report, lines)
            return EXIT_FAIL if failures else EXIT_OK
        lines.append(f"period: alpha={comp.alpha} beta={comp.beta}")
        build = witness.model_one_counter if mode == "one-counter" else witness.model_product
        mc = build(c, system, comp, printed_pn=args.printed)
    checker = ModelChecker(mc)
    sat = checker.holds(mc.start, compiled.formula)
    report.update(states=len(mc), start=mc.start, sat=sat)
    lines.append(f"witness: {len(mc)} states, start {mc.start} {'SAT' if sat else 'UNSAT'}")
    if not sat:
        failures.append("sat")
    premises = witness.area_premises(c, mc)
    classes = witness.vector_classes(c, mc)
    report["area_premises"] = premises
    report["vector_classes"] = classes
    lines.append(f"balance equations and tau images: {'PASS' if not premises else 'FAIL'}")
    lines.append(f"vectors on the sigma orbit: {'PASS' if not classes else 'FAIL'}")
    failures += ["area_premises"] * bool(premises) + ["vector_classes"] * bool(classes)
    if args.depth:
        outside = _area_check(c, mc, args.depth)
        report["area_outside"] = outside
        lines.append(f"Area membership (depth {args.depth}): {'PASS' if not outside else 'FAIL'}")
        failures += ["area"] * bool(outside)
    if system is not None:
        sim = witness.simulates(c, mc, mc.start, system, mode)
        cov = witness.covers(c, mc, mc.start, comp, args.cover_steps, mode)
        report.update(simulates=sim.ok, simulation_violations=sim.violations, covers=cov)
        lines.append(f"simulates: {'PASS' if sim.ok else 'FAIL'} ({sim.checked} representing states)")
        lines += [f"  {v}" for v in sim.violations[:10]]
        lines.append(f"covers {args.cover_steps} steps: {'PASS' if cov else 'FAIL'}")
        failures += ["simulates"] * (not sim.ok) + ["covers"] * (not cov)
        if compiled.family == "product+recurrence":
            recurs = comp.recurs(1)
            report["label1_recurs"] = recurs
            lines.append(f"label 1 recurs: {recurs}; SAT matches: {sat == recurs}")
            if sat == recurs and "sat" in failures:
                failures.remove("sat")
            elif sat != recurs:
                failures.append("recurrence")
    report["ok"] = not failures
    lines.append("PASS" if not failures else "FAIL: " + ", ".join(failures))
    _emit(args, report, lines)
    return EXIT_OK if not failures else EXIT_FAIL


def _area_check(c, mc: MarkovChain, depth: int) -> list:
    cache = {}
    outside = []
    for a, b, h in witness._sides(mc):
        for t in mc.states:
            if h in mc.props[t]:
                continue
            v = characteristic_vector(mc, t, a, b)
            if v not in cache:
                cache[v] = area_contains(c, v, depth)
            if not cache[v]:
                outside.append(t)
    return outside


# parser ---------------------------------------------------------------------------

def _family_args(p, with_run=True):
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--n", type=int, help="counter value for the param family")
    p.add_argument("--machine", help="machine file (.mm); two-counter for product")
    p.add_argument("--m1", help="first one-counter machine of a product")
    p.add_argument("--m2", help="second one-counter machine of a product")
    p.add_argument("--partition", help='partition JSON {"I1": [...], "I2": [...]}')
    p.add_argument("--constants", help="constants JSON (q, kappa, gamma)")
    p.add_argument("--strict-paper", action="store_true",
                   help="kappa_2 interval bound, !Zero-scoped inc conjuncts, unguarded LTrans, literal F>0")
    p.add_argument("--recurrence", action="store_true", help="add the recurrence conjunct (product)")
    if with_run:
        p.add_argument("--strategy", default="first", help="branch choices, e.g. 0,1,1 (default first)")
        p.add_argument("--max-steps", type=int, default=10_000)
        p.add_argument("--printed", action="store_true",
                       help="use the literal printed layout (param) or printed p_n (machines)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pctlsat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a formula family")
    _family_args(p, with_run=False)
    p.add_argument("--out", help="formula file (sidecar JSON goes to OUT.json)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("witness", help="build a witness Markov chain")
    _family_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("check", help="model-check a formula at a state")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--state")
    p.add_argument("--table", action="store_true", help="print probabilities of top-level P conjuncts")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="compile, build a witness and check it end to end")
    _family_args(p)
    p.add_argument("--depth", type=int, default=0, help="also test Area membership to this depth")
    p.add_argument("--cover-steps", type=int, default=50)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("translate", help="two-counter machine to a synchronised product")
    p.add_argument("kind", choices=("two-counter",))
    p.add_argument("--machine", required=True)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("lint", help="check the X / F<=2 fragment")
    p.add_argument("--formula", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("export", help="export a chain")
    p.add_argument("format", choices=("dot", "json"))
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, MachineError, ChainError, UnsupportedInput,
            json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (ConstantsError, DomainError) as exc:
        sys.stderr.write(f"invariant violated: {exc}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
