"""Which compile-option variants do the witness chains satisfy?

Rows are witnesses, columns are CompileOptions variants.  The default column
is the one the package ships; the others show what the printed readings give.
"""

from __future__ import annotations

from pathlib import Path

from pctlsat.geometry import default_constants
from pctlsat.minsky import SyncProduct, load_machine, load_partition, run_with_period_detection
from pctlsat.pctl import ModelChecker
from pctlsat.reduction import (
    CompileOptions, build_Psi_product, build_psi_one_counter, recurrence_extension,
)
from pctlsat.witness import model_one_counter, model_product

M = Path(__file__).resolve().parent.parent / "machines"
VARIANTS = {
    "default": CompileOptions(),
    "nonzero": CompileOptions(inc_scoping="nonzero"),
    "kappa2": CompileOptions(interval_bound="kappa2"),
    "unguarded": CompileOptions(guard_ltrans=False),
    "strict": CompileOptions.printed(),
}


def main():
    c = default_constants()
    print(f"{'witness':28}" + "".join(f"{v:>11}" for v in VARIANTS) + f"{'printed p_n':>13}")
    for name in ("loop", "count3", "nondet", "zeroskip"):
        m = load_machine(M / f"{name}.mm")
        comp = run_with_period_detection(m)
        mc = model_one_counter(c, m, comp)
        checker = ModelChecker(mc)
        cells = [checker.holds(mc.start, build_psi_one_counter(c, m, o).formula) for o in VARIANTS.values()]
        printed = model_one_counter(c, m, comp, printed_pn=True)
        p_ok = ModelChecker(printed).holds(printed.start, build_psi_one_counter(c, m).formula)
        print(f"{name:28}" + "".join(f"{str(x):>11}" for x in cells) + f"{str(p_ok):>13}")
    loop = load_machine(M / "loop.mm")
    p = SyncProduct(loop, loop, *load_partition(M / "loop_partition.json"))
    comp = run_with_period_detection(p)
    mc = model_product(c, p, comp)
    checker = ModelChecker(mc)
    cells = [checker.holds(mc.start, recurrence_extension(build_Psi_product(c, p, o), o).formula)
             for o in VARIANTS.values()]
    print(f"{'product loop x loop +rec':28}" + "".join(f"{str(x):>11}" for x in cells))


if __name__ == "__main__":
    main()
