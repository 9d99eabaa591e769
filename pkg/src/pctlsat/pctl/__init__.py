"""PCTL syntax, Markov chains and exact model checking."""

from .chain import MarkovChain
from .checker import (
    ModelChecker, characteristic_vector, holds, prob_next, prob_until_bounded,
    prob_until_unbounded, sat_states, solve_linear,
)
from .formula import (
    FALSE, TRUE, And, Atom, BoundedUntil, Const, ExactMatch, F, G1, Implies, Next, Not, Or,
    PathFormula, Prob, StateFormula, Until, X, conj, disj, is_G1,
)
from .lint import LintReport, fragment_lint
from .parser import parse_formula, print_formula

__all__ = [
    "MarkovChain", "ModelChecker", "characteristic_vector", "holds", "prob_next",
    "prob_until_bounded", "prob_until_unbounded", "sat_states", "solve_linear",
    "FALSE", "TRUE", "And", "Atom", "BoundedUntil", "Const", "ExactMatch", "F", "G1",
    "Implies", "Next", "Not", "Or", "PathFormula", "Prob", "StateFormula", "Until", "X",
    "conj", "disj", "is_G1", "LintReport", "fragment_lint", "parse_formula", "print_formula",
]
