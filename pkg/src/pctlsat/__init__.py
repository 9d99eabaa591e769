"""Exact tooling for the PCTL satisfiability reductions: geometry, model
checking, Minsky machines, formula compilers and witness chains."""

__version__ = "0.1.0"
