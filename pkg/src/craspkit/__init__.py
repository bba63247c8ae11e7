"""Toolkit for past temporal logic with counting and its exact-transformer compiler."""

import sys

# Generated formulas (decompiler output, DNF expansions) can nest deeply.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

from .formulas import (  # noqa: E402,F401
    Alphabet, Formula, Term, Sym, Not, And, Or, Compare, Prev, Mod, BoolConst,
    CountLeft, CountRight, CountAll, CountLeftStrict, CountRightStrict,
    Sum, Neg, IntConst, Ite, TRUE, FALSE,
    parse, print_formula, depth, features,
    eval_formula, eval_term, evaluate_all, accepts,
    FormulaError, ParseError,
)
