"""Exact optimization: LP relaxations, branch-and-bound and a brute-force oracle."""

from .lp import BACKEND, LpProblem, LpResult, solve_lp

__all__ = ["BACKEND", "LpProblem", "LpResult", "solve_lp"]
