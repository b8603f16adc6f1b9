"""Copositive and Lagrangian relaxation bounds for extended trust-region problems."""

from .model import ETRProblem, Multipliers, QuadFunc, StdProblem, evaluate, is_feasible, lagrangian, lagrangian_matrix, standardize

__all__ = [
    "ETRProblem",
    "Multipliers",
    "QuadFunc",
    "StdProblem",
    "evaluate",
    "is_feasible",
    "lagrangian",
    "lagrangian_matrix",
    "standardize",
]

__version__ = "0.1.0"
