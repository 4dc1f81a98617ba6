"""Competitive equilibria of an economy where humans and AI split problem solving.

Humans and machines each have knowledge in two dimensions.  Given a problem
distribution, the package computes equilibrium prices and allocations in
closed form, their comparative statics in machine knowledge, and the machine
knowledge that maximizes labor income.  Every result can be checked against
a direct output-maximization oracle.
"""
from .dist import UNIFORM, ProblemDist, ProductPowerDist, join, meet
from .econ import Economy, WageCandidates, abundance_holds, span, wage_candidates
from .errors import AbundanceError, DomainError, NonDifferentiableError, PreconditionError
from .baseline import Equilibrium, Region, classify, labor_max_vertex, mpl_gradient, solve_baseline
from .general import GeneralRegion, solve_general
from .twotype import TwoTypeEconomy, TwoTypeEquilibrium, solve_two_type

__all__ = [
    "UNIFORM",
    "ProblemDist",
    "ProductPowerDist",
    "join",
    "meet",
    "Economy",
    "WageCandidates",
    "abundance_holds",
    "span",
    "wage_candidates",
    "AbundanceError",
    "DomainError",
    "NonDifferentiableError",
    "PreconditionError",
    "Equilibrium",
    "Region",
    "classify",
    "labor_max_vertex",
    "mpl_gradient",
    "solve_baseline",
    "GeneralRegion",
    "solve_general",
    "TwoTypeEconomy",
    "TwoTypeEquilibrium",
    "solve_two_type",
]
