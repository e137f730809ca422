"""Evolutionary multi-objective search over norm vectors."""

from normopt.moea.base import ALGORITHMS, MOEADD, MOMBI2, NSGA2, SPEA2, MoeaConfig, Population, canonical_algorithm
from normopt.moea.evolve import evolve
from normopt.moea.problem import ParabolaProblem, Problem, TaxProblem

__all__ = [
    "ALGORITHMS",
    "MOEADD",
    "MOMBI2",
    "NSGA2",
    "SPEA2",
    "MoeaConfig",
    "ParabolaProblem",
    "Population",
    "Problem",
    "TaxProblem",
    "canonical_algorithm",
    "evolve",
]
