"""Entry point that runs one algorithm and returns its reported front."""

from __future__ import annotations

import numpy as np

from normopt.front import Front, GENE_NAMES
from normopt.moea.base import MOEADD, MOMBI2, NSGA2, SPEA2, GenerationCallback, MoeaConfig, canonical_algorithm
from normopt.moea.moeadd import moeadd_run
from normopt.moea.mombi2 import mombi2_run
from normopt.moea.nsga2 import nsga2_run
from normopt.moea.pareto import nondominated_mask_min
from normopt.moea.problem import Problem
from normopt.moea.spea2 import spea2_run

RUNNERS = {NSGA2: nsga2_run, SPEA2: spea2_run, MOEADD: moeadd_run, MOMBI2: mombi2_run}


def unique_rows(genes: np.ndarray) -> np.ndarray:
    """Indices of the first occurrence of each distinct row, in original order."""
    _, first = np.unique(genes, axis=0, return_index=True)
    return np.sort(first)


def evolve(problem: Problem, config: MoeaConfig, callback: GenerationCallback | None = None) -> Front:
    """Run ``config.algorithm`` and return the non-dominated set of its final population.

    Distinct genomes of that set are re-scored with ``config.final_samples``
    Monte Carlo paths (skipped when 0), and the set is filtered for
    non-dominance again under the new scores.
    """
    config = config.validate()
    runner = RUNNERS[canonical_algorithm(config.algorithm)]
    population = runner(problem, config, callback)
    idx = np.flatnonzero(nondominated_mask_min(-population.objectives))
    idx = idx[unique_rows(population.genes[idx])]
    genes, scores = population.genes[idx], population.objectives[idx]
    if config.final_samples > 0:
        scores = problem.reevaluate(genes, config.final_samples, config.seed)
        keep = nondominated_mask_min(-scores)
        genes, scores = genes[keep], scores[keep]
    names = GENE_NAMES if genes.shape[1] == len(GENE_NAMES) else tuple(f"x{i}" for i in range(genes.shape[1]))
    return Front(genes, scores, problem.objective_set, names)
