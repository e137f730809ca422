"""NSGA-II: generational search with non-dominated sorting and crowding."""

from __future__ import annotations

import numpy as np

from normopt.moea.base import (
    GenerationCallback,
    MoeaConfig,
    Population,
    binary_tournament,
    population_from,
    variation_params,
)
from normopt.moea.operators import make_offspring
from normopt.moea.pareto import crowding_distance, nondominated_sort_min
from normopt.moea.problem import Problem


def rank_and_crowd(G: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[np.ndarray]]:
    fronts, ranks = nondominated_sort_min(G)
    crowd = np.zeros(len(G))
    for front in fronts:
        crowd[front] = crowding_distance(G[front])
    return ranks, crowd, fronts


def survival(G: np.ndarray, size: int) -> np.ndarray:
    """Indices of the ``size`` survivors: whole fronts, then the least crowded of the split front."""
    ranks, crowd, fronts = rank_and_crowd(G)
    chosen = []
    for front in fronts:
        if len(chosen) + len(front) <= size:
            chosen.extend(front)
            if len(chosen) == size:
                break
        else:
            order = np.argsort(-crowd[front], kind="stable")
            chosen.extend(front[order[: size - len(chosen)]])
            break
    return np.asarray(chosen)


def nsga2_run(problem: Problem, config: MoeaConfig, callback: GenerationCallback | None = None) -> Population:
    """Run NSGA-II and return the final population.

    Parents come from binary tournaments on (rank, -crowding); survivors of
    the merged parent and offspring set fill the next population front by
    front.
    """
    config = config.validate().resolved(problem.num_objectives, problem.num_variables)
    rng = np.random.default_rng(config.seed)
    space, n = problem.space, config.population_size
    evaluate = problem.minimizer(config)
    X = space.random(n, rng)
    G = evaluate(X)
    ranks, crowd, _ = rank_and_crowd(G)
    if callback:
        callback(0, population_from(X, G, problem.objective_set))
    for gen in range(1, config.generations + 1):
        parents = binary_tournament([ranks, -crowd], n, rng)
        children = make_offspring(X[parents], n, rng, space, **variation_params(config))
        Gc = evaluate(children)
        X, G = np.vstack([X, children]), np.vstack([G, Gc])
        keep = survival(G, n)
        X, G = X[keep], G[keep]
        ranks, crowd, _ = rank_and_crowd(G)
        if callback:
            callback(gen, population_from(X, G, problem.objective_set))
    return population_from(X, G, problem.objective_set, rank=ranks, crowding=crowd)
