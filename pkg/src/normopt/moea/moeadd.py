"""MOEA/DD: steady-state search combining Pareto dominance and decomposition.

Each weight vector spans a subregion of objective space. A solution belongs
to the subregion whose weight ray (drawn from the ideal point) is closest in
perpendicular distance. Every offspring is merged into the population, and
one member is then removed using, in order, non-domination level, subregion
crowding and the PBI value against the member's own weight vector.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from normopt.moea.base import GenerationCallback, MoeaConfig, Population, population_from
from normopt.moea.operators import polynomial_mutation, sbx_crossover
from normopt.moea.pareto import fronts_from_dominance
from normopt.moea.problem import Problem
from normopt.moea.weights import weight_vectors


def neighborhoods(weights: np.ndarray, size: int) -> np.ndarray:
    """Indices of the ``size`` closest weight vectors to each weight (itself first)."""
    dist = np.linalg.norm(weights[:, None, :] - weights[None, :, :], axis=2)
    return np.argsort(dist, axis=1, kind="stable")[:, :size]


def pbi_terms(G: np.ndarray, weights: np.ndarray, ideal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Projection ``d1`` and perpendicular distance ``d2`` of every point on every weight ray.

    Shapes: ``G`` (n, m), ``weights`` (k, m); both results are (n, k).
    """
    unit = weights / np.linalg.norm(weights, axis=1, keepdims=True)
    v = np.atleast_2d(G) - ideal
    d1 = v @ unit.T
    sq = (v**2).sum(axis=1, keepdims=True) - d1**2
    d2 = np.sqrt(np.maximum(sq, 0.0))
    return d1, d2


def pbi(G: np.ndarray, weights: np.ndarray, ideal: np.ndarray, theta: float = 5.0) -> np.ndarray:
    d1, d2 = pbi_terms(G, weights, ideal)
    return d1 + theta * d2


def associate(G: np.ndarray, weights: np.ndarray, ideal: np.ndarray, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Subregion of each point and its PBI value against that subregion's weight."""
    d1, d2 = pbi_terms(G, weights, ideal)
    region = np.argmin(d2, axis=1)
    rows = np.arange(len(region))
    return region, d1[rows, region] + theta * d2[rows, region]


@njit(cache=True)
def levels(dom):
    """0-based non-domination level of every point and the number of levels."""
    n = dom.shape[0]
    count = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if dom[i, j]:
                count[j] += 1
    rank = np.full(n, -1, dtype=np.int64)
    front = np.empty(n, dtype=np.int64)
    assigned = 0
    level = 0
    while assigned < n:
        size = 0
        for i in range(n):
            if rank[i] < 0 and count[i] == 0:
                front[size] = i
                size += 1
        for k in range(size):
            i = front[k]
            rank[i] = level
            for j in range(n):
                if dom[i, j]:
                    count[j] -= 1
        assigned += size
        level += 1
    return rank, level


@njit(cache=True)
def _crowded(h, r, counts, sums):
    # True if region r beats the incumbent h: larger niche count, then larger
    # PBI sum, then lower index.
    if h < 0 or counts[r] > counts[h]:
        return True
    if counts[r] < counts[h]:
        return False
    if sums[r] != sums[h]:
        return sums[r] > sums[h]
    return r < h


@njit(cache=True)
def _worst_in(region, values, rank, h, level):
    best = -1
    for i in range(region.shape[0]):
        if region[i] == h and (level < 0 or rank[i] == level):
            if best < 0 or values[i] > values[best]:
                best = i
    return best


@njit(cache=True)
def _locate_worst(region, values, rank, counts, sums):
    h = -1
    for r in range(counts.shape[0]):
        if counts[r] > 0 and _crowded(h, r, counts, sums):
            h = r
    worst_level = -1
    for i in range(region.shape[0]):
        if region[i] == h and rank[i] > worst_level:
            worst_level = rank[i]
    return _worst_in(region, values, rank, h, worst_level)


@njit(cache=True)
def removal_index(dom, region, values, num_regions):
    """Member of an over-full population (size N + 1) to discard.

    With a single level, or when the last level's candidates all sit alone
    in their subregions, the worst member is located globally: most crowded
    subregion, its worst level, largest PBI. Otherwise the last level gives
    up its largest-PBI member of its most crowded subregion.
    """
    n = region.shape[0]
    rank, num_levels = levels(dom)
    counts = np.zeros(num_regions, dtype=np.int64)
    sums = np.zeros(num_regions)
    for i in range(n):
        counts[region[i]] += 1
        sums[region[i]] += values[i]
    if num_levels == 1:
        return _locate_worst(region, values, rank, counts, sums)
    last = num_levels - 1
    size = 0
    only = -1
    h = -1
    for i in range(n):
        if rank[i] == last:
            size += 1
            only = i
            if _crowded(h, region[i], counts, sums):
                h = region[i]
    if size == 1:
        if counts[region[only]] > 1:
            return only
        return _locate_worst(region, values, rank, counts, sums)
    if counts[h] > 1:
        return _worst_in(region, values, rank, h, last)
    return _locate_worst(region, values, rank, counts, sums)


class _State:
    """Population arrays with one spare slot for the incoming offspring.

    The dominance matrix is updated incrementally; a removal moves the
    spare slot into the freed position.
    """

    def __init__(self, X, G, weights, theta):
        n = len(G)
        self.n, self.weights, self.theta = n, weights, theta
        self._X = np.vstack([X, X[:1]])
        self._G = np.vstack([G, G[:1]])
        self.ideal = G.min(axis=0)
        self._dom = np.zeros((n + 1, n + 1), dtype=bool)
        le = np.all(G[:, None, :] <= G[None, :, :], axis=2)
        lt = np.any(G[:, None, :] < G[None, :, :], axis=2)
        self._dom[:n, :n] = le & lt
        self._region = np.zeros(n + 1, dtype=np.int64)
        self._values = np.zeros(n + 1)
        self.reassociate()

    X = property(lambda self: self._X[: self.n])
    G = property(lambda self: self._G[: self.n])
    dom = property(lambda self: self._dom[: self.n, : self.n])
    region = property(lambda self: self._region[: self.n])
    values = property(lambda self: self._values[: self.n])

    def reassociate(self):
        self._region[: self.n], self._values[: self.n] = associate(self.G, self.weights, self.ideal, self.theta)

    def fronts(self) -> list[np.ndarray]:
        return fronts_from_dominance(self.dom)

    def insert(self, x: np.ndarray, g: np.ndarray) -> bool:
        """Add one offspring, drop one member; True if the offspring survived."""
        n = self.n
        if np.any(g < self.ideal):
            self.ideal = np.minimum(self.ideal, g)
            self.reassociate()
        region, value = associate(g[None, :], self.weights, self.ideal, self.theta)
        G = self.G
        self._X[n], self._G[n] = x, g
        self._region[n], self._values[n] = region[0], value[0]
        self._dom[n, :n] = np.all(g <= G, axis=1) & np.any(g < G, axis=1)
        self._dom[:n, n] = np.all(G <= g, axis=1) & np.any(G < g, axis=1)
        self._dom[n, n] = False
        out = removal_index(self._dom, self._region, self._values, len(self.weights))
        if out == n:
            return False
        for arr in (self._X, self._G, self._region, self._values):
            arr[out] = arr[n]
        self._dom[out, :] = self._dom[n, :]
        self._dom[:, out] = self._dom[:, n]
        self._dom[out, out] = False
        return True


def mating_pool(state: _State, neighbors: np.ndarray, index: int, local: bool) -> np.ndarray:
    """Members eligible as parents for subproblem ``index``."""
    everyone = np.arange(state.n)
    if not local:
        return everyone
    pool = np.flatnonzero(np.isin(state.region, neighbors[index]))
    return pool if len(pool) >= 2 else everyone


def moeadd_run(problem: Problem, config: MoeaConfig, callback: GenerationCallback | None = None) -> Population:
    """Run MOEA/DD.

    Every generation visits each subproblem once and breeds one offspring
    from two parents drawn from its neighbourhood (with probability
    ``neighborhood_prob``) or from the whole population. A generation's
    offspring are bred from the population as it stood when the generation
    began and scored together; they are then merged one at a time, each
    triggering at most one replacement.
    """
    config = config.validate().resolved(problem.num_objectives, problem.num_variables)
    weights = weight_vectors(config.population_size, problem.num_objectives)
    rng = np.random.default_rng(config.seed)
    space, n = problem.space, config.population_size
    neighbors = neighborhoods(weights, min(config.neighborhood_size, n))
    evaluate = problem.minimizer(config)
    X = space.random(n, rng)
    state = _State(X, evaluate(X), weights, config.pbi_theta)
    if callback:
        callback(0, population_from(state.X.copy(), state.G.copy(), problem.objective_set))
    for gen in range(1, config.generations + 1):
        pairs = np.empty((n, 2), dtype=np.int64)
        for i in range(n):
            pool = mating_pool(state, neighbors, i, rng.random() < config.neighborhood_prob)
            pairs[i] = rng.choice(pool, size=2, replace=False)
        children, _ = sbx_crossover(
            state.X[pairs[:, 0]], state.X[pairs[:, 1]], config.eta_c, config.crossover_prob, rng, space
        )
        children = polynomial_mutation(children, config.eta_m, config.mutation_prob, rng, space)
        for child, g in zip(children, evaluate(children)):
            state.insert(child, g)
        if callback:
            callback(gen, population_from(state.X.copy(), state.G.copy(), problem.objective_set))
    ranks = np.empty(n, dtype=int)
    for level, front in enumerate(state.fronts()):
        ranks[front] = level
    return population_from(state.X.copy(), state.G.copy(), problem.objective_set, rank=ranks, utility=state.values.copy())
