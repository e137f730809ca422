"""Genome encoding, repair and real-coded variation operators.

Genomes are float arrays. A :class:`GenomeSpace` carries per-gene bounds and
an optional slice of genes constrained to the unit simplex. The variation
operators work on 2-D arrays (one genome per row) so a whole generation is
varied in one call; single genomes are promoted with ``np.atleast_2d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from normopt.society import MAX_CATCH


@dataclass(frozen=True)
class GenomeSpace:
    lower: np.ndarray
    upper: np.ndarray
    simplex: slice | None = None

    @property
    def size(self) -> int:
        return len(self.lower)

    def random(self, count: int, rng: np.random.Generator) -> np.ndarray:
        genes = self.lower + (self.upper - self.lower) * rng.random((count, self.size))
        return repair(genes, self)


def norm_space(num_groups: int = 5) -> GenomeSpace:
    """Bounds of ``[collect x G, redistribute x G, catch, fine]``."""
    g = num_groups
    lower = np.zeros(2 * g + 2)
    upper = np.ones(2 * g + 2)
    upper[2 * g] = MAX_CATCH
    return GenomeSpace(lower, upper, slice(g, 2 * g))


def repair(genes: np.ndarray, space: GenomeSpace) -> np.ndarray:
    """Clamp into bounds, then rescale the simplex block to sum to 1.

    A simplex block that sums to zero after clamping becomes uniform. Rows
    already on the simplex are left bit-identical, so repair is idempotent.
    """
    out = np.clip(np.asarray(genes, dtype=float), space.lower, space.upper)
    if space.simplex is not None:
        block = out[..., space.simplex]
        total = block.sum(axis=-1, keepdims=True)
        width = block.shape[-1]
        safe = np.where(total > 0, total, 1.0)
        rescaled = np.where(total > 0, block / safe, 1.0 / width)
        out[..., space.simplex] = np.where(np.abs(total - 1.0) <= 1e-12, block, rescaled)
    return out


def sbx_spread(u: np.ndarray | float, eta: float) -> np.ndarray | float:
    """Spread factor beta for a uniform draw ``u``."""
    u = np.asarray(u, dtype=float)
    low = (2.0 * u) ** (1.0 / (eta + 1.0))
    high = (1.0 / (2.0 * (1.0 - np.minimum(u, 1.0 - 1e-16)))) ** (1.0 / (eta + 1.0))
    return np.where(u <= 0.5, low, high)


def sbx_children(x1, x2, beta):
    """Raw SBX children. They are symmetric about the parents' midpoint."""
    c1 = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2)
    c2 = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2)
    return c1, c2


def sbx_crossover(
    p1: np.ndarray,
    p2: np.ndarray,
    eta: float,
    prob: float,
    rng: np.random.Generator,
    space: GenomeSpace | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover on paired rows of ``p1`` and ``p2``.

    Each pair recombines with probability ``prob``; inside a recombining pair
    each gene is crossed with probability 0.5. Children are repaired when a
    space is given. The unbounded spread distribution is used, so before
    repair every crossed gene keeps the parents' mean.
    """
    p1 = np.atleast_2d(np.asarray(p1, dtype=float))
    p2 = np.atleast_2d(np.asarray(p2, dtype=float))
    pairs, n = p1.shape
    fire = rng.random(pairs) < prob
    per_gene = rng.random((pairs, n)) < 0.5
    u = rng.random((pairs, n))
    beta = sbx_spread(u, eta)
    c1, c2 = sbx_children(p1, p2, beta)
    mask = fire[:, None] & per_gene
    c1 = np.where(mask, c1, p1)
    c2 = np.where(mask, c2, p2)
    if space is not None:
        c1, c2 = repair(c1, space), repair(c2, space)
    return c1, c2


def polynomial_delta(x, lower, upper, u, eta):
    """Bounded polynomial perturbation of ``x`` for draw ``u``; zero at ``u = 0.5``."""
    span = upper - lower
    safe = np.where(span > 0, span, 1.0)
    d1 = (x - lower) / safe
    d2 = (upper - x) / safe
    power = 1.0 / (eta + 1.0)
    left = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
    right = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
    delta = np.where(u < 0.5, left**power - 1.0, 1.0 - right**power)
    return np.where(span > 0, delta * span, 0.0)


def polynomial_mutation(
    genes: np.ndarray,
    eta: float,
    prob: float,
    rng: np.random.Generator,
    space: GenomeSpace,
) -> np.ndarray:
    """Mutate each gene with probability ``prob``; result is repaired."""
    genes = np.atleast_2d(np.asarray(genes, dtype=float))
    mutate = rng.random(genes.shape) < prob
    u = rng.random(genes.shape)
    shifted = genes + polynomial_delta(genes, space.lower, space.upper, u, eta)
    shifted = np.clip(shifted, space.lower, space.upper)
    return repair(np.where(mutate, shifted, genes), space)


def make_offspring(
    parents: np.ndarray,
    count: int,
    rng: np.random.Generator,
    space: GenomeSpace,
    eta_c: float,
    p_c: float,
    eta_m: float,
    p_m: float,
) -> np.ndarray:
    """Cross consecutive parent rows pairwise, mutate, and keep ``count`` children."""
    if len(parents) % 2:
        parents = np.vstack([parents, parents[:1]])
    c1, c2 = sbx_crossover(parents[0::2], parents[1::2], eta_c, p_c, rng, space)
    children = np.empty((2 * len(c1), parents.shape[1]))
    children[0::2], children[1::2] = c1, c2
    return polynomial_mutation(children[:count], eta_m, p_m, rng, space)
