"""Simplex-lattice weight vectors for decomposition and R2-based algorithms."""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from normopt.errors import ConfigurationError


def das_dennis(resolution: int, dim: int) -> np.ndarray:
    """All points of the simplex lattice with ``resolution`` divisions in ``dim`` dimensions.

    Returns ``C(resolution + dim - 1, dim - 1)`` rows, each nonnegative and
    summing to 1, in lexicographic order of the stars-and-bars bars.
    """
    if dim < 1 or resolution < 0:
        raise ConfigurationError(f"invalid lattice: resolution={resolution}, dim={dim}")
    if dim == 1:
        return np.ones((1, 1))
    rows = []
    for bars in combinations(range(resolution + dim - 1), dim - 1):
        counts = np.diff([-1, *bars, resolution + dim - 1]) - 1
        rows.append(counts)
    return np.asarray(rows, dtype=float) / resolution if resolution else np.full((1, dim), 1.0 / dim)


def lattice_resolution(count: int, dim: int) -> int:
    """The resolution H whose lattice has exactly ``count`` points."""
    if dim == 1:
        if count == 1:
            return 1
        raise ConfigurationError("a 1-objective lattice has a single weight vector")
    h = 1
    while comb(h + dim - 1, dim - 1) < count:
        h += 1
    if comb(h + dim - 1, dim - 1) != count:
        raise ConfigurationError(
            f"population size {count} is not a simplex-lattice size for {dim} objectives "
            f"(nearest: {comb(h + dim - 2, dim - 1)} or {comb(h + dim - 1, dim - 1)})"
        )
    return h


def weight_vectors(count: int, dim: int) -> np.ndarray:
    return das_dennis(lattice_resolution(count, dim), dim)
