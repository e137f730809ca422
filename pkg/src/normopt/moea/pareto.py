"""Pareto dominance, non-dominated sorting and crowding distance.

Public helpers take objectives in maximization sense unless a function name
says otherwise; ``*_min`` variants work on minimization arrays and are what
the algorithms use internally.
"""

from __future__ import annotations

import numpy as np

from normopt.errors import ContractError


def _as_scores(vector) -> tuple[np.ndarray, tuple[str, ...] | None]:
    names = getattr(vector, "objective_set", None)
    scores = vector.as_array() if hasattr(vector, "as_array") else np.asarray(vector, dtype=float)
    return scores, names


def dominates(a, b) -> bool:
    """True if ``a`` Pareto-dominates ``b`` (maximization).

    Accepts :class:`~normopt.values.ObjectiveVector` or plain sequences.
    """
    sa, na = _as_scores(a)
    sb, nb = _as_scores(b)
    if sa.shape != sb.shape or (na is not None and nb is not None and na != nb):
        raise ContractError("cannot compare objective vectors over different objective sets")
    return bool(np.all(sa >= sb) and np.any(sa > sb))


def dominance_matrix_min(G: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True when row ``i`` dominates row ``j`` (minimization)."""
    le = np.all(G[:, None, :] <= G[None, :, :], axis=2)
    lt = np.any(G[:, None, :] < G[None, :, :], axis=2)
    return le & lt


def fronts_from_dominance(D: np.ndarray) -> list[np.ndarray]:
    counts = D.sum(axis=0)
    remaining = np.ones(len(D), dtype=bool)
    fronts = []
    while remaining.any():
        front = np.flatnonzero(remaining & (counts == 0))
        fronts.append(front)
        remaining[front] = False
        counts = counts - D[front].sum(axis=0)
    return fronts


def nondominated_sort_min(G: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Fronts (index arrays, best first) and the 0-based rank of every row."""
    G = np.asarray(G, dtype=float)
    if len(G) == 0:
        return [], np.empty(0, dtype=int)
    fronts = fronts_from_dominance(dominance_matrix_min(G))
    ranks = np.empty(len(G), dtype=int)
    for r, front in enumerate(fronts):
        ranks[front] = r
    return fronts, ranks


def fast_nondominated_sort(objectives, maximize: bool = True) -> tuple[list[np.ndarray], np.ndarray]:
    """Partition points into successive non-dominated fronts.

    Args:
        objectives: (n, m) array of objective values.
        maximize: sense of the objectives.

    Returns:
        ``(fronts, ranks)``: a list of index arrays, F1 first, and each
        point's 0-based front index.
    """
    F = np.asarray(objectives, dtype=float)
    return nondominated_sort_min(-F if maximize else F)


def crowding_distance(front) -> np.ndarray:
    """Crowding distance of each point in one front.

    Boundary points of every objective get ``inf``. Interior points sum the
    range-normalized gap between their neighbours; an objective whose range is
    zero contributes nothing. The measure does not depend on the sense.
    """
    F = np.asarray(front, dtype=float)
    n, m = F.shape
    distance = np.zeros(n)
    if n <= 2:
        distance[:] = np.inf
        return distance
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        values = F[order, k]
        span = values[-1] - values[0]
        distance[order[0]] = distance[order[-1]] = np.inf
        if span > 0:
            distance[order[1:-1]] += (values[2:] - values[:-2]) / span
    return distance


def nondominated_mask_min(G: np.ndarray) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    if len(G) == 0:
        return np.zeros(0, dtype=bool)
    return ~dominance_matrix_min(G).any(axis=0)
