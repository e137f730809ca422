"""Front quality indicators and the statistical comparison of algorithm batches.

All inputs are in maximization sense. Hypervolume is measured in raw
objective units against a caller-supplied reference point (normally the
nadir of everything every algorithm found); IGD+ is measured in raw units
against a reference front.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from numba import njit
from scipy import stats

from normopt.errors import ContractError
from normopt.front import Front

SIGNIFICANCE = 0.01
MC_SAMPLES = 1_000_000
# Above this many points a 5-objective front is measured by Monte Carlo.
EXACT_LIMIT_5D = 500

HYPERVOLUME = "hypervolume"
IGD_PLUS = "igd_plus"
# Direction of improvement per indicator.
HIGHER_IS_BETTER = {HYPERVOLUME: True, IGD_PLUS: False}


def _points(data) -> np.ndarray:
    points = data.objectives if isinstance(data, Front) else data
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[None, :]
    return points


def nondominated_mask(points: np.ndarray) -> np.ndarray:
    """Rows not dominated by any other row, with duplicates kept at their first occurrence."""
    P = _points(points)
    ge = np.all(P[:, None, :] >= P[None, :, :], axis=2)
    gt = np.any(P[:, None, :] > P[None, :, :], axis=2)
    dominated = (ge & gt).any(axis=0)
    equal = ge & ge.T
    earlier_twin = np.triu(equal, k=1).any(axis=0)
    return ~dominated & ~earlier_twin


def nondominated_filter(points):
    """Maximal non-dominated subset of ``points``; repeated vectors are kept once.

    Accepts an ``(n, m)`` array or a :class:`~normopt.front.Front` and returns
    the same kind. Input order is preserved.
    """
    P = _points(points)
    if P.size == 0 or len(P) == 0:
        raise ContractError("nondominated_filter needs at least one point")
    mask = nondominated_mask(P)
    if isinstance(points, Front):
        return Front(points.genes[mask], points.objectives[mask], points.objective_set, points.gene_names)
    return P[mask]


def nadir_point(fronts) -> np.ndarray:
    """Component-wise worst (smallest) value over the union of ``fronts``.

    ``fronts`` is a sequence of fronts or point arrays, or a single one.
    """
    if isinstance(fronts, (Front, np.ndarray)):
        fronts = [fronts]
    arrays = [_points(f) for f in fronts]
    arrays = [a for a in arrays if len(a)]
    if not arrays:
        raise ContractError("nadir_point needs at least one point")
    return np.vstack(arrays).min(axis=0)


# --- hypervolume ----------------------------------------------------------------------------


@njit(cache=True)
def _hv2(P):
    # P sorted by the first coordinate, descending; all coordinates positive.
    area = 0.0
    top = 0.0
    for i in range(P.shape[0]):
        if P[i, 1] > top:
            area += P[i, 0] * (P[i, 1] - top)
            top = P[i, 1]
    return area


@njit(cache=True)
def _nondominated(P):
    n = P.shape[0]
    keep = np.ones(n, dtype=np.bool_)
    for i in range(n):
        if not keep[i]:
            continue
        for j in range(n):
            if i == j or not keep[j]:
                continue
            weakly = True
            for k in range(P.shape[1]):
                if P[j, k] < P[i, k]:
                    weakly = False
                    break
            if weakly:
                keep[i] = False
                break
    return P[keep]


@njit(cache=True)
def _wfg(P):
    # Union volume of boxes [0, p] for the rows of P (maximization, p > 0).
    # Rows are sorted by the first coordinate, descending.
    n, m = P.shape
    if n == 0:
        return 0.0
    if m == 2:
        return _hv2(P)
    if n == 1:
        return np.prod(P[0])
    total = 0.0
    for i in range(n):
        volume = np.prod(P[i])
        rest = n - i - 1
        if rest > 0:
            limited = np.empty((rest, m))
            for j in range(rest):
                for k in range(m):
                    limited[j, k] = min(P[i + 1 + j, k], P[i, k])
            volume -= _wfg(_nondominated(limited))
        total += volume
    return total


def _prepare(points, reference) -> np.ndarray:
    P = _points(points)
    ref = np.asarray(reference, dtype=float)
    if P.shape[1] != ref.shape[0]:
        raise ContractError(f"points have {P.shape[1]} objectives, reference has {ref.shape[0]}")
    shifted = P - ref
    shifted = shifted[np.all(shifted > 0, axis=1)]
    if len(shifted) == 0:
        return shifted
    shifted = _nondominated(np.ascontiguousarray(shifted))
    return shifted[np.argsort(-shifted[:, 0], kind="stable")]


class Hypervolume(NamedTuple):
    """A hypervolume value; ``stderr`` is 0 for exact results."""

    value: float
    stderr: float
    method: str


def exact_hypervolume(points, reference) -> float:
    """Exact dominated volume between ``reference`` and ``points`` (WFG recursion).

    Points not strictly better than the reference in every objective add
    nothing and are dropped.
    """
    shifted = _prepare(points, reference)
    if len(shifted) == 0:
        return 0.0
    if shifted.shape[1] == 1:
        return float(shifted[:, 0].max())
    return float(_wfg(shifted))


@njit(cache=True)
def _count_dominated(samples, P):
    hits = 0
    for s in range(samples.shape[0]):
        for i in range(P.shape[0]):
            inside = True
            for k in range(P.shape[1]):
                if samples[s, k] > P[i, k]:
                    inside = False
                    break
            if inside:
                hits += 1
                break
    return hits


def monte_carlo_hypervolume(points, reference, samples: int = MC_SAMPLES, seed: int = 0) -> Hypervolume:
    """Hypervolume estimate from uniform samples in the bounding box of the front.

    The standard error is ``box * sqrt(f (1 - f) / samples)`` with ``f`` the
    hit fraction.
    """
    shifted = _prepare(points, reference)
    if len(shifted) == 0:
        return Hypervolume(0.0, 0.0, "monte-carlo")
    upper = shifted.max(axis=0)
    box = float(np.prod(upper))
    rng = np.random.default_rng(seed)
    hits, chunk = 0, 200_000
    for start in range(0, samples, chunk):
        size = min(chunk, samples - start)
        hits += _count_dominated(rng.random((size, len(upper))) * upper, shifted)
    f = hits / samples
    return Hypervolume(box * f, float(box * np.sqrt(f * (1 - f) / samples)), "monte-carlo")


def measure_hypervolume(points, reference, samples: int = MC_SAMPLES, seed: int = 0) -> Hypervolume:
    """Exact hypervolume, or a labeled estimate for fronts of 5+ objectives over 500 points."""
    P = _points(points)
    if P.shape[1] >= 5 and len(P) > EXACT_LIMIT_5D:
        shifted = _prepare(P, reference)
        if len(shifted) > EXACT_LIMIT_5D:
            return monte_carlo_hypervolume(shifted + np.asarray(reference, float), reference, samples, seed)
    return Hypervolume(exact_hypervolume(P, reference), 0.0, "exact")


def hypervolume(points, reference) -> float:
    """Hypervolume value of ``points`` against ``reference`` (see :func:`measure_hypervolume`)."""
    return measure_hypervolume(points, reference).value


# --- IGD+ -----------------------------------------------------------------------------------


def igd_plus(front, reference_front) -> float:
    """Mean over reference points of the distance to the nearest front point.

    The distance only counts the objectives in which the front point is
    worse than the reference point, so a front point at least as good as a
    reference point everywhere contributes 0 for it.
    """
    names_a = getattr(front, "objective_set", None)
    names_b = getattr(reference_front, "objective_set", None)
    A, Z = _points(front), _points(reference_front)
    if (names_a is not None and names_b is not None and names_a != names_b) or A.shape[1] != Z.shape[1]:
        raise ContractError("igd_plus needs fronts over the same objective set")
    if len(A) == 0 or len(Z) == 0:
        raise ContractError("igd_plus needs non-empty fronts")
    # Minimization coordinates: a = -front, z = -reference; max(a - z, 0).
    gap = np.maximum(Z[:, None, :] - A[None, :, :], 0.0)
    return float(np.sqrt((gap**2).sum(axis=2)).min(axis=1).mean())


# --- statistics -----------------------------------------------------------------------------


def kruskal_wallis(*groups) -> tuple[float, float]:
    """Tie-corrected Kruskal-Wallis H and its chi-squared p-value.

    Returns ``(0.0, 1.0)`` when every observation is identical.
    """
    if len(groups) == 1 and not np.isscalar(groups[0]) and len(groups[0]) and not np.isscalar(groups[0][0]):
        groups = tuple(groups[0])
    samples = [np.asarray(g, dtype=float).ravel() for g in groups]
    if len(samples) < 2 or any(len(s) == 0 for s in samples):
        raise ContractError("kruskal_wallis needs at least two non-empty groups")
    pooled = np.concatenate(samples)
    if len(pooled) < 3:
        raise ContractError("kruskal_wallis needs at least three observations")
    if np.all(pooled == pooled[0]):
        return 0.0, 1.0
    result = stats.kruskal(*samples)
    return float(result.statistic), float(result.pvalue)


@dataclass
class IndicatorBatch:
    """Per-run indicator values of one algorithm on one problem."""

    algorithm: str
    hypervolume: np.ndarray
    igd_plus: np.ndarray
    seeds: Sequence[int] = field(default_factory=tuple)
    hv_methods: Sequence[str] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.hypervolume = np.asarray(self.hypervolume, dtype=float).ravel()
        self.igd_plus = np.asarray(self.igd_plus, dtype=float).ravel()
        if len(self.hypervolume) != len(self.igd_plus):
            raise ContractError("one hypervolume and one IGD+ value per run")
        if self.seeds and len(self.seeds) != len(self.hypervolume):
            raise ContractError("one seed per run")

    def __len__(self) -> int:
        return len(self.hypervolume)

    def values(self, indicator: str) -> np.ndarray:
        return {HYPERVOLUME: self.hypervolume, IGD_PLUS: self.igd_plus}[indicator]


@dataclass
class IndicatorSummary:
    """Mean, std, max of one indicator for each algorithm, and who is best or tied."""

    indicator: str
    mean: dict[str, float]
    std: dict[str, float]
    max: dict[str, float]
    best: str
    p_values: dict[str, float]
    tied: dict[str, bool]

    def to_dict(self) -> dict:
        return {
            "indicator": self.indicator,
            "higher_is_better": HIGHER_IS_BETTER[self.indicator],
            "best": self.best,
            "algorithms": {
                a: {
                    "mean": self.mean[a],
                    "std": self.std[a],
                    "max": self.max[a],
                    "p_value_vs_best": self.p_values[a],
                    "tied_with_best": self.tied[a],
                }
                for a in self.mean
            },
        }


@dataclass
class Comparison:
    """Comparison table over algorithms, one summary per indicator."""

    summaries: dict[str, IndicatorSummary]
    significance: float = SIGNIFICANCE

    def __getitem__(self, indicator: str) -> IndicatorSummary:
        return self.summaries[indicator]

    def to_dict(self) -> dict:
        return {
            "significance": self.significance,
            "indicators": {name: s.to_dict() for name, s in self.summaries.items()},
        }

    def to_markdown(self) -> str:
        """Rows ``mean / std / max`` per algorithm, one column per indicator.

        The best mean is marked with ``*``; algorithms statistically tied with
        it are marked with ``~``.
        """
        names = list(self.summaries)
        algorithms = list(self.summaries[names[0]].mean)
        lines = ["| algorithm | stat | " + " | ".join(names) + " |", "|---|---|" + "---|" * len(names)]
        for a in algorithms:
            for stat in ("mean", "std", "max"):
                cells = []
                for n in names:
                    s = self.summaries[n]
                    cell = f"{getattr(s, stat)[a]:.6f}"
                    if stat == "mean":
                        cell += " *" if s.best == a else (" ~" if s.tied[a] else "")
                    cells.append(cell)
                lines.append(f"| {a} | {stat} | " + " | ".join(cells) + " |")
        lines.append("")
        lines.append(f"`*` best mean; `~` tied with best (Kruskal-Wallis p > {self.significance}).")
        return "\n".join(lines) + "\n"


def _summarize(batches: Sequence[IndicatorBatch], indicator: str, significance: float) -> IndicatorSummary:
    values = {b.algorithm: b.values(indicator) for b in batches}
    mean = {a: float(v.mean()) for a, v in values.items()}
    std = {a: float(v.std(ddof=1)) if len(v) > 1 else 0.0 for a, v in values.items()}
    top = {a: float(v.max()) for a, v in values.items()}
    sign = 1.0 if HIGHER_IS_BETTER[indicator] else -1.0
    # First algorithm wins exact ties on the mean.
    best = max(mean, key=lambda a: sign * mean[a])
    p_values, tied = {}, {}
    for a, v in values.items():
        if a == best:
            p_values[a], tied[a] = 1.0, False
            continue
        if len(values[best]) + len(v) < 3:
            # Too few runs to test; only identical values count as a tie.
            p_values[a] = 1.0 if np.array_equal(np.sort(values[best]), np.sort(v)) else float("nan")
        else:
            p_values[a] = kruskal_wallis(values[best], v)[1]
        tied[a] = bool(p_values[a] > significance)
    return IndicatorSummary(indicator, mean, std, top, best, p_values, tied)


def summarize(batches: Sequence[IndicatorBatch], significance: float = SIGNIFICANCE) -> Comparison:
    """Mean/std/max table for one or more batches, compared with the best mean.

    Unlike :func:`compare_algorithms` this accepts a single algorithm and
    unequal run counts. Standard deviations use ``ddof=1`` (0 for one run).
    """
    batches = list(batches)
    if not batches:
        raise ContractError("nothing to summarize")
    if len({b.algorithm for b in batches}) != len(batches):
        raise ContractError("algorithm ids must be distinct")
    return Comparison(
        {name: _summarize(batches, name, significance) for name in (HYPERVOLUME, IGD_PLUS)}, significance
    )


def compare_algorithms(
    batches: Sequence[IndicatorBatch] | Mapping[str, IndicatorBatch], significance: float = SIGNIFICANCE
) -> Comparison:
    """Compare every algorithm with the best mean, per indicator.

    An algorithm is tied with the best when the pairwise Kruskal-Wallis
    p-value exceeds ``significance``.
    """
    batches = list(batches.values()) if isinstance(batches, Mapping) else list(batches)
    if len(batches) < 2:
        raise ContractError("compare_algorithms needs at least two algorithms")
    if len({len(b) for b in batches}) != 1:
        raise ContractError("every algorithm needs the same number of runs")
    return summarize(batches, significance)
