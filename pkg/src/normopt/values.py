"""Value objectives of the tax society and their Monte Carlo evaluation.

Every objective is a maximization score. The state-based objectives accept a
single society (arrays of shape ``(n,)``) or a batch of societies (arrays of
shape ``(B, n)``) and return a float or a ``(B,)`` array respectively.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from normopt.errors import ContractError, DegenerateStateError
from normopt.society import NormVector, SimulationConfig, Society, run_paths

EQUALITY = "Equality"
FAIRNESS = "Fairness"
WEALTH = "Wealth"
GAINED_AMOUNT = "GainedAmount"
COLLECT_PORTION = "CollectPortion"

ALL_OBJECTIVES = (EQUALITY, FAIRNESS, WEALTH, GAINED_AMOUNT, COLLECT_PORTION)
TWO_OBJECTIVES = (EQUALITY, FAIRNESS)
FIVE_OBJECTIVES = ALL_OBJECTIVES

# Closed ranges each score must fall in. GainedAmount is unbounded above and
# bounded below by -1: the group cannot lose more than the whole collected amount.
RANGES = {
    EQUALITY: (-1.0, 1.0),
    FAIRNESS: (-1.0, 1.0),
    WEALTH: (0.0, 1.0),
    GAINED_AMOUNT: (-1.0, np.inf),
    COLLECT_PORTION: (0.0, 1.0),
}
# Score assigned to a degenerate state when the optimizer asks for worst-case fitness.
WORST = {
    EQUALITY: -1.0,
    FAIRNESS: -1.0,
    WEALTH: 0.0,
    GAINED_AMOUNT: -1.0,
    COLLECT_PORTION: 0.0,
}
_RANGE_TOL = 1e-9


def check_objective_set(objective_set: Sequence[str]) -> tuple[str, ...]:
    objective_set = tuple(objective_set)
    unknown = [name for name in objective_set if name not in ALL_OBJECTIVES]
    if unknown or not objective_set or len(set(objective_set)) != len(objective_set):
        raise ContractError(f"invalid objective set {objective_set!r}")
    return objective_set


@dataclass(frozen=True)
class ObjectiveVector:
    scores: tuple[float, ...]
    objective_set: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        object.__setattr__(self, "objective_set", check_objective_set(self.objective_set))
        if len(self.scores) != len(self.objective_set):
            raise ContractError(
                f"{len(self.scores)} scores for {len(self.objective_set)} objectives"
            )

    def __getitem__(self, name: str) -> float:
        return self.scores[self.objective_set.index(name)]

    def __len__(self) -> int:
        return len(self.scores)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.scores)

    def check_ranges(self) -> None:
        check_ranges(self.as_array()[None, :], self.objective_set)

    def to_dict(self) -> dict[str, float]:
        return dict(zip(self.objective_set, self.scores))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.objective_set)
        writer.writerow([repr(s) for s in self.scores])
        return buf.getvalue()

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ObjectiveVector:
        return cls(tuple(data.values()), tuple(data.keys()))


def check_ranges(scores: np.ndarray, objective_set: Sequence[str]) -> None:
    """Raise if any row of ``scores`` leaves an objective's documented range."""
    for k, name in enumerate(objective_set):
        low, high = RANGES[name]
        column = scores[:, k]
        if np.any(column < low - _RANGE_TOL) or np.any(column > high + _RANGE_TOL):
            raise AssertionError(
                f"{name} out of range [{low}, {high}]: {column.min()}..{column.max()}"
            )


def gini(wealths) -> float | np.ndarray:
    """Gini index, computed from the sorted wealths.

    Uses sum_{i,j} |w_i - w_j| = 2 * sum_k (2k - n - 1) * w_(k) with w sorted
    ascending and k starting at 1.
    """
    w = np.sort(np.asarray(wealths, dtype=float), axis=-1)
    n = w.shape[-1]
    if n == 0:
        raise ContractError("gini of an empty population")
    mean = w.mean(axis=-1)
    if np.any(mean <= 0):
        raise DegenerateStateError("gini undefined: mean wealth is zero")
    coeff = 2.0 * np.arange(1, n + 1) - n - 1
    result = np.maximum((w @ coeff) / (n * n * mean), 0.0)
    return float(result) if np.ndim(result) == 0 else result


def equality(state: Society):
    return 1.0 - 2.0 * gini(state.wealth)


def fairness(state: Society):
    """``2P - 1`` with P the share of evaders currently in the poorest group.

    A state without evaders scores 0.
    """
    evaders = state.evader.sum(axis=-1)
    in_poorest = (state.evader & (state.group == 0)).sum(axis=-1)
    share = np.divide(in_poorest, evaders, out=np.full(np.shape(evaders), 0.5), where=evaders > 0)
    result = 2.0 * share - 1.0
    return float(result) if np.ndim(result) == 0 else result


def wealth_share(state: Society):
    """Fraction of total wealth held by the richest group."""
    total = state.wealth.sum(axis=-1)
    if np.any(total <= 0):
        raise DegenerateStateError("wealth share undefined: total wealth is zero")
    richest = np.where(state.group == state.num_groups - 1, state.wealth, 0.0).sum(axis=-1)
    result = richest / total
    return float(result) if np.ndim(result) == 0 else result


def gained_amount(state: Society, cr=None):
    """Net gain of the second-richest group (g4 of 5) over the final step, per unit of pool.

    ``cr`` defaults to ``state.last_pool``. A zero pool scores 0. The ratio is
    not clamped: it can exceed 1, and it is negative when the group paid more
    tax than it received back.
    """
    cr = np.asarray(state.last_pool if cr is None else cr, dtype=float)
    member = state.group == state.num_groups - 2
    gain = np.where(member, state.wealth - state.primary_wealth, 0.0).sum(axis=-1)
    result = np.divide(gain, cr, out=np.zeros(np.shape(gain)), where=cr != 0)
    return float(result) if np.ndim(result) == 0 else result


def collect_portion(norms: NormVector | np.ndarray):
    """``1 - collect`` of the poorest group; depends on the norms only."""
    if isinstance(norms, NormVector):
        return 1.0 - norms.collect[0]
    return 1.0 - np.asarray(norms)[..., 0]


def objective_scores(
    state: Society, genes: np.ndarray, objective_set: Sequence[str], strict: bool = True
) -> np.ndarray:
    """Score a batch of final states; returns shape ``(B, m)``.

    With ``strict=False`` degenerate rows get the worst-case score of each
    objective instead of raising.
    """
    objective_set = check_objective_set(objective_set)
    genes = np.atleast_2d(genes)
    batch = state.wealth.shape[0]
    out = np.empty((batch, len(objective_set)))
    degenerate = state.wealth.sum(axis=-1) <= 0
    if degenerate.any():
        if strict:
            raise DegenerateStateError("all citizens have zero wealth")
        safe = Society(
            wealth=np.where(degenerate[:, None], 1.0, state.wealth),
            primary_wealth=state.primary_wealth,
            group=state.group,
            evader=state.evader,
            num_groups=state.num_groups,
            interest_rate=state.interest_rate,
            last_pool=state.last_pool,
        )
    else:
        safe = state
    for k, name in enumerate(objective_set):
        if name == EQUALITY:
            out[:, k] = equality(safe)
        elif name == FAIRNESS:
            out[:, k] = fairness(safe)
        elif name == WEALTH:
            out[:, k] = wealth_share(safe)
        elif name == GAINED_AMOUNT:
            out[:, k] = gained_amount(safe)
        else:
            out[:, k] = collect_portion(genes)
        out[degenerate, k] = WORST[name]
    return out


def sample_seeds(seed: int | np.random.SeedSequence, samples: int) -> list[np.random.SeedSequence]:
    """Independent per-sample seeds derived from ``seed``."""
    if samples < 1:
        raise ContractError(f"samples must be >= 1, got {samples}")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return root.spawn(samples)


def evaluate_samples(
    genes: np.ndarray,
    config: SimulationConfig,
    objective_set: Sequence[str],
    seeds: Sequence[int | np.random.SeedSequence],
    strict: bool = True,
) -> np.ndarray:
    """Objective scores of one path per seed for a single genome; shape ``(len(seeds), m)``."""
    genes = np.asarray(genes, dtype=float)
    batch = np.broadcast_to(genes, (len(seeds), genes.shape[-1]))
    state = run_paths(config, batch, seeds)
    return objective_scores(state, batch, objective_set, strict=strict)


def evaluate(
    norms: NormVector,
    config: SimulationConfig,
    objective_set: Sequence[str],
    samples: int = 1,
    seed: int | np.random.SeedSequence = 0,
) -> ObjectiveVector:
    """Monte Carlo mean of the objectives over ``samples`` independent paths."""
    norms.validate()
    objective_set = check_objective_set(objective_set)
    scores = evaluate_samples(norms.to_array(), config, objective_set, sample_seeds(seed, samples))
    check_ranges(scores, objective_set)
    return ObjectiveVector(tuple(scores.mean(axis=0)), objective_set)
