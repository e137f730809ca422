"""Seedable simulation of the tax society.

A society is a set of citizens split into equally sized wealth groups. Each
step the citizens pay taxes according to their group's rate, evaders are
caught with some probability and fined, the collected pool earns interest and
is redistributed back to the groups, and finally everyone is regrouped by
wealth.

All state lives in numpy arrays whose last axis runs over citizens, so the
same kernel advances one society (``shape (n,)``) or a batch of independent
societies (``shape (B, n)``) in lock step. A batched path seeded with ``s``
is bit-identical to the scalar path seeded with ``s``.
"""

from __future__ import annotations

import copy
import dataclasses
import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from normopt import _kernel
from normopt.errors import ConfigurationError, ConstraintError

SIMPLEX_TOL = 1e-9
MAX_CATCH = 0.5


@dataclass(frozen=True)
class NormVector:
    """Parametric norms imposed by the government.

    Attributes:
        collect: tax rate per wealth group, poorest group first.
        redistribute: share of the pool returned to each group; sums to 1.
        catch: per-step probability that an evader is caught, in [0, 0.5].
        fine: fine rate applied to the evaded tax of a caught evader.
    """

    collect: tuple[float, ...]
    redistribute: tuple[float, ...]
    catch: float
    fine: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "collect", tuple(float(c) for c in self.collect))
        object.__setattr__(self, "redistribute", tuple(float(r) for r in self.redistribute))
        object.__setattr__(self, "catch", float(self.catch))
        object.__setattr__(self, "fine", float(self.fine))

    @property
    def num_groups(self) -> int:
        return len(self.collect)

    def validate(self) -> None:
        """Raise :class:`ConstraintError` naming the first violated bound."""
        if len(self.collect) != len(self.redistribute) or not self.collect:
            raise ConstraintError(
                f"collect and redistribute must have the same non-zero length, "
                f"got {len(self.collect)} and {len(self.redistribute)}"
            )
        for k, c in enumerate(self.collect):
            if not 0.0 <= c <= 1.0:
                raise ConstraintError(f"collect[{k}]={c} outside [0, 1]")
        for k, r in enumerate(self.redistribute):
            if not 0.0 <= r <= 1.0:
                raise ConstraintError(f"redistribute[{k}]={r} outside [0, 1]")
        total = sum(self.redistribute)
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ConstraintError(f"redistribute sums to {total!r}, expected 1")
        if not 0.0 <= self.catch <= MAX_CATCH:
            raise ConstraintError(f"catch={self.catch} outside [0, {MAX_CATCH}]")
        if not 0.0 <= self.fine <= 1.0:
            raise ConstraintError(f"fine={self.fine} outside [0, 1]")

    def to_array(self) -> np.ndarray:
        """Flatten to the genome layout ``[collect..., redistribute..., catch, fine]``."""
        return np.array([*self.collect, *self.redistribute, self.catch, self.fine])

    @classmethod
    def from_array(cls, genes: Sequence[float], num_groups: int = 5) -> NormVector:
        genes = np.asarray(genes, dtype=float)
        if genes.shape != (2 * num_groups + 2,):
            raise ConstraintError(
                f"expected {2 * num_groups + 2} genes for {num_groups} groups, got shape {genes.shape}"
            )
        g = num_groups
        return cls(tuple(genes[:g]), tuple(genes[g : 2 * g]), genes[2 * g], genes[2 * g + 1])

    def to_dict(self) -> dict[str, Any]:
        return {
            "collect": list(self.collect),
            "redistribute": list(self.redistribute),
            "catch": self.catch,
            "fine": self.fine,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> NormVector:
        try:
            return cls(data["collect"], data["redistribute"], data["catch"], data["fine"])
        except KeyError as exc:
            raise ConstraintError(f"norms missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ConstraintError(f"malformed norms: {exc}") from None


@dataclass(frozen=True)
class SimulationConfig:
    num_agents: int = 200
    num_groups: int = 5
    interest_rate: float = 0.05
    evader_probability: float = 0.05
    path_length: int = 10
    wealth_init: tuple[float, float] = (0.0, 100.0)

    def validate(self) -> None:
        if self.num_agents < 1 or self.num_groups < 1:
            raise ConfigurationError("num_agents and num_groups must be positive")
        if self.num_agents % self.num_groups:
            raise ConfigurationError(
                f"num_agents={self.num_agents} is not divisible by num_groups={self.num_groups}"
            )
        for name in ("interest_rate", "evader_probability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name}={value} outside [0, 1]")
        if self.path_length < 0:
            raise ConfigurationError(f"path_length={self.path_length} is negative")
        low, high = self.wealth_init
        if not 0.0 <= low <= high:
            raise ConfigurationError(f"wealth_init={self.wealth_init} is not a nonnegative range")

    @property
    def group_size(self) -> int:
        return self.num_agents // self.num_groups


@dataclass(frozen=True)
class Citizen:
    wealth: float
    primary_wealth: float
    group: int  # 1-based, g1 is the poorest
    evader: bool


@dataclass
class Society:
    """World state. Arrays have citizens on the last axis.

    ``group`` holds 0-based group indices (0 is the poorest group g1).
    ``last_pool`` is the redistribution pool of the most recent step.
    """

    wealth: np.ndarray
    primary_wealth: np.ndarray
    group: np.ndarray
    evader: np.ndarray
    num_groups: int
    interest_rate: float
    last_pool: np.ndarray | float = 0.0
    rng: np.random.Generator | None = field(default=None, repr=False, compare=False)

    @property
    def num_agents(self) -> int:
        return self.wealth.shape[-1]

    @property
    def citizens(self) -> list[Citizen]:
        if self.wealth.ndim != 1:
            raise ValueError("citizens view is only defined for a single society")
        return [
            Citizen(float(w), float(pw), int(g) + 1, bool(e))
            for w, pw, g, e in zip(self.wealth, self.primary_wealth, self.group, self.evader)
        ]

    def copy(self) -> Society:
        return dataclasses.replace(
            self,
            wealth=self.wealth.copy(),
            primary_wealth=self.primary_wealth.copy(),
            group=self.group.copy(),
            evader=self.evader.copy(),
            last_pool=np.copy(self.last_pool) if np.ndim(self.last_pool) else self.last_pool,
            rng=copy.deepcopy(self.rng),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "num_groups": self.num_groups,
            "interest_rate": self.interest_rate,
            "last_pool": float(self.last_pool),
            "citizens": [
                {"wealth": c.wealth, "pw": c.primary_wealth, "group": c.group, "evader": c.evader}
                for c in self.citizens
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _group_indices(wealth: np.ndarray, num_groups: int) -> np.ndarray:
    wealth = np.ascontiguousarray(wealth, dtype=float)
    order = np.arange(wealth.shape[0])
    group = np.empty(wealth.shape[0], dtype=np.int64)
    _kernel.regroup(wealth, order, group, wealth.shape[0] // num_groups)
    return group


def assign_groups(society: Society) -> Society:
    """Regroup citizens by wealth quantile; ties keep citizen index order."""
    if society.num_agents % society.num_groups:
        raise ConfigurationError(
            f"{society.num_agents} citizens cannot form {society.num_groups} equal groups"
        )
    out = society.copy()
    out.group = _group_indices(society.wealth, society.num_groups)
    return out


def init_society(config: SimulationConfig, seed: int | np.random.SeedSequence) -> Society:
    config.validate()
    rng = np.random.default_rng(seed)
    wealth, evader = _initial_draws(rng, config)
    return Society(
        wealth=wealth,
        primary_wealth=wealth.copy(),
        group=_group_indices(wealth, config.num_groups),
        evader=evader,
        num_groups=config.num_groups,
        interest_rate=config.interest_rate,
        last_pool=0.0,
        rng=rng,
    )


def _initial_draws(rng: np.random.Generator, config: SimulationConfig) -> tuple[np.ndarray, np.ndarray]:
    # Draw order is part of the reproducibility contract: wealth, evader flags, then
    # one uniform per citizen per step for catching.
    low, high = config.wealth_init
    wealth = low + (high - low) * rng.random(config.num_agents)
    evader = rng.random(config.num_agents) < config.evader_probability
    return wealth, evader


def step(society: Society, norms: NormVector) -> Society:
    """Advance one society by one time step.

    Order: record primary wealth, collect taxes from non-evaders, catch and
    fine evaders (capped at their wealth), add interest to the pool, pay each
    group its share split equally among members, regroup.
    """
    norms.validate()
    if norms.num_groups != society.num_groups:
        raise ConstraintError(
            f"norms define {norms.num_groups} groups, society has {society.num_groups}"
        )
    if society.rng is None:
        raise ValueError("society has no random generator attached")
    out = society.copy()
    draws = out.rng.random(society.num_agents)
    order = np.argsort(out.wealth, kind="stable")
    out.last_pool = _kernel.advance(
        out.wealth, out.primary_wealth, order, out.group, out.evader, draws,
        np.asarray(norms.collect), np.asarray(norms.redistribute), norms.catch, norms.fine,
        float(society.interest_rate), society.num_agents // society.num_groups,
    )
    return out


def run_path(
    config: SimulationConfig, norms: NormVector, seed: int | np.random.SeedSequence
) -> tuple[Society, float]:
    """Initialize a society and advance it ``config.path_length`` steps.

    Returns the final state and the pool redistributed in the final step
    (0 when the path is empty).
    """
    society = init_society(config, seed)
    for _ in range(config.path_length):
        society = step(society, norms)
    return society, float(society.last_pool)


def run_paths(
    config: SimulationConfig,
    genes: np.ndarray,
    seeds: Sequence[int | np.random.SeedSequence],
) -> Society:
    """Run one path per row of ``genes`` with the matching seed.

    ``genes`` has shape (B, 2G+2) in genome layout and must already satisfy
    the norm constraints (callers repair or validate first). The returned
    society carries batched arrays of shape (B, n) and ``last_pool`` of
    shape (B,). Row ``b`` is bit-identical to ``run_path`` with ``seeds[b]``.
    """
    config.validate()
    genes = np.ascontiguousarray(np.atleast_2d(genes), dtype=float)
    if genes.shape[1] != 2 * config.num_groups + 2:
        raise ConstraintError(
            f"expected {2 * config.num_groups + 2} genes per row, got {genes.shape[1]}"
        )
    if len(seeds) != genes.shape[0]:
        raise ValueError(f"got {len(seeds)} seeds for {genes.shape[0]} norm vectors")
    n, steps, batch = config.num_agents, config.path_length, genes.shape[0]

    # One call per path draws the same stream as _initial_draws followed by
    # the per-step catch draws: wealth (n), evader flags (n), then steps * n.
    uniforms = np.empty((batch, (steps + 2) * n))
    for b, seed in enumerate(seeds):
        np.random.default_rng(seed).random(out=uniforms[b])
    low, high = config.wealth_init
    wealth = low + (high - low) * uniforms[:, :n]
    evader = uniforms[:, n : 2 * n] < config.evader_probability
    draws = uniforms[:, 2 * n :].reshape(batch, steps, n)

    primary, group, pool = _kernel.run_batch(
        wealth, evader, draws, genes, config.num_groups, float(config.interest_rate)
    )
    return Society(
        wealth=wealth,
        primary_wealth=primary,
        group=group,
        evader=evader,
        num_groups=config.num_groups,
        interest_rate=config.interest_rate,
        last_pool=pool,
    )
