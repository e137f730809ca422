"""Election of one norm vector from a Pareto front by citizen voting.

Each voter prefers one norm variable (collect, redistribute, catch or fine).
For the per-group variables the voter looks at its own wealth group's
component, so a preference resolves to one of the genome slots. Voters
score every solution and vote for the best; the plurality winner is elected.

Two scoring modes exist. ``weighted`` puts weight 0.8 on the preferred slot
and spreads 0.2 evenly over the remaining slots, then takes the solution
with the largest weighted gene sum. ``literal`` takes the solution with the
largest preferred gene alone. With ``direction_aware`` a collect gene is
scored as ``1 - collect`` (a citizen paying tax prefers lower rates).
All ties go to the lowest solution index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from normopt.errors import ConfigurationError, ContractError
from normopt.front import Front, norm_gene_names
from normopt.society import NormVector
from normopt.values import ObjectiveVector

VARIABLES = ("collect", "redistribute", "catch", "fine")
GROUP_VARIABLES = ("collect", "redistribute")
PREFERRED_WEIGHT = 0.8
WEIGHTED = "weighted"
LITERAL = "literal"
MODES = (WEIGHTED, LITERAL)


def preferred_slot(variable: str, group: int, num_groups: int = 5) -> int:
    """Genome slot a preference points at; ``group`` is 1-based."""
    if variable == "collect":
        return group - 1
    if variable == "redistribute":
        return num_groups + group - 1
    if variable == "catch":
        return 2 * num_groups
    if variable == "fine":
        return 2 * num_groups + 1
    raise ContractError(f"unknown norm variable {variable!r}; expected one of {VARIABLES}")


def preference_weights(slot: int, num_slots: int = 12, preferred: float = PREFERRED_WEIGHT) -> np.ndarray:
    """``preferred`` on ``slot`` and the rest shared evenly by the other slots."""
    if not 0.0 <= preferred <= 1.0:
        raise ConfigurationError(f"preferred weight must lie in [0, 1], got {preferred}")
    weights = np.full(num_slots, (1.0 - preferred) / (num_slots - 1))
    weights[slot] = preferred
    return weights


@dataclass(frozen=True)
class Solution:
    """A front member: its scores and the norms that produced them."""

    objectives: ObjectiveVector
    norms: NormVector


def solutions_from_front(front: Front) -> list[Solution]:
    return [Solution(front.objective_vector(i), front.norms(i)) for i in range(len(front))]


@dataclass(frozen=True)
class VoterAgent:
    """A citizen with a wealth group (1-based) and a preferred norm variable."""

    group: int
    preferred_variable: str
    num_groups: int = 5
    preferred_weight: float = PREFERRED_WEIGHT

    def __post_init__(self) -> None:
        if not 1 <= self.group <= self.num_groups:
            raise ContractError(f"group must lie in 1..{self.num_groups}, got {self.group}")
        preferred_slot(self.preferred_variable, self.group, self.num_groups)

    @property
    def slot(self) -> int:
        return preferred_slot(self.preferred_variable, self.group, self.num_groups)

    @property
    def weights(self) -> np.ndarray:
        return preference_weights(self.slot, 2 * self.num_groups + 2, self.preferred_weight)

    def to_dict(self) -> dict:
        return {"group": self.group, "preferred_variable": self.preferred_variable}


def make_voters(
    count: int, seed: int, num_groups: int = 5, preferred_weight: float = PREFERRED_WEIGHT
) -> list[VoterAgent]:
    """``count`` voters with uniformly random groups and preferred variables."""
    if count < 1:
        raise ContractError(f"need at least one voter, got {count}")
    rng = np.random.default_rng(seed)
    groups = rng.integers(1, num_groups + 1, size=count)
    variables = rng.integers(0, len(VARIABLES), size=count)
    return [
        VoterAgent(int(g), VARIABLES[v], num_groups, preferred_weight) for g, v in zip(groups, variables)
    ]


def _genes(solutions) -> np.ndarray:
    if isinstance(solutions, Front):
        genes = solutions.genes
    elif len(solutions) and isinstance(solutions[0], Solution):
        genes = np.array([s.norms.to_array() for s in solutions])
    else:
        genes = np.asarray(solutions, dtype=float)
    genes = np.atleast_2d(genes)
    if genes.size == 0 or len(genes) == 0:
        raise ContractError("cannot vote over an empty set of solutions")
    return genes


def _utility(genes: np.ndarray, num_groups: int, direction_aware: bool) -> np.ndarray:
    if not direction_aware:
        return genes
    genes = genes.copy()
    genes[:, :num_groups] = 1.0 - genes[:, :num_groups]
    return genes


def fitness(solutions, weights, direction_aware: bool = False) -> int:
    """Index of the solution with the largest weighted gene sum (lowest index on ties)."""
    genes = _genes(solutions)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (genes.shape[1],):
        raise ContractError(f"need {genes.shape[1]} weights, got {weights.shape}")
    num_groups = (genes.shape[1] - 2) // 2
    return int(np.argmax(_utility(genes, num_groups, direction_aware) @ weights))


def get_vote(agent: VoterAgent, solutions, mode: str = WEIGHTED, direction_aware: bool = False) -> int:
    """Index of the solution ``agent`` votes for."""
    if mode == WEIGHTED:
        return fitness(solutions, agent.weights, direction_aware)
    if mode == LITERAL:
        genes = _utility(_genes(solutions), agent.num_groups, direction_aware)
        return int(np.argmax(genes[:, agent.slot]))
    raise ConfigurationError(f"unknown voting mode {mode!r}; expected one of {MODES}")


def tally_votes(voters: Sequence[VoterAgent], solutions, mode: str = WEIGHTED, direction_aware: bool = False) -> np.ndarray:
    """Votes received by each solution."""
    genes = _genes(solutions)
    if not voters:
        raise ContractError("cannot hold an election without voters")
    votes = [get_vote(v, genes, mode, direction_aware) for v in voters]
    return np.bincount(votes, minlength=len(genes))


@dataclass
class Election:
    """Outcome of a vote: the winner's position, its solution and the full tally."""

    winner: int
    solution: Solution
    tally: np.ndarray
    mode: str
    direction_aware: bool
    voter_seed: int | None = None

    def to_dict(self) -> dict:
        names = norm_gene_names(self.solution.norms.num_groups)
        return {
            "winner": self.winner,
            "norms": dict(zip(names, map(float, self.solution.norms.to_array()))),
            "objectives": {k: float(v) for k, v in self.solution.objectives.to_dict().items()},
            "tally": [int(t) for t in self.tally],
            "voters": int(self.tally.sum()),
            "voter_seed": self.voter_seed,
            "mode": self.mode,
            "direction_aware": self.direction_aware,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_markdown(self) -> str:
        """The elected norms and scores as two small tables."""
        data = self.to_dict()
        lines = [f"Elected solution {self.winner} with {data['tally'][self.winner]} of {data['voters']} votes.", ""]
        lines += ["| norm | value |", "|---|---|"]
        lines += [f"| {k} | {v:.4f} |" for k, v in data["norms"].items()]
        lines += ["", "| objective | value |", "|---|---|"]
        lines += [f"| {k} | {v:.4f} |" for k, v in data["objectives"].items()]
        return "\n".join(lines) + "\n"


def elect(
    voters: Sequence[VoterAgent],
    solutions,
    mode: str = WEIGHTED,
    direction_aware: bool = False,
    voter_seed: int | None = None,
) -> Election:
    """Collect one vote per voter and elect the plurality solution (lowest index on ties)."""
    if isinstance(solutions, Front):
        solutions = solutions_from_front(solutions)
    tally = tally_votes(voters, solutions, mode, direction_aware)
    winner = int(np.argmax(tally))
    return Election(winner, solutions[winner], tally, mode, direction_aware, voter_seed)


def main_reasoner(
    voters: Sequence[VoterAgent], solutions, mode: str = WEIGHTED, direction_aware: bool = False
) -> Solution:
    """The elected solution."""
    return elect(voters, solutions, mode, direction_aware).solution
