"""Norm synthesis for an agent-based tax society via multi-objective evolutionary search."""

from normopt.front import Front
from normopt.society import NormVector, SimulationConfig
from normopt.values import ALL_OBJECTIVES, FIVE_OBJECTIVES, TWO_OBJECTIVES, ObjectiveVector, evaluate

__version__ = "0.1.0"

__all__ = [
    "ALL_OBJECTIVES",
    "FIVE_OBJECTIVES",
    "Front",
    "NormVector",
    "ObjectiveVector",
    "SimulationConfig",
    "TWO_OBJECTIVES",
    "evaluate",
]
