"""Multi-separator problem: exact oracles, greedy solvers, reductions and volume benchmarks."""

from .errors import FormatError, InstanceTooLarge, MsepError, PreconditionError
from .graph_core import Graph, Grid3, components, grid3, is_separated
from .msp_core import MspInstance, PartialAssignment, objective
from .local_search import gsg, gss
from .dominant import solve_dominant
from .metrics import vi, vins, viws

__version__ = "0.1.0"

__all__ = [
    "FormatError",
    "InstanceTooLarge",
    "MsepError",
    "PreconditionError",
    "Graph",
    "Grid3",
    "components",
    "grid3",
    "is_separated",
    "MspInstance",
    "PartialAssignment",
    "objective",
    "gsg",
    "gss",
    "solve_dominant",
    "vi",
    "vins",
    "viws",
]
