"""Simulation worlds for world-model experimentation: batched 2D
environments with controllable factors of variation, episode recording,
planning solvers, and goal-conditioned evaluation."""

from ._backend import BACKEND
from .datastore import EpisodeDataset, EpisodeStore, dataset_open, store_create
from .envs import make, register
from .evaluation import EvalConfig, EvalReport, evaluate, evaluate_from_dataset
from .planning import (CEMParams, CEMSolver, GradParams, GradSolver, MPCPolicy,
                       MPPIParams, MPPISolver, Plan, PlanConfig, cem_solve,
                       grad_solve, mppi_solve)
from .policies import PushTExpert, RandomPolicy, ReplayPolicy, TwoRoomExpert
from .variation import Domain, VariationRequest, VariationSpace
from .world import World

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CEMParams",
    "CEMSolver",
    "Domain",
    "EpisodeDataset",
    "EpisodeStore",
    "EvalConfig",
    "EvalReport",
    "GradParams",
    "GradSolver",
    "MPCPolicy",
    "MPPIParams",
    "MPPISolver",
    "Plan",
    "PlanConfig",
    "PushTExpert",
    "RandomPolicy",
    "ReplayPolicy",
    "TwoRoomExpert",
    "VariationRequest",
    "VariationSpace",
    "World",
    "cem_solve",
    "dataset_open",
    "evaluate",
    "evaluate_from_dataset",
    "grad_solve",
    "make",
    "mppi_solve",
    "register",
    "store_create",
]
