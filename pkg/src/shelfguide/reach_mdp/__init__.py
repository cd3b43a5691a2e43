"""Discretized reaching MDP: build, solve by value iteration, query online."""
from .mdp import (
    OffsetState,
    RewardConfig,
    PREV_VALUES,
    discretize,
    transition_row,
    reward,
    MdpTensors,
    build_tensors,
)
from .solve import solve
from .policy import (
    ReachPolicy,
    query,
    plan_overview,
    rollout,
    save_policy,
    load_policy,
    export_policy_json,
)
from . import kernels

__all__ = [
    "OffsetState", "RewardConfig", "PREV_VALUES", "discretize",
    "transition_row", "reward", "MdpTensors", "build_tensors", "solve",
    "ReachPolicy", "query", "plan_overview", "rollout",
    "save_policy", "load_policy", "export_policy_json", "kernels",
]
