"""Value iteration driver producing a ReachPolicy."""
from __future__ import annotations

import numpy as np

from ..errors import NonConvergence
from ..hand_model import CommandModel, vocabulary_hash
from . import kernels
from .mdp import (
    DEFAULT_EXTENT,
    DEFAULT_RESOLUTION,
    PREV_VALUES,
    RewardConfig,
    build_tensors,
)
from .policy import POLICY_FORMAT_VERSION, ReachPolicy


def _reward_metadata(cfg: RewardConfig, resolution: float) -> dict:
    from .mdp import _default_necessary
    return {
        "goal_state_reward": cfg.goal_state_reward,
        "living_penalty": cfg.living_penalty,
        "interleave_penalty": cfg.interleave_penalty,
        "axis_order_reward": cfg.axis_order_reward,
        "necessary_transition": (
            "1/(0.001+err)" if cfg.necessary_transition is _default_necessary
            else "custom"),
        "order_transitions": [list(t) for t in cfg.order_transitions],
        "residual_floor": cfg.effective_floor(resolution),
    }


def solve(model: CommandModel, cfg: RewardConfig | None = None,
          gamma: float = 0.99, tolerance: float = 0.1,
          resolution: float = DEFAULT_RESOLUTION,
          extent: float = DEFAULT_EXTENT,
          max_sweeps: int = 10000) -> ReachPolicy:
    """Solve the reaching MDP to a max-norm tolerance between sweeps.

    The greedy action table is extracted from the final sweep, ties broken
    by lowest command id; the terminal cell keeps value 0 and no action.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must be in (0, 1]")
    cfg = cfg or RewardConfig()
    t = build_tensors(model, cfg, gamma=gamma, resolution=resolution, extent=extent)
    n = t.n_cells
    c0 = t.center
    shape = (len(PREV_VALUES), n, n, n)
    values = np.zeros(shape)
    actions = np.full(shape, -1, np.int16)
    delta = np.inf
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        new_values, actions = kernels.sweep(values, t)
        new_values[:, c0, c0, c0] = 0.0
        delta = float(np.abs(new_values - values).max())
        values = new_values
        if delta < tolerance:
            break
    else:
        raise NonConvergence(
            f"value iteration at delta {delta:.3g} after {max_sweeps} sweeps")
    actions[:, c0, c0, c0] = -1

    metadata = {
        "format_version": POLICY_FORMAT_VERSION,
        "resolution": resolution,
        "extent": extent,
        "gamma": gamma,
        "tolerance": tolerance,
        "sweeps": sweeps,
        "final_delta": delta,
        "kernel_backend": kernels.BACKEND,
        "vocabulary_sha256": vocabulary_hash(model),
        "reward": _reward_metadata(cfg, resolution),
    }
    return ReachPolicy(values=values, actions=actions, model=model,
                       resolution=resolution, extent=extent, metadata=metadata)
