"""State discretization, transition model and reward terms of the reaching MDP.

State: signed cell offsets (target - hand) on each axis plus the previous
command's direction. Cell (0,0,0) is terminal regardless of prev.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr

from ..errors import UnknownCommand
from ..hand_model import (
    AXIS_OF_DIRECTION,
    DIRECTIONS,
    GROUP_OF_DIRECTION,
    SIGN_OF_DIRECTION,
    CommandModel,
)

DEFAULT_RESOLUTION = 0.05
DEFAULT_EXTENT = 0.8

# prev memory: index 0 is "none", then the six directions
PREV_VALUES = ("none",) + DIRECTIONS
PREV_INDEX = {name: i for i, name in enumerate(PREV_VALUES)}
# axis (0=x,1=y,2=z) carried by each prev value; -1 for none
PREV_AXIS = tuple(-1 if p == "none" else AXIS_OF_DIRECTION[p] for p in PREV_VALUES)

_GROUPS = ("horizontal", "vertical", "depth")


def _group_of_prev(prev: str) -> str:
    return "none" if prev == "none" else GROUP_OF_DIRECTION[prev]


@dataclass(frozen=True)
class OffsetState:
    dx_cell: int
    dy_cell: int
    dz_cell: int
    prev: str = "none"

    @property
    def cells(self) -> tuple[int, int, int]:
        return (self.dx_cell, self.dy_cell, self.dz_cell)

    @property
    def terminal(self) -> bool:
        return self.cells == (0, 0, 0)


def _default_necessary(err: float) -> float:
    return 1.0 / (0.001 + err)


# axis transitions that earn the ordering bonus. "none" -> vertical encodes
# that guidance starts on the vertical axis.
DEFAULT_ORDER_TRANSITIONS = (
    ("none", "vertical"),
    ("vertical", "horizontal"),
    ("horizontal", "depth"),
)


@dataclass(frozen=True)
class RewardConfig:
    goal_state_reward: float = 10000.0
    living_penalty: float = -10.0
    interleave_penalty: float = -100.0
    axis_order_reward: float = 100.0
    necessary_transition: Callable[[float], float] = _default_necessary
    order_transitions: tuple[tuple[str, str], ...] = DEFAULT_ORDER_TRANSITIONS
    # Floor (meters) applied to the departed-axis residual fed into
    # necessary_transition. None means half the build resolution: a
    # discretized state cannot claim sub-half-cell accuracy, and an exact
    # zero would make repeated axis flips outscore reaching the goal.
    residual_floor: float | None = None

    def effective_floor(self, resolution: float) -> float:
        return resolution / 2.0 if self.residual_floor is None else self.residual_floor


def max_cell(resolution: float = DEFAULT_RESOLUTION, extent: float = DEFAULT_EXTENT) -> int:
    return int(round(extent / resolution))


def _round_half_away(v: float) -> int:
    return int(math.copysign(math.floor(abs(v) + 0.5), v))


def discretize(offset, resolution: float = DEFAULT_RESOLUTION,
               extent: float = DEFAULT_EXTENT) -> tuple[int, int, int]:
    """Offset (meters, target - hand) to cell indices; half-cells round away
    from zero, components beyond +-extent clamp to the boundary cells."""
    m = max_cell(resolution, extent)
    cells = []
    for v in offset:
        c = _round_half_away(float(v) / resolution)
        cells.append(max(-m, min(m, c)))
    return tuple(cells)


def _dest_distribution(src_cell: int, mu: float, sigma: float, sign: float,
                       resolution: float, m: int) -> np.ndarray:
    """Probability over destination cells -m..m for one axis."""
    n = 2 * m + 1
    centers = (np.arange(n) - m) * resolution
    lo = centers - resolution / 2.0
    hi = centers + resolution / 2.0
    mean = src_cell * resolution - sign * mu
    if sigma <= 0.0:
        out = np.zeros(n)
        dest = max(-m, min(m, _round_half_away(mean / resolution)))
        out[dest + m] = 1.0
        return out
    z_hi = (hi - mean) / sigma
    z_lo = (lo - mean) / sigma
    p = ndtr(z_hi) - ndtr(z_lo)
    # boundary cells absorb the out-of-workspace tails
    p[0] += ndtr(z_lo[0])
    p[-1] += 1.0 - ndtr(z_hi[-1])
    return p


def transition_row(state: OffsetState, command_id: int, model: CommandModel,
                   resolution: float = DEFAULT_RESOLUTION,
                   extent: float = DEFAULT_EXTENT) -> list[tuple[OffsetState, float]]:
    """Successor distribution for one command; nonzero entries only."""
    if state.terminal:
        raise ValueError("transition_row undefined for the terminal state")
    spec = model.spec(command_id)
    g = model.gaussian(command_id)
    axis = AXIS_OF_DIRECTION[spec.direction]
    sign = SIGN_OF_DIRECTION[spec.direction]
    m = max_cell(resolution, extent)
    src = state.cells[axis]
    probs = _dest_distribution(src, g.mu, g.sigma, sign, resolution, m)
    out = []
    for j, p in enumerate(probs):
        if p <= 0.0:
            continue
        cells = list(state.cells)
        cells[axis] = j - m
        out.append((OffsetState(*cells, prev=spec.direction), float(p)))
    return out


def reward(state: OffsetState, command_id: int, next_state: OffsetState,
           cfg: RewardConfig | None = None, model: CommandModel | None = None,
           resolution: float = DEFAULT_RESOLUTION,
           direction: str | None = None) -> float:
    """Reward for (s, a, s'). The command's direction may be given directly
    (for toy instances) or resolved through the model."""
    cfg = cfg or RewardConfig()
    if direction is None:
        if model is None:
            raise ValueError("need a model or an explicit direction")
        direction = model.spec(command_id).direction
    r = cfg.living_penalty
    if next_state.terminal:
        r += cfg.goal_state_reward
    ga = GROUP_OF_DIRECTION[direction]
    gp = _group_of_prev(state.prev)
    if (gp, ga) in cfg.order_transitions:
        r += cfg.axis_order_reward
    if gp not in ("none", ga):
        r += cfg.interleave_penalty
        departed_axis = AXIS_OF_DIRECTION[state.prev]
        residual = abs(state.cells[departed_axis]) * resolution
        residual = max(residual, cfg.effective_floor(resolution))
        r += cfg.necessary_transition(residual)
    return r


@dataclass
class MdpTensors:
    """Dense arrays the sweep kernels consume.

    trans[a]          destination distribution over axis cells, [n, n]
    imm[a, p, k]      non-goal reward terms for action a from prev p when the
                      prev axis sits at cell index k (constant over k when
                      prev is none or shares the action's axis)
    axis_of[a]        axis the action moves (0=x, 1=y, 2=z)
    prev_of[a]        prev index the action leaves behind
    prev_axis[p]      axis carried by prev index p (-1 for none)
    """
    trans: np.ndarray       # [A, n, n] float64
    imm: np.ndarray         # [A, 7, n] float64
    axis_of: np.ndarray     # [A] int32
    prev_of: np.ndarray     # [A] int32
    prev_axis: np.ndarray   # [7] int32
    n_cells: int
    center: int
    gamma: float
    goal_reward: float
    resolution: float
    extent: float


def build_tensors(model: CommandModel, cfg: RewardConfig | None = None,
                  gamma: float = 0.99,
                  resolution: float = DEFAULT_RESOLUTION,
                  extent: float = DEFAULT_EXTENT) -> MdpTensors:
    cfg = cfg or RewardConfig()
    m = max_cell(resolution, extent)
    n = 2 * m + 1
    n_actions = model.n_commands
    n_prev = len(PREV_VALUES)

    trans = np.empty((n_actions, n, n))
    axis_of = np.empty(n_actions, np.int32)
    prev_of = np.empty(n_actions, np.int32)
    imm = np.empty((n_actions, n_prev, n))
    floor = cfg.effective_floor(resolution)
    residuals = np.maximum(np.abs(np.arange(n) - m) * resolution, floor)
    nec = np.array([cfg.necessary_transition(r) for r in residuals])

    for a in range(n_actions):
        spec = model.spec(a)
        g = model.gaussian(a)
        axis = AXIS_OF_DIRECTION[spec.direction]
        sign = SIGN_OF_DIRECTION[spec.direction]
        axis_of[a] = axis
        prev_of[a] = PREV_INDEX[spec.direction]
        for i in range(n):
            trans[a, i] = _dest_distribution(i - m, g.mu, g.sigma, sign, resolution, m)
        ga = GROUP_OF_DIRECTION[spec.direction]
        for p, prev in enumerate(PREV_VALUES):
            gp = _group_of_prev(prev)
            base = cfg.living_penalty
            if (gp, ga) in cfg.order_transitions:
                base += cfg.axis_order_reward
            if gp not in ("none", ga):
                imm[a, p] = base + cfg.interleave_penalty + nec
            else:
                imm[a, p] = base
    return MdpTensors(
        trans=trans, imm=imm, axis_of=axis_of, prev_of=prev_of,
        prev_axis=np.array(PREV_AXIS, np.int32), n_cells=n, center=m,
        gamma=gamma, goal_reward=cfg.goal_state_reward,
        resolution=resolution, extent=extent,
    )
