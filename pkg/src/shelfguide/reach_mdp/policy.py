"""Solved reaching policy: online queries, plan overview, file container.

Policy file layout (little endian): magic b"SGRP", u32 format version,
u64 metadata length, metadata JSON (embeds the command model), then the
dense value (f8) and action (i2) tables in prev-major, z, y, x order.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from ..hand_model import (
    AXIS_OF_DIRECTION,
    SIGN_OF_DIRECTION,
    CommandModel,
    model_from_dict,
    model_to_dict,
)
from .mdp import PREV_INDEX, PREV_VALUES, discretize

POLICY_FORMAT_VERSION = 1
_MAGIC = b"SGRP"

DONE = "done"  # sentinel returned by query at the terminal offset


@dataclass
class ReachPolicy:
    values: np.ndarray    # [n_prev, n, n, n] float64
    actions: np.ndarray   # [n_prev, n, n, n] int16, -1 at terminal
    model: CommandModel
    resolution: float
    extent: float
    metadata: dict

    @property
    def center(self) -> int:
        return (self.values.shape[1] - 1) // 2

    def value(self, state) -> float:
        c = self.center
        p = PREV_INDEX[state.prev]
        return float(self.values[p, state.dz_cell + c, state.dy_cell + c,
                                 state.dx_cell + c])

    def action(self, state) -> int | None:
        c = self.center
        p = PREV_INDEX[state.prev]
        a = int(self.actions[p, state.dz_cell + c, state.dy_cell + c,
                             state.dx_cell + c])
        return None if a < 0 else a


def query(policy: ReachPolicy, hand_pose, target_pose, prev: str = "none"):
    """Greedy command for the current offset, or DONE at the terminal cell."""
    offset = np.asarray(target_pose, float) - np.asarray(hand_pose, float)
    cells = discretize(offset, policy.resolution, policy.extent)
    if cells == (0, 0, 0):
        return DONE
    c = policy.center
    p = PREV_INDEX[prev]
    return int(policy.actions[p, cells[2] + c, cells[1] + c, cells[0] + c])


def plan_overview(hand_pose, target_pose) -> str:
    """Clock-face heading of the target in the shelf (XY) plane, seen from
    the hand; hours by nearest 30 degrees, halves rounding away from 12."""
    offset = np.asarray(target_pose, float) - np.asarray(hand_pose, float)
    dx, dy = float(offset[0]), float(offset[1])
    if math.hypot(dx, dy) < 1e-9:
        return "straight ahead"
    # clockwise angle from +y (12 o'clock), folded to [-180, 180)
    angle = math.degrees(math.atan2(dx, dy))
    hours = math.copysign(math.floor(abs(angle) / 30.0 + 0.5), angle)
    hour = int(hours) % 12
    return f"{12 if hour == 0 else hour} o'clock"


def rollout(policy: ReachPolicy, start_offset, rng: np.random.Generator | None = None,
            max_commands: int = 60, prev: str = "none"):
    """Greedy rollout at the MDP level; noiseless (mean movement) when rng is
    None. Returns (command ids, success)."""
    from ..hand_model import sample_movement

    offset = np.array(start_offset, float)
    commands: list[int] = []
    for _ in range(max_commands):
        cells = discretize(offset, policy.resolution, policy.extent)
        if cells == (0, 0, 0):
            return commands, True
        c = policy.center
        a = int(policy.actions[PREV_INDEX[prev], cells[2] + c, cells[1] + c,
                               cells[0] + c])
        spec = policy.model.spec(a)
        if rng is None:
            s = policy.model.gaussian(a).mu
        else:
            s = sample_movement(policy.model, a, rng)
        offset[AXIS_OF_DIRECTION[spec.direction]] -= SIGN_OF_DIRECTION[spec.direction] * s
        prev = spec.direction
        commands.append(a)
    cells = discretize(offset, policy.resolution, policy.extent)
    return commands, cells == (0, 0, 0)


def save_policy(policy: ReachPolicy, path) -> None:
    meta = dict(policy.metadata)
    meta["model"] = model_to_dict(policy.model)
    meta["shape"] = list(policy.values.shape)
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", POLICY_FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(policy.values, "<f8").tobytes())
        fh.write(np.ascontiguousarray(policy.actions, "<i2").tobytes())


def load_policy(path) -> ReachPolicy:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a policy file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != POLICY_FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported policy format {version}")
        (mlen,) = struct.unpack("<Q", fh.read(8))
        meta = json.loads(fh.read(mlen).decode())
        shape = tuple(meta.pop("shape"))
        count = int(np.prod(shape))
        values = np.frombuffer(fh.read(count * 8), "<f8").reshape(shape).copy()
        actions = np.frombuffer(fh.read(count * 2), "<i2").reshape(shape).copy()
    model = model_from_dict(meta.pop("model"))
    return ReachPolicy(values=values, actions=actions, model=model,
                       resolution=meta["resolution"], extent=meta["extent"],
                       metadata=meta)


def export_policy_json(policy: ReachPolicy, path, include_tables: bool = False) -> None:
    """Structured-text export for inspection."""
    out = dict(policy.metadata)
    out["model"] = model_to_dict(policy.model)
    out["value_stats"] = {
        "min": float(policy.values.min()),
        "max": float(policy.values.max()),
        "mean": float(policy.values.mean()),
    }
    if include_tables:
        out["values"] = policy.values.tolist()
        out["actions"] = policy.actions.tolist()
        out["index_order"] = ["prev", "z", "y", "x"]
        out["prev_values"] = list(PREV_VALUES)
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
