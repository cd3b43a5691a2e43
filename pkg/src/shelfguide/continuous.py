"""Baseline planner: axis-sequenced continuous cueing.

Guides one axis at a time in the order vertical -> horizontal -> depth,
issuing "keep on going {direction}" cues, repeating when the hand slows,
and "stop" once the axis error falls below the stop threshold. An axis
whose error re-exceeds the threshold after an overshoot is re-entered.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# axis order and the direction for a positive error (target above/right
# of/deeper than the hand)
_AXES = (
    ("vertical", 1, "up", "down"),
    ("horizontal", 0, "right", "left"),
    ("depth", 2, "forward", "backward"),
)


@dataclass(frozen=True)
class Cue:
    direction: str


class KeepGoing:
    pass


class Stop:
    pass


class Done:
    pass


class Silent:
    pass


@dataclass
class ContinuousPlanner:
    stop_threshold: float = 0.025  # meters; matches the MDP terminal half-cell
    ready_speed: float = 0.05      # m/s
    refractory: float = 1.0        # seconds between repeated cues
    current_axis: str | None = field(default=None, init=False)
    current_sign: float = field(default=0.0, init=False)
    last_cue_time: float = field(default=-float("inf"), init=False)
    finished: bool = field(default=False, init=False)

    def _active_axis(self, err):
        for name, idx, pos, neg in _AXES:
            if abs(err[idx]) >= self.stop_threshold:
                return name, idx, pos, neg
        return None

    def next_cue(self, hand_pose, hand_speed: float, target_pose, now: float):
        err = np.asarray(target_pose, float) - np.asarray(hand_pose, float)

        if self.current_axis is not None:
            idx = next(a[1] for a in _AXES if a[0] == self.current_axis)
            # remaining travel along the cued direction; negative once the
            # hand overshoots past the target, which must also trigger a stop
            if err[idx] * self.current_sign < self.stop_threshold:
                self.current_axis = None
                return Stop()

        active = self._active_axis(err)
        if active is None:
            if self.current_axis is None:
                self.finished = True
                return Done()
            return Silent()

        name, idx, pos, neg = active
        direction = pos if err[idx] > 0 else neg
        if name != self.current_axis:
            # enter (or re-enter) an axis once the hand has settled
            if hand_speed < self.ready_speed:
                self.current_axis = name
                self.current_sign = 1.0 if err[idx] > 0 else -1.0
                self.last_cue_time = now
                return Cue(direction)
            return Silent()
        if hand_speed < self.ready_speed and now - self.last_cue_time >= self.refractory:
            self.last_cue_time = now
            return KeepGoing()
        return Silent()
