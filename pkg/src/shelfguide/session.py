"""One retrieval episode for either planner: overview, slowdown-gated
commands, completion detection and metric accounting. The simulator and the
live service both drive this state machine."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .continuous import ContinuousPlanner, Cue, Done, KeepGoing, Silent, Stop
from .errors import SessionFinished
from .reach_mdp.policy import DONE, ReachPolicy, plan_overview, query


@dataclass(frozen=True)
class SessionEvent:
    time: float
    kind: str  # overview | command | stop | grasp_prompt | done
    utterance: str
    payload: dict

    def to_dict(self) -> dict:
        return {"time": self.time, "kind": self.kind,
                "utterance": self.utterance, "payload": self.payload}


@dataclass
class SessionMetrics:
    n_commands: int
    guide_time: float
    net_hand_movement: float
    success: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SessionConfig:
    # utterance durations, seconds; recorded into outputs
    overview_duration: float = 2.5
    command_duration: float = 1.5
    cue_duration: float = 1.0
    stop_duration: float = 0.3
    grasp_duration: float = 1.5
    # "slowed down sufficiently": speed below ready_speed sustained this long
    ready_speed: float = 0.05
    sustain: float = 0.3

    def to_dict(self) -> dict:
        return asdict(self)


class GuidanceSession:
    """Single episode; strictly sequential, event-ordered by timestamp."""

    def __init__(self, mode: str, target_pose, policy: ReachPolicy | None = None,
                 planner: ContinuousPlanner | None = None,
                 config: SessionConfig | None = None):
        if mode not in ("discrete", "continuous"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "discrete" and policy is None:
            raise ValueError("discrete mode needs a policy")
        self.mode = mode
        self.target = np.asarray(target_pose, float)
        self.policy = policy
        self.planner = planner if planner is not None else ContinuousPlanner()
        self.config = config or SessionConfig()
        self.events: list[SessionEvent] = []
        self.done = False
        self._prev = "none"
        self._started = False
        self._utter_until = -float("inf")
        self._grasp_pending = False
        self._slow_since: float | None = None
        self._last_pose: np.ndarray | None = None
        self._path_length = 0.0
        self._first_command_time: float | None = None
        self._done_time: float | None = None
        self.started_at: float | None = None  # overview timestamp

    def _emit(self, now: float, kind: str, utterance: str, payload: dict,
              duration: float) -> SessionEvent:
        ev = SessionEvent(time=now, kind=kind, utterance=utterance, payload=payload)
        self.events.append(ev)
        self._utter_until = now + duration
        if kind in ("command", "stop") and self._first_command_time is None:
            self._first_command_time = now
        return ev

    def step(self, hand_pose, hand_speed: float, now: float) -> SessionEvent | None:
        if self.done:
            raise SessionFinished("session already emitted done")
        cfg = self.config
        pose = np.array(hand_pose, float)  # copy; callers may mutate in place
        if self._last_pose is not None:
            self._path_length += float(np.linalg.norm(pose - self._last_pose))
        self._last_pose = pose

        if hand_speed < cfg.ready_speed:
            if self._slow_since is None:
                self._slow_since = now
        else:
            self._slow_since = None

        if not self._started:
            self._started = True
            self.started_at = now
            clock = plan_overview(pose, self.target)
            if clock == "straight ahead":
                utterance = "I found the product straight ahead"
            else:
                utterance = f"I found the product at about {clock} direction"
            return self._emit(now, "overview", utterance, {"clock": clock},
                              cfg.overview_duration)

        if now < self._utter_until:
            return None

        if self._grasp_pending:
            self._grasp_pending = False
            self.done = True
            self._done_time = now
            return self._emit(now, "done", "", {}, 0.0)

        if self.mode == "discrete":
            sustained = (self._slow_since is not None
                         and now - self._slow_since >= cfg.sustain)
            if not sustained:
                return None
            result = query(self.policy, pose, self.target, self._prev)
            if result == DONE:
                self._grasp_pending = True
                return self._emit(
                    now, "grasp_prompt",
                    "Grasp the target object with your non-occupied hand",
                    {}, cfg.grasp_duration)
            spec = self.policy.model.spec(result)
            self._prev = spec.direction
            return self._emit(now, "command", spec.utterance, {
                "command_id": spec.id,
                "direction": spec.direction,
                "magnitude_m": spec.nominal_magnitude,
            }, cfg.command_duration)

        result = self.planner.next_cue(pose, hand_speed, self.target, now)
        if isinstance(result, Cue):
            return self._emit(now, "command", f"keep on going {result.direction}",
                              {"direction": result.direction, "cue": "enter"},
                              cfg.cue_duration)
        if isinstance(result, KeepGoing):
            return self._emit(now, "command", "keep on going",
                              {"cue": "repeat"}, cfg.cue_duration)
        if isinstance(result, Stop):
            return self._emit(now, "stop", "stop", {}, cfg.stop_duration)
        if isinstance(result, Done):
            self._grasp_pending = True
            return self._emit(
                now, "grasp_prompt",
                "Grasp the target object with your non-occupied hand",
                {}, cfg.grasp_duration)
        return None

    @property
    def n_commands(self) -> int:
        return sum(1 for e in self.events if e.kind in ("command", "stop"))

    def metrics(self, now: float | None = None) -> SessionMetrics:
        if self._first_command_time is None:
            guide_time = 0.0
        else:
            end = self._done_time if self._done_time is not None else now
            guide_time = 0.0 if end is None else end - self._first_command_time
        return SessionMetrics(
            n_commands=self.n_commands,
            guide_time=guide_time,
            net_hand_movement=self._path_length,
            success=self.done,
        )


def events_to_jsonl(events) -> str:
    return "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in events)


def events_from_jsonl(text: str) -> list[SessionEvent]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        out.append(SessionEvent(time=d["time"], kind=d["kind"],
                                utterance=d["utterance"], payload=d["payload"]))
    return out


def recompute_metrics(events) -> dict:
    """Re-derive the transcript-checkable metrics from an event log."""
    times = [e.time for e in events]
    if times != sorted(times):
        raise ValueError("events not time-ordered")
    if not events or events[0].kind != "overview":
        raise ValueError("transcript must start with exactly one overview")
    if sum(1 for e in events if e.kind == "overview") != 1:
        raise ValueError("transcript must start with exactly one overview")
    n_commands = sum(1 for e in events if e.kind in ("command", "stop"))
    command_times = [e.time for e in events if e.kind in ("command", "stop")]
    done_times = [e.time for e in events if e.kind == "done"]
    success = bool(done_times)
    if command_times and done_times:
        guide_time = done_times[-1] - command_times[0]
    else:
        guide_time = 0.0
    return {"n_commands": n_commands, "guide_time": guide_time, "success": success}
