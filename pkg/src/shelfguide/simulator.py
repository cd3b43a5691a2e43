"""Discrete-event simulation of a hand responding to guidance.

The simulated human reacts to each utterance after a lognormal latency,
moves at a fixed speed, and (continuous mode) overshoots the stop command
by latency x current speed. Correction passes after an overshoot are
slower by correction_slowdown per re-entry, mirroring careful re-approach.
All parameters are synthetic placeholders, recorded into every output.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, asdict

import numpy as np

from .continuous import ContinuousPlanner
from .hand_model import AXIS_OF_DIRECTION, SIGN_OF_DIRECTION, sample_movement
from .reach_mdp.policy import ReachPolicy
from .session import GuidanceSession, SessionConfig, SessionMetrics

CSV_HEADER = "seed,mode,dx,dy,dz,n_commands,guide_time_s,net_movement_m,success"


@dataclass(frozen=True)
class SimHumanConfig:
    latency_median: float = 0.4       # seconds, lognormal median
    latency_log_sd: float = 0.3
    discrete_speed: float = 0.3       # m/s while executing a discrete command
    continuous_speed: float = 0.15    # m/s while tracking a continuous cue
    off_axis_sd: float = 0.0          # meters per discrete move
    correction_slowdown: float = 0.5  # speed factor per axis re-entry

    def to_dict(self) -> dict:
        return asdict(self)

    def draw_latency(self, rng: np.random.Generator) -> float:
        return float(np.exp(rng.normal(math.log(self.latency_median),
                                       self.latency_log_sd)))


@dataclass
class TrialRecord:
    seed: int
    mode: str
    start_offset: tuple[float, float, float]
    metrics: SessionMetrics
    events: list
    human: SimHumanConfig
    session_config: SessionConfig


_DIR_UNIT = {
    d: np.eye(3)[AXIS_OF_DIRECTION[d]] * SIGN_OF_DIRECTION[d]
    for d in AXIS_OF_DIRECTION
}


class _Hand:
    """Kinematic hand: piecewise-constant velocity segments driven by events."""

    def __init__(self, pose, human: SimHumanConfig, rng: np.random.Generator):
        self.pose = np.array(pose, float)
        self.human = human
        self.rng = rng
        self.velocity = np.zeros(3)
        self.start_at = None      # start moving at this time
        self.pending_velocity = None
        self.remaining = None     # meters left in a bounded (discrete) move
        self.halt_at = None       # continuous: stop reaction deadline
        self.axis_entries: dict[str, int] = {}

    def on_discrete_command(self, command_id: int, direction: str, model, now: float):
        s = sample_movement(model, command_id, self.rng)
        disp = s * _DIR_UNIT[direction]
        if self.human.off_axis_sd > 0:
            noise = self.rng.normal(0.0, self.human.off_axis_sd, 3)
            noise[AXIS_OF_DIRECTION[direction]] = 0.0
            disp = disp + noise
        dist = float(np.linalg.norm(disp))
        self.start_at = now + self.human.draw_latency(self.rng)
        if dist > 0:
            self.pending_velocity = disp / dist * self.human.discrete_speed
            self.remaining = dist
        else:
            self.pending_velocity = np.zeros(3)
            self.remaining = 0.0

    def on_cue(self, direction: str, now: float):
        axis = AXIS_OF_DIRECTION[direction]
        entries = self.axis_entries.get(axis, 0) + 1
        self.axis_entries[axis] = entries
        speed = self.human.continuous_speed * self.human.correction_slowdown ** (entries - 1)
        self.start_at = now + self.human.draw_latency(self.rng)
        self.pending_velocity = speed * _DIR_UNIT[direction]
        self.remaining = None
        self.halt_at = None
        self._last_cue_direction = direction

    def on_keep_going(self, now: float):
        # ignore a repeat while the previous cue's start is still scheduled
        if self.start_at is not None or np.any(self.velocity):
            return
        direction = getattr(self, "_last_cue_direction", None)
        if direction is None:
            return
        axis = AXIS_OF_DIRECTION[direction]
        entries = max(1, self.axis_entries.get(axis, 1))
        speed = self.human.continuous_speed * self.human.correction_slowdown ** (entries - 1)
        self.start_at = now + self.human.draw_latency(self.rng)
        self.pending_velocity = speed * _DIR_UNIT[direction]
        self.remaining = None

    def on_stop(self, now: float):
        self.halt_at = now + self.human.draw_latency(self.rng)
        self.start_at = None
        self.pending_velocity = None

    def advance(self, t0: float, dt: float) -> float:
        """Integrate pose over [t0, t0+dt]; returns distance moved."""
        if self.start_at is not None and t0 + dt >= self.start_at:
            self.velocity = self.pending_velocity
            self.start_at = None
            self.pending_velocity = None
        if self.halt_at is not None and t0 >= self.halt_at:
            self.velocity = np.zeros(3)
            self.halt_at = None
        speed = float(np.linalg.norm(self.velocity))
        if speed == 0.0:
            return 0.0
        step = speed * dt
        if self.remaining is not None:
            step = min(step, self.remaining)
            self.remaining -= step
            if self.remaining <= 1e-12:
                move = self.velocity / speed * step
                self.pose += move
                self.velocity = np.zeros(3)
                self.remaining = None
                return step
        self.pose += self.velocity / speed * step
        return step


def run_trial(mode: str, policy: ReachPolicy, human: SimHumanConfig,
              start_offset, seed, session_config: SessionConfig | None = None,
              command_cap: int = 60, dt: float = 0.05,
              max_time: float = 600.0) -> TrialRecord:
    """One simulated episode. Target sits at the origin; the hand starts at
    -start_offset so the initial offset (target - hand) equals start_offset."""
    session_config = session_config or SessionConfig()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    target = np.zeros(3)
    start_offset = tuple(float(v) for v in start_offset)
    hand = _Hand(-np.asarray(start_offset), human, rng)
    session = GuidanceSession(mode, target, policy=policy,
                              planner=ContinuousPlanner(
                                  ready_speed=session_config.ready_speed),
                              config=session_config)
    t = 0.0
    failed = False
    while t < max_time:
        moved = hand.advance(t, dt)
        t += dt
        speed = moved / dt
        event = session.step(hand.pose, speed, t)
        if event is not None:
            if event.kind == "command":
                if mode == "discrete":
                    hand.on_discrete_command(event.payload["command_id"],
                                             event.payload["direction"],
                                             policy.model, t)
                elif event.payload.get("cue") == "enter":
                    hand.on_cue(event.payload["direction"], t)
                else:
                    hand.on_keep_going(t)
            elif event.kind == "stop":
                hand.on_stop(t)
            elif event.kind == "done":
                break
            if session.n_commands > command_cap:
                failed = True
                break
    metrics = session.metrics(now=t)
    if failed or not session.done:
        metrics.success = False
    return TrialRecord(seed=_seed_label(seed), mode=mode,
                       start_offset=start_offset, metrics=metrics,
                       events=session.events, human=human,
                       session_config=session_config)


def _seed_label(seed) -> int:
    if isinstance(seed, (tuple, list)):
        return int(seed[-2]) if len(seed) >= 2 else int(seed[0])
    return int(seed)


def draw_start_offset(rng: np.random.Generator,
                      low: float = 0.1, high: float = 0.6) -> tuple[float, float, float]:
    mags = rng.uniform(low, high, 3)
    signs = rng.choice([-1.0, 1.0], 3)
    return tuple(float(v) for v in mags * signs)


def run_trials(mode: str, policy: ReachPolicy, human: SimHumanConfig,
               n_trials: int, master_seed: int, **kwargs) -> list[TrialRecord]:
    records = []
    mode_code = {"discrete": 1, "continuous": 2}[mode]
    for i in range(n_trials):
        start_rng = np.random.default_rng(np.random.SeedSequence((master_seed, i, 0)))
        start = draw_start_offset(start_rng)
        rec = run_trial(mode, policy, human, start,
                        seed=(master_seed, i, mode_code), **kwargs)
        records.append(rec)
    return records


def records_to_csv(records) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in records:
        dx, dy, dz = r.start_offset
        m = r.metrics
        buf.write(f"{r.seed},{r.mode},{dx:.6f},{dy:.6f},{dz:.6f},"
                  f"{m.n_commands},{m.guide_time:.6f},"
                  f"{m.net_hand_movement:.6f},{int(m.success)}\n")
    return buf.getvalue()


def _stats(values) -> dict:
    arr = np.asarray(values, float)
    return {"mean": float(arr.mean()), "sd": float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
            "median": float(np.median(arr))}


def _paired_bootstrap_ci(diffs, rng: np.random.Generator,
                         n_boot: int = 2000, level: float = 0.95):
    diffs = np.asarray(diffs, float)
    idx = rng.integers(0, len(diffs), size=(n_boot, len(diffs)))
    means = diffs[idx].mean(axis=1)
    lo, hi = np.percentile(means, [(1 - level) / 2 * 100, (1 + level) / 2 * 100])
    return float(lo), float(hi)


def compare(policy: ReachPolicy, human: SimHumanConfig, n_trials: int,
            master_seed: int, **kwargs) -> dict:
    """Paired discrete-vs-continuous comparison over shared start offsets."""
    if n_trials < 100:
        raise ValueError("compare needs at least 100 paired trials")
    disc = run_trials("discrete", policy, human, n_trials, master_seed, **kwargs)
    cont = run_trials("continuous", policy, human, n_trials, master_seed, **kwargs)
    rng = np.random.default_rng(np.random.SeedSequence((master_seed, 777)))
    summary = {"n_trials": n_trials, "master_seed": master_seed,
               "human": human.to_dict(), "modes": {}, "paired": {}}
    for name, recs in (("discrete", disc), ("continuous", cont)):
        summary["modes"][name] = {
            "n_commands": _stats([r.metrics.n_commands for r in recs]),
            "guide_time_s": _stats([r.metrics.guide_time for r in recs]),
            "net_movement_m": _stats([r.metrics.net_hand_movement for r in recs]),
            "success_rate": float(np.mean([r.metrics.success for r in recs])),
        }
    for key, get in (
        ("n_commands", lambda m: m.n_commands),
        ("guide_time_s", lambda m: m.guide_time),
        ("net_movement_m", lambda m: m.net_hand_movement),
    ):
        diffs = [get(d.metrics) - get(c.metrics) for d, c in zip(disc, cont)]
        lo, hi = _paired_bootstrap_ci(diffs, rng)
        summary["paired"][key] = {
            "mean_difference": float(np.mean(diffs)),
            "ci95": [lo, hi],
        }
    summary["records"] = {"discrete": disc, "continuous": cont}
    return summary


def format_summary(summary: dict) -> str:
    lines = [
        f"paired trials: {summary['n_trials']} (master seed {summary['master_seed']})",
        f"{'metric':<18}{'discrete':>22}{'continuous':>22}{'diff (d-c) [95% CI]':>30}",
    ]
    for key, label in (("n_commands", "n_commands"),
                       ("guide_time_s", "guide_time_s"),
                       ("net_movement_m", "net_movement_m")):
        d = summary["modes"]["discrete"][key]
        c = summary["modes"]["continuous"][key]
        p = summary["paired"][key]
        lines.append(
            f"{label:<18}"
            f"{d['mean']:>10.2f} ± {d['sd']:<8.2f}"
            f"{c['mean']:>10.2f} ± {c['sd']:<8.2f}"
            f"{p['mean_difference']:>10.2f} [{p['ci95'][0]:.2f}, {p['ci95'][1]:.2f}]")
    lines.append(
        f"{'success_rate':<18}"
        f"{summary['modes']['discrete']['success_rate']:>10.3f}"
        f"{summary['modes']['continuous']['success_rate']:>22.3f}")
    return "\n".join(lines)
