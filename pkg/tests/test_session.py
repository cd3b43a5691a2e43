import numpy as np
import pytest

from shelfguide.errors import SessionFinished
from shelfguide.session import (
    GuidanceSession,
    SessionConfig,
    events_from_jsonl,
    events_to_jsonl,
    recompute_metrics,
)


def drive_discrete(policy, target, dt=0.05, max_t=120.0):
    """Obedient scripted hand: rests until commanded, then moves the exact
    nominal magnitude at 0.3 m/s."""
    from shelfguide.hand_model import AXIS_OF_DIRECTION, SIGN_OF_DIRECTION

    session = GuidanceSession("discrete", target, policy=policy)
    pose = np.zeros(3)
    vel = np.zeros(3)
    remaining = 0.0
    t = 0.0
    while t < max_t:
        if remaining > 0:
            step = min(remaining, 0.3 * dt)
            pose = pose + vel * step
            remaining -= step
        t += dt
        speed = 0.3 if remaining > 0 else 0.0
        ev = session.step(pose, speed, t)
        if ev is None:
            continue
        if ev.kind == "command":
            d = ev.payload["direction"]
            vel = np.zeros(3)
            vel[AXIS_OF_DIRECTION[d]] = SIGN_OF_DIRECTION[d]
            remaining = ev.payload["magnitude_m"]
        elif ev.kind == "done":
            break
    return session, t


def test_discrete_session_flow(policy):
    target = np.array([0.0, 0.3048, 0.0])  # exactly one 12 inch command
    session, t_end = drive_discrete(policy, target)
    kinds = [e.kind for e in session.events]
    assert kinds[0] == "overview"
    assert kinds[-2:] == ["grasp_prompt", "done"]
    assert "command" in kinds
    assert session.events[0].utterance.startswith("I found the product")
    grasp = next(e for e in session.events if e.kind == "grasp_prompt")
    assert grasp.utterance == "Grasp the target object with your non-occupied hand"
    m = session.metrics(now=t_end)
    assert m.success
    assert m.n_commands == 1
    assert m.net_hand_movement == pytest.approx(0.3048, abs=1e-9)
    assert m.guide_time > 0


def test_overview_straight_ahead(policy):
    session = GuidanceSession("discrete", (0.0, 0.0, 0.4), policy=policy)
    ev = session.step((0.0, 0.0, 0.0), 0.0, 0.0)
    assert ev.kind == "overview"
    assert ev.utterance == "I found the product straight ahead"
    assert ev.payload["clock"] == "straight ahead"


def test_overview_clock_utterance(policy):
    session = GuidanceSession("discrete", (0.3, 0.0, 0.0), policy=policy)
    ev = session.step((0.0, 0.0, 0.0), 0.0, 0.0)
    assert ev.utterance == "I found the product at about 3 o'clock direction"


def test_commands_gated_on_sustained_slowdown(policy):
    cfg = SessionConfig()
    session = GuidanceSession("discrete", (0.0, 0.3, 0.0), policy=policy,
                              config=cfg)
    session.step((0, 0, 0), 0.0, 0.0)  # overview
    t = cfg.overview_duration + 0.01
    # still moving: no command
    assert session.step((0, 0, 0), 0.2, t) is None
    # slow but not yet sustained
    assert session.step((0, 0, 0), 0.0, t + 0.1) is None
    ev = session.step((0, 0, 0), 0.0, t + 0.1 + cfg.sustain + 1e-6)
    assert ev is not None and ev.kind == "command"


def test_step_after_done_raises(policy):
    session, t_end = drive_discrete(policy, np.array([0.0, 0.3048, 0.0]))
    with pytest.raises(SessionFinished):
        session.step((0, 0, 0), 0.0, t_end + 1.0)


def test_continuous_session_counts_stops(policy):
    session = GuidanceSession("continuous", (0.0, 0.30, 0.0))
    session.step((0, 0, 0), 0.0, 0.0)
    ev = session.step((0, 0, 0), 0.0, 3.0)
    assert ev.kind == "command" and ev.payload["cue"] == "enter"
    ev = session.step((0.0, 0.29, 0.0), 0.15, 5.0)
    assert ev.kind == "stop"
    assert session.n_commands == 2  # cue + stop both count


def test_events_jsonl_roundtrip(policy):
    session, _ = drive_discrete(policy, np.array([0.0, 0.3048, 0.0]))
    text = events_to_jsonl(session.events)
    back = events_from_jsonl(text)
    assert back == session.events


def test_recompute_metrics_matches_live(policy):
    target = np.array([0.15, 0.25, -0.10])
    session, t_end = drive_discrete(policy, target)
    live = session.metrics(now=t_end)
    replayed = recompute_metrics(session.events)
    assert replayed["n_commands"] == live.n_commands
    assert replayed["guide_time"] == pytest.approx(live.guide_time)
    assert replayed["success"] == live.success


def test_recompute_metrics_validates_transcript(policy):
    session, _ = drive_discrete(policy, np.array([0.0, 0.3048, 0.0]))
    events = list(session.events)
    with pytest.raises(ValueError):
        recompute_metrics(events[1:])  # overview missing
    with pytest.raises(ValueError):
        recompute_metrics(events[::-1])  # time disorder


def test_bad_mode_rejected():
    with pytest.raises(ValueError):
        GuidanceSession("verbal", (0, 0, 0))
    with pytest.raises(ValueError):
        GuidanceSession("discrete", (0, 0, 0))  # needs a policy
