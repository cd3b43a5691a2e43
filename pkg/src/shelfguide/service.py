"""Live guidance service: one session per socket connection.

Wire protocol (text frames, one JSON object per frame), version 1.

Client to server:
  hello  {"type": "hello", "version": 1, "mode": "discrete"|"continuous",
          "target": [x, y, z]?, "seed": int?}
  pose   {"type": "pose", "t": seconds, "x": m, "y": m, "z": m}
  reset  {"type": "reset"}

Server to client:
  scene   {"type": "scene", "target": [x, y, z],
           "workspace": {"extent": m, "resolution": m},
           "distractors": [[x, y, z, w, h], ...]}
  event   {"type": "event", "event": SessionEvent}
  metrics {"type": "metrics", "metrics": SessionMetrics, "events": [...]}
  error   {"type": "error", "message": str}

Pose timestamps must be strictly increasing; violations are protocol
errors and close the connection. Idle for 60 s also closes it.
"""
from __future__ import annotations

import asyncio
import json
import math

import numpy as np
# imported at module scope so the string annotations from __future__
# annotations stay resolvable when the route signature is inspected
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .continuous import ContinuousPlanner
from .reach_mdp.policy import ReachPolicy
from .session import GuidanceSession, SessionConfig

PROTOCOL_VERSION = 1
IDLE_TIMEOUT = 60.0
WORKSPACE_EXTENT = 0.8


class ProtocolError(Exception):
    pass


def make_scene(target=None, seed=None, distractor_grid=(3, 2),
               spacing: float = 0.15) -> dict:
    """Target pose plus a shelf-plane grid of distractor instances."""
    if target is None:
        rng = np.random.default_rng(seed if seed is not None else 0)
        mags = rng.uniform(0.1, 0.6, 3)
        signs = rng.choice([-1.0, 1.0], 3)
        target = [float(v) for v in np.clip(mags * signs,
                                            -WORKSPACE_EXTENT, WORKSPACE_EXTENT)]
    else:
        target = [float(v) for v in target]
    cols, rows = distractor_grid
    distractors = []
    for i in range(cols):
        for j in range(rows):
            x = target[0] + (i - (cols - 1) / 2) * spacing
            y = target[1] + (j - (rows - 1) / 2) * spacing
            if math.hypot(x - target[0], y - target[1]) < 1e-9:
                continue
            distractors.append([x, y, target[2], 0.08, 0.12])
    return {
        "target": target,
        "workspace": {"extent": WORKSPACE_EXTENT, "resolution": 0.05},
        "distractors": distractors,
    }


class PoseTraceRunner:
    """Feeds a pose stream through one guidance session. The socket handler
    and offline trace replay share this so transport cannot change the
    emitted event sequence."""

    def __init__(self, mode: str, target, policy: ReachPolicy,
                 config: SessionConfig | None = None):
        self.config = config or SessionConfig()
        self.session = GuidanceSession(
            mode, target, policy=policy,
            planner=ContinuousPlanner(ready_speed=self.config.ready_speed),
            config=self.config)
        self._last: tuple[float, np.ndarray] | None = None

    @property
    def done(self) -> bool:
        return self.session.done

    def feed(self, t: float, x: float, y: float, z: float):
        """Process one pose sample; returns the emitted event or None."""
        pose = np.array([x, y, z], float)
        if self._last is not None:
            last_t, last_pose = self._last
            if t <= last_t:
                raise ProtocolError(
                    f"pose timestamps must be strictly increasing "
                    f"({t} after {last_t})")
            speed = float(np.linalg.norm(pose - last_pose)) / (t - last_t)
        else:
            speed = 0.0
        self._last = (t, pose)
        if self.session.done:
            return None
        return self.session.step(pose, speed, t)

    def run(self, trace):
        """Replay a (t, x, y, z) iterable; returns the full event list."""
        events = []
        for t, x, y, z in trace:
            ev = self.feed(t, x, y, z)
            if ev is not None:
                events.append(ev)
            if self.done:
                break
        return events

    def metrics(self, now: float | None = None):
        return self.session.metrics(now=now)


def create_app(policy: ReachPolicy, config: SessionConfig | None = None,
               frontend_dir=None):
    app = FastAPI()
    config = config or SessionConfig()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        runner: PoseTraceRunner | None = None
        hello: dict | None = None

        async def fail(message: str):
            await ws.send_text(json.dumps({"type": "error", "message": message}))
            await ws.close()

        def start_session(msg: dict) -> dict:
            nonlocal runner, hello
            hello = msg
            scene = make_scene(msg.get("target"), msg.get("seed"))
            runner = PoseTraceRunner(msg["mode"], scene["target"], policy, config)
            scene_msg = dict(scene)
            scene_msg["type"] = "scene"
            return scene_msg

        try:
            while True:
                try:
                    raw = await asyncio.wait_for(ws.receive_text(),
                                                 timeout=IDLE_TIMEOUT)
                except asyncio.TimeoutError:
                    await fail("idle timeout")
                    return
                try:
                    msg = json.loads(raw)
                    kind = msg["type"]
                except (json.JSONDecodeError, KeyError, TypeError):
                    await fail("malformed message")
                    return
                if kind == "hello":
                    if msg.get("version") != PROTOCOL_VERSION:
                        await fail(f"unsupported protocol version "
                                   f"{msg.get('version')}")
                        return
                    if msg.get("mode") not in ("discrete", "continuous"):
                        await fail(f"unknown mode {msg.get('mode')!r}")
                        return
                    await ws.send_text(json.dumps(start_session(msg)))
                elif kind == "reset":
                    if hello is None:
                        await fail("reset before hello")
                        return
                    await ws.send_text(json.dumps(start_session(hello)))
                elif kind == "pose":
                    if runner is None:
                        await fail("pose before hello")
                        return
                    try:
                        event = runner.feed(float(msg["t"]), float(msg["x"]),
                                            float(msg["y"]), float(msg["z"]))
                    except (ProtocolError, KeyError, TypeError, ValueError) as exc:
                        await fail(f"protocol violation: {exc}")
                        return
                    if event is not None:
                        await ws.send_text(json.dumps(
                            {"type": "event", "event": event.to_dict()}))
                        if event.kind == "done":
                            await ws.send_text(json.dumps({
                                "type": "metrics",
                                "metrics": runner.metrics().to_dict(),
                                "events": [e.to_dict()
                                           for e in runner.session.events],
                            }))
                else:
                    await fail(f"unknown message type {kind!r}")
                    return
        except WebSocketDisconnect:
            return

    if frontend_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=frontend_dir, html=True),
                  name="frontend")
    return app
