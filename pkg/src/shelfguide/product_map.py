"""Persistent product-instance map built from detection streams.

Each instance is a point in (x_g, y_g, z_g, w, h): world position of the
bounding-box center plus metric box size. Observations that match the
target feature are associated to the nearest instance by normalized
squared distance, instance state is the exact rolling mean over a bounded
window, and instances decay by lazy deletion (too few sightings after a
probation period, or not seen within a TTL).
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSamples, MalformedRow, ZeroVector

SIMILARITY_THRESHOLD = 0.6
CHI2_GATE_5DOF_95 = 11.07


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError(f"vectors must share a nonzero 1-D shape, got {a.shape} and {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity undefined for a zero vector")
    return float(np.dot(a, b) / (na * nb))


def foreground_depth(depth_samples, max_iter: int = 100, tol: float = 1e-6,
                     min_separation: float = 0.05) -> float:
    """Two-component 1-D GMM split of a depth patch; returns the nearer
    component's mean, or the overall median when the fit is unimodal."""
    x = np.asarray(depth_samples, float).ravel()
    if x.size < 8:
        raise InsufficientSamples(f"need at least 8 depth samples, got {x.size}")
    mu = np.percentile(x, [25.0, 75.0]).astype(float)
    var = np.full(2, max(np.var(x) / 4.0, 1e-8))
    pi = np.array([0.5, 0.5])
    prev_ll = -np.inf
    for _ in range(max_iter):
        # E step: responsibilities under the current Gaussians
        log_p = (-0.5 * (x[:, None] - mu) ** 2 / var
                 - 0.5 * np.log(2.0 * np.pi * var) + np.log(pi))
        log_norm = np.logaddexp(log_p[:, 0], log_p[:, 1])
        ll = float(log_norm.sum())
        r = np.exp(log_p - log_norm[:, None])
        # M step
        nk = r.sum(axis=0) + 1e-12
        mu = (r * x[:, None]).sum(axis=0) / nk
        var = (r * (x[:, None] - mu) ** 2).sum(axis=0) / nk
        var = np.maximum(var, 1e-8)
        pi = nk / x.size
        if abs(ll - prev_ll) < tol:
            break
        prev_ll = ll
    if abs(mu[0] - mu[1]) < min_separation:
        return float(np.median(x))
    return float(mu.min())


def quat_rotate(q, v):
    """Rotate 3-vector v by unit quaternion q = [w, x, y, z]."""
    w, x, y, z = (float(c) for c in q)
    u = np.array([x, y, z])
    v = np.asarray(v, float)
    return v + 2.0 * np.cross(u, np.cross(u, v) + w * v)


@dataclass(frozen=True)
class CameraPose:
    position: tuple[float, float, float]
    quaternion: tuple[float, float, float, float]  # [w, x, y, z], unit

    def __post_init__(self):
        norm = math.sqrt(sum(c * c for c in self.quaternion))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"quaternion norm {norm} is not 1 within 1e-6")

    def to_world(self, point_cam):
        return quat_rotate(self.quaternion, point_cam) + np.asarray(self.position, float)


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float


def back_project(bbox, depth: float, intrinsics: Intrinsics,
                 camera_pose: CameraPose) -> tuple[float, float, float, float, float]:
    """Pinhole back-projection of a bbox at a known depth to (x_g, y_g, z_g, w, h)."""
    if depth <= 0:
        raise ValueError(f"depth must be positive, got {depth}")
    u_min, v_min, u_max, v_max = (float(c) for c in bbox)
    u = 0.5 * (u_min + u_max)
    v = 0.5 * (v_min + v_max)
    cam = np.array([(u - intrinsics.cx) * depth / intrinsics.fx,
                    (v - intrinsics.cy) * depth / intrinsics.fy,
                    depth])
    world = camera_pose.to_world(cam)
    w = depth * (u_max - u_min) / intrinsics.fx
    h = depth * (v_max - v_min) / intrinsics.fy
    return (float(world[0]), float(world[1]), float(world[2]), w, h)


@dataclass(frozen=True)
class Detection:
    bbox: tuple[float, float, float, float]  # u_min, v_min, u_max, v_max
    depth_samples: tuple[float, ...]
    feature: tuple[float, ...] | None = None
    similarity: float | None = None

    def __post_init__(self):
        u_min, v_min, u_max, v_max = self.bbox
        if not (u_min < u_max and v_min < v_max):
            raise ValueError(f"bbox not well ordered: {self.bbox}")
        if len(self.depth_samples) == 0:
            raise ValueError("depth_samples must be non-empty")
        if self.feature is None and self.similarity is None:
            raise ValueError("detection needs a feature vector or a similarity")


@dataclass(frozen=True)
class DetectionFrame:
    t: float
    camera_pose: CameraPose
    intrinsics: Intrinsics
    detections: tuple[Detection, ...]


def frame_from_dict(d: dict) -> DetectionFrame:
    try:
        pose = CameraPose(position=tuple(d["camera_pose"]["position"]),
                          quaternion=tuple(d["camera_pose"]["quaternion"]))
        intr = Intrinsics(**{k: float(d["intrinsics"][k]) for k in ("fx", "fy", "cx", "cy")})
        dets = tuple(Detection(
            bbox=tuple(det["bbox"]),
            depth_samples=tuple(det["depth_samples"]),
            feature=tuple(det["feature"]) if det.get("feature") is not None else None,
            similarity=det.get("similarity"),
        ) for det in d["detections"])
        return DetectionFrame(t=float(d["t"]), camera_pose=pose,
                              intrinsics=intr, detections=dets)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRow(f"bad detection frame: {exc}") from exc


def frame_to_dict(frame: DetectionFrame) -> dict:
    return {
        "t": frame.t,
        "camera_pose": {"position": list(frame.camera_pose.position),
                        "quaternion": list(frame.camera_pose.quaternion)},
        "intrinsics": {"fx": frame.intrinsics.fx, "fy": frame.intrinsics.fy,
                       "cx": frame.intrinsics.cx, "cy": frame.intrinsics.cy},
        "detections": [
            {"bbox": list(det.bbox),
             "depth_samples": list(det.depth_samples),
             **({"feature": list(det.feature)} if det.feature is not None else {}),
             **({"similarity": det.similarity} if det.similarity is not None else {})}
            for det in frame.detections
        ],
    }


def read_frames_jsonl(text: str) -> list[DetectionFrame]:
    frames = []
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            frames.append(frame_from_dict(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise MalformedRow(f"line {i + 1}: invalid JSON: {exc}") from exc
    return frames


@dataclass
class ProductInstance:
    id: int
    created_at: float
    last_seen: float
    total_sightings: int
    sightings: deque  # of (t, 5-vector obs, similarity), maxlen = window

    def _obs(self) -> np.ndarray:
        return np.array([s[1] for s in self.sightings], float)

    @property
    def state(self) -> np.ndarray:
        """Exact mean of the windowed observations: (x_g, y_g, z_g, w, h)."""
        return self._obs().mean(axis=0)

    @property
    def rolling_similarity(self) -> float:
        return float(np.mean([s[2] for s in self.sightings]))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "created_at": self.created_at,
            "last_seen": self.last_seen,
            "total_sightings": self.total_sightings,
            "state": [float(v) for v in self.state],
            "rolling_similarity": self.rolling_similarity,
            "sightings": [[t, [float(v) for v in obs], sim]
                          for t, obs, sim in self.sightings],
        }


class ProductMap:
    """Single-writer instance map; ingest and prune must not be called
    concurrently, snapshots may be taken between frames."""

    def __init__(self, similarity_threshold: float = SIMILARITY_THRESHOLD,
                 sigma_pos: float = 0.03, sigma_size: float = 0.02,
                 gate: float = CHI2_GATE_5DOF_95, window: int = 10,
                 min_sightings: int = 3, probation: float = 2.0, ttl: float = 5.0):
        self.similarity_threshold = similarity_threshold
        self.sigma = np.array([sigma_pos] * 3 + [sigma_size] * 2)
        self.gate = gate
        self.window = window
        self.min_sightings = min_sightings
        self.probation = probation
        self.ttl = ttl
        self.instances: dict[int, ProductInstance] = {}
        self._next_id = 0

    def associate(self, observation, similarity: float, t: float) -> int:
        obs = np.asarray(observation, float)
        if obs.shape != (5,):
            raise ValueError(f"observation must be a 5-vector, got shape {obs.shape}")
        best_id, best_d2 = None, self.gate
        for inst in self.instances.values():
            diff = (obs - inst.state) / self.sigma
            d2 = float(np.dot(diff, diff))
            if d2 < best_d2:
                best_id, best_d2 = inst.id, d2
        if best_id is None:
            inst = ProductInstance(id=self._next_id, created_at=t, last_seen=t,
                                   total_sightings=1,
                                   sightings=deque(maxlen=self.window))
            inst.sightings.append((t, tuple(float(v) for v in obs), float(similarity)))
            self.instances[inst.id] = inst
            self._next_id += 1
            return inst.id
        inst = self.instances[best_id]
        inst.sightings.append((t, tuple(float(v) for v in obs), float(similarity)))
        inst.last_seen = t
        inst.total_sightings += 1
        return best_id

    def prune(self, now: float) -> list[int]:
        removed = []
        for iid, inst in list(self.instances.items()):
            sparse = (inst.total_sightings < self.min_sightings
                      and now - inst.created_at > self.probation)
            stale = now - inst.last_seen > self.ttl
            if sparse or stale:
                removed.append(iid)
                del self.instances[iid]
        return removed

    def ingest(self, frame: DetectionFrame, target_feature=None) -> list[dict]:
        """Process one frame; returns per-detection diagnostics for skipped
        detections. A bad detection never aborts the frame."""
        diagnostics = []
        for i, det in enumerate(frame.detections):
            try:
                if det.similarity is not None:
                    sim = float(det.similarity)
                elif target_feature is not None:
                    sim = cosine_similarity(det.feature, target_feature)
                else:
                    raise ValueError("no similarity and no target feature")
                if sim < self.similarity_threshold:
                    diagnostics.append({"detection": i, "skipped": "below_threshold",
                                        "similarity": sim})
                    continue
                depth = foreground_depth(det.depth_samples)
                obs = back_project(det.bbox, depth, frame.intrinsics,
                                   frame.camera_pose)
                self.associate(obs, sim, frame.t)
            except (InsufficientSamples, ZeroVector, ValueError) as exc:
                diagnostics.append({"detection": i, "skipped": "error",
                                    "reason": str(exc)})
        self.prune(frame.t)
        return diagnostics

    def snapshot(self) -> dict:
        return {
            "similarity_threshold": self.similarity_threshold,
            "sigma_pos": float(self.sigma[0]),
            "sigma_size": float(self.sigma[3]),
            "gate": self.gate,
            "window": self.window,
            "min_sightings": self.min_sightings,
            "probation": self.probation,
            "ttl": self.ttl,
            "instances": [inst.to_dict() for inst in self.instances.values()],
        }


def snapshot_instances(snapshot: dict) -> list[ProductInstance]:
    """Rebuild instances from an exported snapshot for offline scoring."""
    out = []
    for d in snapshot["instances"]:
        inst = ProductInstance(
            id=int(d["id"]), created_at=float(d["created_at"]),
            last_seen=float(d["last_seen"]),
            total_sightings=int(d["total_sightings"]),
            sightings=deque(
                ((float(t), tuple(obs), float(sim)) for t, obs, sim in d["sightings"]),
                maxlen=int(snapshot.get("window", 10))))
        out.append(inst)
    return out


def load_target_descriptor(path) -> np.ndarray:
    """Target descriptor file: JSON object with a "feature" vector."""
    with open(path) as fh:
        d = json.load(fh)
    if "feature" not in d:
        raise MalformedRow(f"{path}: target descriptor needs a 'feature' field")
    return np.asarray(d["feature"], float)
