"""Verbal command vocabulary and the per-command Gaussian hand-movement model.

World frame convention (shared by the whole toolkit): +x right, +y up,
+z toward the shelf. A command direction maps to a signed unit axis; the
movement scalar is positive when the hand moves in the commanded direction.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset, MalformedRow, UnknownCommand

MODEL_FORMAT_VERSION = 1

INCH = 0.0254
DEFAULT_MAGNITUDES_INCHES = (1, 2, 3, 6, 9, 12)

DIRECTIONS = ("left", "right", "up", "down", "forward", "backward")

# axis index into (x, y, z) world vectors
AXIS_OF_DIRECTION = {
    "left": 0, "right": 0,
    "up": 1, "down": 1,
    "forward": 2, "backward": 2,
}
SIGN_OF_DIRECTION = {
    "left": -1.0, "right": 1.0,
    "up": 1.0, "down": -1.0,
    "forward": 1.0, "backward": -1.0,
}
# axis groups as used by the guidance ordering: vertical -> horizontal -> depth
GROUP_OF_DIRECTION = {
    "left": "horizontal", "right": "horizontal",
    "up": "vertical", "down": "vertical",
    "forward": "depth", "backward": "depth",
}

SIGMA_FLOOR = 0.005  # meters; avoids degenerate deterministic transitions


@dataclass(frozen=True)
class CommandSpec:
    id: int
    direction: str
    nominal_magnitude: float  # meters
    utterance: str


@dataclass(frozen=True)
class MovementGaussian:
    command_id: int
    mu: float      # signed displacement mean along the command axis, meters
    sigma: float   # standard deviation, meters
    sample_count: int  # 0 marks a synthetic-default fallback entry


@dataclass(frozen=True)
class CommandModel:
    commands: tuple[CommandSpec, ...]
    gaussians: tuple[MovementGaussian, ...]
    provenance: str  # "fitted" | "synthetic_default"

    def __post_init__(self):
        if len(self.commands) != len(self.gaussians):
            raise ValueError("one gaussian per command required")
        for i, (c, g) in enumerate(zip(self.commands, self.gaussians)):
            if c.id != i or g.command_id != i:
                raise ValueError("command ids must be dense 0..n-1 and aligned")

    @property
    def n_commands(self) -> int:
        return len(self.commands)

    def spec(self, command_id: int) -> CommandSpec:
        if not 0 <= command_id < len(self.commands):
            raise UnknownCommand(f"command id {command_id}")
        return self.commands[command_id]

    def gaussian(self, command_id: int) -> MovementGaussian:
        if not 0 <= command_id < len(self.gaussians):
            raise UnknownCommand(f"command id {command_id}")
        return self.gaussians[command_id]


def _utterance(direction: str, inches: int) -> str:
    unit = "inch" if inches == 1 else "inches"
    if direction in ("left", "right"):
        return f"Move {inches} {unit} to the {direction}"
    return f"Move {inches} {unit} {direction}"


def default_vocabulary() -> list[CommandSpec]:
    """36 commands: 6 directions x magnitudes {1,2,3,6,9,12} inches."""
    specs = []
    for di, direction in enumerate(DIRECTIONS):
        for mi, inches in enumerate(DEFAULT_MAGNITUDES_INCHES):
            specs.append(CommandSpec(
                id=di * len(DEFAULT_MAGNITUDES_INCHES) + mi,
                direction=direction,
                nominal_magnitude=inches * INCH,
                utterance=_utterance(direction, inches),
            ))
    return specs


def synthetic_default_model(vocabulary: list[CommandSpec] | None = None) -> CommandModel:
    """Model usable without demonstration data: mu = nominal magnitude,
    sigma = max(0.01, 0.2 * nominal magnitude)."""
    vocab = tuple(vocabulary if vocabulary is not None else default_vocabulary())
    gaussians = tuple(
        MovementGaussian(
            command_id=c.id,
            mu=c.nominal_magnitude,
            sigma=max(0.01, 0.2 * c.nominal_magnitude),
            sample_count=0,
        )
        for c in vocab
    )
    return CommandModel(commands=vocab, gaussians=gaussians, provenance="synthetic_default")


def _synthetic_gaussian(spec: CommandSpec) -> MovementGaussian:
    return MovementGaussian(
        command_id=spec.id,
        mu=spec.nominal_magnitude,
        sigma=max(0.01, 0.2 * spec.nominal_magnitude),
        sample_count=0,
    )


def fit(demos, vocabulary: list[CommandSpec] | None = None) -> CommandModel:
    """Fit per-command Gaussians from (command_id, displacement 3-vector) rows.

    The displacement is projected onto the command's signed axis direction;
    off-axis components are discarded. Commands without samples fall back to
    the synthetic default (marked by sample_count=0).
    """
    vocab = tuple(vocabulary if vocabulary is not None else default_vocabulary())
    rows = list(demos)
    if not rows:
        raise EmptyDataset("no demonstration rows")
    per_command: dict[int, list[float]] = {c.id: [] for c in vocab}
    for row in rows:
        try:
            command_id, vec = row
            command_id = int(command_id)
            dx, dy, dz = (float(v) for v in vec)
        except (TypeError, ValueError) as exc:
            raise MalformedRow(f"bad demonstration row {row!r}") from exc
        if command_id not in per_command:
            raise MalformedRow(
                f"command id {command_id} outside 0..{len(vocab) - 1}")
        spec = vocab[command_id]
        axis = AXIS_OF_DIRECTION[spec.direction]
        signed = SIGN_OF_DIRECTION[spec.direction] * (dx, dy, dz)[axis]
        per_command[command_id].append(signed)

    gaussians = []
    for spec in vocab:
        samples = per_command[spec.id]
        if not samples:
            gaussians.append(_synthetic_gaussian(spec))
            continue
        if len(samples) < 2:
            raise MalformedRow(
                f"command {spec.id} has {len(samples)} sample(s); need >= 2 or none")
        arr = np.asarray(samples)
        mu = float(arr.mean())
        sigma = float(arr.std(ddof=1))
        gaussians.append(MovementGaussian(
            command_id=spec.id,
            mu=mu,
            sigma=max(sigma, SIGMA_FLOOR),
            sample_count=len(samples),
        ))
    return CommandModel(commands=vocab, gaussians=tuple(gaussians), provenance="fitted")


def sample_movement(model: CommandModel, command_id: int, rng: np.random.Generator) -> float:
    """Draw a signed on-axis displacement (meters) for one command."""
    g = model.gaussian(command_id)
    return float(rng.normal(g.mu, g.sigma))


def read_demos_csv(path) -> list[tuple[int, tuple[float, float, float]]]:
    """CSV with header command_id,dx,dy,dz (meters, world frame)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"command_id", "dx", "dy", "dz"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise MalformedRow(
                f"expected header command_id,dx,dy,dz; got {reader.fieldnames}")
        for rec in reader:
            try:
                rows.append((
                    int(rec["command_id"]),
                    (float(rec["dx"]), float(rec["dy"]), float(rec["dz"])),
                ))
            except (TypeError, ValueError) as exc:
                raise MalformedRow(f"bad CSV row {rec!r}") from exc
    return rows


def model_to_dict(model: CommandModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "provenance": model.provenance,
        "commands": [
            {
                "id": c.id,
                "direction": c.direction,
                "nominal_magnitude_m": c.nominal_magnitude,
                "utterance": c.utterance,
            }
            for c in model.commands
        ],
        "gaussians": [
            {
                "command_id": g.command_id,
                "mu": g.mu,
                "sigma": g.sigma,
                "sample_count": g.sample_count,
            }
            for g in model.gaussians
        ],
    }


def model_from_dict(data: dict) -> CommandModel:
    if data.get("format_version") != MODEL_FORMAT_VERSION:
        raise MalformedRow(f"unsupported model format version {data.get('format_version')}")
    commands = tuple(
        CommandSpec(
            id=c["id"],
            direction=c["direction"],
            nominal_magnitude=c["nominal_magnitude_m"],
            utterance=c["utterance"],
        )
        for c in data["commands"]
    )
    gaussians = tuple(
        MovementGaussian(
            command_id=g["command_id"],
            mu=g["mu"],
            sigma=g["sigma"],
            sample_count=g["sample_count"],
        )
        for g in data["gaussians"]
    )
    return CommandModel(commands=commands, gaussians=gaussians,
                        provenance=data["provenance"])


def save_model(model: CommandModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> CommandModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def vocabulary_hash(model: CommandModel) -> str:
    """Stable digest of the vocabulary + gaussians, recorded in policy metadata."""
    canonical = json.dumps(model_to_dict(model), sort_keys=True).encode()
    return hashlib.sha256(canonical).hexdigest()
