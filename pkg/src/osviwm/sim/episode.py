"""Episode container and its on-disk format.

Binary layout: magic "OSVI", format version u16, frame count u32, state
dim u32, then raw 8-bit RGB frames (64x64x3 each), then 32-bit
little-endian float states. A JSON sidecar with the same stem carries
task, scene, role, and seed.

Dataset layout: <root>/<benchmark>/<task_id>/<role>/<idx>.{bin,json}.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import geometry as geo
from .scene import SceneConfig, scene_from_dict, scene_to_dict
from .tasks import TaskSpec

MAGIC = b"OSVI"
FORMAT_VERSION = 1


@dataclass
class Episode:
    frames: np.ndarray        # (T, 64, 64, 3) uint8
    states: np.ndarray        # (T, state_dim) float32; (x, y, gripper)
    role: str                 # "expert" | "agent"
    task: TaskSpec
    scene: SceneConfig
    seed: int

    def __post_init__(self):
        if len(self.frames) != len(self.states):
            raise ValueError("frames and states must be aligned")
        if len(self.frames) < 2:
            raise ValueError("an episode needs at least 2 frames")

    def __len__(self):
        return len(self.frames)


def task_to_dict(task):
    return {"family": task.family, "object_id": task.object_id,
            "target_id": task.target_id, "split": task.split}


def task_from_dict(d):
    return TaskSpec(d["family"], int(d["object_id"]),
                    d["target_id"] if isinstance(d["target_id"], str) else int(d["target_id"]),
                    d["split"])


def save_episode(episode, bin_path):
    bin_path = Path(bin_path)
    frames = np.ascontiguousarray(episode.frames, dtype=np.uint8)
    states = np.ascontiguousarray(episode.states, dtype="<f4")
    n, h, w, c = frames.shape
    if (h, w, c) != (geo.IMG_SIZE, geo.IMG_SIZE, 3):
        raise ValueError(f"expected {geo.IMG_SIZE}x{geo.IMG_SIZE}x3 frames, got {h}x{w}x{c}")
    header = MAGIC + struct.pack("<HII", FORMAT_VERSION, n, states.shape[1])
    bin_path.parent.mkdir(parents=True, exist_ok=True)
    with open(bin_path, "wb") as f:
        f.write(header)
        f.write(frames.tobytes())
        f.write(states.tobytes())
    sidecar = {
        "task": task_to_dict(episode.task),
        "scene": scene_to_dict(episode.scene),
        "role": episode.role,
        "seed": episode.seed,
    }
    with open(bin_path.with_suffix(".json"), "w") as f:
        json.dump(sidecar, f, indent=0, sort_keys=True)


def load_episode(bin_path):
    bin_path = Path(bin_path)
    raw = bin_path.read_bytes()
    if len(raw) < 14 or raw[:4] != MAGIC:
        raise ValueError(f"corrupt episode file {bin_path}: bad magic")
    version, n, state_dim = struct.unpack("<HII", raw[4:14])
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported episode format version {version}")
    frame_bytes = n * geo.IMG_SIZE * geo.IMG_SIZE * 3
    state_bytes = n * state_dim * 4
    if len(raw) != 14 + frame_bytes + state_bytes:
        raise ValueError(f"corrupt episode file {bin_path}: truncated payload")
    frames = np.frombuffer(raw, dtype=np.uint8, count=frame_bytes, offset=14)
    frames = frames.reshape(n, geo.IMG_SIZE, geo.IMG_SIZE, 3).copy()
    states = np.frombuffer(raw, dtype="<f4", count=n * state_dim, offset=14 + frame_bytes)
    states = states.reshape(n, state_dim).copy()
    with open(bin_path.with_suffix(".json")) as f:
        sidecar = json.load(f)
    return Episode(frames=frames, states=states, role=sidecar["role"],
                   task=task_from_dict(sidecar["task"]),
                   scene=scene_from_dict(sidecar["scene"]),
                   seed=int(sidecar["seed"]))


def episode_path(root, benchmark, task_id, role, idx):
    return Path(root) / benchmark / task_id / role / f"{idx:04d}.bin"
