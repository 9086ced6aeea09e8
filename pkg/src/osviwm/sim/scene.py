"""Scene configurations and rejection sampling.

A scene is sampled from (family, seed) only, never from the specific
task: push-forward and push-backward of the same seed share a scene
bit-for-bit, and every pickplace task draws from one layout
distribution, so train and test scenes are distributionally identical.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..util import seed_from
from . import geometry as geo

# visual identity per object id, fixed across scenes
PICK_OBJECT_SHAPES = ("disk", "square", "triangle", "diamond")
PICK_OBJECT_COLORS = ((224, 50, 44), (52, 196, 74), (58, 92, 232), (238, 204, 46))
PAD_COLORS = ((240, 142, 32), (162, 62, 204), (34, 182, 176), (232, 232, 232))
PUSH_OBJECT_SHAPES = ("square", "square")
PUSH_OBJECT_COLORS = ((58, 92, 232), (52, 196, 74))

# sampling boxes (xmin, xmax, ymin, ymax)
PICK_OBJ_BOX = (-0.26, -0.07, -0.18, 0.08)
PICK_PAD_BOX = (0.07, 0.26, -0.18, 0.08)
PUSH_BOX = (-0.18, 0.18, -0.14, 0.0)

MIN_OBJ_SEP = 0.10
MIN_PAD_SEP = 0.11
MIN_PUSH_XSEP = 0.13
BASE_DIST_RANGE = (0.10, 0.40)

_MAX_SCENE_TRIES = 200
_MAX_POINT_TRIES = 200


@dataclass(frozen=True)
class SceneConfig:
    family: str
    object_xy: tuple          # ((x, y), ...) object centres
    pad_xy: tuple             # target pad centres, () for push
    arm_base: tuple
    seed: int
    object_shapes: tuple = field(default=())
    object_colors: tuple = field(default=())
    pad_colors: tuple = field(default=())


def _dist(a, b):
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def _sample_point(rng, box, base, placed, min_sep, extra_ok=None):
    xmin, xmax, ymin, ymax = box
    lo, hi = BASE_DIST_RANGE
    for _ in range(_MAX_POINT_TRIES):
        p = (float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
        if not lo <= _dist(p, base) <= hi:
            continue
        if any(_dist(p, q) < min_sep for q in placed):
            continue
        if extra_ok is not None and not extra_ok(p):
            continue
        return p
    return None


def _push_clearance(p, base):
    # both push directions must keep the EE approach, the detour corners,
    # and the displaced object reachable; |x| margin keeps the approach
    # path clear of the arm base
    if abs(p[0]) < 0.035:
        return False
    for dy in (-0.12, 0.12):
        q = (p[0], p[1] + dy)
        if not 0.06 <= _dist(q, base) <= BASE_DIST_RANGE[1]:
            return False
    for sx in (-0.085, 0.085):
        for dy in (-0.11, 0.085, 0.11):
            q = (p[0] + sx, p[1] + dy)
            if not 0.04 <= _dist(q, base) <= BASE_DIST_RANGE[1]:
                return False
    return True


def sample_scene(task, seed):
    """Deterministic scene for (task.family, seed); task ids share layouts."""
    family = task.family if hasattr(task, "family") else str(task)
    rng = np.random.default_rng(seed_from("scene", family, seed))
    base = geo.ARM_BASE
    for _ in range(_MAX_SCENE_TRIES):
        if family == "pickplace":
            objs, pads = [], []
            ok = True
            for _ in range(4):
                p = _sample_point(rng, PICK_OBJ_BOX, base, objs, MIN_OBJ_SEP)
                if p is None:
                    ok = False
                    break
                objs.append(p)
            if not ok:
                continue
            for _ in range(4):
                p = _sample_point(rng, PICK_PAD_BOX, base, pads, MIN_PAD_SEP)
                if p is None:
                    ok = False
                    break
                pads.append(p)
            if not ok:
                continue
            return SceneConfig(
                family=family, object_xy=tuple(objs), pad_xy=tuple(pads),
                arm_base=base, seed=int(seed),
                object_shapes=PICK_OBJECT_SHAPES, object_colors=PICK_OBJECT_COLORS,
                pad_colors=PAD_COLORS)
        elif family == "push":
            objs = []
            ok = True
            for _ in range(2):
                p = _sample_point(
                    rng, PUSH_BOX, base, objs, MIN_PUSH_XSEP,
                    extra_ok=lambda q: _push_clearance(q, base)
                    and all(abs(q[0] - o[0]) >= MIN_PUSH_XSEP for o in objs))
                if p is None:
                    ok = False
                    break
                objs.append(p)
            if not ok:
                continue
            return SceneConfig(
                family=family, object_xy=tuple(objs), pad_xy=(),
                arm_base=base, seed=int(seed),
                object_shapes=PUSH_OBJECT_SHAPES, object_colors=PUSH_OBJECT_COLORS,
                pad_colors=())
        else:
            raise ValueError(f"unknown family {family!r}")
    raise RuntimeError(f"scene sampling failed after {_MAX_SCENE_TRIES} tries (family={family}, seed={seed})")


def scene_to_dict(scene):
    return {
        "family": scene.family,
        "object_xy": [list(p) for p in scene.object_xy],
        "pad_xy": [list(p) for p in scene.pad_xy],
        "arm_base": list(scene.arm_base),
        "seed": scene.seed,
        "object_shapes": list(scene.object_shapes),
        "object_colors": [list(c) for c in scene.object_colors],
        "pad_colors": [list(c) for c in scene.pad_colors],
    }


def scene_from_dict(d):
    return SceneConfig(
        family=d["family"],
        object_xy=tuple(tuple(p) for p in d["object_xy"]),
        pad_xy=tuple(tuple(p) for p in d["pad_xy"]),
        arm_base=tuple(d["arm_base"]),
        seed=int(d["seed"]),
        object_shapes=tuple(d["object_shapes"]),
        object_colors=tuple(tuple(c) for c in d["object_colors"]),
        pad_colors=tuple(tuple(c) for c in d["pad_colors"]),
    )
