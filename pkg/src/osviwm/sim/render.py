"""Deterministic numpy rasterizer for 64x64 tabletop observations."""
from __future__ import annotations

import numpy as np

from . import geometry as geo
from .arm import fk_2link, ik_2link

TABLE_COLOR = (58, 58, 66)
JOINT_COLOR = (120, 120, 128)

_XS, _YS = geo.px_grid()


def _disk_mask(cx, cy, r):
    return (_XS - cx) ** 2 + (_YS - cy) ** 2 <= r * r


def _square_mask(cx, cy, half):
    return np.maximum(np.abs(_XS - cx), np.abs(_YS - cy)) <= half


def _triangle_mask(cx, cy, half):
    dx = np.abs(_XS - cx)
    dy = _YS - cy
    return (dy >= -half) & (dy <= half - 2.2 * dx)


def _diamond_mask(cx, cy, half):
    return np.abs(_XS - cx) + np.abs(_YS - cy) <= 1.25 * half


def _segment_mask(a, b, width):
    ax, ay = a
    bx, by = b
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    if L2 < 1e-12:
        return _disk_mask(ax, ay, width)
    t = np.clip(((_XS - ax) * vx + (_YS - ay) * vy) / L2, 0.0, 1.0)
    px = ax + t * vx
    py = ay + t * vy
    return (_XS - px) ** 2 + (_YS - py) ** 2 <= width * width

_SHAPES = {
    "disk": lambda cx, cy, half: _disk_mask(cx, cy, half),
    "square": _square_mask,
    "triangle": _triangle_mask,
    "diamond": _diamond_mask,
}


def _paint(img, mask, color):
    img[mask] = color


def render(scene, arm, joints, gripper, object_xy=None, attached=None):
    """Rasterize one observation.

    object_xy overrides the scene's object centres (they move during a
    rollout); an attached object is drawn at the end-effector.
    """
    img = np.empty((geo.IMG_SIZE, geo.IMG_SIZE, 3), dtype=np.uint8)
    img[:] = TABLE_COLOR

    for pos, color in zip(scene.pad_xy, scene.pad_colors):
        _paint(img, _disk_mask(pos[0], pos[1], geo.PAD_RADIUS), color)

    positions = scene.object_xy if object_xy is None else object_xy
    half = geo.PUSH_HALF if scene.family == "push" else geo.PICK_OBJ_RADIUS
    elbow, ee = fk_2link(arm, joints[0], joints[1])
    for i, (pos, shape, color) in enumerate(zip(positions, scene.object_shapes, scene.object_colors)):
        cx, cy = (ee if attached == i else pos)
        _paint(img, _SHAPES[shape](cx, cy, half), color)

    st = arm.style
    _paint(img, _segment_mask(arm.base, elbow, st.link_width), st.link_color)
    _paint(img, _segment_mask(elbow, ee, st.link_width), st.link_color)
    _paint(img, _disk_mask(arm.base[0], arm.base[1], 0.016), JOINT_COLOR)
    _paint(img, _disk_mask(elbow[0], elbow[1], 0.012), JOINT_COLOR)

    if gripper:  # closed: small filled tip
        _paint(img, _disk_mask(ee[0], ee[1], 0.020), st.tip_color)
    else:  # open: ring
        ring = _disk_mask(ee[0], ee[1], 0.028) & ~_disk_mask(ee[0], ee[1], 0.012)
        _paint(img, ring, st.tip_color)
    return img


def render_at_ee(scene, arm, ee_pos, gripper, object_xy=None, attached=None):
    """Convenience wrapper: solve IK for the EE position, then render."""
    joints = ik_2link(ee_pos, arm)
    return render(scene, arm, joints, gripper, object_xy=object_xy, attached=attached)


def locate_color(img, color, tol=60.0):
    """(row, col) of the pixel closest to ``color``, or None if far off.

    Used to localize the end-effector tip in decoded images.
    """
    d = np.linalg.norm(img.astype(np.float64) - np.asarray(color, dtype=np.float64), axis=-1)
    idx = np.unravel_index(np.argmin(d), d.shape)
    if d[idx] > tol:
        return None
    return int(idx[0]), int(idx[1])
