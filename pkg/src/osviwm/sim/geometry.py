"""World geometry constants for the planar tabletop.

The camera sees a square of half-width VIEW_HALF metres rendered to
IMG_SIZE pixels, so one pixel is one centimetre. World x grows right,
world y grows up; pixel row 0 is the top of the image.
"""
from __future__ import annotations

import numpy as np

IMG_SIZE = 64
VIEW_HALF = 0.32
M_PER_PX = 2 * VIEW_HALF / IMG_SIZE  # 0.01

ARM_BASE = (0.0, -0.22)
HOME_EE = (0.0, 0.06)

STEP = 0.01              # waypoint-controller interpolation step
GRASP_RADIUS = 0.02      # closing this near an object's centre attaches it
TARGET_RADIUS = 0.03     # pickplace success radius around the pad centre
PUSH_DELTA = 0.08        # scripted push displacement
PUSH_MIN_DISP = 0.05     # success threshold along the demonstrated direction
PUSH_MAX_LATERAL = 0.02
PUSH_HALF = 0.04         # push objects are axis-aligned squares of this half-side
EE_RADIUS = 0.01
PICK_OBJ_RADIUS = 0.04
PAD_RADIUS = 0.05

# minimum EE distance to the task object that counts as "reached"
REACH_EPS = {"pickplace": 0.03, "push": PUSH_HALF + EE_RADIUS + 0.03}


def world_to_px(x, y):
    """World metres -> (row, col) pixel indices (float, unclamped)."""
    col = (x + VIEW_HALF) / M_PER_PX - 0.5
    row = (VIEW_HALF - y) / M_PER_PX - 0.5
    return row, col


def px_grid():
    """(row, col) -> world coordinate grids for the full image."""
    cols = np.arange(IMG_SIZE)
    rows = np.arange(IMG_SIZE)
    xs = -VIEW_HALF + (cols + 0.5) * M_PER_PX
    ys = VIEW_HALF - (rows + 0.5) * M_PER_PX
    return np.meshgrid(xs, ys)  # XS[r,c], YS[r,c]


def normalize_xy(xy):
    """Map world metres to the [-1, 1] view square."""
    return np.asarray(xy, dtype=np.float64) / VIEW_HALF


def denormalize_xy(xy):
    return np.asarray(xy, dtype=np.float64) * VIEW_HALF
