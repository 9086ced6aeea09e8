"""Two-link planar arm: forward/inverse kinematics and embodiment styles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo


class ReachabilityError(ValueError):
    pass


@dataclass(frozen=True)
class ArmStyle:
    link_color: tuple
    link_width: float
    tip_color: tuple


EXPERT_STYLE = ArmStyle(link_color=(185, 45, 35), link_width=0.014, tip_color=(40, 230, 230))
AGENT_STYLE = ArmStyle(link_color=(205, 205, 212), link_width=0.010, tip_color=(255, 40, 235))


@dataclass(frozen=True)
class ArmModel:
    l1: float
    l2: float
    base: tuple
    style: ArmStyle

    def __post_init__(self):
        if self.l1 <= 0 or self.l2 <= 0:
            raise ValueError("link lengths must be positive")

    @property
    def r_min(self):
        return abs(self.l1 - self.l2)

    @property
    def r_max(self):
        return self.l1 + self.l2


def expert_arm(base=geo.ARM_BASE):
    return ArmModel(0.22, 0.20, tuple(base), EXPERT_STYLE)


def agent_arm(base=geo.ARM_BASE):
    return ArmModel(0.21, 0.21, tuple(base), AGENT_STYLE)


def arm_for_role(role, base=geo.ARM_BASE):
    return expert_arm(base) if role == "expert" else agent_arm(base)


def fk_2link(arm, theta1, theta2):
    """Joint angles -> (elbow, end-effector) world positions."""
    bx, by = arm.base
    ex = bx + arm.l1 * np.cos(theta1)
    ey = by + arm.l1 * np.sin(theta1)
    tx = ex + arm.l2 * np.cos(theta1 + theta2)
    ty = ey + arm.l2 * np.sin(theta1 + theta2)
    return (ex, ey), (tx, ty)


def reachable(arm, target, slack=0.0):
    dx = target[0] - arm.base[0]
    dy = target[1] - arm.base[1]
    r = np.hypot(dx, dy)
    return arm.r_min - slack <= r <= arm.r_max + slack


def ik_2link(target, arm):
    """Elbow-down inverse kinematics for a 2-link arm.

    Raises ReachabilityError outside the annulus |l1-l2| <= r <= l1+l2.
    """
    dx = target[0] - arm.base[0]
    dy = target[1] - arm.base[1]
    r2 = dx * dx + dy * dy
    r = np.sqrt(r2)
    if r > arm.r_max + 1e-12 or r < arm.r_min - 1e-12:
        raise ReachabilityError(
            f"target {tuple(np.round(target, 4))} at radius {r:.4f} outside "
            f"[{arm.r_min:.4f}, {arm.r_max:.4f}]")
    c2 = (r2 - arm.l1 ** 2 - arm.l2 ** 2) / (2.0 * arm.l1 * arm.l2)
    c2 = np.clip(c2, -1.0, 1.0)
    theta2 = np.arccos(c2)  # elbow-down branch
    theta1 = np.arctan2(dy, dx) - np.arctan2(arm.l2 * np.sin(theta2), arm.l1 + arm.l2 * np.cos(theta2))
    return float(theta1), float(theta2)
