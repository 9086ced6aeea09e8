"""Waypoint execution, scripted policies, and success judging.

Physics is kinematic: the end-effector moves along straight segments in
1 cm steps; closing the gripper within the grasp radius of an object
attaches it, opening detaches. Push-family objects are displaced by
square-vs-point contact resolution; pickplace objects move only while
attached.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .arm import ReachabilityError, arm_for_role, ik_2link, reachable
from .render import render
from .tasks import push_direction_vector


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float
    gripper: int

    def __post_init__(self):
        if self.gripper not in (0, 1):
            raise ValueError(f"gripper must be 0 or 1, got {self.gripper}")

    @property
    def pos(self):
        return (self.x, self.y)


@dataclass
class RolloutResult:
    success: bool
    reached_object: bool
    grasped_object: bool
    frames: list = field(default_factory=list)
    states: list = field(default_factory=list)
    final_object_xy: tuple = ()
    final_ee: tuple = (0.0, 0.0)
    final_gripper: int = 0
    skipped_waypoints: list = field(default_factory=list)
    steps: int = 0


def ik_clamped(target, arm):
    """IK with the radius clamped into the annulus.

    Rendering uses this so near-base transits degrade gracefully instead
    of failing; physics keeps the true EE point.
    """
    dx = target[0] - arm.base[0]
    dy = target[1] - arm.base[1]
    r = float(np.hypot(dx, dy))
    lo, hi = arm.r_min + 1e-9, arm.r_max - 1e-9
    if lo <= r <= hi:
        return ik_2link(target, arm)
    r_c = min(max(r, lo), hi)
    scale = r_c / max(r, 1e-12)
    clamped = (arm.base[0] + dx * scale, arm.base[1] + dy * scale)
    return ik_2link(clamped, arm)


def check_success(task, scene, final_object_xy, final_gripper, initial_object_xy=None):
    """Task-level success from simulator ground truth."""
    final_object_xy = np.asarray(final_object_xy, dtype=np.float64)
    obj = final_object_xy[task.object_id]
    if task.family == "pickplace":
        pad = np.asarray(scene.pad_xy[task.target_id])
        on_target = float(np.hypot(*(obj - pad))) <= geo.TARGET_RADIUS
        return bool(on_target and final_gripper == 0)
    if task.family == "push":
        initial = np.asarray(scene.object_xy if initial_object_xy is None else initial_object_xy,
                             dtype=np.float64)[task.object_id]
        disp = obj - initial
        d = np.asarray(push_direction_vector(task.target_id))
        along = float(disp @ d)
        lateral = float(abs(disp[0] * d[1] - disp[1] * d[0]))
        return bool(along >= geo.PUSH_MIN_DISP and lateral <= geo.PUSH_MAX_LATERAL)
    raise ValueError(f"unknown family {task.family!r}")


def _resolve_push_contact(ee, obj_xy, skip_idx):
    """Square-vs-point penetration resolution (push family only)."""
    band = geo.PUSH_HALF + geo.EE_RADIUS
    for i in range(obj_xy.shape[0]):
        if i == skip_idx:
            continue
        dx = ee[0] - obj_xy[i, 0]
        dy = ee[1] - obj_xy[i, 1]
        ox = band - abs(dx)
        oy = band - abs(dy)
        if ox > 0 and oy > 0:
            if oy <= ox:
                obj_xy[i, 1] += -oy if dy > 0 else oy
            else:
                obj_xy[i, 0] += -ox if dx > 0 else ox


def execute_waypoints(task, scene, waypoints, arm, record_frames=False, frame_stride=3,
                      init_ee=None, init_gripper=0, init_object_xy=None):
    """Drive the arm through the waypoints and judge the outcome.

    Unreachable waypoints are skipped and flagged. The gripper bit is
    applied on arrival at each waypoint.
    """
    if len(waypoints) < 1:
        raise ValueError("need at least one waypoint")
    obj = np.array(scene.object_xy if init_object_xy is None else init_object_xy, dtype=np.float64)
    initial_obj = np.array(scene.object_xy, dtype=np.float64)
    ee = np.array(geo.HOME_EE if init_ee is None else init_ee, dtype=np.float64)
    grip = int(init_gripper)
    attached = None
    frames, states = [], []
    skipped = []
    reach_best = np.inf
    grasped = False
    steps = 0

    def snap():
        if record_frames:
            joints = ik_clamped(ee, arm)
            frames.append(render(scene, arm, joints, grip,
                                 object_xy=[tuple(p) for p in obj], attached=attached))
            states.append((float(ee[0]), float(ee[1]), float(grip)))

    def track():
        nonlocal reach_best
        d = float(np.hypot(*(ee - obj[task.object_id])))
        reach_best = min(reach_best, d)

    track()
    snap()
    for wi, wp in enumerate(waypoints):
        target = np.asarray(wp.pos, dtype=np.float64)
        if not reachable(arm, target):
            skipped.append(wi)
            continue
        dist = float(np.hypot(*(target - ee)))
        n = max(1, int(np.ceil(dist / geo.STEP)))
        start = ee.copy()
        for k in range(1, n + 1):
            ee = start + (target - start) * (k / n)
            if attached is not None:
                obj[attached] = ee
            elif scene.family == "push":
                _resolve_push_contact(ee, obj, attached)
            track()
            steps += 1
            if k < n and steps % frame_stride == 0:
                snap()
        if wp.gripper != grip:
            grip = wp.gripper
            if grip == 1:
                dists = np.hypot(obj[:, 0] - ee[0], obj[:, 1] - ee[1])
                cand = int(np.argmin(dists))
                if dists[cand] <= geo.GRASP_RADIUS:
                    attached = cand
                    obj[attached] = ee
                    if cand == task.object_id:
                        grasped = True
            else:
                attached = None
        snap()

    success = check_success(task, scene, obj, grip, initial_object_xy=initial_obj)
    reached = reach_best <= geo.REACH_EPS[scene.family]
    return RolloutResult(
        success=success, reached_object=reached, grasped_object=grasped,
        frames=frames, states=states,
        final_object_xy=tuple(tuple(p) for p in obj),
        final_ee=(float(ee[0]), float(ee[1])), final_gripper=grip,
        skipped_waypoints=skipped, steps=steps)


def _unit(v):
    v = np.asarray(v, dtype=np.float64)
    n = float(np.hypot(*v))
    return v / max(n, 1e-12)


def scripted_waypoints(task, scene):
    """Hand-coded waypoint plan that completes the task from ground truth."""
    p = np.asarray(scene.object_xy[task.object_id], dtype=np.float64)
    if task.family == "pickplace":
        t = np.asarray(scene.pad_xy[task.target_id], dtype=np.float64)
        home = np.asarray(geo.HOME_EE)
        approach = p - 0.05 * _unit(p - home)
        mid = 0.5 * (p + t)
        return [
            Waypoint(*approach, 0),
            Waypoint(*p, 1),
            Waypoint(*mid, 1),
            Waypoint(*t, 1),
            Waypoint(*t, 0),
        ]
    if task.family == "push":
        d = np.asarray(push_direction_vector(task.target_id))
        band = geo.PUSH_HALF + geo.EE_RADIUS
        # detour around the object so the transit never touches it; the
        # corner column sits on the side away from the other object
        others = [o for i, o in enumerate(scene.object_xy) if i != task.object_id]
        s = 1.0 if not others or p[0] >= others[0][0] else -1.0
        col_x = p[0] + s * 0.085
        approach = p - d * (band + 0.06)
        corner_hi = (col_x, p[1] + 0.085)
        corner_lo = (col_x, approach[1])
        through = p + d * (geo.PUSH_DELTA - band)
        retreat = p - d * (band + 0.01)
        return [
            Waypoint(*corner_hi, 0),
            Waypoint(*corner_lo, 0),
            Waypoint(*approach, 0),
            Waypoint(*through, 0),
            Waypoint(*retreat, 0),
        ]
    raise ValueError(f"unknown family {task.family!r}")


def scripted_rollout(task, scene, role, record_frames=True, frame_stride=3):
    arm = arm_for_role(role)
    wps = scripted_waypoints(task, scene)
    result = execute_waypoints(task, scene, wps, arm,
                               record_frames=record_frames, frame_stride=frame_stride)
    if not result.success:
        raise RuntimeError(
            f"scripted policy failed on a valid scene: task={task.task_id} "
            f"seed={scene.seed} scene={scene.object_xy} pads={scene.pad_xy}")
    return result


def scripted_episode(task, scene, role, frame_stride=3):
    """Run the scripted policy and package the trajectory as an Episode."""
    from .episode import Episode  # local import to avoid a cycle

    result = scripted_rollout(task, scene, role, record_frames=True, frame_stride=frame_stride)
    frames = np.stack(result.frames).astype(np.uint8)
    states = np.asarray(result.states, dtype=np.float32)
    return Episode(frames=frames, states=states, role=role, task=task,
                   scene=scene, seed=scene.seed)


def scripted_expert(task, scene):
    return scripted_episode(task, scene, "expert")


def scripted_agent(task, scene):
    return scripted_episode(task, scene, "agent")
