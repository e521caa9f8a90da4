"""A 2-D tabletop standing in for the robot and its physics.

A point effector sweeps a piecewise-linear path from its rest pose through one
or two target poses. The first object whose footprint the path enters is
displaced by a fixed distance in a direction given by a per-kind contact model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import PoseError, UndefinedAngleError
from .motion import Trajectory

KINDS = ("cube", "cylinder", "ball")
COLOR_FEATURES = {"cube": 10.0, "cylinder": 60.0, "ball": 90.0}


@dataclass
class ContactModel:
    """Per-kind push response. All angles in degrees, distances in metres."""

    push_distance: float = 0.08
    cube_noise: float = 3.0
    cylinder_core: float = 0.4      # fraction of the radius giving a clean push
    cylinder_slip: float = 60.0     # half-width of the uniform slip cone
    cylinder_noise: float = 3.0
    ball_kappa: float = 45.0        # deflection per unit of normalized lateral offset
    ball_noise: float = 8.0
    ball_contact: float = 0.85      # glancing hits beyond this fraction of the radius roll past

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "ContactModel":
        return cls(**(d or {}))


@dataclass
class TableObject:
    kind: str
    pos: np.ndarray
    radius: float = 0.03

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown object kind {self.kind!r}")
        self.pos = np.asarray(self.pos, dtype=float).copy()

    @property
    def color_feature(self) -> float:
        return color_feature(self.kind)


@dataclass
class PushOutcome:
    moved: bool
    pre_pos: np.ndarray
    post_pos: np.ndarray
    goal_angle_feature: Optional[float] = None
    kind: Optional[str] = None
    respawned: bool = False


@dataclass
class WorldState:
    objects: list[TableObject]
    workspace: tuple[float, float, float, float] = (0.0, 0.0, 0.6, 0.6)
    effector_rest: np.ndarray = field(default_factory=lambda: np.array([0.3, 0.02]))
    contact: ContactModel = field(default_factory=ContactModel)
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    record_samples: int = 40
    motion_duration: float = 2.0
    path_step: float = 0.001

    @classmethod
    def single(cls, kind: str, seed: int = 0, **kw) -> "WorldState":
        w = cls(objects=[], rng=np.random.default_rng(seed), **kw)
        w.objects.append(TableObject(kind, w.center))
        return w

    # the first object doubles as "the" object for single-object scenes
    @property
    def object_kind(self) -> str:
        return self.objects[0].kind

    @property
    def object_pos(self) -> np.ndarray:
        return self.objects[0].pos

    @property
    def color_feature(self) -> float:
        return self.objects[0].color_feature

    @property
    def center(self) -> np.ndarray:
        x0, y0, x1, y1 = self.workspace
        return np.array([(x0 + x1) / 2, (y0 + y1) / 2])

    def inside(self, p) -> bool:
        x0, y0, x1, y1 = self.workspace
        return bool(x0 <= p[0] <= x1 and y0 <= p[1] <= y1)

    def object_by_kind(self, kind: str) -> TableObject:
        for o in self.objects:
            if o.kind == kind:
                return o
        raise KeyError(kind)


def color_feature(kind: str) -> float:
    if kind not in COLOR_FEATURES:
        raise ValueError(f"unknown object kind {kind!r}")
    return COLOR_FEATURES[kind]


def goal_angle_feature(pre, post) -> float:
    """Direction of motion relative to +x, mapped from (-pi, pi] onto (0, 100]."""
    d = np.asarray(post, dtype=float) - np.asarray(pre, dtype=float)
    if not np.any(d):
        raise UndefinedAngleError("object did not move")
    ang = math.atan2(d[1], d[0])
    if ang == -math.pi:
        ang = math.pi
    return (ang + math.pi) / (2 * math.pi) * 100.0


def feature_to_angle(feature: float) -> float:
    return feature / 100.0 * 2 * math.pi - math.pi


def feature_to_workspace(world: WorldState, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p > 100) or not np.all(np.isfinite(p)):
        raise PoseError(f"feature coordinate {p} outside [0, 100]^2")
    x0, y0, x1, y1 = world.workspace
    return np.array([x0 + p[0] / 100.0 * (x1 - x0), y0 + p[1] / 100.0 * (y1 - y0)])


def workspace_to_feature(world: WorldState, xy) -> np.ndarray:
    xy = np.asarray(xy, dtype=float)
    if not world.inside(xy):
        raise PoseError(f"position {xy} outside the workspace")
    x0, y0, x1, y1 = world.workspace
    return np.array([(xy[0] - x0) / (x1 - x0) * 100.0, (xy[1] - y0) / (y1 - y0) * 100.0])


def respawn_if_unreachable(world: WorldState) -> WorldState:
    for o in world.objects:
        if not world.inside(o.pos):
            o.pos = world.center.copy()
    return world


# ---------------------------------------------------------------- contact
def _in_footprint(obj: TableObject, pts: np.ndarray, contact: ContactModel) -> np.ndarray:
    d = pts - obj.pos
    if obj.kind == "cube":
        return np.max(np.abs(d), axis=1) < obj.radius
    r = obj.radius * (contact.ball_contact if obj.kind == "ball" else 1.0)
    return np.hypot(d[:, 0], d[:, 1]) < r


def _push_direction(obj: TableObject, heading: float, offset: float, world: WorldState) -> float:
    """Direction (radians) of the displacement. ``offset`` > 0 when the center lies left of the path."""
    c, rng = world.contact, world.rng
    if obj.kind == "cube":
        return heading + math.radians(rng.normal(0.0, c.cube_noise))
    if obj.kind == "cylinder":
        if abs(offset) < c.cylinder_core * obj.radius:
            return heading + math.radians(rng.normal(0.0, c.cylinder_noise))
        return heading + math.radians(rng.uniform(-c.cylinder_slip, c.cylinder_slip))
    deflect = c.ball_kappa * offset / obj.radius
    return heading + math.radians(deflect + rng.normal(0.0, c.ball_noise))


def _densify(path: np.ndarray, step: float):
    """Points along the polyline with the index of the segment each belongs to."""
    pts, seg = [], []
    for i in range(len(path) - 1):
        a, b = path[i], path[i + 1]
        n = max(1, int(math.ceil(np.linalg.norm(b - a) / step)))
        r = np.arange(n) / n
        pts.append(a + (b - a) * r[:, None])
        seg.append(np.full(n, i))
    pts.append(path[-1:])
    seg.append(np.array([len(path) - 2]))
    return np.vstack(pts), np.concatenate(seg)


def record_path(path: np.ndarray, duration: float, n: int) -> Trajectory:
    """Time-parametrize a polyline with a minimum-jerk profile per segment, time shared by length."""
    lengths = np.linalg.norm(np.diff(path, axis=0), axis=1)
    keep = lengths > 0
    path = np.vstack([path[:1], path[1:][keep]])
    lengths = lengths[keep]
    if lengths.size == 0:
        return Trajectory(np.linspace(0.0, duration, n), np.repeat(path[:1], n, axis=0))
    bounds = np.concatenate([[0.0], np.cumsum(lengths) / lengths.sum() * duration])
    t = np.linspace(0.0, duration, n)
    seg = np.clip(np.searchsorted(bounds, t, side="right") - 1, 0, len(lengths) - 1)
    r = (t - bounds[seg]) / (bounds[seg + 1] - bounds[seg])
    blend = 10 * r**3 - 15 * r**4 + 6 * r**5
    x = path[seg] + (path[seg + 1] - path[seg]) * blend[:, None]
    return Trajectory(t, x)


def execute_motion(world: WorldState, waypoints: Sequence, record: bool = False):
    """Sweep the effector along ``waypoints`` and push the first object it meets.

    ``waypoints`` may start with the rest pose; if not, it is prepended. The
    return to rest is lifted and never pushes.
    """
    pts = [np.asarray(w, dtype=float) for w in waypoints]
    if not pts:
        raise PoseError("no target pose")
    for p in pts:
        if p.shape != (2,) or not np.all(np.isfinite(p)) or not world.inside(p):
            raise PoseError(f"waypoint {p} outside the workspace")
    if not np.allclose(pts[0], world.effector_rest, atol=1e-9):
        pts.insert(0, world.effector_rest.copy())
    path = np.vstack(pts)
    dense, seg = _densify(path, world.path_step)

    first, hit = None, None
    for obj in world.objects:
        inside = _in_footprint(obj, dense, world.contact)
        if inside.any():
            k = int(np.argmax(inside))
            if first is None or k < first:
                first, hit = k, obj
    trajectory = record_path(path, world.motion_duration, world.record_samples) if record else None

    if hit is None:
        pos = world.objects[0].pos.copy() if world.objects else np.zeros(2)
        return PushOutcome(False, pos, pos.copy(), None, None), trajectory

    i = int(seg[first])
    d = path[i + 1] - path[i]
    heading = math.atan2(d[1], d[0])
    rel = hit.pos - path[i]
    offset = (d[0] * rel[1] - d[1] * rel[0]) / np.linalg.norm(d)
    direction = _push_direction(hit, heading, offset, world)
    pre = hit.pos.copy()
    post = pre + world.contact.push_distance * np.array([math.cos(direction), math.sin(direction)])
    hit.pos = post.copy()
    angle = goal_angle_feature(pre, post)
    respawned = not world.inside(hit.pos)
    respawn_if_unreachable(world)
    return PushOutcome(True, pre, post, angle, hit.kind, respawned), trajectory
