"""The curiosity architecture: field network, DMP neurons, goal records and the body controller.

The network (fields, traces, boosts) decides *what* to do: explore an object,
select a goal, form poses, build errors and learning progress. The controller
translates decisions into motions in the world and writes the perceptual
stimuli back. Mode is read from field activations, never stored.

Per-tick order: controller writes stimuli → network step (fields in config
order from synchronously sampled outputs, then traces, boosts and resets) →
DMP neurons and Hebbian weights → controller reads decisions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

from ..motion import DmpSkill, Trajectory, learn_from_demo, rollout
from ..network import Network
from ..predictors import Predictor, loss
from ..world import PushOutcome, WorldState, execute_motion, feature_to_workspace, workspace_to_feature
from .hebbian import DmpNeurons
from .stimuli import gaussian_1d, gaussian_2d, peak

SUPRA = 0.5


@dataclass(frozen=True)
class GoalPoint:
    color: float
    angle: float

    def __post_init__(self):
        for v in (self.color, self.angle):
            if not 0.0 <= v <= 100.0:
                raise ValueError(f"goal coordinate {v} outside [0, 100]")

    @property
    def cell(self) -> tuple[int, int]:
        return int(round(min(self.color, 99))), int(round(min(self.angle, 99)))


@dataclass
class GoalRecord:
    goal: GoalPoint
    dmp: DmpSkill
    forward: Predictor
    inverse: Predictor
    current_error: float
    neuron: int
    kind: str = ""
    attempts: int = 0


@dataclass
class Command:
    kind: str                      # start_motion | rollout
    waypoints: list = field(default_factory=list)
    goal: Optional[int] = None


@dataclass
class Event:
    t_s: float
    event: str
    goal_color: Optional[float] = None
    goal_angle: Optional[float] = None
    error: Optional[float] = None
    lp: Optional[float] = None
    mode: str = "idle"
    info: dict = field(default_factory=dict)


class Phase(Enum):
    IDLE = "idle"
    MOVING = "moving"
    RETURNING = "returning"
    EOA = "eoa"


class Architecture:
    def __init__(self, config: dict, world: Optional[WorldState] = None, seed: int = 0):
        self.config = config
        self.p = dict(config.get("architecture", {}))
        self.dt = float(config.get("dt", 10.0))
        self.seed = seed
        self.net = Network.from_config(config["network"], seed=seed)
        n = self.p.get("dmp_neuron", {})
        self.neurons = DmpNeurons(h=n.get("h", -1.0), tau=n.get("tau", 20.0), beta=n.get("beta", 100.0),
                                  create_gain=n.get("create_gain", 2.0), overlap_gain=n.get("overlap_gain", 2.0),
                                  rate=self.p.get("hebbian_rate", 0.01))
        self.world = world
        self.goals: list[GoalRecord] = []
        self.events: list[Event] = []
        self.phase = Phase.IDLE
        self.phase_ms = 0.0
        self.poses: list[np.ndarray] = []
        self.idle_ms = 0.0
        self.decided_color: Optional[float] = None
        self._pending: dict[str, Any] = {}
        self._prev = {"pose_ready": False, "exploit": False, "explore": False, "force": False}
        self._selected: Optional[int] = None
        self._last_selected: Optional[int] = None
        slope = float(self.p.get("tie_break_slope", 1e-4))
        self.net.set_stimulus("tie_break", np.broadcast_to(-slope * np.arange(100) / 99.0, (100, 100)))

    # ------------------------------------------------------------ derived state
    @property
    def time_s(self) -> float:
        return self.net.time_ms / 1000.0

    def supra(self, name: str) -> bool:
        fld = self.net.fields[name]
        return bool(np.max(fld.u) > 0.0)

    @property
    def mode(self) -> str:
        if self.supra("tonic"):
            return "exploring"
        if self.supra("phasic"):
            return "exploiting"
        return "idle"

    def goal_index_at(self, cell) -> Optional[int]:
        """Goal record nearest to a (color, angle) cell, if any."""
        if not self.goals:
            return None
        d = [math.hypot(g.goal.color - cell[0], g.goal.angle - cell[1]) for g in self.goals]
        return int(np.argmin(d))

    def lp_at(self, goal: GoalPoint) -> float:
        return float(self.net.output("lp_mt")[goal.cell])

    def error_at(self, goal: GoalPoint) -> float:
        return float(self.net.output("errors_mt")[goal.cell])

    def log(self, event: str, goal: Optional[GoalPoint] = None, error: Optional[float] = None, **info) -> Event:
        e = Event(round(self.time_s, 3), event,
                  None if goal is None else goal.color, None if goal is None else goal.angle,
                  error, None if goal is None else self.lp_at(goal), self.mode, info)
        self.events.append(e)
        return e

    # --------------------------------------------------------------------- tick
    def tick(self, dt: Optional[float] = None) -> list[Command]:
        dt = self.dt if dt is None else dt
        self._write_stimuli()
        self.net.step(dt)
        self.neurons.step(dt, self.net.value("explore"), self.net.output("goal_focus"))
        return self._control(dt)

    def run(self, seconds: float) -> None:
        for _ in range(int(round(seconds * 1000.0 / self.dt))):
            self.tick()

    # --------------------------------------------------------------- controller
    def _visible_objects(self):
        return [] if self.world is None else self.world.objects

    def _write_stimuli(self) -> None:
        sig = float(self.p.get("stimulus_sigma", 3.0))
        objs = self._visible_objects()
        color = np.zeros(100)
        for o in objs:
            color = np.maximum(color, gaussian_1d(o.color_feature, sig))
        if not np.array_equal(color, self.net.stimuli["color_stim"]):
            self.net.set_stimulus("color_stim", color)

    def _decided_object(self):
        if self.net.value("object_decision") < SUPRA:
            return None
        col = peak(self.net.output("object_decision"))[0]
        objs = self._visible_objects()
        if not objs:
            return None
        best = min(objs, key=lambda o: abs(o.color_feature - col))
        return best if abs(best.color_feature - col) <= 10 else None

    def _set_command(self, name: str, on: bool) -> None:
        value = 1.0 if on else 0.0
        if self.net.stimuli[name] != value:
            self.net.set_stimulus(name, value)

    def _clear(self, name: str) -> None:
        if np.any(self.net.stimuli[name]):
            self.net.set_stimulus(name, 0.0)

    def _control(self, dt: float) -> list[Command]:
        commands: list[Command] = []
        self._track_transitions()
        self.phase_ms += dt
        if self.phase is Phase.IDLE:
            commands += self._idle(dt)
        elif self.phase is Phase.MOVING:
            if self.phase_ms >= self.p.get("motion_ms", 2000):
                self._end_motion()
        elif self.phase is Phase.RETURNING:
            self._returning()
        elif self.phase is Phase.EOA:
            eoa = self.p.get("eoa_ms", 300)
            # close the error write gate while the error stimulus is still held
            if self.phase_ms >= eoa - self.p.get("eoa_err_release_ms", 100):
                self._set_command("eoa_err_cmd", False)
            if self.phase_ms >= eoa:
                self._end_eoa()
        return commands

    def _enter(self, phase: Phase) -> None:
        self.phase, self.phase_ms = phase, 0.0

    def _track_transitions(self) -> None:
        exploit = self.net.value("exploit") >= SUPRA
        explore = self.net.value("explore") >= SUPRA
        force = self.net.value("force") >= SUPRA
        if exploit and not self._prev["exploit"]:
            cell = peak(self.net.fields["phasic"].u)
            self._selected = self.goal_index_at(cell)
            g = self.goals[self._selected].goal if self._selected is not None else GoalPoint(*cell)
            self.log("selection", g, self.error_at(g))
        if not exploit and self._prev["exploit"]:
            self._last_selected, self._selected = self._selected, None
        if explore and not self._prev["explore"]:
            self.log("explore_start")
        if force and not self._prev["force"]:
            idx = self._selected if self._selected is not None else self._last_selected
            g = self.goals[idx].goal if idx is not None else None
            self.log("persistence", g)
            # the attempt in flight is abandoned: its error never reaches the error memory
            if self._pending.get("mode") == "exploiting" and "stim_done" not in self._pending:
                self._clear("goal_hold")
                self._pending["aborted"] = True
        self._prev.update(exploit=exploit, explore=explore, force=force)

    # IDLE: gather poses from the filtering field, then move
    def _idle(self, dt: float) -> list[Command]:
        mode = self.mode
        obj = self._decided_object() if mode != "idle" else None
        goal_idx = self._active_goal() if mode == "exploiting" else None
        if obj is None or (mode == "exploiting" and goal_idx is None):
            self.poses.clear()
            self.idle_ms = 0.0
            self._clear("position_stim")
            self._clear("inverse_hint")
            self._prev["pose_ready"] = self.net.value("pose_ready") >= SUPRA
            return []
        pos_feat = workspace_to_feature(self.world, obj.pos if self.world.inside(obj.pos) else self.world.center)
        pos = gaussian_2d(pos_feat, float(self.p.get("position_sigma", 2.0)))
        if not np.array_equal(pos, self.net.stimuli["position_stim"]):
            self.net.set_stimulus("position_stim", pos)
        if goal_idx is not None:
            rec = self.goals[goal_idx]
            cmd = rec.inverse.predict(np.array([*pos_feat / 100.0, rec.goal.angle / 100.0]))
            hint = gaussian_2d(np.clip(cmd * 100.0, 0, 100), float(self.p.get("hint_sigma", 3.0)))
            if not np.array_equal(hint, self.net.stimuli["inverse_hint"]):
                self.net.set_stimulus("inverse_hint", hint)
        else:
            self._clear("inverse_hint")

        ready = self.net.value("pose_ready") >= SUPRA
        if ready and not self._prev["pose_ready"]:
            self.poses.append(np.array(peak(self.net.output("filtering")), dtype=float))
            self.idle_ms = 0.0
        self._prev["pose_ready"] = ready
        self.idle_ms += dt
        if self.idle_ms > self.p.get("pose_timeout_ms", 15000):
            self.log("exhausted")
            self.net.reset_element("wm_ior")
            self.idle_ms = 0.0
        needed = 2 if mode == "exploring" else 1
        if len(self.poses) >= needed:
            return [self._start_motion(mode, obj, goal_idx)]
        return []

    def _active_goal(self) -> Optional[int]:
        out = self.neurons.outputs()
        if out.size == 0 or out.max() < SUPRA:
            return None
        return int(np.argmax(out))

    def _start_motion(self, mode: str, obj, goal_idx: Optional[int]) -> Command:
        poses_m = [feature_to_workspace(self.world, p) for p in self.poses]
        self.poses = []
        rest = self.world.effector_rest.copy()
        if mode == "exploring":
            waypoints = [rest, *poses_m[:2]]
            outcome, demo = execute_motion(self.world, waypoints, record=True)
            cmd = Command("start_motion", waypoints)
        else:
            rec = self.goals[goal_idx]
            traj = rollout(rec.dmp, x0=rest, g=poses_m[0], tau=2.0 * rec.dmp.tau_demo)
            idx = np.unique(np.linspace(0, len(traj.t) - 1, int(self.p.get("rollout_points", 60))).astype(int))
            waypoints = [rest, *[p for p in np.clip(traj.x[idx], *self._bounds())]]
            outcome, demo = execute_motion(self.world, waypoints, record=False)
            rec.attempts += 1
            cmd = Command("rollout", waypoints, goal_idx)
            self.net.set_stimulus("goal_hold", gaussian_2d(rec.goal.cell, float(self.p.get("perceived_sigma", 1.5))))
        self._pending = {"mode": mode, "outcome": outcome, "demo": demo, "goal": goal_idx,
                         "command": poses_m[-1], "pre": outcome.pre_pos if outcome.moved else obj.pos.copy()}
        self.log("motion", None if goal_idx is None else self.goals[goal_idx].goal,
                 moved=outcome.moved, angle=outcome.goal_angle_feature)
        self._set_command("moving_cmd", True)
        self._enter(Phase.MOVING)
        return cmd

    def _bounds(self):
        x0, y0, x1, y1 = self.world.workspace
        return np.array([x0, y0]), np.array([x1, y1])

    def _end_motion(self) -> None:
        self._set_command("moving_cmd", False)
        self._clear("position_stim")
        self._clear("inverse_hint")
        out: PushOutcome = self._pending["outcome"]
        if out.moved:
            color = self.world.object_by_kind(out.kind).color_feature
            self._pending["perceived"] = (color, out.goal_angle_feature)
            self.net.set_stimulus("perceived_stim",
                                  gaussian_2d((color, out.goal_angle_feature), float(self.p.get("perceived_sigma", 1.5))))
            if self._pending["mode"] == "exploiting":
                self._compute_error()
        self._enter(Phase.RETURNING)

    def _samples(self, rec: GoalRecord):
        out: PushOutcome = self._pending["outcome"]
        pre = workspace_to_feature(self.world, out.pre_pos) / 100.0
        cmd = workspace_to_feature(self.world, self._pending["command"]) / 100.0
        angle = np.array([out.goal_angle_feature / 100.0])
        return (np.concatenate([pre, cmd]), angle), (np.concatenate([pre, angle]), cmd)

    def _compute_error(self) -> None:
        rec = self.goals[self._pending["goal"]]
        fwd, inv = self._samples(rec)
        err = loss(rec.forward.predict(fwd[0]), fwd[1])
        rec.forward.train_on_new([fwd])
        rec.inverse.train_on_new([inv])
        self._pending["error"] = (self._pending["goal"], err)

    def _discover(self) -> None:
        color, angle = self._pending["perceived"]
        goal = GoalPoint(float(round(color)), float(round(angle)))
        demo: Trajectory = self._pending["demo"]
        dp = self.p.get("dmp", {})
        skill = learn_from_demo(demo, n_basis=int(dp.get("n_basis", 20)), K=float(dp.get("K", 100.0)),
                                D=float(dp.get("D", 20.0)))
        pp = self.p.get("predictor", {})
        kw = dict(seed=int(pp.get("seed", 1234)), learning_rate=float(pp.get("learning_rate", 0.05)),
                  init_scale=float(pp.get("init_scale", 0.5)), buffer_size=int(pp.get("buffer_size", 20)))
        rec = GoalRecord(goal, skill, Predictor("forward", **kw), Predictor("inverse", **kw), 0.0,
                         self.neurons.add(), kind=self._pending["outcome"].kind)
        self.goals.append(rec)
        self._pending["goal"] = len(self.goals) - 1
        self._compute_error()
        self.neurons.create[rec.neuron] = True
        rec.current_error = self._pending["error"][1]
        self.log("discovery", goal, rec.current_error, kind=rec.kind)

    def _returning(self) -> None:
        t = self.phase_ms
        p = self._pending
        out: PushOutcome = p["outcome"]
        at_stim = self.p.get("error_stim_at_ms", 200)
        if out.moved and "stim_done" not in p and t >= at_stim:
            p["stim_done"] = True
            if p["mode"] == "exploring" and self.net.value("new_goal") >= SUPRA:
                self._discover()
            if "error" in p:
                gi, err = p["error"]
                rec = self.goals[gi]
                if p["mode"] == "exploiting":
                    rec.current_error = err
                    self.log("error", rec.goal, err)
                if not p.get("aborted"):
                    self.net.set_stimulus("new_error_stim",
                                          gaussian_2d((rec.goal.color, rec.goal.angle),
                                                      float(self.p.get("error_sigma", 1.5)), err))
        writes = "error" in p and "stim_done" in p and not p.get("aborted")
        if writes and t >= self.p.get("time_pulse_at_ms", 400):
            self._set_command("time_cmd", True)
        if t >= self.p.get("return_ms", 700):
            self._set_command("time_cmd", False)
            self._set_command("eoa_cmd", True)
            self._set_command("eoa_err_cmd", writes)
            self._enter(Phase.EOA)

    def _end_eoa(self) -> None:
        self._set_command("eoa_cmd", False)
        self._set_command("eoa_err_cmd", False)
        self._clear("perceived_stim")
        self._clear("new_error_stim")
        self._clear("goal_hold")
        for i in range(len(self.neurons.create)):
            self.neurons.create[i] = False
        self._pending = {}
        self.poses = []
        self.idle_ms = 0.0
        self._enter(Phase.IDLE)

    # ------------------------------------------------------------- inspection
    def snapshot(self) -> dict[str, float]:
        """Max activation of every field, trace and boost (for per-tick logging)."""
        names = list(self.net.fields) + list(self.net.traces) + list(self.net.boosts)
        return {n: self.net.value(n) for n in names}
