"""Scripted replays of the field network without the body or the world.

The :class:`ReplayDriver` plays the controller's part with a fixed timeline
(motion, return with error readout and time pulse, end of action) and lets a
caller decide the outcomes: which error each motion produced, whether an
outcome was a new goal. Three protocols sit on top of it:

* :func:`habituation_sim`: visual-memory habituation under three conditions
  (no goals found, a goal found mid-sequence, two objects).
* :func:`persistence_sim`: goal selection with replayed error samples under
  the baseline, inhibition and persistence settings.
* :func:`neighbor_sim`: exploiting one goal erodes the stored error of a
  goal a few feature units away.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..cognition.stimuli import gaussian_1d, gaussian_2d, peak
from ..config import load_config
from ..network import Network

SUPRA = 0.5

# attempts, transient-action and LP trace constants of the three learning settings
SETTINGS = {
    "baseline": {"transient": (4500.0, 100.0), "attempts": (100.0, 100.0), "lp": (2000.0, 2000.0)},
    "inhibition": {"transient": (4500.0, 100.0), "attempts": (2000.0, 1500.0), "lp": (2000.0, 2000.0)},
    "persistence": {"transient": (6000.0, 100.0), "attempts": (100.0, 100.0), "lp": (2000.0, 2000.0)},
}


def setting_overrides(name: str) -> dict:
    """Dotted config overrides for one of :data:`SETTINGS`."""
    s = SETTINGS[name]
    return {
        "network.traces.transient_action.tau_plus": s["transient"][0],
        "network.traces.transient_action.tau_minus": s["transient"][1],
        "network.traces.attempts_mt.tau_plus": s["attempts"][0],
        "network.traces.attempts_mt.tau_minus": s["attempts"][1],
        "network.traces.lp_mt.tau_plus": s["lp"][0],
        "network.traces.lp_mt.tau_minus": s["lp"][1],
    }


@dataclass
class Sample:
    t_ms: float
    values: dict[str, float]


class ReplayDriver:
    """Drive the configured network through scripted motion cycles.

    ``probes`` maps a label to ``(element, index)``; each tick records the
    element's output at ``index`` (or its maximum when ``index`` is None).
    """

    def __init__(self, config: Optional[dict] = None, seed: int = 0,
                 probes: Optional[dict[str, tuple[str, Optional[tuple]]]] = None,
                 watch: Optional[Callable[["ReplayDriver"], None]] = None):
        self.config = config or load_config()
        self.p = self.config.get("architecture", {})
        self.dt = float(self.config.get("dt", 10.0))
        self.net = Network.from_config(self.config["network"], seed=seed)
        slope = float(self.p.get("tie_break_slope", 1e-4))
        self.net.set_stimulus("tie_break", np.broadcast_to(-slope * np.arange(100) / 99.0, (100, 100)))
        self.sigma = float(self.p.get("stimulus_sigma", 3.0))
        self.error_sigma = float(self.p.get("error_sigma", 1.5))
        self.probes = dict(probes or {})
        self.samples: list[Sample] = []
        self.watch = watch
        self.aborted = False
        self.abortable = False      # the error of the motion in flight is not written yet
        self._force = False

    # ---------------------------------------------------------------- setup
    def show_objects(self, colors: Sequence[float], saliences: Optional[Sequence[float]] = None) -> None:
        sal = saliences or [1.0] * len(colors)
        stim = np.zeros(100)
        for c, a in zip(colors, sal):
            stim = np.maximum(stim, gaussian_1d(c, self.sigma, a))
        self.net.set_stimulus("color_stim", stim)

    def bumps(self, values: dict[tuple[int, int], float]) -> np.ndarray:
        out = np.zeros((100, 100))
        for cell, v in values.items():
            out += gaussian_2d(cell, self.error_sigma, v)
        return out

    def set_errors(self, errors: dict[tuple[int, int], float]) -> None:
        self.net.set_trace("errors_mt", self.bumps(errors))

    def set_lp(self, lp: dict[tuple[int, int], float]) -> None:
        self.net.set_trace("lp_mt", self.bumps(lp))

    def habituate(self, colors: Sequence[float]) -> None:
        """Start with a saturated visual memory at ``colors``."""
        vm = np.zeros(100)
        for c in colors:
            vm = np.maximum(vm, (gaussian_1d(c, self.sigma) > 0.5).astype(float))
        self.net.set_trace("visual_memory", vm)

    # ----------------------------------------------------------------- time
    @property
    def t_ms(self) -> float:
        return self.net.time_ms

    def run(self, ms: float) -> None:
        for _ in range(int(round(ms / self.dt))):
            self.net.step(self.dt)
            force = self.net.value("force") >= SUPRA
            if force and not self._force and self.abortable and np.any(self.net.stimuli["goal_hold"]):
                self.net.set_stimulus("goal_hold", 0.0)
                self.aborted = True
            self._force = force
            if self.probes:
                self.samples.append(Sample(self.t_ms, {k: self.probe(k) for k in self.probes}))
            if self.watch is not None:
                self.watch(self)

    def probe(self, label: str) -> float:
        name, idx = self.probes[label]
        out = self.net.output(name)
        return float(np.max(out)) if idx is None else float(np.asarray(out)[idx])

    def series(self, label: str) -> np.ndarray:
        return np.array([s.values[label] for s in self.samples])

    def times(self) -> np.ndarray:
        return np.array([s.t_ms for s in self.samples])

    def supra(self, name: str) -> bool:
        return bool(np.max(self.net.fields[name].u) > 0.0)

    def _cmd(self, name: str, on: bool) -> None:
        self.net.set_stimulus(name, 1.0 if on else 0.0)

    # ------------------------------------------------------------- episodes
    def wait_for_selection(self, timeout_ms: float = 20000.0) -> Optional[tuple[int, int]]:
        """Run until the exploit node fires; the phasic peak cell, or None on timeout."""
        waited = 0.0
        while waited < timeout_ms:
            if self.net.value("exploit") >= SUPRA:
                return peak(self.net.fields["phasic"].u)
            self.run(self.dt)
            waited += self.dt
        return None

    def motion_cycle(self, cell: Optional[tuple[int, int]], error: Optional[float],
                     perceived: Optional[tuple[float, float]] = None) -> None:
        """One motion, return and end-of-action pulse.

        ``cell``/``error``: goal being exploited and the error this attempt
        produced (None: the object did not move, nothing is updated).
        ``perceived``: (color, angle) of an outcome shown while exploring.
        """
        motion = float(self.p.get("motion_ms", 2000))
        ret = float(self.p.get("return_ms", 700))
        at_stim = float(self.p.get("error_stim_at_ms", 200))
        at_time = float(self.p.get("time_pulse_at_ms", 400))
        eoa = float(self.p.get("eoa_ms", 300))
        release = float(self.p.get("eoa_err_release_ms", 100))
        self.aborted = False
        self.abortable = True
        if cell is not None:
            self.net.set_stimulus("goal_hold", gaussian_2d(cell, float(self.p.get("perceived_sigma", 1.5))))
        self._cmd("moving_cmd", True)
        self.run(motion)
        self._cmd("moving_cmd", False)
        if perceived is not None:
            self.net.set_stimulus("perceived_stim",
                                  gaussian_2d(perceived, float(self.p.get("perceived_sigma", 1.5))))
        self.run(at_stim)
        self.abortable = False
        updating = cell is not None and error is not None and not self.aborted
        if updating:
            self.net.set_stimulus("new_error_stim", gaussian_2d(cell, self.error_sigma, error))
        self.run(at_time - at_stim)
        if updating:
            self._cmd("time_cmd", True)
        self.run(ret - at_time)
        self._cmd("time_cmd", False)
        self._cmd("eoa_cmd", True)
        self._cmd("eoa_err_cmd", updating)
        self.run(eoa - release)
        self._cmd("eoa_err_cmd", False)
        self.run(release)
        self._cmd("eoa_cmd", False)
        for name in ("perceived_stim", "new_error_stim", "goal_hold"):
            if np.any(self.net.stimuli[name]):
                self.net.set_stimulus(name, 0.0)

    def error_at(self, cell) -> float:
        return float(self.net.output("errors_mt")[tuple(cell)])

    def lp_at(self, cell) -> float:
        return float(self.net.output("lp_mt")[tuple(cell)])


# --------------------------------------------------------------------------- habituation
@dataclass
class HabituationTrace:
    condition: str
    t_ms: np.ndarray
    objsel: np.ndarray
    wm_colors: np.ndarray
    visual_memory: np.ndarray
    motions: list[float] = field(default_factory=list)        # end times of each motion cycle
    discoveries: list[float] = field(default_factory=list)
    selection: list[Optional[int]] = field(default_factory=list)  # objsel peak color per motion
    extra: dict[str, np.ndarray] = field(default_factory=dict)


HABITUATION_CONDITIONS = ("no_goal", "goal_midway", "two_objects")


def habituation_sim(condition: str, config: Optional[dict] = None, seed: int = 0,
                    motions: int = 12, colors: Sequence[float] = (10.0, 90.0),
                    discovery_at: int = 4) -> HabituationTrace:
    """Visual-memory habituation with scripted outcomes.

    ``no_goal``: every motion ends without a new goal. ``goal_midway``: the
    motion numbered ``discovery_at`` produces a new goal. ``two_objects``:
    two objects in view (the first slightly more salient), no goals.
    """
    if condition not in HABITUATION_CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}; expected one of {HABITUATION_CONDITIONS}")
    c0 = colors[0]
    probes = {"objsel": ("objsel", None), "wm_colors": ("wm_colors", None),
              "visual_memory": ("visual_memory", (int(round(c0)),))}
    if condition == "two_objects":
        c1 = colors[1]
        probes.update({"objsel_a": ("objsel", (int(round(c0)),)), "objsel_b": ("objsel", (int(round(c1)),)),
                       "visual_memory_b": ("visual_memory", (int(round(c1)),))})
    d = ReplayDriver(config, seed=seed, probes=probes)
    if condition == "two_objects":
        d.show_objects([c0, colors[1]], [1.0, 0.95])
    else:
        d.show_objects([c0])
    d.run(1000.0)
    trace = HabituationTrace(condition, np.array([]), np.array([]), np.array([]), np.array([]))
    angle = 20.0
    for i in range(motions):
        sel = d.net.output("objsel")
        trace.selection.append(int(peak(d.net.fields["objsel"].u)[0]) if sel.max() >= SUPRA else None)
        perceived = None
        if condition == "goal_midway" and i == discovery_at:
            perceived = (c0, angle)
            trace.discoveries.append(d.t_ms)
        d.motion_cycle(None, None, perceived=perceived)
        trace.motions.append(d.t_ms)
        d.run(400.0)                 # idle gap while the next poses form
    trace.t_ms = d.times()
    trace.objsel = d.series("objsel")
    trace.wm_colors = d.series("wm_colors")
    trace.visual_memory = d.series("visual_memory")
    for k in probes:
        if k not in ("objsel", "wm_colors", "visual_memory"):
            trace.extra[k] = d.series(k)
    return trace


# --------------------------------------------------------------------------- persistence
@dataclass
class PersistenceLog:
    setting: str
    selections: list[tuple[float, str]] = field(default_factory=list)    # (t_ms, goal label)
    attempts: list[int] = field(default_factory=list)                   # motions per selection
    errors: dict[str, list[float]] = field(default_factory=dict)        # replayed errors used
    stored: dict[str, list[float]] = field(default_factory=dict)        # errors_mt after each update
    lp: dict[str, list[float]] = field(default_factory=dict)
    learned_at: dict[str, Optional[float]] = field(default_factory=dict)
    both_supra: int = 0


DEFAULT_GOALS = {"stalled": (20, 30), "learnable": (20, 70)}
DEFAULT_SAMPLES = {
    "stalled": [0.6] * 40,
    "learnable": [0.45, 0.35, 0.25, 0.15, 0.08, 0.04] + [0.04] * 34,
}


def persistence_sim(setting: str = "baseline", config: Optional[dict] = None, seed: int = 0,
                    goals: Optional[dict[str, tuple[int, int]]] = None,
                    samples: Optional[dict[str, list[float]]] = None,
                    cycles: int = 16, learned_below: float = 0.1) -> PersistenceLog:
    """Replay recorded error samples for two goals under one learning setting.

    Each selected goal consumes its next error sample per motion. A goal
    counts as learned once its replayed error falls below ``learned_below``.
    """
    from ..config import deep_merge, set_path

    goals = goals or DEFAULT_GOALS
    samples = samples or DEFAULT_SAMPLES
    cfg = deep_merge(config or load_config(), {})
    for k, v in setting_overrides(setting).items():
        set_path(cfg, k, v)
    log = PersistenceLog(setting)
    cursor = {g: 0 for g in goals}
    log.errors = {g: [] for g in goals}
    log.stored = {g: [] for g in goals}
    log.lp = {g: [] for g in goals}
    log.learned_at = {g: None for g in goals}

    def watch(drv: ReplayDriver) -> None:
        if drv.supra("tonic") and drv.supra("phasic"):
            log.both_supra += 1

    d = ReplayDriver(cfg, seed=seed, watch=watch)
    d.set_errors({cell: samples[g][0] for g, cell in goals.items()})
    current, n = None, 0
    for _ in range(cycles):
        fresh = d.aborted or d.net.value("exploit") < SUPRA
        cell = d.wait_for_selection()
        if cell is None:
            break
        label = min(goals, key=lambda g: np.hypot(*(np.subtract(goals[g], cell))))
        if fresh or label != current:
            if current is not None:
                log.attempts.append(n)
            log.selections.append((d.t_ms, label))
            current, n = label, 0
        cursor[label] = min(cursor[label] + 1, len(samples[label]) - 1)
        err = samples[label][cursor[label]]
        d.motion_cycle(goals[label], err)
        n += 1
        if d.aborted:              # persistence gave up on the goal mid-motion; sample not consumed
            cursor[label] -= 1
            d.run(400.0)
            continue
        log.errors[label].append(err)
        for g, c in goals.items():
            log.stored[g].append(d.error_at(c))
            log.lp[g].append(d.lp_at(c))
        if err < learned_below and log.learned_at[label] is None:
            log.learned_at[label] = d.t_ms
        d.run(400.0)
    if current is not None:
        log.attempts.append(n)
    return log


# --------------------------------------------------------------------------- neighbors
@dataclass
class NeighborLog:
    selected: Optional[tuple[int, int]]
    winner: list[float]
    neighbor: list[float]
    switched: bool = False      # selection left the winner before all updates were done
    aborted: list[bool] = field(default_factory=list)   # per update: persistence dropped the attempt


def neighbor_sim(distance: float = 5.0, winner_error: float = 0.6, neighbor_error: float = 0.4,
                 updates: int = 8, config: Optional[dict] = None, seed: int = 0) -> NeighborLog:
    """Let the higher-error goal win selection, then exploit it with a constant error.

    Records the stored error at both goals before and after every update. The
    loop ends early once the attempts trace hands selection to another goal.
    """
    win, nb = (30, 40), (30, int(round(40 + distance)))
    d = ReplayDriver(config, seed=seed)
    d.set_errors({win: winner_error, nb: neighbor_error})
    log = NeighborLog(d.wait_for_selection(), [d.error_at(win)], [d.error_at(nb)])
    for k in range(updates):
        cell = log.selected if k == 0 else d.wait_for_selection()
        if cell is None or np.hypot(cell[0] - win[0], cell[1] - win[1]) > 2.0:
            log.switched = True
            break
        d.motion_cycle(win, winner_error)
        log.aborted.append(d.aborted)
        log.winner.append(d.error_at(win))
        log.neighbor.append(d.error_at(nb))
    return log
