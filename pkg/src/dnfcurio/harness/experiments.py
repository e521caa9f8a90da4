"""Seeded experiment runs of the full architecture in the push world.

Two protocols:

* ``habituation``: explore one object until the object-selection field loses
  its peak (or time runs out) and count the goals found on the way.
* ``learning``: run for a fixed time and record how errors and learning
  progress evolve per goal under one of the persistence settings.
"""
from __future__ import annotations

import math
import multiprocessing as mp
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from ..cognition import Architecture, Event
from ..config import load_config
from ..errors import ConfigError, InvariantViolation, OutputError
from ..world import KINDS, WorldState
from .sims import SETTINGS, SUPRA

PROTOCOLS = ("habituation", "learning")


@dataclass
class ExperimentConfig:
    objects: tuple[str, ...] = ("cube",)
    replicates: int = 1
    seed: int = 0
    max_time_s: float = 600.0
    protocol: str = "learning"
    habituation_tau_plus: float = 2000.0
    transient: tuple[float, float] = SETTINGS["baseline"]["transient"]
    attempts: tuple[float, float] = SETTINGS["baseline"]["attempts"]
    lp: tuple[float, float] = SETTINGS["baseline"]["lp"]
    gains: dict[str, Any] = field(default_factory=dict)    # dotted config overrides
    config_path: Optional[str] = None
    output_dir: Optional[str] = None
    sample_every_s: float = 0.5
    check_invariants: bool = True

    def __post_init__(self):
        self.objects = tuple(self.objects)
        self.transient = tuple(map(float, self.transient))
        self.attempts = tuple(map(float, self.attempts))
        self.lp = tuple(map(float, self.lp))
        self.validate()

    def validate(self) -> None:
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}; expected one of {PROTOCOLS}")
        unknown = [k for k in self.objects if k not in KINDS]
        if unknown or not self.objects:
            raise ConfigError(f"object kinds must be among {KINDS}, got {list(self.objects)}")
        taus = [self.habituation_tau_plus, *self.transient, *self.attempts, *self.lp]
        if not all(math.isfinite(t) and t > 0 for t in taus):
            raise ConfigError("all time constants must be positive")
        if self.max_time_s <= 0 or self.sample_every_s <= 0:
            raise ConfigError("max_time_s and sample_every_s must be positive")

    @classmethod
    def for_setting(cls, setting: str, **kw) -> "ExperimentConfig":
        """Learning-protocol config with the time constants of a named setting."""
        if setting not in SETTINGS:
            raise ConfigError(f"unknown setting {setting!r}; expected one of {tuple(SETTINGS)}")
        s = SETTINGS[setting]
        kw.setdefault("protocol", "learning")
        return cls(transient=s["transient"], attempts=s["attempts"], lp=s["lp"], **kw)

    def network_config(self) -> dict:
        over = {
            "network.traces.visual_memory.tau_plus": self.habituation_tau_plus,
            "network.traces.transient_action.tau_plus": self.transient[0],
            "network.traces.transient_action.tau_minus": self.transient[1],
            "network.traces.attempts_mt.tau_plus": self.attempts[0],
            "network.traces.attempts_mt.tau_minus": self.attempts[1],
            "network.traces.lp_mt.tau_plus": self.lp[0],
            "network.traces.lp_mt.tau_minus": self.lp[1],
        }
        over.update(self.gains)
        return load_config(self.config_path, over)


@dataclass
class TickSample:
    t_s: float
    tonic: float
    phasic: float
    mode: str
    lp: tuple[float, ...]          # per discovered goal, in discovery order
    error: tuple[float, ...]


@dataclass
class RunLog:
    run_id: str
    kind: str
    seed: int
    events: list[Event] = field(default_factory=list)
    ticks: list[TickSample] = field(default_factory=list)
    goals: list[dict] = field(default_factory=list)     # final inventory
    habituated_at_s: Optional[float] = None
    end_t_s: float = 0.0

    @property
    def goals_discovered(self) -> int:
        return sum(e.event == "discovery" for e in self.events)

    def of(self, event: str) -> list[Event]:
        return [e for e in self.events if e.event == event]


def derive_seed(seed: int, kind: str, replicate: int) -> int:
    """Independent, reproducible seed per (experiment seed, object, replicate)."""
    ss = np.random.SeedSequence([int(seed), KINDS.index(kind), int(replicate)])
    return int(ss.generate_state(1)[0] & 0x7FFFFFFF)


class InvariantMonitor:
    """Per-tick runtime checks; the first failure raises :class:`InvariantViolation`."""

    def __init__(self, arch: Architecture):
        self.arch = arch
        self.n_events = 0
        self.last_t = -math.inf

    def check(self) -> None:
        a = self.arch
        if a.supra("tonic") and a.supra("phasic"):
            raise InvariantViolation(f"t={a.time_s:.2f}s: tonic and phasic supra-threshold together")
        for e in a.events[self.n_events:]:
            if e.t_s < self.last_t:
                raise InvariantViolation(f"event times went backwards at {e.t_s}s")
            self.last_t = e.t_s
            if e.event == "selection" and a.goal_index_at((e.goal_color, e.goal_angle)) is None:
                raise InvariantViolation(f"t={e.t_s}s: selection of an undiscovered goal")
            for v in (e.error, e.lp):
                if v is not None and not math.isfinite(v):
                    raise InvariantViolation(f"t={e.t_s}s: non-finite value in {e.event} event")
        self.n_events = len(a.events)


def _sample(a: Architecture) -> TickSample:
    lp = a.net.output("lp_mt")
    err = a.net.output("errors_mt")
    cells = [g.goal.cell for g in a.goals]
    return TickSample(round(a.time_s, 3), a.net.value("tonic"), a.net.value("phasic"), a.mode,
                      tuple(float(lp[c]) for c in cells), tuple(float(err[c]) for c in cells))


def run_single(cfg: ExperimentConfig, kind: str, replicate: int = 0,
               network_config: Optional[dict] = None) -> RunLog:
    """One seeded run of the configured protocol on one object."""
    seed = derive_seed(cfg.seed, kind, replicate)
    net_cfg = network_config if network_config is not None else cfg.network_config()
    world = WorldState.single(kind, seed=seed)
    arch = Architecture(net_cfg, world, seed=seed)
    log = RunLog(f"{kind}-{cfg.seed}-{replicate}", kind, seed)
    monitor = InvariantMonitor(arch) if cfg.check_invariants else None
    every = max(1, int(round(cfg.sample_every_s * 1000.0 / arch.dt)))
    n_ticks = int(round(cfg.max_time_s * 1000.0 / arch.dt))
    was_selected = False
    for k in range(n_ticks):
        arch.tick()
        if monitor is not None:
            monitor.check()
        if k % every == every - 1:
            log.ticks.append(_sample(arch))
        if cfg.protocol == "habituation":
            on = arch.net.value("objsel") >= SUPRA
            if was_selected and not on:
                log.habituated_at_s = round(arch.time_s, 3)
                arch.log("habituated")
                break
            was_selected = on
    log.events = list(arch.events)
    log.end_t_s = round(arch.time_s, 3)
    log.goals = [{"color": g.goal.color, "angle": g.goal.angle, "error": float(arch.error_at(g.goal)),
                  "lp": float(arch.lp_at(g.goal)), "attempts": g.attempts, "kind": g.kind}
                 for g in arch.goals]
    return log


def _job(args):
    cfg, kind, rep, net_cfg = args
    return run_single(cfg, kind, rep, net_cfg)


def _check_output_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise OutputError(f"output directory {out} is not writable")
    return out


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> list[RunLog]:
    """All replicates for every object, in (object, replicate) order.

    Runs are independent; with ``workers > 1`` they go to a process pool and
    are joined before anything is written. CSVs land in ``cfg.output_dir``
    when it is set.
    """
    out = _check_output_dir(cfg.output_dir) if cfg.output_dir else None
    net_cfg = cfg.network_config()
    jobs = [(cfg, kind, rep, net_cfg) for kind in cfg.objects for rep in range(cfg.replicates)]
    workers = 1 if workers is None else max(1, int(workers))
    if workers > 1 and len(jobs) > 1:
        with mp.get_context("spawn").Pool(min(workers, len(jobs))) as pool:
            logs = pool.map(_job, jobs)
    else:
        logs = [_job(j) for j in jobs]
    if out is not None:
        from .export import write_run_csv, write_summary_csv
        for log in logs:
            write_run_csv(log, out / f"{log.run_id}.csv")
        write_summary_csv(logs, out / "summary.csv")
    return logs


def habituation_counts(kinds: Sequence[str], replicates: int, seed: int = 0, max_time_s: float = 300.0,
                       taus: Sequence[float] = (2000.0, 4000.0), workers: Optional[int] = None,
                       **kw) -> dict[str, dict[float, list[int]]]:
    """Goals discovered per run, keyed by object kind and visual-memory build time."""
    out: dict[str, dict[float, list[int]]] = {k: {} for k in kinds}
    for tau in taus:
        cfg = ExperimentConfig(objects=tuple(kinds), replicates=replicates, seed=seed, max_time_s=max_time_s,
                               protocol="habituation", habituation_tau_plus=tau, **kw)
        for log in run_experiment(cfg, workers):
            out[log.kind].setdefault(tau, []).append(log.goals_discovered)
    return out

