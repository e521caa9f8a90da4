"""A network of fields, traces and slow boosts wired by projections.

Built from a declarative mapping (see ``dnfcurio/data/architecture.yaml``).
One call to :meth:`Network.step` advances every element once, in config
order, from the outputs sampled at the start of the step (synchronous update).
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Any, Mapping, Optional

import numpy as np

from .errors import ConfigError
from .fields import (
    FieldGrid,
    InteractionKernel,
    MemoryTrace,
    Projection,
    SlowBoost,
    step_field,
    step_memory_trace,
    step_slow_boost,
)

REST_SNAP = 1e-12

_FIELD_KEYS = {"dims", "h", "tau", "transfer", "beta", "noise", "kernel", "output_floor", "sparse_tol"}
_KERNEL_KEYS = {"c_exc", "sigma_exc", "c_inh", "sigma_inh", "g_global", "cutoff"}


@dataclass
class Reset:
    """Rising edge of ``trigger`` (output crossing ``threshold``) returns ``target`` to rest."""

    target: str
    trigger: str
    threshold: float = 0.5
    _armed: bool = True


def make_kernel(entry: Optional[Mapping[str, Any]], where: str) -> Optional[InteractionKernel]:
    if entry is None:
        return None
    unknown = set(entry) - _KERNEL_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown kernel keys {sorted(unknown)}")
    return InteractionKernel(**entry)


def _seed_for(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(name.encode())])


class Network:
    def __init__(self, fields: dict[str, FieldGrid], traces: dict[str, MemoryTrace],
                 boosts: dict[str, SlowBoost], stimuli: dict[str, np.ndarray],
                 projections: list[Projection], resets: Optional[list[Reset]] = None):
        self.fields = fields
        self.traces = traces
        self.boosts = boosts
        self.stimuli = stimuli
        self.projections = projections
        self.resets = resets or []
        self._incoming: dict[str, list[Projection]] = {n: [] for n in fields}
        self._validate()
        for p in projections:
            self._incoming[p.target].append(p)
        self._rest: dict[str, bool] = {n: True for n in fields}
        self._rest_out: dict[str, np.ndarray] = {}
        self._rest_live: dict[str, bool] = {}
        self._trace_live: dict[str, bool] = {}
        self._stim_live: dict[str, bool] = {}
        # traces stepped in place must be snapshotted if another trace reads them
        self._read_by_traces = {t.source for t in traces.values()} | {t.gate for t in traces.values()}
        self.time_ms = 0.0

    # ------------------------------------------------------------------ build
    @classmethod
    def from_config(cls, cfg: Mapping[str, Any], seed: int = 0) -> "Network":
        fields: dict[str, FieldGrid] = {}
        for name, entry in (cfg.get("fields") or {}).items():
            entry = dict(entry or {})
            unknown = set(entry) - _FIELD_KEYS
            if unknown:
                raise ConfigError(f"field {name}: unknown keys {sorted(unknown)}")
            fields[name] = FieldGrid(
                name=name,
                dims=int(entry.get("dims", 0)),
                h=float(entry.get("h", -1.0)),
                tau=float(entry.get("tau", 50.0)),
                transfer=entry.get("transfer", "sigmoid"),
                beta=float(entry.get("beta", 100.0)),
                noise_amp=float(entry.get("noise", 0.0)),
                kernel=make_kernel(entry.get("kernel"), f"field {name}"),
                output_floor=float(entry.get("output_floor", 0.0)),
                sparse_tol=float(entry.get("sparse_tol", 0.0)),
                rng=_seed_for(seed, name),
            )
        stimuli = {}
        for name, dims in (cfg.get("stimuli") or {}).items():
            stimuli[name] = np.zeros((100,) * int(dims))
        shapes = {n: f.shape for n, f in fields.items()}
        shapes.update({n: s.shape for n, s in stimuli.items()})
        traces: dict[str, MemoryTrace] = {}
        for name, entry in (cfg.get("traces") or {}).items():
            src = entry.get("source")
            if src not in shapes:
                raise ConfigError(f"trace {name}: unknown source {src!r}")
            traces[name] = MemoryTrace(
                name=name, shape=shapes[src], source=src, gate=entry.get("gate"),
                tau_plus=float(entry["tau_plus"]), tau_minus=float(entry["tau_minus"]),
                graded=bool(entry.get("graded", False)),
            )
            shapes[name] = traces[name].shape
        boosts = {
            name: SlowBoost(name=name, tau_plus=float(entry["tau_plus"]), tau_minus=float(entry["tau_minus"]),
                            active=entry["active"], threshold=entry["threshold"])
            for name, entry in (cfg.get("boosts") or {}).items()
        }
        projections = []
        for i, entry in enumerate(cfg.get("projections") or []):
            entry = dict(entry)
            entry["kernel"] = make_kernel(entry.get("kernel"), f"projection {i}")
            entry.setdefault("name", f"{entry.get('source')}->{entry.get('target')}")
            try:
                projections.append(Projection(**entry))
            except TypeError as exc:
                raise ConfigError(f"projection {entry['name']}: {exc}") from None
        resets = [Reset(**r) for r in (cfg.get("resets") or [])]
        return cls(fields, traces, boosts, stimuli, projections, resets)

    def _names(self) -> set[str]:
        return set(self.fields) | set(self.traces) | set(self.boosts) | set(self.stimuli)

    def _validate(self) -> None:
        names = self._names()
        all_lists = [self.fields, self.traces, self.boosts, self.stimuli]
        if sum(len(x) for x in all_lists) != len(names):
            raise ConfigError("element names must be unique across fields, traces, boosts and stimuli")
        nodes = {n for n, f in self.fields.items() if f.dims == 0} | set(self.boosts)
        nodes |= {n for n, t in self.traces.items() if t.shape == ()}
        for p in self.projections:
            if p.source not in names:
                raise ConfigError(f"projection {p.name}: dangling source {p.source!r}")
            if p.target not in self.fields:
                raise ConfigError(f"projection {p.name}: target {p.target!r} is not a field")
            if p.mask is not None and p.mask not in names:
                raise ConfigError(f"projection {p.name}: dangling mask {p.mask!r}")
            if p.gate is not None and p.gate not in nodes:
                raise ConfigError(f"projection {p.name}: gate {p.gate!r} is not a node")
        for t in self.traces.values():
            if t.gate is not None and t.gate not in nodes:
                raise ConfigError(f"trace {t.name}: gate {t.gate!r} is not a node")
        for b in self.boosts.values():
            for ref in (b.active, b.threshold):
                if ref not in nodes:
                    raise ConfigError(f"boost {b.name}: {ref!r} is not a node")
        for r in self.resets:
            if r.target not in self.fields and r.target not in self.traces:
                raise ConfigError(f"reset: unknown target {r.target!r}")
            if r.trigger not in nodes:
                raise ConfigError(f"reset: trigger {r.trigger!r} is not a node")

    # ------------------------------------------------------------- accessors
    def output(self, name: str) -> np.ndarray:
        if name in self.fields:
            return self._field_output(name)
        if name in self.traces:
            return self.traces[name].v
        if name in self.boosts:
            return np.asarray(self.boosts[name].v)
        if name in self.stimuli:
            return self.stimuli[name]
        raise KeyError(name)

    def value(self, name: str) -> float:
        """Maximum output of an element (the node value for 0-D elements)."""
        out = self.output(name)
        return float(np.max(out)) if np.size(out) else 0.0

    def set_stimulus(self, name: str, value) -> None:
        """Overwrite a stimulus. Stimuli must only be written through this method."""
        stim = self.stimuli[name]
        stim[...] = value
        self._stim_live.pop(name, None)

    def set_trace(self, name: str, values) -> None:
        """Overwrite a memory trace (used by replays that start from a recorded state)."""
        tr = self.traces[name]
        tr.v[...] = values
        self._trace_live.pop(name, None)

    def set_activation(self, name: str, values) -> None:
        self.fields[name].set_activation(values)
        self._rest[name] = False

    def _field_output(self, name: str) -> np.ndarray:
        if self._rest[name]:
            cached = self._rest_out.get(name)
            if cached is None:
                cached = self.fields[name].output()
                self._rest_out[name] = cached
            return cached
        return self.fields[name].output()

    def reset(self) -> None:
        for n, f in self.fields.items():
            f.reset()
            self._rest[n] = True
        for t in self.traces.values():
            t.reset()
        for b in self.boosts.values():
            b.reset()
        for s in self.stimuli.values():
            s[...] = 0.0
        self._trace_live.clear()
        self._stim_live.clear()
        for r in self.resets:
            r._armed = True
        self.time_ms = 0.0

    def reset_element(self, name: str) -> None:
        if name in self.fields:
            self.fields[name].reset()
            self._rest[name] = True
        elif name in self.traces:
            self.traces[name].reset()
            self._trace_live.pop(name, None)

    # ------------------------------------------------------------------ step
    def _liveness(self, outs: dict) -> dict:
        live = {}
        for n in self.fields:
            if self._rest[n]:
                cached = self._rest_live.get(n)
                if cached is None:
                    cached = self._rest_live[n] = bool(np.any(outs[n]))
                live[n] = cached
            else:
                live[n] = bool(np.any(outs[n]))
        for n in self.traces:
            cached = self._trace_live.get(n)
            if cached is None:
                cached = self._trace_live[n] = bool(np.any(outs[n]))
            live[n] = cached
        for n in self.boosts:
            live[n] = bool(outs[n] != 0.0)
        for n in self.stimuli:
            cached = self._stim_live.get(n)
            if cached is None:
                cached = self._stim_live[n] = bool(np.any(outs[n]))
            live[n] = cached
        return live

    def step(self, dt: float) -> None:
        """Advance every element by ``dt`` from the outputs sampled at entry.

        A field that emits nothing and receives no input is held at its resting
        level (its noise is not integrated); this is what makes large, mostly
        quiet networks cheap to step.
        """
        outs = {n: self._field_output(n) for n in self.fields}
        for n, t in self.traces.items():
            outs[n] = t.v.copy() if n in self._read_by_traces else t.v
        outs.update({n: np.asarray(b.v) for n, b in self.boosts.items()})
        outs.update(self.stimuli)
        live = self._liveness(outs)

        for name, fld in self.fields.items():
            inp = None
            for p in self._incoming[name]:
                if not live[p.source]:
                    continue
                gate = None
                if p.gate is not None:
                    gate = float(outs[p.gate])
                    if gate == 0.0:
                        continue
                mask = None
                if p.mask is not None:
                    if not live[p.mask]:
                        continue
                    mask = outs[p.mask]
                contrib = p.apply(outs[p.source], fld.shape, mask, gate)
                inp = contrib if inp is None else inp + contrib
            if inp is None and not live[name]:
                if not self._rest[name]:
                    fld.reset()
                    self._rest[name] = True
                continue
            if inp is None:
                inp = np.zeros(fld.shape)
            step_field(fld, inp, dt, output=outs[name])
            if np.max(np.abs(fld.u - fld.h)) < REST_SNAP:
                fld.reset()
                self._rest[name] = True
            else:
                self._rest[name] = False

        for tr in self.traces.values():
            gate = 1.0 if tr.gate is None else float(outs[tr.gate])
            if gate == 0.0:
                continue
            if not live[tr.source] and not live[tr.name]:
                continue
            step_memory_trace(tr, outs[tr.source], gate, dt)
            self._trace_live.pop(tr.name, None)

        for b in self.boosts.values():
            step_slow_boost(b, float(outs[b.active]), float(outs[b.threshold]), dt)

        for r in self.resets:
            level = float(np.max(outs[r.trigger]))
            if level >= r.threshold:
                if r._armed:
                    self.reset_element(r.target)
                    r._armed = False
            else:
                r._armed = True

        self.time_ms += dt
