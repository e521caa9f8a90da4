"""Loading, overriding and validating configuration documents."""
from __future__ import annotations

import copy
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from .errors import ConfigError

DEFAULT_CONFIG = "architecture.yaml"


def deep_merge(base: Mapping[str, Any], override: Optional[Mapping[str, Any]]) -> dict:
    """Recursively merge ``override`` into a copy of ``base``. Lists are replaced, not merged."""
    out = copy.deepcopy(dict(base))
    for key, val in (override or {}).items():
        if isinstance(val, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def set_path(cfg: dict, dotted: str, value: Any) -> dict:
    """Set ``a.b.c`` in a nested dict, creating intermediate mappings."""
    node = cfg
    *parents, leaf = dotted.split(".")
    for p in parents:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{dotted}: {p} is not a mapping")
    node[leaf] = value
    return cfg


def load_config(path: Optional[str | Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> dict:
    """Read the packaged default (or ``path``) and apply ``overrides``.

    ``overrides`` may be nested or use dotted keys (``network.traces.visual_memory.tau_plus``).
    """
    if path is None:
        text = resources.files("dnfcurio.data").joinpath(DEFAULT_CONFIG).read_text()
    else:
        text = Path(path).read_text()
    try:
        cfg = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("configuration root must be a mapping")
    nested, dotted = {}, {}
    for k, v in (overrides or {}).items():
        (dotted if "." in k else nested)[k] = v
    cfg = deep_merge(cfg, nested)
    for k, v in dotted.items():
        set_path(cfg, k, v)
    return cfg
