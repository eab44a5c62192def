"""Experiment configuration: one frozen ``SimConfig`` with flat JSON keys.

Keys are ``section.field`` (``"synapse.tau_s": 5.0``) or top-level fields
(``"duration": 8000``). Nested objects are accepted and flattened. Unknown
keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .network import DelaySpec
from .params import (
    AnalysisParams,
    ConfigError,
    DriveParams,
    HopfParams,
    NetworkParams,
    NeuronParams,
    StdpParams,
    SweepGrid,
    SynapseParams,
    Thresholds,
)

SECTIONS = {
    "neuron": NeuronParams,
    "synapse": SynapseParams,
    "stdp": StdpParams,
    "drive": DriveParams,
    "network": NetworkParams,
    "delay": DelaySpec,
    "analysis": AnalysisParams,
    "thresholds": Thresholds,
    "hopf": HopfParams,
    "grid": SweepGrid,
}
TOP_LEVEL = ("duration", "burn_in", "dt", "output_dir")


@dataclass(frozen=True)
class SimConfig:
    neuron: NeuronParams = field(default_factory=NeuronParams)
    synapse: SynapseParams = field(default_factory=SynapseParams)
    stdp: StdpParams = field(default_factory=StdpParams)
    drive: DriveParams = field(default_factory=DriveParams)
    network: NetworkParams = field(default_factory=NetworkParams)
    delay: DelaySpec = field(default_factory=DelaySpec)
    analysis: AnalysisParams = field(default_factory=AnalysisParams)
    thresholds: Thresholds = field(default_factory=Thresholds)
    hopf: HopfParams = field(default_factory=HopfParams)
    grid: SweepGrid = field(default_factory=SweepGrid)
    duration: float = 8000.0
    burn_in: float = 500.0
    dt: float = 0.1
    output_dir: str = "out"

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")
        if not self.duration > self.burn_in >= 0:
            raise ConfigError("duration must exceed burn_in (and burn_in >= 0)")

    def with_overrides(self, overrides: Mapping[str, Any]) -> SimConfig:
        """Copy with flat-key overrides applied, e.g. ``{"stdp.lambda_p": 0}``."""
        flat = to_flat(self)
        flat.update(_flatten(overrides))
        return from_flat(flat)


def _flatten(mapping: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in mapping.items():
        full = f"{prefix}{key}"
        if isinstance(value, Mapping):
            out.update(_flatten(value, full + "."))
        else:
            out[full] = value
    return out


def _jsonable(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def to_flat(cfg: SimConfig) -> dict[str, Any]:
    """Every parameter, defaults included, as ``{flat key: JSON value}``."""
    flat: dict[str, Any] = {}
    for section in SECTIONS:
        obj = getattr(cfg, section)
        for f in dataclasses.fields(obj):
            flat[f"{section}.{f.name}"] = _jsonable(getattr(obj, f.name))
    for name in TOP_LEVEL:
        flat[name] = getattr(cfg, name)
    return flat


def _coerce(value: Any, default: Any, key: str) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be a boolean")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{key} must be a list")
        return tuple(_coerce(v, default[0] if default else 0.0, key) for v in value)
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return value
    if isinstance(default, float) or default is None:
        if value is None and default is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string")
        return value
    return value


def from_flat(mapping: Mapping[str, Any]) -> SimConfig:
    flat = _flatten(mapping)
    defaults = to_flat(SimConfig())
    unknown = sorted(set(flat) - set(defaults))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown configuration key")
    base = SimConfig()
    sections: dict[str, dict[str, Any]] = {s: {} for s in SECTIONS}
    top: dict[str, Any] = {}
    for key, value in flat.items():
        if "." in key:
            section, name = key.split(".", 1)
            dflt = getattr(getattr(base, section), name)
            sections[section][name] = _coerce(value, dflt, key)
        else:
            top[key] = _coerce(value, getattr(base, key), key)
    kwargs = {s: dataclasses.replace(getattr(base, s), **kw) for s, kw in sections.items()}
    kwargs.update(top)
    return SimConfig(**kwargs)


def _line_of(text: str, key: str) -> int | None:
    leaf = key.split(".")[-1]
    for pattern in (re.escape(f'"{key}"'), re.escape(f'"{leaf}"')):
        m = re.search(pattern, text)
        if m:
            return text.count("\n", 0, m.start()) + 1
    return None


def loads_config(text: str, source: str = "<config>") -> SimConfig:
    """Parse JSON config text; errors carry ``source:line:`` prefixes."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:1: top level must be a JSON object")
    try:
        return from_flat(raw)
    except (ConfigError, TypeError) as exc:
        msg = str(exc)
        key = msg.split(":")[0].split(" ")[0]
        line = _line_of(text, key)
        where = f"{source}:{line}" if line is not None else source
        raise ConfigError(f"{where}: {msg}") from None


def load_config(path: str | Path | None) -> SimConfig:
    if path is None:
        return SimConfig()
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from None
    return loads_config(text, str(p))
