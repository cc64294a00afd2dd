"""Run and sweep configuration documents (JSON, all quantities in units of λ)."""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import dynamics
from .invariant import PulseKind, PulseProtocol
from .model import Scheme, SchemeSpec

UNITS = "lambda"
SCHEME_KEYS = ("scheme", "m", "v", "lam", "t_f", "epsilon", "kappa_c", "kappa_f", "gamma")
RUN_KEYS = {"units", "sin_epsilon", "upsilon", "protocol", "open_system", "steps", "samples",
            "output", *SCHEME_KEYS}
SWEEP_KEYS = RUN_KEYS | {"axes", "observables"}
PROTOCOL_KEYS = {"kind", "amp", "exponent", "amp_ratio"}

NUMERIC_AXES = ("v", "t_f", "epsilon", "sin_epsilon", "kappa_c", "kappa_f", "gamma", "upsilon",
                "rate", "m", "amp")
CATEGORICAL_AXES = ("scheme", "protocol", "channel")
CHANNELS = ("kappa_c", "kappa_f", "gamma")
DECAY_AXES = {"kappa_c", "kappa_f", "gamma", "upsilon", "channel", "rate"}


class ConfigError(ValueError):
    pass


def _number(doc: dict, key: str, default=None, integer: bool = False):
    if key not in doc or doc[key] is None:
        return default
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"'{key}' must be a number, got {val!r}")
    if integer:
        if int(val) != val:
            raise ConfigError(f"'{key}' must be an integer, got {val!r}")
        return int(val)
    if not math.isfinite(val):
        raise ConfigError(f"'{key}' must be finite, got {val!r}")
    return float(val)


def _check_keys(doc: dict, allowed: set[str], where: str) -> None:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}' in {where}")


@dataclass(frozen=True)
class RunConfig:
    spec: SchemeSpec
    protocol: PulseProtocol
    open_system: bool
    steps: int = dynamics.DEFAULT_STEPS
    samples: int = dynamics.DEFAULT_SAMPLES
    output: str | None = None

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "RunConfig":
        _check_keys(doc, RUN_KEYS, "run config")
        return _parse_run(doc)

    def to_dict(self) -> dict[str, Any]:
        s, p = self.spec, self.protocol
        return {
            "units": UNITS, "scheme": s.scheme.value, "m": s.m, "v": s.v, "lam": s.lam,
            "t_f": s.t_f, "epsilon": s.epsilon, "kappa_c": s.kappa_c, "kappa_f": s.kappa_f,
            "gamma": s.gamma,
            "protocol": {"kind": p.kind.value, "amp": p.amp, "exponent": p.exponent,
                         "amp_ratio": p.amp_ratio},
            "open_system": self.open_system, "steps": self.steps, "samples": self.samples,
            "output": self.output,
        }


def _parse_run(doc: dict[str, Any]) -> RunConfig:
    units = doc.get("units", UNITS)
    if units != UNITS:
        raise ConfigError(f"'units' must be {UNITS!r}, got {units!r}")
    if "scheme" not in doc:
        raise ConfigError("missing key 'scheme'")
    try:
        scheme = Scheme(str(doc["scheme"]).upper())
    except ValueError:
        raise ConfigError(f"'scheme' must be one of {[s.value for s in Scheme]}, "
                          f"got {doc['scheme']!r}") from None
    if "epsilon" in doc and "sin_epsilon" in doc:
        raise ConfigError("'epsilon' and 'sin_epsilon' are mutually exclusive")
    kwargs: dict[str, Any] = {"scheme": scheme}
    for key in ("v", "lam", "t_f", "epsilon", "kappa_c", "kappa_f", "gamma"):
        val = _number(doc, key)
        if val is not None:
            kwargs[key] = val
    m = _number(doc, "m", integer=True)
    if m is not None:
        kwargs["m"] = m
    sin_eps = _number(doc, "sin_epsilon")
    if sin_eps is not None:
        if not 0 < sin_eps < 1:
            raise ConfigError(f"'sin_epsilon' must lie in (0, 1), got {sin_eps!r}")
        kwargs["epsilon"] = math.asin(sin_eps)
    upsilon = _number(doc, "upsilon")
    if upsilon is not None:
        if any(k in doc for k in CHANNELS):
            raise ConfigError("'upsilon' cannot be combined with individual decay rates")
        if upsilon < 0:
            raise ConfigError(f"'upsilon' must be nonnegative, got {upsilon!r}")
        lam = kwargs.get("lam", 1.0)
        kwargs.update(kappa_c=upsilon * lam, kappa_f=upsilon * lam, gamma=upsilon * lam)
    for key in CHANNELS:
        if kwargs.get(key, 0.0) < 0:
            raise ConfigError(f"'{key}' must be nonnegative, got {kwargs[key]!r}")
    try:
        spec = SchemeSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(_key_message(exc)) from None

    pdoc = doc.get("protocol", {"kind": "STAP"})
    _check_keys(pdoc, PROTOCOL_KEYS, "'protocol'")
    try:
        kind = PulseKind(str(pdoc.get("kind", "STAP")).upper())
    except ValueError:
        raise ConfigError(f"'protocol.kind' must be one of {[k.value for k in PulseKind]}, "
                          f"got {pdoc.get('kind')!r}") from None
    pkw = {k: _number(pdoc, k) for k in ("amp", "exponent", "amp_ratio") if k in pdoc}
    try:
        protocol = PulseProtocol(kind=kind, t_f=spec.t_f, v=spec.v, lam=spec.lam,
                                 epsilon=spec.epsilon if kind is PulseKind.STAP else None, **pkw)
    except ValueError as exc:
        raise ConfigError(_key_message(exc)) from None

    open_system = doc.get("open_system")
    if open_system is None:
        open_system = spec.open
    elif not isinstance(open_system, bool):
        raise ConfigError(f"'open_system' must be true or false, got {open_system!r}")
    steps = _number(doc, "steps", dynamics.DEFAULT_STEPS, integer=True)
    samples = _number(doc, "samples", dynamics.DEFAULT_SAMPLES, integer=True)
    if steps <= 0:
        raise ConfigError(f"'steps' must be positive, got {steps}")
    if samples < 2:
        raise ConfigError(f"'samples' must be at least 2, got {samples}")
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError(f"'output' must be a path string, got {output!r}")
    return RunConfig(spec=spec, protocol=protocol, open_system=open_system, steps=steps,
                     samples=samples, output=output)


def _key_message(exc: ValueError) -> str:
    msg = str(exc)
    for key in ("epsilon", "t_f", "v", "lam", "kappa_c", "kappa_f", "gamma", "exponent", "m"):
        if msg.startswith(key) or msg.startswith(f"{key}="):
            return f"'{key}': {msg}"
    if "needs m" in msg:
        return f"'m': {msg}"
    return msg


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple

    @property
    def categorical(self) -> bool:
        return self.name in CATEGORICAL_AXES


def _parse_axis(doc: dict) -> Axis:
    _check_keys(doc, {"name", "values", "start", "stop", "num", "step"}, "axis")
    name = doc.get("name")
    if name not in NUMERIC_AXES + CATEGORICAL_AXES:
        raise ConfigError(f"unknown axis name {name!r}")
    if "values" in doc:
        values = doc["values"]
        if not isinstance(values, list):
            raise ConfigError(f"axis '{name}' values must be a list")
    elif {"start", "stop", "num"} <= set(doc):
        num = _number(doc, "num", integer=True)
        if num < 1:
            raise ConfigError(f"axis '{name}' needs num >= 1")
        values = [float(x) for x in np.linspace(_number(doc, "start"), _number(doc, "stop"), num)]
        values = [round(x, 12) for x in values]
    else:
        raise ConfigError(f"axis '{name}' needs 'values' or 'start'/'stop'/'num'")
    if not values:
        raise ConfigError(f"axis '{name}' is empty")
    if name in CATEGORICAL_AXES:
        values = [str(x).upper() if name != "channel" else str(x) for x in values]
        allowed = {"scheme": [s.value for s in Scheme], "protocol": [k.value for k in PulseKind],
                   "channel": list(CHANNELS)}[name]
        bad = [x for x in values if x not in allowed]
        if bad:
            raise ConfigError(f"axis '{name}' value {bad[0]!r} not in {allowed}")
        if len(set(values)) != len(values):
            raise ConfigError(f"axis '{name}' values must be unique")
    else:
        for x in values:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ConfigError(f"axis '{name}' values must be numbers, got {x!r}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError(f"axis '{name}' values must be strictly increasing")
        if name == "m":
            values = [int(x) for x in values]
        else:
            values = [float(x) for x in values]
    return Axis(name=name, values=tuple(values))


@dataclass(frozen=True)
class SweepSpec:
    base: dict
    axes: tuple[Axis, ...]
    observables: tuple[str, ...]
    open_system: bool
    output: str | None

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "SweepSpec":
        _check_keys(doc, SWEEP_KEYS, "sweep config")
        raw_axes = doc.get("axes")
        if not isinstance(raw_axes, list) or not 1 <= len(raw_axes) <= 2:
            raise ConfigError("'axes' must list one or two axes")
        axes = tuple(_parse_axis(a) for a in raw_axes)
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ConfigError("axis names must be distinct")
        if "upsilon" in names and (set(names) & (DECAY_AXES - {"upsilon"})
                                   or any(k in doc for k in CHANNELS)):
            raise ConfigError("an 'upsilon' axis forbids individual decay axes and rates")
        if ("channel" in names) != ("rate" in names):
            raise ConfigError("'channel' and 'rate' axes must be used together")
        observables = tuple(doc.get("observables", ["final_fidelity"]))
        for ob in observables:
            if ob != "final_fidelity" and not ob.startswith("max_"):
                raise ConfigError(f"unknown observable {ob!r}")
        base = {k: v for k, v in doc.items() if k not in ("axes", "observables", "output")}
        # validate the base document once, with a representative value on every axis
        probe = _cell_document(base, axes, tuple(a.values[0] for a in axes))
        run_cfg = _parse_run(probe)
        open_system = doc.get("open_system")
        if open_system is None:
            open_system = run_cfg.spec.open or bool(set(names) & DECAY_AXES)
        return cls(base=base, axes=axes, observables=observables, open_system=bool(open_system),
                   output=doc.get("output"))

    def cells(self) -> list[tuple]:
        if len(self.axes) == 1:
            return [(x,) for x in self.axes[0].values]
        return [(x, y) for x in self.axes[0].values for y in self.axes[1].values]

    def header(self) -> list[str]:
        return [a.name for a in self.axes] + list(self.observables)


def _cell_document(base: dict, axes: tuple[Axis, ...], point: tuple) -> dict:
    doc = copy.deepcopy(base)
    doc.pop("open_system", None)
    assign = dict(zip((a.name for a in axes), point))
    if "channel" in assign:
        for key in CHANNELS:
            doc[key] = 0.0
        doc[assign.pop("channel")] = assign.pop("rate")
    if "protocol" in assign:
        doc.setdefault("protocol", {})
        doc["protocol"] = dict(doc["protocol"], kind=assign.pop("protocol"))
    if "amp" in assign:
        doc.setdefault("protocol", {})
        doc["protocol"] = dict(doc["protocol"], amp=assign.pop("amp"))
    if "sin_epsilon" in assign:
        doc.pop("epsilon", None)
    if "epsilon" in assign:
        doc.pop("sin_epsilon", None)
    if "upsilon" in assign:
        for key in CHANNELS:
            doc.pop(key, None)
    doc.update(assign)
    return doc


def cell_config(sweep: SweepSpec, point: tuple) -> RunConfig:
    doc = _cell_document(sweep.base, sweep.axes, point)
    cfg = _parse_run(doc)
    return replace(cfg, open_system=sweep.open_system)


def evaluate_cell(args) -> list[float]:
    sweep, point = args
    cfg = cell_config(sweep, point)
    result = dynamics.run(cfg.spec, cfg.protocol, open_system=cfg.open_system, steps=cfg.steps,
                          samples=cfg.samples)
    out = []
    traj = result.trajectory
    for ob in sweep.observables:
        if ob == "final_fidelity":
            out.append(result.final_fidelity)
            continue
        name = ob[4:]
        series = traj.derived_populations.get(name, traj.populations.get(name))
        if series is None:
            raise ConfigError(f"observable {ob!r}: no population named {name!r}")
        out.append(float(np.nanmax(series)))
    return out


def run_sweep(sweep: SweepSpec, workers: int | None = None) -> list[list]:
    points = sweep.cells()
    values = dynamics.map_cells(evaluate_cell, [(sweep, p) for p in points], workers)
    return [list(p) + v for p, v in zip(points, values)]


def load_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None


REFERENCE = {"units": UNITS, "scheme": "FPT", "v": 1.0, "lam": 1.0, "t_f": 10.0, "sin_epsilon": 0.25}


def _preset(command: str, **doc) -> tuple[str, dict]:
    return command, {**REFERENCE, **doc}


def _grid(start: float, stop: float, step: float) -> list[float]:
    n = int(round((stop - start) / step)) + 1
    return [round(start + k * step, 10) for k in range(n)]


PRESETS: dict[str, tuple[str, dict]] = {
    "fig2": _preset("sweep", axes=[{"name": "v", "values": _grid(0.25, 2.0, 0.25)},
                                   {"name": "t_f", "values": _grid(2.0, 20.0, 0.5)}]),
    "fig3a": _preset("pulses"),
    "fig3b": _preset("simulate"),
    "fig3c": _preset("sweep", axes=[{"name": "protocol", "values": ["STAP", "ADIABATIC_TRIG"]},
                                    {"name": "t_f", "values": _grid(5.0, 100.0, 5.0)}]),
    "fig3d": _preset("simulate"),
    "fig4a": _preset("simulate", scheme="BELL_AUX"),
    "fig4b": _preset("simulate", scheme="BELL_AUX", t_f=60.0,
                     protocol={"kind": "ADIABATIC_TRIG", "amp": 1.0}),
    "fig4c": _preset("simulate", scheme="BELL_TWOATOM"),
    "fig4d": _preset("simulate", scheme="BELL_TWOATOM", t_f=60.0,
                     protocol={"kind": "ADIABATIC_EXP", "amp": 1.0, "exponent": 1.2,
                               "amp_ratio": 0.5}),
    "fig5a": _preset("simulate", scheme="GHZ", m=3),
    "fig5b": _preset("simulate", scheme="GHZ", m=3, t_f=60.0, sin_epsilon=0.02),
    "fig5c": _preset("simulate", scheme="W", m=3),
    "fig5d": _preset("simulate", scheme="W", m=3, t_f=100.0, sin_epsilon=0.02),
    "fig5e": _preset("simulate", scheme="TRANSFER"),
    "fig5f": _preset("simulate", scheme="TRANSFER", t_f=300.0, sin_epsilon=0.02),
    "fig6a": _preset("sweep", t_f=100.0, protocol={"kind": "ADIABATIC_TRIG", "amp": 1.0},
                     open_system=True,
                     axes=[{"name": "channel", "values": list(CHANNELS)},
                           {"name": "rate", "values": _grid(0.0, 0.1, 0.01)}]),
    "fig6b": _preset("sweep", open_system=True,
                     axes=[{"name": "channel", "values": list(CHANNELS)},
                           {"name": "rate", "values": _grid(0.0, 0.1, 0.01)}]),
    "fig7a": _preset("sweep", upsilon=0.05, open_system=True,
                     axes=[{"name": "t_f", "values": _grid(8.0, 20.0, 0.25)}]),
    "fig7b": _preset("sweep", open_system=False, observables=["max_phi0", "max_mu2"],
                     axes=[{"name": "t_f", "values": _grid(9.0, 20.0, 0.25)}]),
    "fig8a": _preset("sweep", open_system=True,
                     axes=[{"name": "scheme", "values": ["BELL_AUX", "BELL_TWOATOM"]},
                           {"name": "upsilon", "values": _grid(0.0, 0.1, 0.01)}]),
    "fig8b": _preset("sweep", m=3, open_system=True,
                     axes=[{"name": "scheme", "values": ["GHZ", "W"]},
                           {"name": "upsilon", "values": _grid(0.0, 0.1, 0.01)}]),
}


def preset(name: str) -> tuple[str, dict]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    command, doc = PRESETS[name]
    return command, copy.deepcopy(doc)
