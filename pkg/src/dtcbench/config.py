"""INI-style scenario files.

Four sections, ``[machine]``, ``[control]``, ``[scenario]`` and ``[fuzzy]``,
hold ``key = value`` lines; ``#`` starts a comment. Scalar values may carry a
trailing unit (``bus_voltage = 400 V``) which must match the key's unit.
Profiles are written ``t:value, t:value, ...``. Every key is optional; missing
keys take the library defaults.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .engine import RPM, ScenarioConfig, CONTROLLERS
from .flsvm import FuzzyConfig
from .plant import MachineParams


class ConfigError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


@dataclass(frozen=True)
class Key:
    section: str
    name: str
    target: str          # "machine.<field>", "fuzzy.<field>" or a ScenarioConfig field
    kind: str            # float, int, str, profile, list
    units: tuple = ()
    check: Callable | None = None
    scale: float = 1.0   # file value * scale = internal value


KEYS = [
    Key("machine", "stator_resistance", "machine.Rs", "float", ("ohm",), _pos),
    Key("machine", "rotor_resistance", "machine.Rr", "float", ("ohm",), _pos),
    Key("machine", "stator_leakage_inductance", "machine.Lls", "float", ("H",), _pos),
    Key("machine", "rotor_leakage_inductance", "machine.Llr", "float", ("H",), _pos),
    Key("machine", "magnetizing_inductance", "machine.Lm", "float", ("H",), _pos),
    Key("machine", "inertia", "machine.J", "float", ("kg*m^2", "kgm2"), _pos),
    Key("machine", "friction", "machine.F", "float", ("N*m*s", "Nms"), _nonneg),
    Key("machine", "pole_pairs", "machine.p", "int", (), lambda v: v >= 1),
    Key("machine", "bus_voltage", "machine.Vdc", "float", ("V",), _nonneg),
    Key("control", "controller", "controller", "str", (), lambda v: v in CONTROLLERS),
    Key("control", "flux_reference", "flux_ref", "float", ("Wb",), _pos),
    Key("control", "sampling_time", "dt_ctrl", "float", ("s",), _pos),
    Key("control", "sampling_time_us", "dt_ctrl", "float", ("us",), _pos, 1e-6),
    Key("control", "plant_substeps", "plant_substeps", "int", (), _pos),
    Key("control", "flux_band", "flux_band", "float", ("Wb",), _pos),
    Key("control", "torque_band", "torque_band", "float", ("N*m", "Nm"), _pos),
    Key("control", "kp", "kp", "float", (), _nonneg),
    Key("control", "ki", "ki", "float", (), _nonneg),
    Key("control", "torque_limit", "t_max", "float", ("N*m", "Nm"), _pos),
    Key("control", "flux_build_time", "flux_build_time", "float", ("s",), _nonneg),
    Key("control", "svm_magnitude", "svm_magnitude", "str", (),
        lambda v: v in ("scaled", "fixed")),
    Key("scenario", "speed_ref", "speed_ref", "profile", ("rad/s",)),
    Key("scenario", "speed_ref_rpm", "speed_ref", "profile", ("rpm",), None, RPM),
    Key("scenario", "load", "load", "profile", ("N*m", "Nm")),
    Key("scenario", "t_end", "t_end", "float", ("s",), _pos),
    Key("fuzzy", "flux_centers", "fuzzy.flux_centers", "list"),
    Key("fuzzy", "torque_centers", "fuzzy.torque_centers", "list"),
    Key("fuzzy", "flux_scale", "fuzzy.flux_scale", "float", ("Wb",), _pos),
    Key("fuzzy", "torque_scale", "fuzzy.torque_scale", "float", ("N*m", "Nm"), _pos),
]
_BY_NAME = {(k.section, k.name): k for k in KEYS}
SECTIONS = ("machine", "control", "scenario", "fuzzy")


def _split_unit(text: str, key: Key, line: int) -> str:
    parts = text.split()
    if len(parts) == 1:
        return parts[0]
    if len(parts) == 2 and key.kind in ("float", "int"):
        if parts[1] not in key.units:
            expected = "/".join(key.units) or "no unit"
            raise ConfigError(f"unit '{parts[1]}' does not match {key.name} ({expected})", line)
        return parts[0]
    raise ConfigError(f"cannot parse value '{text}' for {key.name}", line)


def _number(text: str, line: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"not a number: '{text}'", line) from None
    if not math.isfinite(v):
        raise ConfigError(f"non-finite value '{text}'", line)
    return v


def _convert(key: Key, text: str, line: int):
    if key.kind == "str":
        v = text.strip()
    elif key.kind == "int":
        s = _split_unit(text, key, line)
        try:
            v = int(s)
        except ValueError:
            raise ConfigError(f"{key.name} must be an integer, got '{s}'", line) from None
    elif key.kind == "float":
        v = _number(_split_unit(text, key, line), line) * key.scale
    elif key.kind == "list":
        v = tuple(_number(p.strip(), line) for p in text.split(","))
    else:  # profile
        body = text.strip()
        for u in key.units:
            if body.endswith(" " + u):
                body = body[: -len(u)].strip()
        pts = []
        for item in body.split(","):
            if ":" in item:
                ts, vs = item.split(":", 1)
                pts.append((_number(ts.strip(), line), _number(vs.strip(), line) * key.scale))
            elif len(body.split(",")) == 1:
                pts.append((0.0, _number(item.strip(), line) * key.scale))
            else:
                raise ConfigError(f"profile entries must be 't:value', got '{item}'", line)
        v = tuple(pts)
    if key.check is not None and not key.check(v):
        raise ConfigError(f"invalid value for {key.name}: {text.strip()}", line)
    return v


def parse_text(text: str, source: str = "<string>") -> tuple[ScenarioConfig, dict]:
    """Parse config text; returns the resolved config and per-field provenance."""
    values: dict[str, tuple] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header '{line}'", lineno)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", lineno)
        if section is None:
            raise ConfigError("key outside of any section", lineno)
        name, val = (s.strip() for s in line.split("=", 1))
        key = _BY_NAME.get((section, name))
        if key is None:
            raise ConfigError(f"unknown key '{name}' in [{section}]", lineno)
        if key.target in values:
            raise ConfigError(f"{key.target} set twice (first on line {values[key.target][1]})",
                              lineno)
        values[key.target] = (_convert(key, val, lineno), lineno)
    return _resolve(values, source)


def _resolve(values: dict, source: str) -> tuple[ScenarioConfig, dict]:
    prov = {}
    groups: dict[str, dict] = {"machine": {}, "fuzzy": {}, "": {}}
    for f in dataclasses.fields(MachineParams):
        prov[f"machine.{f.name}"] = "default"
    for f in dataclasses.fields(FuzzyConfig):
        prov[f"fuzzy.{f.name}"] = "default"
    for f in dataclasses.fields(ScenarioConfig):
        if f.name not in ("machine", "fuzzy", "rules"):
            prov[f.name] = "default"
    for target, (v, line) in values.items():
        grp, _, name = target.rpartition(".")
        groups[grp][name] = v
        prov[target] = f"{source}:{line}"

    def build(cls, kwargs, group):
        try:
            return cls(**kwargs)
        except ValueError as exc:
            lines = [ln for t, (_, ln) in values.items() if not group or t.startswith(group)]
            raise ConfigError(str(exc), min(lines) if lines else None) from None

    machine = build(MachineParams, groups["machine"], "machine.")
    fuzzy = build(FuzzyConfig, groups["fuzzy"], "fuzzy.")
    cfg = build(ScenarioConfig, dict(groups[""], machine=machine, fuzzy=fuzzy), "")
    return cfg, prov


def load_config(path) -> tuple[ScenarioConfig, dict]:
    path = Path(path)
    return parse_text(path.read_text(encoding="utf-8"), str(path))


def parse_config(path) -> ScenarioConfig:
    return load_config(path)[0]


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialise every field; ``parse_text(dump_config(c))[0] == c``."""
    m, fz = cfg.machine, cfg.fuzzy
    out = []

    def sec(name, pairs):
        out.append(f"[{name}]")
        out.extend(f"{k} = {v}" for k, v in pairs)
        out.append("")

    def prof(p):
        return ", ".join(f"{_fmt(t)}:{_fmt(v)}" for t, v in p)

    sec("machine", [
        ("stator_resistance", _fmt(m.Rs)), ("rotor_resistance", _fmt(m.Rr)),
        ("stator_leakage_inductance", _fmt(m.Lls)), ("rotor_leakage_inductance", _fmt(m.Llr)),
        ("magnetizing_inductance", _fmt(m.Lm)), ("inertia", _fmt(m.J)),
        ("friction", _fmt(m.F)), ("pole_pairs", str(int(m.p))), ("bus_voltage", _fmt(m.Vdc)),
    ])
    sec("control", [
        ("controller", cfg.controller), ("flux_reference", _fmt(cfg.flux_ref)),
        ("sampling_time", _fmt(cfg.dt_ctrl)), ("plant_substeps", str(int(cfg.plant_substeps))),
        ("flux_band", _fmt(cfg.flux_band)), ("torque_band", _fmt(cfg.torque_band)),
        ("kp", _fmt(cfg.kp)), ("ki", _fmt(cfg.ki)), ("torque_limit", _fmt(cfg.t_max)),
        ("flux_build_time", _fmt(cfg.flux_build_time)), ("svm_magnitude", cfg.svm_magnitude),
    ])
    sec("scenario", [
        ("speed_ref", prof(cfg.speed_ref)), ("load", prof(cfg.load)), ("t_end", _fmt(cfg.t_end)),
    ])
    sec("fuzzy", [
        ("flux_centers", ", ".join(_fmt(c) for c in fz.flux_centers)),
        ("torque_centers", ", ".join(_fmt(c) for c in fz.torque_centers)),
        ("flux_scale", _fmt(fz.flux_scale)), ("torque_scale", _fmt(fz.torque_scale)),
    ])
    return "\n".join(out)


def echo(cfg: ScenarioConfig, prov: dict) -> str:
    """Resolved values, one per line, each tagged with where it came from."""
    lines = []
    for name, src in sorted(prov.items()):
        grp, _, field = name.rpartition(".")
        obj = {"machine": cfg.machine, "fuzzy": cfg.fuzzy, "": cfg}[grp]
        val = getattr(obj, field)
        if hasattr(val, "tolist"):
            val = val.tolist()
        lines.append(f"{name} = {val}  [{src}]")
    return "\n".join(lines)


def set_key(text: str, dotted: str, value: str) -> str:
    """Return ``text`` with ``section.key`` set to ``value`` (used by sweeps)."""
    section, _, name = dotted.partition(".")
    if (section, name) not in _BY_NAME:
        raise ConfigError(f"unknown key '{dotted}'")
    target = _BY_NAME[(section, name)].target
    # also drop aliases writing the same field, e.g. speed_ref vs speed_ref_rpm
    aliases = {k.name for k in KEYS if k.section == section and k.target == target}
    out, current = [], None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
        elif current == section and line.split("=", 1)[0].strip() in aliases:
            continue
        out.append(raw)
    return "\n".join(out) + f"\n[{section}]\n{name} = {value}\n"
