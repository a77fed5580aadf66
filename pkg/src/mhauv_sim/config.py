"""Strict YAML scenario configuration.

Every gap-filling default in the library is overridable here; unknown keys
are rejected (with the offending key and line) so a typo cannot silently
fall back to a default.  Parsing then re-serializing is lossless for all
recognized keys.
"""

from __future__ import annotations

import math
from typing import Any

import yaml

from .controllers import CascadeGains, PidGains, TwsmcGains
from .engine import MODES, DisturbancePulse, Scenario
from .propeller import ThrustModel
from .references import CosineRef, ProfileRef, ReferenceSpec, SineRef, StepRef
from .supervisor import SwitchConfig
from .types import Environment, VehicleParams, VehicleState


class ConfigError(Exception):
    """Malformed configuration; the message names the key and line."""


def _fail(message: str, path: str, lines: dict[str, int]) -> None:
    line = lines.get(path)
    where = f" (line {line})" if line is not None else ""
    raise ConfigError(f"{message} '{path}'{where}")


def _collect_lines(node: yaml.Node, prefix: str, out: dict[str, int]) -> None:
    out.setdefault(prefix or "<root>", node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            out[path] = key_node.start_mark.line + 1
            _collect_lines(value_node, path, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _collect_lines(item, f"{prefix}[{i}]", out)


def _check_keys(
    mapping: dict, allowed: tuple[str, ...], path: str, lines: dict[str, int]
) -> None:
    if not isinstance(mapping, dict):
        _fail("expected a mapping at", path, lines)
    for key in mapping:
        if key not in allowed:
            _fail("unknown key", f"{path}.{key}" if path else str(key), lines)


def _number(value: Any, path: str, lines: dict[str, int]) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail("expected a number at", path, lines)
    if not math.isfinite(value):
        _fail("expected a finite number at", path, lines)
    return float(value)


def _integer(value: Any, path: str, lines: dict[str, int]) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail("expected an integer at", path, lines)
    return value


def _string(value: Any, path: str, lines: dict[str, int]) -> str:
    if not isinstance(value, str):
        _fail("expected a string at", path, lines)
    return value


def _vector(
    value: Any, n: int, path: str, lines: dict[str, int]
) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        _fail(f"expected a list of {n} numbers at", path, lines)
    return tuple(_number(v, f"{path}[{i}]", lines) for i, v in enumerate(value))


def _build(cls, section: dict, fields: dict[str, Any], path: str,
           lines: dict[str, int]):
    _check_keys(section, tuple(fields), path, lines)
    kwargs = {}
    for key, value in section.items():
        conv = fields[key]
        kwargs[key] = conv(value, f"{path}.{key}", lines)
    try:
        obj = cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid section '{path}': {exc}") from exc
    return obj


def _num_field(value, path, lines):
    return _number(value, path, lines)


def _vec3_field(value, path, lines):
    return _vector(value, 3, path, lines)


def _vec4_field(value, path, lines):
    return _vector(value, 4, path, lines)


def _vec6_field(value, path, lines):
    return _vector(value, 6, path, lines)


def _opt_num_field(value, path, lines):
    if value is None:
        return None
    return _number(value, path, lines)


_PID_FIELDS = {
    "kp": _num_field, "ki": _num_field, "kd": _num_field,
    "out_limit": _num_field, "int_limit": _opt_num_field,
}

_VEHICLE_FIELDS = {
    "m_v": _num_field, "m_a0": _num_field,
    "I_xx": _num_field, "I_yy": _num_field, "I_zz": _num_field,
    "I_a_xx": _num_field, "I_a_yy": _num_field, "I_a_zz": _num_field,
    "I_zzm": _num_field, "l": _num_field, "H": _num_field, "V_0": _num_field,
    "A_d0": _vec6_field, "C_d": _num_field, "d_prop": _num_field,
}

_ENV_FIELDS = {
    "rho_water": _num_field, "rho_air": _num_field, "g0": _num_field,
    "water_surface_z": _num_field,
}

_THRUST_FIELDS = {
    "c_t_air": _num_field, "c_t_water": _num_field,
    "h_air": _num_field, "h_water": _num_field, "diameter": _num_field,
    "torque_thrust_ratio": _num_field, "omega_max": _num_field,
}

_TWSMC_FIELDS = {
    "c": _vec4_field, "r1": _num_field, "r2": _num_field,
    "k_m": _num_field, "k_big": _num_field, "c_bound": _num_field,
    "thrust_min": _num_field, "thrust_max": _num_field,
    "torque_limit": _vec3_field,
}

_SWITCH_FIELDS = {
    "h_upper": _num_field, "h_lower": _num_field, "delta_z": _num_field,
    "a_m": _num_field, "a_vm": _num_field, "dwell": _num_field,
}

_STATE_FIELDS = {
    "position": _vec3_field, "body_velocity": _vec3_field,
    "attitude": _vec3_field, "body_rates": _vec3_field,
}

_SCENARIO_FIELDS = ("duration", "physics_dt", "control_dt", "mode", "seed")

_TOP_LEVEL = (
    "scenario", "reference", "initial_state", "disturbances", "vehicle",
    "environment", "thrust_model", "pid", "twsmc", "switching",
)


def _build_reference(
    section: dict, path: str, lines: dict[str, int]
) -> ReferenceSpec:
    if not isinstance(section, dict) or "kind" not in section:
        _fail("reference needs a 'kind' at", path, lines)
    kind = _string(section["kind"], f"{path}.kind", lines)
    body = {k: v for k, v in section.items() if k != "kind"}
    if kind == "step":
        fields = {"z_from": _num_field, "z_to": _num_field, "t_step": _num_field}
        ref = _build(StepRef, body, fields, path, lines)
    elif kind in ("sine", "cosine"):
        fields = {"amplitude": _num_field, "period": _num_field,
                  "offset": _num_field}
        cls = SineRef if kind == "sine" else CosineRef
        ref = _build(cls, body, fields, path, lines)
    elif kind == "profile":
        _check_keys(body, ("knots",), path, lines)
        knots_raw = body.get("knots")
        if not isinstance(knots_raw, list) or len(knots_raw) < 2:
            _fail("profile needs a list of [t, z] knots at", f"{path}.knots", lines)
        knots = tuple(
            tuple(_vector(k, 2, f"{path}.knots[{i}]", lines))
            for i, k in enumerate(knots_raw)
        )
        ref = ProfileRef(knots=knots)
    else:
        _fail(f"unknown reference kind {kind!r} at", f"{path}.kind", lines)
    try:
        ref.validate()
    except ValueError as exc:
        raise ConfigError(f"invalid reference: {exc}") from exc
    return ref


def _build_pid(section: dict, lines: dict[str, int]) -> CascadeGains:
    allowed = ("altitude", "attitude", "position", "thrust_min", "thrust_max",
               "max_tilt", "tilt_divisor_floor")
    _check_keys(section, allowed, "pid", lines)
    defaults = CascadeGains()
    kwargs: dict[str, Any] = {}
    for loop in ("altitude", "attitude", "position"):
        if loop in section:
            base: PidGains = getattr(defaults, loop)
            loop_section = dict(section[loop]) if isinstance(section[loop], dict) else section[loop]
            _check_keys(loop_section, tuple(_PID_FIELDS), f"pid.{loop}", lines)
            merged = {
                "kp": base.kp, "ki": base.ki, "kd": base.kd,
                "out_limit": base.out_limit, "int_limit": base.int_limit,
            }
            for key, value in loop_section.items():
                merged[key] = _PID_FIELDS[key](value, f"pid.{loop}.{key}", lines)
            kwargs[loop] = PidGains(**merged)
    for key in ("thrust_min", "thrust_max", "max_tilt", "tilt_divisor_floor"):
        if key in section:
            kwargs[key] = _number(section[key], f"pid.{key}", lines)
    return CascadeGains(**{**_dataclass_kwargs(defaults), **kwargs})


def _dataclass_kwargs(obj) -> dict[str, Any]:
    return {f: getattr(obj, f) for f in obj.__dataclass_fields__}


def scenario_from_dict(
    data: dict, lines: dict[str, int] | None = None
) -> Scenario:
    """Build a Scenario from parsed configuration data, strictly validated."""
    lines = lines or {}
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a mapping")
    _check_keys(data, _TOP_LEVEL, "", lines)
    if "reference" not in data:
        raise ConfigError("missing required section 'reference'")

    kwargs: dict[str, Any] = {}
    kwargs["reference"] = _build_reference(data["reference"], "reference", lines)

    sc = data.get("scenario", {})
    _check_keys(sc, _SCENARIO_FIELDS, "scenario", lines)
    kwargs["duration"] = _number(sc["duration"], "scenario.duration", lines) \
        if "duration" in sc else 20.0
    if "physics_dt" in sc:
        kwargs["physics_dt"] = _number(sc["physics_dt"], "scenario.physics_dt", lines)
    if "control_dt" in sc:
        kwargs["control_dt"] = _number(sc["control_dt"], "scenario.control_dt", lines)
    if "mode" in sc:
        mode = _string(sc["mode"], "scenario.mode", lines)
        if mode not in MODES:
            raise ConfigError(
                f"invalid mode {mode!r} at 'scenario.mode'; expected one of {MODES}"
            )
        kwargs["mode"] = mode
    if "seed" in sc:
        kwargs["seed"] = _integer(sc["seed"], "scenario.seed", lines)

    if "initial_state" in data:
        kwargs["initial_state"] = _build(
            VehicleState, data["initial_state"], _STATE_FIELDS,
            "initial_state", lines,
        )
    if "vehicle" in data:
        kwargs["vehicle"] = _build(
            VehicleParams, data["vehicle"], _VEHICLE_FIELDS, "vehicle", lines
        )
    if "environment" in data:
        kwargs["environment"] = _build(
            Environment, data["environment"], _ENV_FIELDS, "environment", lines
        )
    if "thrust_model" in data:
        kwargs["thrust_model"] = _build(
            ThrustModel, data["thrust_model"], _THRUST_FIELDS,
            "thrust_model", lines,
        )
    if "pid" in data:
        kwargs["cascade_gains"] = _build_pid(data["pid"], lines)
    if "twsmc" in data:
        kwargs["twsmc_gains"] = _build(
            TwsmcGains, data["twsmc"], _TWSMC_FIELDS, "twsmc", lines
        )
    if "switching" in data:
        kwargs["switch_config"] = _build(
            SwitchConfig, data["switching"], _SWITCH_FIELDS, "switching", lines
        )
    if "disturbances" in data:
        pulses = data["disturbances"]
        if not isinstance(pulses, list):
            _fail("expected a list at", "disturbances", lines)
        built = []
        fields = {"t_start": _num_field, "duration": _num_field,
                  "wrench": _vec6_field}
        for i, pulse in enumerate(pulses):
            built.append(_build(
                DisturbancePulse, pulse, fields, f"disturbances[{i}]", lines
            ))
        kwargs["disturbances"] = tuple(built)

    scenario = Scenario(**kwargs)
    try:
        scenario.validate()
    except ValueError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc
    return scenario


def load_config_text(text: str) -> Scenario:
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if node is None or data is None:
        raise ConfigError("empty configuration")
    lines: dict[str, int] = {}
    _collect_lines(node, "", lines)
    return scenario_from_dict(data, lines)


def load_config(path: str) -> Scenario:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return load_config_text(text)


def _reference_to_dict(ref: ReferenceSpec) -> dict[str, Any]:
    if isinstance(ref, StepRef):
        return {"kind": "step", "z_from": ref.z_from, "z_to": ref.z_to,
                "t_step": ref.t_step}
    if isinstance(ref, SineRef):
        return {"kind": "sine", "amplitude": ref.amplitude,
                "period": ref.period, "offset": ref.offset}
    if isinstance(ref, CosineRef):
        return {"kind": "cosine", "amplitude": ref.amplitude,
                "period": ref.period, "offset": ref.offset}
    if isinstance(ref, ProfileRef):
        return {"kind": "profile", "knots": [list(k) for k in ref.knots]}
    raise TypeError(f"unknown reference type {type(ref)!r}")


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    """Full nested configuration dict; inverse of scenario_from_dict."""
    p = scenario.vehicle
    e = scenario.environment
    t = scenario.thrust_model
    g = scenario.cascade_gains
    w = scenario.twsmc_gains
    s = scenario.switch_config
    st = scenario.initial_state

    def pid_dict(pg: PidGains) -> dict[str, Any]:
        return {"kp": pg.kp, "ki": pg.ki, "kd": pg.kd,
                "out_limit": pg.out_limit, "int_limit": pg.int_limit}

    return {
        "scenario": {
            "duration": scenario.duration,
            "physics_dt": scenario.physics_dt,
            "control_dt": scenario.control_dt,
            "mode": scenario.mode,
            "seed": scenario.seed,
        },
        "reference": _reference_to_dict(scenario.reference),
        "initial_state": {
            "position": list(st.position),
            "body_velocity": list(st.body_velocity),
            "attitude": list(st.attitude),
            "body_rates": list(st.body_rates),
        },
        "disturbances": [
            {"t_start": d.t_start, "duration": d.duration,
             "wrench": list(d.wrench)}
            for d in scenario.disturbances
        ],
        "vehicle": {
            "m_v": p.m_v, "m_a0": p.m_a0,
            "I_xx": p.I_xx, "I_yy": p.I_yy, "I_zz": p.I_zz,
            "I_a_xx": p.I_a_xx, "I_a_yy": p.I_a_yy, "I_a_zz": p.I_a_zz,
            "I_zzm": p.I_zzm, "l": p.l, "H": p.H, "V_0": p.V_0,
            "A_d0": list(p.A_d0), "C_d": p.C_d, "d_prop": p.d_prop,
        },
        "environment": {
            "rho_water": e.rho_water, "rho_air": e.rho_air, "g0": e.g0,
            "water_surface_z": e.water_surface_z,
        },
        "thrust_model": {
            "c_t_air": t.c_t_air, "c_t_water": t.c_t_water,
            "h_air": t.h_air, "h_water": t.h_water, "diameter": t.diameter,
            "torque_thrust_ratio": t.torque_thrust_ratio,
            "omega_max": t.omega_max,
        },
        "pid": {
            "altitude": pid_dict(g.altitude),
            "attitude": pid_dict(g.attitude),
            "position": pid_dict(g.position),
            "thrust_min": g.thrust_min, "thrust_max": g.thrust_max,
            "max_tilt": g.max_tilt,
            "tilt_divisor_floor": g.tilt_divisor_floor,
        },
        "twsmc": {
            "c": list(w.c), "r1": w.r1, "r2": w.r2, "k_m": w.k_m,
            "k_big": w.k_big, "c_bound": w.c_bound,
            "thrust_min": w.thrust_min, "thrust_max": w.thrust_max,
            "torque_limit": list(w.torque_limit),
        },
        "switching": {
            "h_upper": s.h_upper, "h_lower": s.h_lower, "delta_z": s.delta_z,
            "a_m": s.a_m, "a_vm": s.a_vm, "dwell": s.dwell,
        },
    }


def dump_config(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=True)
