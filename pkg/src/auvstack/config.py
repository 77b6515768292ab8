"""Configuration loading and validation.

Three YAML documents compose a runnable system:
  - vehicle config: physical parameters, thrusters, control modes
  - fsm config: states binding one mode and prioritized behavior instances
  - runner config: paths to the other two plus rates, seed, log, API bind

Every rejection is a ParseError (syntax, carries the line) or a
ValidationError naming the offending field.
"""

from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .control import ControlMode, PidGains, dof_from_name
from .dynamics import NoiseConfig, VehicleParams
from .frames import Attitude, EarthFrame, Pose, Transform
from .guidance import BEHAVIOR_KINDS, Fsm, FsmState
from .mission import Waypoint, load_mission
from .thrusters import ArticulatedThruster, FixedThruster


class ConfigError(Exception):
    pass


class ParseError(ConfigError):
    def __init__(self, path, message, line=None):
        loc = f"{path}:{line + 1}" if line is not None else str(path)
        super().__init__(f"{loc}: {message}")
        self.path = path
        self.line = line


class ValidationError(ConfigError):
    def __init__(self, path, fld, message):
        super().__init__(f"{path}: {fld}: {message}")
        self.path = path
        self.field = fld


def _load_yaml(path: Path) -> dict:
    if not path.exists():
        raise ParseError(path, "file not found")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ParseError(path, str(getattr(e, "problem", e)), getattr(mark, "line", None)) from None
    if not isinstance(data, dict):
        raise ValidationError(path, "<root>", "expected a mapping")
    return data


def _get(data: dict, key: str, path, where: str, required: bool = True, default=None):
    if key not in data:
        if required:
            raise ValidationError(path, f"{where}.{key}" if where else key, "missing")
        return default
    return data[key]


def _floats(value, n: int, path, fld) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ValidationError(path, fld, f"expected a list of {n} numbers")
    try:
        return np.array([float(v) for v in value])
    except (TypeError, ValueError):
        raise ValidationError(path, fld, "entries must be numbers") from None


def _float(value, path, fld) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ValidationError(path, fld, "expected a number") from None
    if not math.isfinite(out):
        raise ValidationError(path, fld, "must be finite")
    return out


@dataclass
class VehicleConfig:
    name: str
    frame: EarthFrame
    params: VehicleParams
    thrusters: list
    modes: list
    datum: tuple[float, float] | None = None

    def mode(self, name: str) -> ControlMode:
        for m in self.modes:
            if m.name == name:
                return m
        raise KeyError(name)


def _parse_thruster(entry: dict, path, fld):
    for key in ("id", "type", "position", "orientation", "force_limits", "poly", "command_limits"):
        if key not in entry:
            raise ValidationError(path, f"{fld}.{key}", "missing")
    tid = str(entry["id"])
    kind = str(entry["type"])
    if kind not in ("fixed", "articulated"):
        raise ValidationError(path, f"{fld}.type", f"must be fixed or articulated, got {kind!r}")
    position = _floats(entry["position"], 3, path, f"{fld}.position")
    orientation = _floats(entry["orientation"], 3, path, f"{fld}.orientation")
    force_limits = _floats(entry["force_limits"], 2, path, f"{fld}.force_limits")
    command_limits = _floats(entry["command_limits"], 2, path, f"{fld}.command_limits")
    poly = entry["poly"]
    if not isinstance(poly, (list, tuple)) or not poly:
        raise ValidationError(path, f"{fld}.poly", "expected a non-empty coefficient list")
    poly = _floats(poly, len(poly), path, f"{fld}.poly")
    mount = Transform(Attitude.from_euler(*orientation), position)

    common = dict(
        id=tid,
        mount=mount,
        force_min=float(force_limits[0]),
        force_max=float(force_limits[1]),
        poly=poly,
        command_min=float(command_limits[0]),
        command_max=float(command_limits[1]),
    )
    try:
        if kind == "fixed":
            thruster = FixedThruster(**common)
            if not (thruster.force_min <= 0.0 <= thruster.force_max):
                raise ValueError("fixed thrusters need force_min <= 0 <= force_max")
            return thruster
        angle_limits = _floats(
            _get(entry, "angle_limits", path, fld), 2, path, f"{fld}.angle_limits"
        )
        return ArticulatedThruster(
            **common,
            servo_rate=_float(_get(entry, "servo_rate", path, fld), path, f"{fld}.servo_rate"),
            angle_min=float(angle_limits[0]),
            angle_max=float(angle_limits[1]),
            current_angle=_float(entry.get("initial_angle", 0.0), path, f"{fld}.initial_angle"),
        )
    except ValueError as e:
        raise ValidationError(path, fld, str(e)) from None


def _parse_mode(entry: dict, path, fld) -> ControlMode:
    name = str(_get(entry, "name", path, fld))
    dof_names = _get(entry, "dofs", path, fld)
    if not isinstance(dof_names, list) or not dof_names:
        raise ValidationError(path, f"{fld}.dofs", "expected a non-empty list")
    try:
        dofs = [dof_from_name(str(d)) for d in dof_names]
    except ValueError as e:
        raise ValidationError(path, f"{fld}.dofs", str(e)) from None
    gains_raw = _get(entry, "gains", path, fld)
    if not isinstance(gains_raw, dict):
        raise ValidationError(path, f"{fld}.gains", "expected a mapping keyed by DOF")
    gains = {}
    for key, g in gains_raw.items():
        try:
            dof = dof_from_name(str(key))
        except ValueError as e:
            raise ValidationError(path, f"{fld}.gains.{key}", str(e)) from None
        if not isinstance(g, dict):
            raise ValidationError(path, f"{fld}.gains.{key}", "expected kp/ki/kd mapping")
        try:
            gains[dof] = PidGains(
                kp=float(g.get("kp", 0.0)),
                ki=float(g.get("ki", 0.0)),
                kd=float(g.get("kd", 0.0)),
                integral_limit=float(g.get("integral_limit", math.inf)),
                output_limit=float(g.get("output_limit", math.inf)),
            )
        except (TypeError, ValueError) as e:
            raise ValidationError(path, f"{fld}.gains.{key}", str(e)) from None
    try:
        return ControlMode(name=name, dofs=frozenset(dofs), gains=gains)
    except ValueError as e:
        raise ValidationError(path, fld, str(e)) from None


def load_vehicle(path: str | Path) -> VehicleConfig:
    path = Path(path)
    data = _load_yaml(path)
    veh = _get(data, "vehicle", path, "")
    if not isinstance(veh, dict):
        raise ValidationError(path, "vehicle", "expected a mapping")
    name = str(_get(veh, "name", path, "vehicle"))
    frame_name = str(veh.get("frame", "ENU")).upper()
    try:
        frame = EarthFrame[frame_name]
    except KeyError:
        raise ValidationError(path, "vehicle.frame", f"must be ENU or NED, got {frame_name!r}") from None
    datum = veh.get("datum")
    if datum is not None:
        d = _floats(datum, 2, path, "vehicle.datum")
        datum = (float(d[0]), float(d[1]))

    phys = _get(veh, "physics", path, "vehicle")
    if not isinstance(phys, dict):
        raise ValidationError(path, "vehicle.physics", "expected a mapping")
    try:
        params = VehicleParams(
            mass=_float(_get(phys, "mass", path, "vehicle.physics"), path, "vehicle.physics.mass"),
            inertia=_floats(_get(phys, "inertia", path, "vehicle.physics"), 3, path, "vehicle.physics.inertia"),
            added_mass=_floats(_get(phys, "added_mass", path, "vehicle.physics"), 6, path, "vehicle.physics.added_mass"),
            linear_damping=_floats(_get(phys, "linear_damping", path, "vehicle.physics"), 6, path, "vehicle.physics.linear_damping"),
            quadratic_damping=_floats(_get(phys, "quadratic_damping", path, "vehicle.physics"), 6, path, "vehicle.physics.quadratic_damping"),
            cog=_floats(phys.get("cog", [0, 0, 0]), 3, path, "vehicle.physics.cog"),
            cob=_floats(phys.get("cob", [0, 0, 0]), 3, path, "vehicle.physics.cob"),
            buoyancy=_float(phys.get("buoyancy", 0.0), path, "vehicle.physics.buoyancy"),
            seabed_depth=_float(phys.get("seabed_depth", 30.0), path, "vehicle.physics.seabed_depth"),
            surface_taper_depth=_float(phys.get("surface_taper_depth", 0.3), path, "vehicle.physics.surface_taper_depth"),
            surface_buoyancy_fraction=_float(phys.get("surface_buoyancy_fraction", 0.5), path, "vehicle.physics.surface_buoyancy_fraction"),
        )
    except ValueError as e:
        raise ValidationError(path, "vehicle.physics", str(e)) from None

    thrusters_raw = _get(data, "thrusters", path, "")
    if not isinstance(thrusters_raw, list) or not thrusters_raw:
        raise ValidationError(path, "thrusters", "expected a non-empty list")
    thrusters = [
        _parse_thruster(t, path, f"thrusters[{i}]") for i, t in enumerate(thrusters_raw)
    ]
    ids = [t.id for t in thrusters]
    if len(ids) != len(set(ids)):
        raise ValidationError(path, "thrusters", "duplicate thruster id")

    modes_raw = _get(data, "control_modes", path, "")
    if not isinstance(modes_raw, list) or not modes_raw:
        raise ValidationError(path, "control_modes", "expected a non-empty list")
    modes = [_parse_mode(m, path, f"control_modes[{i}]") for i, m in enumerate(modes_raw)]
    names = [m.name for m in modes]
    if len(names) != len(set(names)):
        raise ValidationError(path, "control_modes", "duplicate mode name")

    return VehicleConfig(name, frame, params, thrusters, modes, datum)


@dataclass
class FsmConfig:
    initial: str
    states: list


def load_fsm(path: str | Path, mode_names) -> FsmConfig:
    path = Path(path)
    data = _load_yaml(path)
    fsm = _get(data, "fsm", path, "")
    if not isinstance(fsm, dict):
        raise ValidationError(path, "fsm", "expected a mapping")
    initial = str(_get(fsm, "initial", path, "fsm"))
    states_raw = _get(fsm, "states", path, "fsm")
    if not isinstance(states_raw, list) or not states_raw:
        raise ValidationError(path, "fsm.states", "expected a non-empty list")

    mode_names = set(mode_names)
    states = []
    for i, entry in enumerate(states_raw):
        fld = f"fsm.states[{i}]"
        name = str(_get(entry, "name", path, fld))
        mode = str(_get(entry, "mode", path, fld))
        if mode not in mode_names:
            raise ValidationError(path, f"{fld}.mode", f"unknown control mode {mode!r}")
        behaviors = []
        for j, b in enumerate(entry.get("behaviors") or []):
            bfld = f"{fld}.behaviors[{j}]"
            kind = str(_get(b, "kind", path, bfld))
            if kind not in BEHAVIOR_KINDS:
                raise ValidationError(path, f"{bfld}.kind", f"unknown behavior kind {kind!r}")
            priority = _get(b, "priority", path, bfld)
            if not isinstance(priority, int):
                raise ValidationError(path, f"{bfld}.priority", "expected an integer")
            params = b.get("params") or {}
            if not isinstance(params, dict):
                raise ValidationError(path, f"{bfld}.params", "expected a mapping")
            instance_id = str(b.get("id", f"{name}.{kind}.{j}"))
            try:
                behaviors.append(BEHAVIOR_KINDS[kind](instance_id, priority, params))
            except (TypeError, ValueError) as e:
                raise ValidationError(path, bfld, str(e)) from None
        transitions = entry.get("transitions") or []
        if not isinstance(transitions, list):
            raise ValidationError(path, f"{fld}.transitions", "expected a list of state names")
        events = entry.get("events") or {}
        if not isinstance(events, dict):
            raise ValidationError(path, f"{fld}.events", "expected event -> state mapping")
        try:
            states.append(
                FsmState(
                    name=name,
                    mode=mode,
                    behaviors=behaviors,
                    allowed_transitions=frozenset(str(t) for t in transitions),
                    events={str(k): str(v) for k, v in events.items()},
                )
            )
        except ValueError as e:
            raise ValidationError(path, fld, str(e)) from None

    state_names = {s.name for s in states}
    if len(state_names) != len(states):
        raise ValidationError(path, "fsm.states", "duplicate state name")
    if initial not in state_names:
        raise ValidationError(path, "fsm.initial", f"unknown state {initial!r}")
    for s in states:
        for t in s.allowed_transitions | set(s.events.values()):
            if t not in state_names:
                raise ValidationError(
                    path, f"fsm.states[{s.name}]", f"references unknown state {t!r}"
                )
    return FsmConfig(initial, states)


@dataclass
class RunnerConfig:
    vehicle_path: Path
    fsm_path: Path
    mission_path: Path | None
    control_rate: float
    physics_rate: float
    duration: float | None
    log_path: Path
    bind: str
    seed: int
    noise: NoiseConfig
    start_xy: tuple[float, float] = (0.0, 0.0)
    start_depth: float = 0.0
    start_yaw: float = 0.0
    source_path: Path | None = None


def load_runner(path: str | Path) -> RunnerConfig:
    path = Path(path)
    data = _load_yaml(path)
    run = _get(data, "run", path, "")
    if not isinstance(run, dict):
        raise ValidationError(path, "run", "expected a mapping")
    base = path.parent

    def _rel(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    control_rate = _float(run.get("control_rate", 10.0), path, "run.control_rate")
    physics_rate = _float(run.get("physics_rate", 100.0), path, "run.physics_rate")
    if control_rate <= 0 or physics_rate <= 0:
        raise ValidationError(path, "run.control_rate", "rates must be > 0")
    if control_rate > physics_rate:
        raise ValidationError(path, "run.control_rate", "control rate must be <= physics rate")
    ratio = physics_rate / control_rate
    if abs(ratio - round(ratio)) > 1e-9:
        raise ValidationError(
            path, "run.physics_rate", "physics rate must be an integer multiple of control rate"
        )

    duration = run.get("duration")
    if duration is not None:
        duration = _float(duration, path, "run.duration")
        if duration <= 0:
            raise ValidationError(path, "run.duration", "must be > 0")

    noise_raw = run.get("noise") or {}
    if not isinstance(noise_raw, dict):
        raise ValidationError(path, "run.noise", "expected a mapping")
    noise = NoiseConfig(
        enabled=bool(noise_raw.get("enabled", False)),
        drift_rate=_float(noise_raw.get("drift_rate", 0.05), path, "run.noise.drift_rate"),
        drift_jitter=_float(noise_raw.get("drift_jitter", 0.1), path, "run.noise.drift_jitter"),
        sigma_depth=_float(noise_raw.get("sigma_depth", 0.0), path, "run.noise.sigma_depth"),
        sigma_attitude=_float(noise_raw.get("sigma_attitude", 0.0), path, "run.noise.sigma_attitude"),
        sigma_velocity=_float(noise_raw.get("sigma_velocity", 0.0), path, "run.noise.sigma_velocity"),
    )

    start = run.get("start") or {}
    if not isinstance(start, dict):
        raise ValidationError(path, "run.start", "expected a mapping")
    xy = _floats(start.get("xy", [0.0, 0.0]), 2, path, "run.start.xy")

    mission = run.get("mission")
    return RunnerConfig(
        vehicle_path=_rel(_get(run, "vehicle", path, "run")),
        fsm_path=_rel(_get(run, "fsm", path, "run")),
        mission_path=_rel(mission) if mission else None,
        control_rate=control_rate,
        physics_rate=physics_rate,
        duration=duration,
        log_path=_rel(run.get("log", "telemetry.jsonl")),
        bind=str(run.get("bind", "127.0.0.1:8171")),
        seed=int(run.get("seed", 0)),
        noise=noise,
        start_xy=(float(xy[0]), float(xy[1])),
        start_depth=_float(start.get("depth", 0.0), path, "run.start.depth"),
        start_yaw=_float(start.get("yaw", 0.0), path, "run.start.yaw"),
        source_path=path,
    )


def initial_pose(cfg: RunnerConfig, frame: EarthFrame) -> Pose:
    return Pose(
        np.array([cfg.start_xy[0], cfg.start_xy[1], frame.z_from_depth(cfg.start_depth)]),
        Attitude.from_euler(0.0, 0.0, cfg.start_yaw),
    )


def stock_config_path(name: str) -> Path:
    """Path to a bundled config file, e.g. 'vectored.yaml' or 'missions/steps.yaml'."""
    root = importlib.resources.files("auvstack") / "configs"
    p = Path(str(root / name))
    if not p.exists():
        raise FileNotFoundError(f"no bundled config named {name!r}")
    return p
