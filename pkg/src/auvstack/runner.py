"""Composition root: config loading, the tick loop, and command routing.

One thread owns all mutable GNC and simulation state and advances it tick by
tick; the API service (see api.py) interacts exclusively through a command
queue drained at tick boundaries and through immutable telemetry snapshots.
Headless runs ignore real-time pacing and are bit-reproducible for a given
(config, seed) pair.
"""

from __future__ import annotations

import copy
import math
import queue
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Any

from . import telemetry
from .allocation import Allocator
from .config import (
    RunnerConfig,
    VehicleConfig,
    initial_pose,
    load_fsm,
    load_runner,
    load_vehicle,
)
from .control import Controller, DofId, dof_from_name, dof_name
from .dynamics import OdometrySensor, SimulationError, Simulator
from .guidance import Fsm, GuidanceContext, PathFollowing, TeleopInput
from .mission import Waypoint, load_mission

TRACK_LENGTH = 20


@dataclass
class Command:
    kind: str
    payload: Any = None


class Runner:
    """Loads, validates and runs one vehicle. Use runner.load() to construct."""

    def __init__(self, cfg: RunnerConfig, vehicle: VehicleConfig, fsm: Fsm, mission):
        self.cfg = cfg
        self.vehicle = vehicle
        self.frame = vehicle.frame
        self.control_dt = 1.0 / cfg.control_rate
        self.physics_dt = 1.0 / cfg.physics_rate
        self.substeps = int(round(cfg.physics_rate / cfg.control_rate))

        start = initial_pose(cfg, vehicle.frame)
        self.sim = Simulator(vehicle.params, vehicle.thrusters, vehicle.frame, start)
        # The controller gets its own thruster instances: it tracks commanded
        # servo angles, the simulator tracks true ones.
        ctrl_thrusters = copy.deepcopy(vehicle.thrusters)
        self.controller = Controller(
            vehicle.modes,
            Allocator(ctrl_thrusters, self.control_dt),
            vehicle.frame,
            fsm.state.mode,
        )
        self.fsm = fsm
        self.sensor = OdometrySensor(cfg.noise, cfg.seed, vehicle.frame)
        self.mission: list[Waypoint] = list(mission or [])
        self._attach_mission(self.mission, odom=None)

        self.commands: queue.Queue[Command] = queue.Queue()
        self.track: deque = deque(maxlen=TRACK_LENGTH)
        self.teleop: dict = {}
        self.payload_on = False
        self.tick_index = 0
        self.exit_code = 0
        self._pending_transitions: list[str] = []
        self._stopping = False
        self._lock = threading.Lock()
        self._latest: dict | None = None
        self._subscribers: list[queue.SimpleQueue] = []
        self._writer: telemetry.TelemetryWriter | None = None

    # -- public API used by the HTTP layer and tests ---------------------------

    def submit(self, command: Command):
        self.commands.put(command)

    def latest_record(self) -> dict | None:
        with self._lock:
            return self._latest

    def track_snapshot(self) -> list[dict]:
        with self._lock:
            return list(self.track)

    def mission_snapshot(self) -> list[dict]:
        with self._lock:
            return [wp.to_dict() for wp in self.mission]

    def fsm_snapshot(self) -> dict:
        with self._lock:
            state = self.fsm.state
            return {
                "active": state.name,
                "allowed_transitions": sorted(state.allowed_transitions),
                "states": sorted(self.fsm.states),
            }

    def config_summary(self) -> dict:
        return {
            "vehicle": self.vehicle.name,
            "frame": self.frame.value,
            "control_rate": self.cfg.control_rate,
            "physics_rate": self.cfg.physics_rate,
            "seed": self.cfg.seed,
            "thrusters": [
                {"id": t.id, "articulated": t.articulated} for t in self.sim.thrusters
            ],
            "modes": sorted(self.controller.modes),
            "states": sorted(self.fsm.states),
        }

    def subscribe(self) -> queue.SimpleQueue:
        q: queue.SimpleQueue = queue.SimpleQueue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q):
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    # -- command application (tick boundary only) -------------------------------

    def _attach_mission(self, waypoints, odom):
        for state in self.fsm.states.values():
            for b in state.behaviors:
                if isinstance(b, PathFollowing):
                    b.set_mission(waypoints, odom, self.frame)

    def _apply_command(self, cmd: Command, odom):
        if cmd.kind == "stop":
            self._stopping = True
        elif cmd.kind == "transition":
            try:
                if self.fsm.request_transition(str(cmd.payload)):
                    self.controller.set_mode(self.fsm.state.mode)
            except Exception:
                pass  # validated at submission; a race here is a no-op
        elif cmd.kind == "enable":
            self.controller.set_enabled(bool(cmd.payload))
        elif cmd.kind == "teleop":
            t = self.tick_index * self.control_dt
            for dof, value in cmd.payload.items():
                self.teleop[DofId(dof)] = TeleopInput(float(value), t)
        elif cmd.kind == "mission":
            self.mission = list(cmd.payload)
            self._attach_mission(self.mission, odom)
        elif cmd.kind == "payload":
            self.payload_on = bool(cmd.payload)

    def _drain_commands(self, odom):
        while True:
            try:
                cmd = self.commands.get_nowait()
            except queue.Empty:
                return
            self._apply_command(cmd, odom)

    # -- the tick ---------------------------------------------------------------

    def tick(self) -> dict:
        """One control period: commands, guidance, control, physics, telemetry."""
        t = self.tick_index * self.control_dt
        truth = self.sim.state.copy()
        odom = self.sensor.measure(truth, self.control_dt)

        self._drain_commands(odom)
        for target in self._pending_transitions:
            try:
                if self.fsm.request_transition(target, cause="event"):
                    self.controller.set_mode(self.fsm.state.mode)
            except Exception:
                pass
        self._pending_transitions = []

        self.controller.observe_servo_angles(truth.servo_angles)
        ctx = GuidanceContext(
            odom=odom,
            t=t,
            frame=self.frame,
            seabed_depth=self.vehicle.params.seabed_depth,
            teleop=self.teleop,
        )
        setpoint = self.fsm.evaluate(ctx)
        for event in ctx.events:
            target = self.fsm.event_target(event)
            if target is not None:
                self._pending_transitions.append(target)

        result = self.controller.tick(odom, setpoint, self.control_dt)

        self.sim.set_servo_targets(result.servo_angles)
        commands = {out.id: out.command for out in result.outputs}
        for _ in range(self.substeps):
            wrench = self.sim.apply_commands(commands)
            self.sim.step(wrench, self.physics_dt)

        record = self._build_record(t, truth, odom, setpoint, result)
        depth = self.frame.depth_from_z(truth.pose.position[2])
        with self._lock:
            self.track.append(
                {
                    "t": t,
                    "x": float(truth.pose.position[0]),
                    "y": float(truth.pose.position[1]),
                    "depth": float(depth),
                }
            )
            self._latest = record
            subscribers = list(self._subscribers)
        for q in subscribers:
            q.put(record)
        if self._writer is not None:
            self._writer.write(record)
        self.tick_index += 1
        return record

    def _build_record(self, t, truth, odom, setpoint, result) -> dict:
        def pose_dict(pose):
            r, p, y = pose.attitude.euler()
            return {
                "position": [float(v) for v in pose.position],
                "euler": [float(r), float(p), float(y)],
                "depth": float(self.frame.depth_from_z(pose.position[2])),
            }

        def twist_dict(twist):
            return {
                "linear": [float(v) for v in twist.linear],
                "angular": [float(v) for v in twist.angular],
            }

        thrusters = []
        for out in result.outputs:
            entry = {
                "id": out.id,
                "force": float(out.force),
                "command": float(out.command),
            }
            if out.angle_delta is not None:
                entry["servo_delta"] = float(out.angle_delta)
                entry["servo_target"] = float(result.servo_angles.get(out.id, 0.0))
                entry["servo_angle"] = float(truth.servo_angles.get(out.id, 0.0))
            thrusters.append(entry)

        return {
            "schema": telemetry.SCHEMA_VERSION,
            "t": float(t),
            "tick": self.tick_index,
            "state": self.fsm.active,
            "mode": self.controller.mode.name,
            "enabled": self.controller.enabled,
            "truth": {"pose": pose_dict(truth.pose), "twist": twist_dict(truth.twist)},
            "odom": {"pose": pose_dict(odom.pose), "twist": twist_dict(odom.twist)},
            "setpoint": {dof_name(d): float(v) for d, v in sorted(setpoint.items())},
            "errors": {dof_name(d): float(v) for d, v in sorted(result.errors.items())},
            "tau_star": {dof_name(d): float(v) for d, v in sorted(result.tau_star.items())},
            "thrusters": thrusters,
            "residual": float(result.residual),
            "flags": {
                "saturation": bool(result.saturated),
                "gimbal": bool(result.gimbal),
                "fault": bool(result.fault),
                "payload": self.payload_on,
                "stopping": self._stopping,
            },
        }

    # -- run loop ----------------------------------------------------------------

    def run(self, headless: bool = True) -> int:
        """Run until duration elapses or a stop command arrives.

        Returns 0 on a clean finish, 2 when the simulation went non-finite.
        """
        total_ticks = (
            None
            if self.cfg.duration is None
            else int(round(self.cfg.duration * self.cfg.control_rate))
        )
        self._writer = telemetry.TelemetryWriter(self.cfg.log_path)
        next_deadline = time.monotonic()
        try:
            while total_ticks is None or self.tick_index < total_ticks:
                if not headless:
                    next_deadline += self.control_dt
                    delay = next_deadline - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
                try:
                    self.tick()
                except SimulationError as e:
                    self._writer.write(
                        {
                            "schema": telemetry.SCHEMA_VERSION,
                            "event": "abort",
                            "error": str(e),
                            "tick": self.tick_index,
                        }
                    )
                    self.exit_code = 2
                    break
                if self._stopping:
                    break
        finally:
            self._writer.close()
            self._writer = None
        return self.exit_code


def load(config) -> Runner:
    """Load and cross-validate a full system from a runner config file or object."""
    cfg = config if isinstance(config, RunnerConfig) else load_runner(config)
    vehicle = load_vehicle(cfg.vehicle_path)
    fsm_cfg = load_fsm(cfg.fsm_path, [m.name for m in vehicle.modes])
    fsm = Fsm(fsm_cfg.states, fsm_cfg.initial)
    mission = None
    if cfg.mission_path is not None:
        mission = load_mission(cfg.mission_path, vehicle.datum, vehicle.frame)
    return Runner(cfg, vehicle, fsm, mission)


def parse_teleop(payload: dict) -> dict:
    """Validate a teleop request body into DofId -> value."""
    out = {}
    for key, value in payload.items():
        dof = dof_from_name(str(key))
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"teleop value for {key!r} is not finite")
        out[dof] = v
    return out
