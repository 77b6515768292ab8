"""Per-DOF PID control with switchable control modes.

A control mode names the generalized-force rows it drives and carries one set
of PID gains per row. Switching modes resizes the allocation problem (the
solver only sees the selected rows) and swaps gains; integrators of dropped
rows are reset. The requested generalized force tau* feeds the allocator,
whose per-thruster result is the tick output.

Channel semantics:
    - body force rows are velocity channels (surge/sway/heave, m/s)
    - body torque rows are body-rate channels (rad/s)
    - earth force x/y are position channels (m); earth force z is the depth
      channel (setpoints are positive-down depths in either frame convention)
    - earth torque rows are roll/pitch/yaw attitude channels (rad, wrapped)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .allocation import Allocator, Infeasible, SolverNotConverged, ThrusterOutput
from .frames import EarthFrame, GimbalLockError, Odometry, euler_rate_jacobian, wrap_angle


class UnknownMode(KeyError):
    pass


class DofId(IntEnum):
    """The 12 generalized rows of the allocation matrix."""

    BODY_FORCE_X = 0
    BODY_FORCE_Y = 1
    BODY_FORCE_Z = 2
    BODY_TORQUE_X = 3
    BODY_TORQUE_Y = 4
    BODY_TORQUE_Z = 5
    EARTH_FORCE_X = 6
    EARTH_FORCE_Y = 7
    EARTH_FORCE_Z = 8
    EARTH_TORQUE_X = 9
    EARTH_TORQUE_Y = 10
    EARTH_TORQUE_Z = 11


_ALIASES = {
    "surge": DofId.BODY_FORCE_X,
    "sway": DofId.BODY_FORCE_Y,
    "heave": DofId.BODY_FORCE_Z,
    "roll_rate": DofId.BODY_TORQUE_X,
    "pitch_rate": DofId.BODY_TORQUE_Y,
    "yaw_rate": DofId.BODY_TORQUE_Z,
    "x": DofId.EARTH_FORCE_X,
    "y": DofId.EARTH_FORCE_Y,
    "depth": DofId.EARTH_FORCE_Z,
    "roll": DofId.EARTH_TORQUE_X,
    "pitch": DofId.EARTH_TORQUE_Y,
    "yaw": DofId.EARTH_TORQUE_Z,
    "heading": DofId.EARTH_TORQUE_Z,
}

_NAMES = {
    DofId.BODY_FORCE_X: "surge",
    DofId.BODY_FORCE_Y: "sway",
    DofId.BODY_FORCE_Z: "heave",
    DofId.BODY_TORQUE_X: "roll_rate",
    DofId.BODY_TORQUE_Y: "pitch_rate",
    DofId.BODY_TORQUE_Z: "yaw_rate",
    DofId.EARTH_FORCE_X: "x",
    DofId.EARTH_FORCE_Y: "y",
    DofId.EARTH_FORCE_Z: "depth",
    DofId.EARTH_TORQUE_X: "roll",
    DofId.EARTH_TORQUE_Y: "pitch",
    DofId.EARTH_TORQUE_Z: "yaw",
}

ANGLE_DOFS = frozenset({DofId.EARTH_TORQUE_X, DofId.EARTH_TORQUE_Y, DofId.EARTH_TORQUE_Z})


def dof_from_name(name: str) -> DofId:
    key = name.strip().lower()
    if key in _ALIASES:
        return _ALIASES[key]
    try:
        return DofId[name.strip().upper()]
    except KeyError:
        raise ValueError(f"unknown DOF name {name!r}") from None


def dof_name(dof: DofId) -> str:
    return _NAMES[DofId(dof)]


@dataclass
class PidGains:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    integral_limit: float = math.inf
    output_limit: float = math.inf

    def __post_init__(self):
        if self.integral_limit < 0 or self.output_limit < 0:
            raise ValueError("PID limits must be >= 0")


@dataclass
class ControlMode:
    name: str
    dofs: frozenset
    gains: dict

    def __post_init__(self):
        self.dofs = frozenset(DofId(d) for d in self.dofs)
        if not self.dofs:
            raise ValueError(f"mode {self.name!r} selects no DOFs")
        if set(self.gains) != set(self.dofs):
            raise ValueError(f"mode {self.name!r}: gains must cover exactly its DOF set")
        for d in self.dofs:
            if d < 6 and DofId(d + 6) in self.dofs:
                raise ValueError(
                    f"mode {self.name!r}: {dof_name(DofId(d))} and "
                    f"{dof_name(DofId(d + 6))} double-count the same axis"
                )

    @property
    def rows(self) -> tuple[int, ...]:
        return tuple(sorted(int(d) for d in self.dofs))


@dataclass
class _Channel:
    integral: float = 0.0
    held_setpoint: float | None = None


@dataclass
class ControlTickResult:
    outputs: list[ThrusterOutput]
    servo_angles: dict  # thruster id -> commanded absolute angle (rad)
    tau_star: dict  # DofId -> requested force/torque
    errors: dict  # DofId -> current error
    residual: float
    fault: bool = False
    gimbal: bool = False

    @property
    def saturated(self) -> bool:
        return any(o.saturated for o in self.outputs)


class Controller:
    """Owns the PID channel states and the allocator; one instance per loop."""

    def __init__(self, modes, allocator: Allocator, frame: EarthFrame, initial_mode: str):
        self.modes = {m.name: m for m in modes}
        if initial_mode not in self.modes:
            raise UnknownMode(initial_mode)
        self.allocator = allocator
        self.frame = frame
        self.mode = self.modes[initial_mode]
        self.enabled = True
        self._channels = {d: _Channel() for d in DofId}

    # -- mode and enable state ------------------------------------------------

    def set_mode(self, name: str):
        if name not in self.modes:
            raise UnknownMode(name)
        new = self.modes[name]
        if new is self.mode:
            return
        for d in DofId:
            if d not in new.dofs:
                self._channels[d].integral = 0.0
                self._channels[d].held_setpoint = None
        self.mode = new

    def set_enabled(self, enabled: bool):
        if self.enabled and not enabled:
            for ch in self._channels.values():
                ch.integral = 0.0
                ch.held_setpoint = None
        self.enabled = enabled

    # -- error pipeline --------------------------------------------------------

    def _measured(self, dof: DofId, odom: Odometry) -> float:
        d = int(dof)
        if d < 3:
            return float(odom.twist.linear[d])
        if d < 6:
            return float(odom.twist.angular[d - 3])
        if dof is DofId.EARTH_FORCE_Z:
            return odom.depth(self.frame)
        if d < 9:
            return float(odom.pose.position[d - 6])
        return odom.pose.attitude.euler()[d - 9]

    def _measured_rate(self, dof: DofId, odom: Odometry) -> float:
        """Rate of the measured channel value, for derivative-on-measurement."""
        d = int(dof)
        if d < 6:
            return 0.0  # velocity channels: no acceleration feedback
        if d < 9:
            v_earth = odom.pose.attitude.rotate(odom.twist.linear)
            return float(v_earth[d - 6])
        roll, pitch, _ = odom.pose.attitude.euler()
        try:
            rates = euler_rate_jacobian(roll, pitch) @ odom.twist.angular
        except GimbalLockError:
            return 0.0
        return float(rates[d - 9])

    def compute_errors(self, setpoint, odom: Odometry) -> dict:
        """Per-DOF error for the active mode; unclaimed DOFs hold their last setpoint."""
        errors = {}
        for dof in sorted(self.mode.dofs):
            ch = self._channels[dof]
            if dof in setpoint:
                ch.held_setpoint = float(setpoint[dof])
            if ch.held_setpoint is None:
                ch.held_setpoint = self._measured(dof, odom)
            desired = ch.held_setpoint
            current = self._measured(dof, odom)
            if dof in ANGLE_DOFS:
                errors[dof] = wrap_angle(desired - current)
            elif dof is DofId.EARTH_FORCE_Z:
                # setpoints are positive-down depths; the allocation row wants
                # an earth-z force, so the error lives in earth-z coordinates
                errors[dof] = self.frame.z_from_depth(desired) - self.frame.z_from_depth(current)
            else:
                errors[dof] = desired - current
        return errors

    def pid_step(self, gains: PidGains, error: float, error_rate: float, dt: float, dof: DofId) -> float:
        ch = self._channels[dof]
        integral = ch.integral + error * dt
        integral = min(gains.integral_limit, max(-gains.integral_limit, integral))
        raw = gains.kp * error + gains.ki * integral + gains.kd * error_rate
        if abs(raw) > gains.output_limit:
            return math.copysign(gains.output_limit, raw)  # integral frozen while saturated
        ch.integral = integral
        return raw

    # -- tick ------------------------------------------------------------------

    def _zero_outputs(self) -> ControlTickResult:
        outputs = []
        servo = {}
        for t in self.allocator.thrusters:
            command, saturated = t.force_to_command(0.0)
            if t.articulated:
                outputs.append(
                    ThrusterOutput(t.id, 0.0, command, saturated, angle_delta=0.0, x=0.0, y=0.0)
                )
                servo[t.id] = t.current_angle
            else:
                outputs.append(ThrusterOutput(t.id, 0.0, command, saturated))
        return ControlTickResult(outputs, servo, {}, {}, residual=0.0)

    def tick(self, odom: Odometry, setpoint, dt: float) -> ControlTickResult:
        """Full pipeline: errors -> PID -> tau* -> allocation -> commands.

        Any allocation failure degrades to zero commands with the fault flag
        raised rather than propagating out of the loop.
        """
        if not self.enabled:
            return self._zero_outputs()

        errors = self.compute_errors(setpoint, odom)
        tau_star = {}
        for dof in sorted(self.mode.dofs):
            rate = -self._measured_rate(dof, odom)
            tau_star[dof] = self.pid_step(self.mode.gains[dof], errors[dof], rate, dt, dof)

        tau_vec = np.array([tau_star[DofId(r)] for r in self.mode.rows])
        try:
            solution = self.allocator.allocate(odom.pose.attitude, self.mode.rows, tau_vec)
        except (Infeasible, SolverNotConverged):
            result = self._zero_outputs()
            result.fault = True
            result.errors = errors
            result.tau_star = tau_star
            return result

        servo = {}
        for t, out in zip(self.allocator.thrusters, solution.outputs):
            if t.articulated:
                servo[t.id] = t.apply_delta(out.angle_delta or 0.0)
        return ControlTickResult(
            outputs=solution.outputs,
            servo_angles=servo,
            tau_star=tau_star,
            errors=errors,
            residual=solution.residual,
            gimbal=self.allocator.gimbal_flag,
        )

    def observe_servo_angles(self, angles):
        """Feed measured servo angles back so the fan constraints track reality."""
        for t in self.allocator.thrusters:
            if t.articulated and t.id in angles:
                t.current_angle = min(t.angle_max, max(t.angle_min, float(angles[t.id])))
