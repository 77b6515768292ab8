"""6-DOF rigid-body vehicle simulator.

A deliberately plain marine-vehicle model that closes the loop for tests:
diagonal rigid-body-plus-added mass, diagonal linear+quadratic damping, a
restoring wrench from the separation of the centers of gravity and buoyancy,
and RK4 integration of the body-frame velocities with quaternion attitude.
Coriolis coupling is omitted (diagonal model only) so body momentum is exact
under zero forcing.

Actuator forces are evaluated here with an implementation independent of the
allocation matrix code, which lets the two serve as cross-checking oracles:
each thruster pushes along its own x-axis at its current true servo angle,
converted through the thrust polynomial, with plain cross-product moments.

Buoyancy tapers linearly to a configurable fraction as the hull crosses the
surface, which reproduces the command oscillation seen when a vehicle is
asked to hold a depth it cannot reach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .frames import Attitude, EarthFrame, Odometry, Pose, Twist, _quat_multiply
from .thrusters import ArticulatedThruster, FixedThruster

GRAVITY = 9.80665


class SimulationError(RuntimeError):
    """Raised when the state stops being finite; the run must abort."""


@dataclass
class VehicleParams:
    mass: float
    inertia: np.ndarray  # diagonal, kg m^2
    added_mass: np.ndarray  # diagonal, 6
    linear_damping: np.ndarray  # diagonal, 6
    quadratic_damping: np.ndarray  # diagonal, 6
    cog: np.ndarray = field(default_factory=lambda: np.zeros(3))
    cob: np.ndarray = field(default_factory=lambda: np.zeros(3))
    buoyancy: float = 0.0  # N, total upward force when fully submerged
    seabed_depth: float = 30.0
    surface_taper_depth: float = 0.3
    surface_buoyancy_fraction: float = 0.5

    def __post_init__(self):
        self.inertia = np.asarray(self.inertia, dtype=float)
        self.added_mass = np.asarray(self.added_mass, dtype=float)
        self.linear_damping = np.asarray(self.linear_damping, dtype=float)
        self.quadratic_damping = np.asarray(self.quadratic_damping, dtype=float)
        self.cog = np.asarray(self.cog, dtype=float)
        self.cob = np.asarray(self.cob, dtype=float)
        if self.mass <= 0.0:
            raise ValueError("mass must be > 0")
        if np.any(self.inertia <= 0.0):
            raise ValueError("inertia diagonal must be > 0")
        if np.any(self.linear_damping < 0.0) or np.any(self.quadratic_damping < 0.0):
            raise ValueError("damping must be >= 0")


@dataclass
class SimState:
    pose: Pose
    twist: Twist
    servo_angles: dict = field(default_factory=dict)  # thruster id -> true angle
    t: float = 0.0

    def copy(self) -> "SimState":
        return SimState(self.pose.copy(), self.twist.copy(), dict(self.servo_angles), self.t)


def _cross(a, b):
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def actuator_wrench(commands, servo_angles, thrusters) -> np.ndarray:
    """Body wrench from motor commands at the current true servo angles.

    commands maps thruster id -> command units. Kept independent of the
    allocation column construction on purpose.
    """
    wrench = np.zeros(6)
    for t in thrusters:
        u = commands.get(t.id)
        if u is None:
            continue
        force = t.command_to_force(float(u))
        rot = t.mount.rotation
        if t.articulated:
            angle = float(servo_angles.get(t.id, t.current_angle))
            rot = rot.compose(Attitude.from_euler(0.0, 0.0, angle))
        f = rot.rotate(np.array([force, 0.0, 0.0]))
        wrench[0:3] += f
        wrench[3:6] += _cross(t.mount.translation, f)
    return wrench


class Simulator:
    """Owns the physical truth; stepped synchronously by the runner loop."""

    def __init__(
        self,
        params: VehicleParams,
        thrusters,
        frame: EarthFrame = EarthFrame.ENU,
        initial_pose: Pose | None = None,
    ):
        self.params = params
        self.thrusters = list(thrusters)
        self.frame = frame
        self._mass_diag = np.concatenate(
            [np.full(3, params.mass), params.inertia]
        ) + params.added_mass
        self._inv_mass = 1.0 / self._mass_diag
        self.state = SimState(
            pose=initial_pose.copy() if initial_pose else Pose(),
            twist=Twist(),
            servo_angles={t.id: t.current_angle for t in self.thrusters if t.articulated},
        )
        self.servo_targets = dict(self.state.servo_angles)

    # -- forces ---------------------------------------------------------------

    def _buoyancy_taper(self, depth: float) -> float:
        td = self.params.surface_taper_depth
        if td <= 0.0 or depth >= td:
            return 1.0
        return max(self.params.surface_buoyancy_fraction, depth / td)

    def _restoring(self, attitude: Attitude, depth: float) -> np.ndarray:
        up = self.frame.up_sign
        weight_earth = np.array([0.0, 0.0, -up * self.params.mass * GRAVITY])
        buoy_earth = np.array([0.0, 0.0, up * self.params.buoyancy * self._buoyancy_taper(depth)])
        rt = attitude.matrix().T
        f_g = rt @ weight_earth
        f_b = rt @ buoy_earth
        out = np.empty(6)
        out[0:3] = f_g + f_b
        out[3:6] = _cross(self.params.cog, f_g) + _cross(self.params.cob, f_b)
        return out

    def _nu_dot(self, attitude: Attitude, depth: float, nu: np.ndarray, wrench: np.ndarray) -> np.ndarray:
        damping = (self.params.linear_damping + self.params.quadratic_damping * np.abs(nu)) * nu
        return self._inv_mass * (wrench + self._restoring(attitude, depth) - damping)

    # -- integration ----------------------------------------------------------

    def step(self, wrench: np.ndarray, dt: float) -> SimState:
        """Advance the truth by dt under a constant body wrench (RK4)."""
        if not 0.0 < dt <= 0.1:
            raise ValueError("dt must be in (0, 0.1] s")
        s = self.state
        y = np.concatenate([s.pose.position, s.pose.attitude.quat, s.twist.linear, s.twist.angular])

        def deriv(y):
            q = y[3:7]
            qn = q / np.linalg.norm(q)
            att = Attitude(qn)
            nu = y[7:13]
            dy = np.empty(13)
            dy[0:3] = att.matrix() @ nu[0:3]
            dy[3:7] = 0.5 * _quat_multiply(qn, np.array([0.0, nu[3], nu[4], nu[5]]))
            depth = self.frame.depth_from_z(y[2])
            dy[7:13] = self._nu_dot(att, depth, nu, wrench)
            return dy

        try:
            k1 = deriv(y)
            k2 = deriv(y + 0.5 * dt * k1)
            k3 = deriv(y + 0.5 * dt * k2)
            k4 = deriv(y + dt * k3)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        except ValueError as e:  # non-finite intermediate attitude
            raise SimulationError(f"non-finite simulation state at t={s.t + dt:.3f}") from e
        if not np.all(np.isfinite(y)):
            raise SimulationError(f"non-finite simulation state at t={s.t + dt:.3f}")

        new_servo = {}
        for t in self.thrusters:
            if not t.articulated:
                continue
            angle = s.servo_angles.get(t.id, 0.0)
            target = self.servo_targets.get(t.id, angle)
            step_limit = t.servo_rate * dt
            delta = min(step_limit, max(-step_limit, target - angle))
            new_servo[t.id] = min(t.angle_max, max(t.angle_min, angle + delta))

        self.state = SimState(
            pose=Pose(y[0:3], Attitude(y[3:7])),
            twist=Twist(y[7:10], y[10:13]),
            servo_angles=new_servo,
            t=s.t + dt,
        )
        return self.state

    def set_servo_targets(self, targets):
        self.servo_targets.update(targets)

    def apply_commands(self, commands) -> np.ndarray:
        """Wrench for the given commands at the current true servo angles."""
        return actuator_wrench(commands, self.state.servo_angles, self.thrusters)

    def altitude(self) -> float:
        """DVL-style altitude above the flat seabed."""
        return self.params.seabed_depth - self.frame.depth_from_z(self.state.pose.position[2])


@dataclass
class NoiseConfig:
    enabled: bool = False
    drift_rate: float = 0.05  # horizontal bias as a fraction of distance traveled
    drift_jitter: float = 0.1  # relative spread of the per-run drift rate
    sigma_depth: float = 0.0
    sigma_attitude: float = 0.0  # rad, per Euler axis
    sigma_velocity: float = 0.0


class OdometrySensor:
    """Dead-reckoning emulation: truth plus seeded drift and noise.

    The drift is a per-run random horizontal direction with a per-run rate
    drawn around drift_rate, accumulated in proportion to horizontal distance
    traveled, which matches the behaviour of a DVL+IMU dead-reckoning stack.
    """

    def __init__(self, noise: NoiseConfig, seed: int = 0, frame: EarthFrame = EarthFrame.ENU):
        self.noise = noise
        self.frame = frame
        self._rng = np.random.default_rng(seed)
        theta = self._rng.uniform(0.0, 2.0 * math.pi)
        self._drift_dir = np.array([math.cos(theta), math.sin(theta)])
        jitter = 1.0 + noise.drift_jitter * self._rng.standard_normal()
        self._drift_rate = noise.drift_rate * max(0.2, jitter)
        self._drift = np.zeros(2)

    def measure(self, state: SimState, dt: float) -> Odometry:
        if not self.noise.enabled:
            return Odometry(state.pose.copy(), state.twist.copy(), state.t)

        v_earth = state.pose.attitude.rotate(state.twist.linear)
        self._drift += self._drift_rate * math.hypot(v_earth[0], v_earth[1]) * dt * self._drift_dir

        position = state.pose.position.copy()
        position[0] += self._drift[0]
        position[1] += self._drift[1]
        if self.noise.sigma_depth > 0.0:
            position[2] += self.noise.sigma_depth * self._rng.standard_normal()

        attitude = state.pose.attitude
        if self.noise.sigma_attitude > 0.0:
            r, p, yw = attitude.euler()
            dr, dp, dy = self.noise.sigma_attitude * self._rng.standard_normal(3)
            attitude = Attitude.from_euler(r + dr, p + dp, yw + dy)

        twist = state.twist.copy()
        if self.noise.sigma_velocity > 0.0:
            twist.linear = twist.linear + self.noise.sigma_velocity * self._rng.standard_normal(3)

        return Odometry(Pose(position, attitude), twist, state.t)

    @property
    def horizontal_drift(self) -> np.ndarray:
        return self._drift.copy()
