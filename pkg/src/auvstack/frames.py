"""Rigid-body frames and rotations.

Quaternion-backed attitudes with Z-Y-X (yaw-pitch-roll) Euler views, rigid
transforms for thruster mounts, and the Euler-rate Jacobian used by the
earth-frame torque rows of the allocation matrix.

Conventions:
    - Euler angles are intrinsic Z-Y-X: R = Rz(yaw) @ Ry(pitch) @ Rx(roll).
    - An Attitude maps body vectors into earth vectors.
    - The earth frame is East-North-Up or North-East-Down per configuration;
      this module is frame-agnostic, callers fix the convention.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

GIMBAL_EPS = 1e-6  # rad from |pitch| = pi/2 at which the Euler-rate map blows up


class GimbalLockError(ValueError):
    """Pitch is too close to +/-pi/2 for the Euler-rate Jacobian."""


def vec3(x: float, y: float, z: float) -> np.ndarray:
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector component in ({x}, {y}, {z})")
    return v


def _quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


@dataclass(frozen=True)
class Attitude:
    """Orientation of the body frame in the earth frame.

    Internally a unit quaternion (w, x, y, z), so the representation itself
    has no singularity; Euler angles are derived views only.
    """

    quat: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        q = np.asarray(self.quat, dtype=float)
        n = np.linalg.norm(q)
        if not np.isfinite(n) or n <= 0.0:
            raise ValueError("attitude quaternion must be finite and non-zero")
        q = q / n
        if q[0] < 0.0:  # canonical sign for reproducible logs
            q = -q
        object.__setattr__(self, "quat", q)

    @staticmethod
    def identity() -> "Attitude":
        return Attitude()

    @staticmethod
    def from_euler(roll: float, pitch: float, yaw: float) -> "Attitude":
        """Attitude from Z-Y-X intrinsic Euler angles (radians)."""
        cr, sr = math.cos(roll / 2.0), math.sin(roll / 2.0)
        cp, sp = math.cos(pitch / 2.0), math.sin(pitch / 2.0)
        cy, sy = math.cos(yaw / 2.0), math.sin(yaw / 2.0)
        return Attitude(
            np.array(
                [
                    cy * cp * cr + sy * sp * sr,
                    cy * cp * sr - sy * sp * cr,
                    cy * sp * cr + sy * cp * sr,
                    sy * cp * cr - cy * sp * sr,
                ]
            )
        )

    @staticmethod
    def from_matrix(m: np.ndarray) -> "Attitude":
        m = np.asarray(m, dtype=float)
        t = np.trace(m)
        if t > 0.0:
            s = math.sqrt(t + 1.0) * 2.0
            q = np.array(
                [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
            )
        elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
            q = np.array(
                [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
            )
        elif m[1, 1] > m[2, 2]:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
            q = np.array(
                [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
            )
        else:
            s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
            q = np.array(
                [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
            )
        return Attitude(q)

    def matrix(self) -> np.ndarray:
        """3x3 rotation matrix mapping body vectors to earth vectors."""
        w, x, y, z = self.quat
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    def euler(self) -> tuple[float, float, float]:
        """(roll, pitch, yaw) in radians, Z-Y-X convention."""
        w, x, y, z = self.quat
        sp = 2.0 * (w * y - z * x)
        sp = max(-1.0, min(1.0, sp))
        pitch = math.asin(sp)
        roll = math.atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y))
        yaw = math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))
        return roll, pitch, yaw

    def rotate(self, v: np.ndarray) -> np.ndarray:
        """Rotate a body-frame vector into the earth frame."""
        return self.matrix() @ np.asarray(v, dtype=float)

    def inverse_rotate(self, v: np.ndarray) -> np.ndarray:
        return self.matrix().T @ np.asarray(v, dtype=float)

    def compose(self, other: "Attitude") -> "Attitude":
        """self then other applied to body vectors: result = self * other."""
        return Attitude(_quat_multiply(self.quat, other.quat))

    def inverse(self) -> "Attitude":
        w, x, y, z = self.quat
        return Attitude(np.array([w, -x, -y, -z]))


def rotation_from_euler(roll: float, pitch: float, yaw: float) -> Attitude:
    """Attitude for the given Z-Y-X Euler angles (radians)."""
    for name, v in (("roll", roll), ("pitch", pitch), ("yaw", yaw)):
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite")
    return Attitude.from_euler(roll, pitch, yaw)


def euler_rate_jacobian(roll: float, pitch: float) -> np.ndarray:
    """Z-Y-X Euler-rate Jacobian J(roll, pitch).

    Maps body-frame angular quantities into Euler-rate space:

        [roll_dot ]   [1  sin(r)tan(p)  cos(r)tan(p)] [p]
        [pitch_dot] = [0  cos(r)       -sin(r)      ] [q]
        [yaw_dot  ]   [0  sin(r)/cos(p) cos(r)/cos(p)] [r]

    Raises GimbalLockError when |pitch| is within GIMBAL_EPS of pi/2.
    """
    if abs(pitch) >= math.pi / 2.0 - GIMBAL_EPS:
        raise GimbalLockError(f"pitch {pitch:.9f} rad is within {GIMBAL_EPS} of gimbal lock")
    sr, cr = math.sin(roll), math.cos(roll)
    tp, cp = math.tan(pitch), math.cos(pitch)
    return np.array(
        [
            [1.0, sr * tp, cr * tp],
            [0.0, cr, -sr],
            [0.0, sr / cp, cr / cp],
        ]
    )


@dataclass(frozen=True)
class Transform:
    """Rigid transform: rotation then translation (child frame in parent frame)."""

    rotation: Attitude = field(default_factory=Attitude.identity)
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float)
        if t.shape != (3,) or not np.all(np.isfinite(t)):
            raise ValueError("translation must be a finite 3-vector")
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Transform":
        return Transform()

    def apply(self, p: np.ndarray) -> np.ndarray:
        """R @ p + translation."""
        return self.rotation.rotate(p) + self.translation

    def compose(self, other: "Transform") -> "Transform":
        """self o other: apply other first, then self."""
        return Transform(
            self.rotation.compose(other.rotation),
            self.rotation.rotate(other.translation) + self.translation,
        )

    def inverse(self) -> "Transform":
        rinv = self.rotation.inverse()
        return Transform(rinv, -rinv.rotate(self.translation))


def transform_point(t: Transform, p: np.ndarray) -> np.ndarray:
    return t.apply(p)


@dataclass
class Pose:
    """Earth-frame position and attitude."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude: Attitude = field(default_factory=Attitude.identity)

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float)
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise ValueError("position must be a finite 3-vector")
        self.position = p

    def copy(self) -> "Pose":
        return Pose(self.position.copy(), self.attitude)


@dataclass
class Twist:
    """Body-frame velocities: linear (m/s) and angular (rad/s)."""

    linear: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=float)
        self.angular = np.asarray(self.angular, dtype=float)

    def copy(self) -> "Twist":
        return Twist(self.linear.copy(), self.angular.copy())


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


class EarthFrame(enum.Enum):
    """World frame convention. Depth is positive-down in either convention."""

    ENU = "ENU"
    NED = "NED"

    def depth_from_z(self, z: float) -> float:
        return -z if self is EarthFrame.ENU else z

    def z_from_depth(self, depth: float) -> float:
        return -depth if self is EarthFrame.ENU else depth

    @property
    def up_sign(self) -> float:
        """Sign of the earth z-axis component of 'up'."""
        return 1.0 if self is EarthFrame.ENU else -1.0


@dataclass
class Odometry:
    """Estimated vehicle state: earth-frame pose, body-frame twist, time."""

    pose: Pose
    twist: Twist
    t: float = 0.0

    def depth(self, frame: EarthFrame) -> float:
        return frame.depth_from_z(self.pose.position[2])

    def copy(self) -> "Odometry":
        return Odometry(self.pose.copy(), self.twist.copy(), self.t)
