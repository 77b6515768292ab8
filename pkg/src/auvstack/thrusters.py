"""Thruster descriptions and the thrust/command polynomial.

A thruster produces force along its own x-axis. Fixed thrusters are rigidly
mounted; articulated thrusters additionally rotate about their z-axis under a
rate-limited servo and are described by the same fields plus servo limits.

The polynomial F(u) = a0 + a1*u + ... + an*u^n converts a dimensionless motor
command into Newtons (fitted from manufacturer data). It must be strictly
monotone on [command_min, command_max]; the inverse is solved by bracketed
bisection with a Newton polish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .frames import Attitude, Transform

FORCE_DEADBAND = 0.05  # N below which an articulated thruster holds its angle


def command_to_force(poly: np.ndarray, u: float) -> float:
    """Evaluate F = sum(a_i * u^i) with coefficients in ascending order."""
    acc = 0.0
    for a in reversed(np.asarray(poly, dtype=float)):
        acc = acc * u + a
    return acc


def poly_is_monotone(poly, command_min: float, command_max: float, samples: int = 1001) -> bool:
    """Value scan on a dense grid; strict monotonicity either direction."""
    u = np.linspace(command_min, command_max, samples)
    vals = np.polyval(np.asarray(poly, dtype=float)[::-1], u)
    d = np.diff(vals)
    return bool(np.all(d > 0.0) or np.all(d < 0.0))


def force_to_command(
    poly: np.ndarray,
    command_min: float,
    command_max: float,
    force: float,
) -> tuple[float, bool]:
    """Invert the thrust polynomial.

    Returns (command, saturated). An unreachable force clamps to the nearest
    command bound and reports saturated=True instead of raising; the QP box
    constraints normally prevent this, but a force_limits / poly range
    mismatch in config can still produce it.

    The root satisfies |F(u) - force| <= 1e-9 * max(1, |force|).
    """
    lo, hi = command_min, command_max
    f_lo = command_to_force(poly, lo)
    f_hi = command_to_force(poly, hi)
    increasing = f_hi >= f_lo
    f_min, f_max = (f_lo, f_hi) if increasing else (f_hi, f_lo)
    if force < f_min:
        return (lo if increasing else hi), True
    if force > f_max:
        return (hi if increasing else lo), True

    tol = 1e-9 * max(1.0, abs(force))
    a, b = lo, hi
    fa = f_lo - force
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = command_to_force(poly, mid) - force
        if abs(fm) <= tol:
            a = b = mid
            break
        if (fm > 0.0) == (fa > 0.0):
            a, fa = mid, fm
        else:
            b = mid
        if b - a <= 1e-15 * max(1.0, abs(a) + abs(b)):
            break
    u = 0.5 * (a + b)
    # Newton polish for the last digits
    dpoly = np.polyder(np.asarray(poly, dtype=float)[::-1])
    for _ in range(3):
        df = float(np.polyval(dpoly, u))
        if df == 0.0:
            break
        step = (command_to_force(poly, u) - force) / df
        u_new = u - step
        if u_new < command_min or u_new > command_max:
            break
        u = u_new
    return u, False


@dataclass
class FixedThruster:
    """Rigidly mounted thruster.

    mount places the thruster frame in the body frame: its rotation maps the
    thruster x-axis (force direction) into body axes, its translation is the
    mounting offset used for moment arms.
    """

    id: str
    mount: Transform
    force_min: float
    force_max: float
    poly: np.ndarray
    command_min: float
    command_max: float

    def __post_init__(self):
        self.poly = np.asarray(self.poly, dtype=float)
        if self.force_min >= self.force_max:
            raise ValueError(f"thruster {self.id}: force_min must be < force_max")
        if self.command_min >= self.command_max:
            raise ValueError(f"thruster {self.id}: command_min must be < command_max")
        if not poly_is_monotone(self.poly, self.command_min, self.command_max):
            raise ValueError(
                f"thruster {self.id}: poly is not strictly monotone on "
                f"[{self.command_min}, {self.command_max}]"
            )

    @property
    def articulated(self) -> bool:
        return False

    def force_to_command(self, force: float) -> tuple[float, bool]:
        return force_to_command(self.poly, self.command_min, self.command_max, force)

    def command_to_force(self, u: float) -> float:
        return command_to_force(self.poly, u)


@dataclass
class ArticulatedThruster(FixedThruster):
    """Thruster rotatable about its z-axis by a rate-limited servo.

    servo_rate is the maximum slew rate (rad/s); angle limits bound the
    articulation about the zero-angle mount. current_angle tracks the
    commanded articulation and rotates the effective thruster frame.
    Positive thrust only: reversing the propeller is disallowed.
    """

    servo_rate: float = 1.0
    angle_min: float = -math.pi / 2
    angle_max: float = math.pi / 2
    current_angle: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if self.servo_rate <= 0.0:
            raise ValueError(f"thruster {self.id}: servo_rate must be > 0")
        if self.angle_min > self.angle_max:
            raise ValueError(f"thruster {self.id}: angle_min must be <= angle_max")
        if not (self.angle_min <= self.current_angle <= self.angle_max):
            raise ValueError(f"thruster {self.id}: current_angle outside angle limits")
        if self.force_min < 0.0:
            raise ValueError(
                f"thruster {self.id}: articulated thrusters require force_min >= 0"
            )

    @property
    def articulated(self) -> bool:
        return True

    def current_mount(self) -> Transform:
        """Mount with the current articulation applied (rotation about thruster z)."""
        spin = Attitude.from_euler(0.0, 0.0, self.current_angle)
        return Transform(self.mount.rotation.compose(spin), self.mount.translation)

    def apply_delta(self, delta: float) -> float:
        """Advance the tracked angle by delta, clamped to the angle limits."""
        self.current_angle = min(self.angle_max, max(self.angle_min, self.current_angle + delta))
        return self.current_angle


def recover_articulated(x: float, y: float) -> tuple[float, float]:
    """Convert solved (X, Y) force components into (thrust F, angle delta).

    F = sqrt(X^2 + Y^2), delta = atan2(Y, X). Below FORCE_DEADBAND the thrust
    is zeroed and the servo holds its angle (delta undefined at F = 0).
    """
    f = math.hypot(x, y)
    if f < FORCE_DEADBAND:
        return 0.0, 0.0
    return f, math.atan2(y, x)
