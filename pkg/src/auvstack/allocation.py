"""Thruster allocation: matrix construction, constraints, QP solve, recovery.

Each thruster contributes a 12-row column mapping a unit force along its own
x-axis into body forces (rows 0-2), body moments (rows 3-5), earth-frame
forces (rows 6-8) and Euler-rate-space moments (rows 9-11). Articulated
thrusters contribute two adjacent columns (X along the current thruster
x-axis, Y along its y-axis) plus a fan constraint bounding the achievable
force direction to what the servo can sweep within one control period.

Column ordering is a stable public contract: fixed thrusters first in
configuration order, then articulated (X, Y) pairs in configuration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qp
from .frames import Attitude, GimbalLockError, euler_rate_jacobian
from .thrusters import ArticulatedThruster, FixedThruster, recover_articulated

EPS_STRICT = 1e-9  # margin replacing the strict fan inequalities
EPS_FEAS = 1e-6  # feasibility promised on returned solutions
MAX_FAN_HALF_ANGLE = 1.5  # rad; keeps tan() in the fan rows well-conditioned

Infeasible = qp.Infeasible
SolverNotConverged = qp.NotConverged


class AllocationError(ValueError):
    pass


class EmptyDofMask(AllocationError):
    pass


class DimensionMismatch(AllocationError):
    pass


@dataclass(frozen=True)
class GeneralizedForce:
    """12-component generalized force: body and earth frame stacked.

    Rows 0-5 are body-frame force XYZ and torque KMN; rows 6-11 are the
    earth-frame force and the Euler-rate-space torque term.
    """

    body_force: np.ndarray
    body_torque: np.ndarray
    earth_force: np.ndarray
    earth_torque: np.ndarray

    @staticmethod
    def from_array(v: np.ndarray) -> "GeneralizedForce":
        v = np.asarray(v, dtype=float)
        if v.shape != (12,):
            raise DimensionMismatch("generalized force must have 12 components")
        return GeneralizedForce(v[0:3].copy(), v[3:6].copy(), v[6:9].copy(), v[9:12].copy())

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.body_force, self.body_torque, self.earth_force, self.earth_torque])


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def _column_for_axis(
    mount_rotation: np.ndarray,
    mount_offset: np.ndarray,
    axis: np.ndarray,
    r_eb: np.ndarray,
    jacobian: np.ndarray,
) -> np.ndarray:
    f_body = mount_rotation @ axis
    moment = _cross(mount_offset, f_body)
    col = np.empty(12)
    col[0:3] = f_body
    col[3:6] = moment
    col[6:9] = r_eb @ f_body
    col[9:12] = jacobian @ moment
    return col


def column_fixed(
    thruster: FixedThruster,
    attitude: Attitude,
    jacobian: np.ndarray | None = None,
) -> np.ndarray:
    """12-row allocation column for a unit force along the thruster x-axis.

    Raises GimbalLockError (from the Euler-rate Jacobian) near |pitch| = pi/2
    unless a frozen jacobian is supplied.
    """
    if jacobian is None:
        roll, pitch, _ = attitude.euler()
        jacobian = euler_rate_jacobian(roll, pitch)
    return _column_for_axis(
        thruster.mount.rotation.matrix(),
        thruster.mount.translation,
        np.array([1.0, 0.0, 0.0]),
        attitude.matrix(),
        jacobian,
    )


def columns_articulated(
    thruster: ArticulatedThruster,
    attitude: Attitude,
    jacobian: np.ndarray | None = None,
) -> np.ndarray:
    """12x2 columns for the (X, Y) force components in the current thruster frame.

    Column 0 is the unit x-axis construction, column 1 the unit y-axis; the
    frame rotates with the thruster, so the columns reflect current_angle.
    """
    if jacobian is None:
        roll, pitch, _ = attitude.euler()
        jacobian = euler_rate_jacobian(roll, pitch)
    mount = thruster.current_mount()
    rot = mount.rotation.matrix()
    r_eb = attitude.matrix()
    cols = np.empty((12, 2))
    cols[:, 0] = _column_for_axis(rot, mount.translation, np.array([1.0, 0.0, 0.0]), r_eb, jacobian)
    cols[:, 1] = _column_for_axis(rot, mount.translation, np.array([0.0, 1.0, 0.0]), r_eb, jacobian)
    return cols


def fan_half_angles(thruster: ArticulatedThruster, dt: float) -> tuple[float, float]:
    """(down, up) half-angles of the reachable fan for one control period.

    The nominal half-angle servo_rate*dt is tightened to the remaining travel
    when the servo sits within one period of an angle limit, so the QP stays
    convex while the hardware limits are respected.
    """
    nominal = min(thruster.servo_rate * dt, MAX_FAN_HALF_ANGLE)
    down = min(nominal, max(thruster.current_angle - thruster.angle_min, 0.0))
    up = min(nominal, max(thruster.angle_max - thruster.current_angle, 0.0))
    return down, up


@dataclass
class AllocationProblem:
    """Assembled least-squares-with-inequalities instance.

    m is d x (N + 2*Ma) with d selected generalized rows; a/b encode
    2 box rows per fixed thruster and 3 rows per articulated thruster.
    """

    m: np.ndarray
    a: np.ndarray
    b: np.ndarray
    tau_star: np.ndarray
    rows: tuple[int, ...]
    thrusters: list[FixedThruster]
    x0: np.ndarray


@dataclass
class ThrusterOutput:
    id: str
    force: float  # N along the (possibly re-angled) thruster x-axis
    command: float
    saturated: bool
    angle_delta: float | None = None  # rad, articulated only
    x: float | None = None  # solved force components, articulated only
    y: float | None = None


@dataclass
class AllocationSolution:
    f: np.ndarray
    outputs: list[ThrusterOutput]
    residual: float
    active_set: tuple[int, ...] = field(default_factory=tuple)

    @property
    def saturated(self) -> bool:
        return any(o.saturated for o in self.outputs)


def _ordered(thrusters) -> list[FixedThruster]:
    return [t for t in thrusters if not t.articulated] + [t for t in thrusters if t.articulated]


def build_problem(
    thrusters,
    attitude: Attitude,
    dof_mask,
    tau_star,
    dt: float,
    jacobian: np.ndarray | None = None,
) -> AllocationProblem:
    """Assemble M, A, b and a feasible start for the selected generalized rows.

    dof_mask is an iterable of row indices in [0, 12); tau_star must match its
    length. dt is the controller iteration period defining the articulated
    fan width.
    """
    rows = tuple(sorted(set(int(r) for r in dof_mask)))
    if not rows:
        raise EmptyDofMask("dof_mask selects no generalized rows")
    if any(r < 0 or r >= 12 for r in rows):
        raise DimensionMismatch("dof_mask rows must be in [0, 12)")
    tau_star = np.asarray(tau_star, dtype=float)
    if tau_star.shape != (len(rows),):
        raise DimensionMismatch(
            f"tau_star has {tau_star.size} entries for {len(rows)} selected rows"
        )

    ordered = _ordered(thrusters)
    fixed = [t for t in ordered if not t.articulated]
    artic = [t for t in ordered if t.articulated]
    n_vars = len(fixed) + 2 * len(artic)
    if n_vars == 0:
        raise DimensionMismatch("no thrusters")

    full = np.empty((12, n_vars))
    n_rows = 2 * len(fixed) + 3 * len(artic)
    a = np.zeros((n_rows, n_vars))
    b = np.zeros(n_rows)
    x0 = np.zeros(n_vars)

    col = 0
    row = 0
    for t in fixed:
        full[:, col] = column_fixed(t, attitude, jacobian)
        a[row, col] = 1.0
        b[row] = t.force_max
        a[row + 1, col] = -1.0
        b[row + 1] = -t.force_min
        x0[col] = min(max(0.0, t.force_min), t.force_max)
        col += 1
        row += 2
    for t in artic:
        full[:, col : col + 2] = columns_articulated(t, attitude, jacobian)
        down, up = fan_half_angles(t, dt)
        a[row, col] = 1.0  # X <= T_Max
        b[row] = t.force_max
        a[row + 1, col] = -math.tan(down)  # lower fan edge: tan(d)X + Y >= eps
        a[row + 1, col + 1] = -1.0
        b[row + 1] = -EPS_STRICT
        a[row + 2, col] = -math.tan(up)  # upper fan edge: -tan(u)X + Y <= -eps
        a[row + 2, col + 1] = 1.0
        b[row + 2] = -EPS_STRICT
        col += 2
        row += 3

    return AllocationProblem(
        m=full[list(rows), :],
        a=a,
        b=b,
        tau_star=tau_star,
        rows=rows,
        thrusters=ordered,
        x0=x0,
    )


def solve(problem: AllocationProblem, warm_set: tuple[int, ...] = ()) -> AllocationSolution:
    """Solve the allocation QP and convert forces to per-thruster outputs."""
    f, active = qp.solve_lsq_inequality(
        problem.m, problem.tau_star, problem.a, problem.b, problem.x0, warm_set
    )
    # Numerically-zero articulated pairs get snapped to exact zero: below the
    # strictness margin the fan-angle of (X, Y) is dominated by epsilon
    # geometry and atan2 becomes meaningless dust.
    col = len([t for t in problem.thrusters if not t.articulated])
    while col < f.size:
        if math.hypot(f[col], f[col + 1]) < 1e-8:
            f[col] = f[col + 1] = 0.0
        col += 2
    residual = float(np.linalg.norm(problem.tau_star - problem.m @ f))
    outputs: list[ThrusterOutput] = []
    col = 0
    for t in problem.thrusters:
        if not t.articulated:
            force = float(f[col])
            command, saturated = t.force_to_command(force)
            outputs.append(ThrusterOutput(t.id, force, command, saturated))
            col += 1
        else:
            x, y = float(f[col]), float(f[col + 1])
            force, delta = recover_articulated(x, y)
            command, saturated = t.force_to_command(force)
            outputs.append(
                ThrusterOutput(t.id, force, command, saturated, angle_delta=delta, x=x, y=y)
            )
            col += 2
    return AllocationSolution(f=f, outputs=outputs, residual=residual, active_set=active)


class Allocator:
    """Stateful allocation front-end for the control loop.

    Owns the warm-start active set and the frozen Euler-rate Jacobian used
    when the vehicle passes within GIMBAL_EPS of gimbal lock (the earth-torque
    rows are held at the last valid map and a gimbal flag is raised instead of
    failing the tick).
    """

    def __init__(self, thrusters, dt: float):
        self.thrusters = _ordered(thrusters)
        self.dt = dt
        self._warm: tuple[int, ...] = ()
        self._last_jacobian = np.eye(3)
        self.gimbal_flag = False

    def allocate(self, attitude: Attitude, dof_mask, tau_star) -> AllocationSolution:
        roll, pitch, _ = attitude.euler()
        try:
            jac = euler_rate_jacobian(roll, pitch)
            self._last_jacobian = jac
            self.gimbal_flag = False
        except GimbalLockError:
            jac = self._last_jacobian
            self.gimbal_flag = True
        problem = build_problem(self.thrusters, attitude, dof_mask, tau_star, self.dt, jacobian=jac)
        solution = solve(problem, self._warm)
        self._warm = solution.active_set
        return solution

    def reset(self):
        self._warm = ()
        self.gimbal_flag = False
