import math

import numpy as np
import pytest

from auvstack.allocation import Allocator
from auvstack.control import (
    ControlMode,
    Controller,
    DofId,
    PidGains,
    UnknownMode,
    dof_from_name,
    dof_name,
)
from auvstack.frames import Attitude, EarthFrame, Odometry, Pose, Transform, Twist, vec3
from auvstack.thrusters import ArticulatedThruster, FixedThruster


def odom(x=0.0, y=0.0, depth=0.0, roll=0.0, pitch=0.0, yaw=0.0, u=0.0, frame=EarthFrame.ENU):
    pose = Pose(np.array([x, y, frame.z_from_depth(depth)]), Attitude.from_euler(roll, pitch, yaw))
    return Odometry(pose, Twist(np.array([u, 0.0, 0.0]), np.zeros(3)), 0.0)


def x_thruster(tid="main"):
    return FixedThruster(tid, Transform(), -30.0, 30.0, [0.0, 1.0], -30.0, 30.0)


def z_thruster(tid="vert", x=0.0):
    return FixedThruster(
        tid, Transform(Attitude.from_euler(0, -math.pi / 2, 0), vec3(x, 0, 0)),
        -30.0, 30.0, [0.0, 1.0], -30.0, 30.0,
    )


def simple_modes():
    g = lambda **kw: PidGains(**kw)
    return [
        ControlMode("surge_only", {DofId.BODY_FORCE_X}, {DofId.BODY_FORCE_X: g(kp=10.0)}),
        ControlMode(
            "surge_depth",
            {DofId.BODY_FORCE_X, DofId.EARTH_FORCE_Z},
            {DofId.BODY_FORCE_X: g(kp=10.0), DofId.EARTH_FORCE_Z: g(kp=5.0, ki=1.0, integral_limit=2.0)},
        ),
        ControlMode(
            "five",
            {DofId.BODY_FORCE_X, DofId.EARTH_FORCE_Z, DofId.EARTH_TORQUE_X,
             DofId.EARTH_TORQUE_Y, DofId.EARTH_TORQUE_Z},
            {DofId.BODY_FORCE_X: g(kp=10.0), DofId.EARTH_FORCE_Z: g(kp=5.0),
             DofId.EARTH_TORQUE_X: g(kp=1.0), DofId.EARTH_TORQUE_Y: g(kp=1.0),
             DofId.EARTH_TORQUE_Z: g(kp=2.0)},
        ),
    ]


def make_controller(thrusters=None, mode="surge_only"):
    thrusters = thrusters or [x_thruster()]
    return Controller(simple_modes(), Allocator(thrusters, 0.1), EarthFrame.ENU, mode)


class TestDofNames:
    def test_aliases(self):
        assert dof_from_name("surge") is DofId.BODY_FORCE_X
        assert dof_from_name("depth") is DofId.EARTH_FORCE_Z
        assert dof_from_name("heading") is DofId.EARTH_TORQUE_Z
        assert dof_from_name("EARTH_FORCE_X") is DofId.EARTH_FORCE_X

    def test_round_trip(self):
        for dof in DofId:
            assert dof_from_name(dof_name(dof)) is dof

    def test_unknown(self):
        with pytest.raises(ValueError):
            dof_from_name("warp")


class TestModeValidation:
    def test_gains_must_cover_dofs(self):
        with pytest.raises(ValueError, match="cover"):
            ControlMode("m", {DofId.BODY_FORCE_X}, {})

    def test_body_earth_conflict_rejected(self):
        gains = {DofId.BODY_FORCE_X: PidGains(kp=1), DofId.EARTH_FORCE_X: PidGains(kp=1)}
        with pytest.raises(ValueError, match="double-count"):
            ControlMode("m", set(gains), gains)


class TestComputeErrors:
    def test_yaw_wraps_shortest_way(self):
        c = make_controller(mode="five")
        sp = {DofId.EARTH_TORQUE_Z: math.radians(179)}
        errors = c.compute_errors(sp, odom(yaw=math.radians(-179)))
        assert errors[DofId.EARTH_TORQUE_Z] == pytest.approx(math.radians(-2), abs=1e-9)

    def test_zero_depth_error(self):
        c = make_controller(mode="surge_depth")
        errors = c.compute_errors({DofId.EARTH_FORCE_Z: 5.0}, odom(depth=5.0))
        assert errors[DofId.EARTH_FORCE_Z] == pytest.approx(0.0, abs=1e-12)

    def test_surge_velocity_error(self):
        c = make_controller()
        errors = c.compute_errors({DofId.BODY_FORCE_X: 0.5}, odom(u=0.2))
        assert errors[DofId.BODY_FORCE_X] == pytest.approx(0.3, abs=1e-12)

    def test_depth_error_sign_enu(self):
        # too deep in ENU -> positive earth-z error -> upward force request
        c = make_controller(mode="surge_depth")
        errors = c.compute_errors({DofId.EARTH_FORCE_Z: 5.0}, odom(depth=6.0))
        assert errors[DofId.EARTH_FORCE_Z] == pytest.approx(1.0, abs=1e-12)

    def test_unclaimed_dof_holds_current_value(self):
        c = make_controller(mode="surge_depth")
        errors = c.compute_errors({}, odom(depth=4.0, u=0.3))
        assert errors[DofId.EARTH_FORCE_Z] == pytest.approx(0.0, abs=1e-12)
        assert errors[DofId.BODY_FORCE_X] == pytest.approx(0.0, abs=1e-12)
        # the held value persists: drifting 1 m deeper yields a +1 (upward) error
        errors = c.compute_errors({}, odom(depth=5.0, u=0.3))
        assert errors[DofId.EARTH_FORCE_Z] == pytest.approx(1.0, abs=1e-12)


class TestPidStep:
    def test_pure_proportional(self):
        c = make_controller()
        out = c.pid_step(PidGains(kp=2.0), 1.5, 0.0, 0.1, DofId.BODY_FORCE_X)
        assert out == pytest.approx(3.0, abs=1e-12)

    def test_integral_clamped(self):
        c = make_controller()
        gains = PidGains(ki=1.0, integral_limit=2.0)
        out = 0.0
        for _ in range(30):  # 3 s at 0.1 s steps, error held at 1
            out = c.pid_step(gains, 1.0, 0.0, 0.1, DofId.BODY_FORCE_X)
        assert out == pytest.approx(2.0, abs=1e-9)

    def test_output_clamped(self):
        c = make_controller()
        out = c.pid_step(PidGains(kp=1.0, output_limit=0.3), 0.4, 0.0, 0.1, DofId.BODY_FORCE_X)
        assert out == pytest.approx(0.3, abs=1e-12)

    def test_integral_frozen_while_saturated(self):
        c = make_controller()
        gains = PidGains(kp=1.0, ki=1.0, output_limit=0.5, integral_limit=10.0)
        for _ in range(50):
            c.pid_step(gains, 1.0, 0.0, 0.1, DofId.BODY_FORCE_X)
        assert c._channels[DofId.BODY_FORCE_X].integral == pytest.approx(0.0, abs=1e-12)


class TestSetMode:
    def test_unknown_mode(self):
        c = make_controller()
        with pytest.raises(UnknownMode):
            c.set_mode("nope")

    def test_switch_resizes_rows(self):
        c = make_controller(mode="five")
        assert len(c.mode.rows) == 5
        c.set_mode("surge_depth")
        assert len(c.mode.rows) == 2

    def test_dropped_dof_integral_reset(self):
        c = make_controller(mode="surge_depth")
        c._channels[DofId.EARTH_FORCE_Z].integral = 1.5
        c.set_mode("surge_only")
        assert c._channels[DofId.EARTH_FORCE_Z].integral == 0.0

    def test_same_mode_is_idempotent(self):
        c = make_controller(mode="surge_depth")
        c._channels[DofId.EARTH_FORCE_Z].integral = 1.5
        c.set_mode("surge_depth")
        assert c._channels[DofId.EARTH_FORCE_Z].integral == 1.5

    def test_fuzzed_switches_stay_finite(self):
        rng = np.random.default_rng(3)
        thrusters = [x_thruster(), z_thruster()]
        c = make_controller(thrusters, mode="five")
        names = ["surge_only", "surge_depth", "five"]
        for i in range(200):
            if rng.random() < 0.3:
                c.set_mode(names[int(rng.integers(len(names)))])
            sp = {DofId.BODY_FORCE_X: 1.0, DofId.EARTH_FORCE_Z: 3.0,
                  DofId.EARTH_TORQUE_Z: float(rng.uniform(-math.pi, math.pi))}
            result = c.tick(odom(depth=float(rng.uniform(0, 6)), u=float(rng.uniform(-1, 1))), sp, 0.1)
            for v in result.tau_star.values():
                assert math.isfinite(v)
            for out in result.outputs:
                assert math.isfinite(out.command) and math.isfinite(out.force)


class TestControlTick:
    def test_zero_errors_zero_commands(self):
        c = make_controller([x_thruster()])
        result = c.tick(odom(u=0.0), {DofId.BODY_FORCE_X: 0.0}, 0.1)
        assert result.outputs[0].force == pytest.approx(0.0, abs=1e-9)
        assert result.outputs[0].command == pytest.approx(0.0, abs=1e-9)

    def test_surge_error_commands_only_x_thruster(self):
        thrusters = [x_thruster("main"), z_thruster("vert")]
        c = make_controller(thrusters, mode="surge_depth")
        result = c.tick(odom(u=0.0, depth=2.0),
                        {DofId.BODY_FORCE_X: 0.5, DofId.EARTH_FORCE_Z: 2.0}, 0.1)
        forces = {o.id: o.force for o in result.outputs}
        assert forces["main"] == pytest.approx(5.0, abs=1e-6)
        assert forces["vert"] == pytest.approx(0.0, abs=1e-6)

    def test_pitch_step_commands_opposite_vertical_forces(self):
        # two vertical thrusters fore/aft of the CG, pitch setpoint +30 deg
        thrusters = [z_thruster("vb", x=0.35), z_thruster("vs", x=-0.35)]
        modes = [ControlMode("pitch", {DofId.EARTH_TORQUE_Y},
                             {DofId.EARTH_TORQUE_Y: PidGains(kp=10.0)})]
        c = Controller(modes, Allocator(thrusters, 0.1), EarthFrame.ENU, "pitch")
        result = c.tick(odom(), {DofId.EARTH_TORQUE_Y: math.radians(30)}, 0.1)
        forces = {o.id: o.force for o in result.outputs}
        assert forces["vb"] * forces["vs"] < 0  # opposite signs

    def test_disabled_emits_zero_commands(self):
        c = make_controller([x_thruster()])
        c.set_enabled(False)
        result = c.tick(odom(u=1.0), {DofId.BODY_FORCE_X: 5.0}, 0.1)
        assert all(o.force == 0.0 for o in result.outputs)
        assert result.tau_star == {}

    def test_tau_star_dimension_matches_mode(self):
        c = make_controller([x_thruster(), z_thruster()], mode="five")
        result = c.tick(odom(), {}, 0.1)
        assert len(result.tau_star) == 5

    def test_articulated_delta_applied_to_tracked_angle(self):
        art = ArticulatedThruster(
            "a", Transform(Attitude.identity(), vec3(-0.5, 0.0, 0.0)),
            0.0, 35.0, [0.0, 1.0], 0.0, 50.0,
            servo_rate=2.0, angle_min=-1.2, angle_max=1.2,
        )
        modes = [ControlMode(
            "sy", {DofId.BODY_FORCE_X, DofId.EARTH_TORQUE_Z},
            {DofId.BODY_FORCE_X: PidGains(kp=30.0), DofId.EARTH_TORQUE_Z: PidGains(kp=8.0)},
        )]
        c = Controller(modes, Allocator([art], 0.1), EarthFrame.ENU, "sy")
        result = c.tick(odom(), {DofId.BODY_FORCE_X: 0.6, DofId.EARTH_TORQUE_Z: 0.4}, 0.1)
        out = result.outputs[0]
        assert out.angle_delta is not None
        assert abs(out.angle_delta) <= 2.0 * 0.1 + 1e-6
        assert result.servo_angles["a"] == pytest.approx(out.angle_delta, abs=1e-9)
