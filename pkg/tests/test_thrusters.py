import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auvstack.frames import Attitude, Transform, vec3
from auvstack.thrusters import (
    FORCE_DEADBAND,
    ArticulatedThruster,
    FixedThruster,
    command_to_force,
    force_to_command,
    poly_is_monotone,
    recover_articulated,
)


class TestPolynomial:
    def test_linear(self):
        u, sat = force_to_command([0.0, 2.0], -10, 10, 4.0)
        assert u == pytest.approx(2.0, abs=1e-9)
        assert not sat

    def test_monotone_quadratic(self):
        u, sat = force_to_command([0.0, 0.0, 1.0], 0, 10, 9.0)
        assert u == pytest.approx(3.0, abs=1e-9)
        assert not sat

    def test_round_trip(self):
        poly = [0.5, 1.2, 0.8]
        f = command_to_force(poly, 2.7)
        u, sat = force_to_command(poly, 0, 5, f)
        assert not sat
        assert u == pytest.approx(2.7, abs=1e-6)

    def test_saturation_clamps_and_flags(self):
        u, sat = force_to_command([0.0, 2.0], -10, 10, 25.0)
        assert sat and u == 10.0
        u, sat = force_to_command([0.0, 2.0], -10, 10, -25.0)
        assert sat and u == -10.0

    def test_decreasing_poly(self):
        u, sat = force_to_command([0.0, -2.0], -10, 10, 4.0)
        assert not sat
        assert u == pytest.approx(-2.0, abs=1e-9)

    def test_monotonicity_scan(self):
        assert poly_is_monotone([0, 1], -10, 10)
        assert poly_is_monotone([0, 0, 1], 0, 10)  # F' = 0 only at the boundary
        assert not poly_is_monotone([0, 1, -5], 0, 1)

    @given(st.floats(-40, 50, allow_nan=False))
    @settings(max_examples=200)
    def test_round_trip_property(self, u):
        poly = [0.0, 0.55, 0.004]
        f = command_to_force(poly, u)
        u2, sat = force_to_command(poly, -40, 50, f)
        assert not sat
        assert abs(command_to_force(poly, u2) - f) <= 1e-9 * max(1.0, abs(f))


class TestSpecs:
    def _mount(self):
        return Transform(Attitude.identity(), vec3(0, 0, 0))

    def test_fixed_validates_bounds(self):
        with pytest.raises(ValueError, match="force_min"):
            FixedThruster("t", self._mount(), 5, 5, [0, 1], -1, 1)
        with pytest.raises(ValueError, match="command_min"):
            FixedThruster("t", self._mount(), -1, 1, [0, 1], 2, 2)

    def test_fixed_rejects_non_monotone_poly(self):
        with pytest.raises(ValueError, match="monotone"):
            FixedThruster("t", self._mount(), -1, 1, [0, 1, -5], 0, 1)

    def test_articulated_requires_positive_servo_rate(self):
        with pytest.raises(ValueError, match="servo_rate"):
            ArticulatedThruster("a", self._mount(), 0, 1, [0, 1], 0, 1, servo_rate=0.0)

    def test_articulated_requires_nonnegative_force_min(self):
        with pytest.raises(ValueError, match="force_min"):
            ArticulatedThruster("a", self._mount(), -1, 1, [0, 1], -1, 1, servo_rate=1.0)

    def test_current_mount_rotates_with_angle(self):
        t = ArticulatedThruster(
            "a", self._mount(), 0, 1, [0, 1], 0, 1,
            servo_rate=1.0, angle_min=-2, angle_max=2, current_angle=math.pi / 2,
        )
        x_axis = t.current_mount().rotation.rotate([1, 0, 0])
        assert np.allclose(x_axis, [0, 1, 0], atol=1e-12)

    def test_apply_delta_clamps_to_limits(self):
        t = ArticulatedThruster(
            "a", self._mount(), 0, 1, [0, 1], 0, 1,
            servo_rate=1.0, angle_min=-0.5, angle_max=0.5,
        )
        assert t.apply_delta(2.0) == 0.5
        assert t.apply_delta(-3.0) == -0.5


class TestRecoverArticulated:
    def test_three_four_five(self):
        f, delta = recover_articulated(3.0, 4.0)
        assert f == pytest.approx(5.0, abs=1e-12)
        assert delta == pytest.approx(math.atan2(4, 3), abs=1e-12)

    def test_diagonal(self):
        f, delta = recover_articulated(1.0, 1.0)
        assert f == pytest.approx(math.sqrt(2), abs=1e-12)
        assert delta == pytest.approx(math.pi / 4, abs=1e-12)

    def test_deadband_holds_angle(self):
        assert recover_articulated(0.0, 0.0) == (0.0, 0.0)
        assert recover_articulated(FORCE_DEADBAND / 2, 0.0) == (0.0, 0.0)
