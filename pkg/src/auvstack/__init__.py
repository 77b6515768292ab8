"""auvstack: GNC stack for a simulated underwater vehicle.

Library layers, bottom up: frames (rotations and transforms), thrusters and
allocation (QP-based force distribution, articulated vectoring), control
(per-DOF PID with switchable modes), guidance (FSM + prioritized behaviors),
dynamics (6-DOF plant), and runner/api (tick loop, telemetry, HTTP service).
"""

__version__ = "0.1.0"

from .frames import Attitude, EarthFrame, Odometry, Pose, Transform, Twist  # noqa: F401
