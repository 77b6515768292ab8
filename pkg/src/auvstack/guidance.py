"""Behavior-based guidance: prioritized setpoint claims merged per DOF,
orchestrated by a finite-state machine.

Each FSM state binds one control mode and a list of behavior instances at
unique priorities. Every tick the active behaviors each produce a partial
setpoint claim; conflicts are resolved independently per DOF in favor of the
highest-priority claimant. Behaviors may emit named events which the state
config can map to automatic transitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .control import DofId
from .frames import EarthFrame, Odometry, wrap_angle
from .mission import Waypoint


class EmptyPath(ValueError):
    pass


class UnknownState(KeyError):
    pass


class TransitionNotAllowed(Exception):
    def __init__(self, current: str, target: str):
        super().__init__(f"transition {current!r} -> {target!r} is not allowed")
        self.current = current
        self.target = target


@dataclass(frozen=True)
class SetpointClaim:
    """A behavior's prioritized claim over a subset of controllable DOFs."""

    values: dict
    priority: int
    source: str

    def __post_init__(self):
        if not self.values:
            raise ValueError("claim must cover at least one DOF")
        for dof, v in self.values.items():
            DofId(dof)
            if not math.isfinite(v):
                raise ValueError(f"claim value for {dof} is not finite")


def arbitrate(claims) -> dict:
    """Merge claims per DOF: the highest-priority claimant of each DOF wins.

    Ties (which valid configs cannot produce) break deterministically on the
    source id so the merge is invariant under claim-list permutation.
    """
    merged: dict = {}
    winner: dict = {}
    for claim in claims:
        for dof, value in claim.values.items():
            key = (claim.priority, claim.source)
            if dof not in merged or key > winner[dof]:
                merged[dof] = value
                winner[dof] = key
    return merged


@dataclass
class TeleopInput:
    value: float
    stamp: float


@dataclass
class GuidanceContext:
    """Everything a behavior may read during one evaluation."""

    odom: Odometry
    t: float
    frame: EarthFrame
    seabed_depth: float
    teleop: dict = field(default_factory=dict)  # DofId -> TeleopInput
    events: list = field(default_factory=list)


class Behavior:
    """Base class for guidance behavior plugins.

    evaluate() must be side-effect-free apart from the behavior's own timers
    and return a SetpointClaim or None (no claim this tick).
    """

    kind = "behavior"

    def __init__(self, instance_id: str, priority: int, params: dict | None = None):
        self.instance_id = instance_id
        self.priority = priority
        self.params = dict(params or {})

    def evaluate(self, ctx: GuidanceContext) -> SetpointClaim | None:
        raise NotImplementedError

    def _claim(self, values: dict) -> SetpointClaim:
        return SetpointClaim(values, self.priority, self.instance_id)


class PathFollowing(Behavior):
    """Line-of-sight tracking of an ordered waypoint list.

    Claims yaw (LOS with cross-track correction through a lookahead point),
    depth (linear interpolation between the segment endpoint depths) and surge
    (waypoint speed, or the cruise default). A waypoint is accepted when the
    horizontal distance drops below the acceptance radius; acceptance is
    monotone. On completion the behavior goes silent and emits mission_done.
    """

    kind = "path_following"

    def __init__(self, instance_id: str, priority: int, params: dict | None = None):
        super().__init__(instance_id, priority, params)
        self.lookahead = float(self.params.get("lookahead", 5.0))
        self.acceptance_radius = float(self.params.get("acceptance_radius", 2.0))
        self.cruise_speed = float(self.params.get("cruise_speed", 0.5))
        self.waypoints: list[Waypoint] = []
        self.index = 0
        self._anchor: tuple[float, float, float] | None = None  # x, y, depth
        self._done_announced = False

    def set_mission(self, waypoints, odom: Odometry | None = None, frame: EarthFrame = EarthFrame.ENU):
        """Attach a new waypoint list, restarting at the segment nearest the vehicle."""
        self.waypoints = list(waypoints)
        self.index = 0
        self._anchor = None
        self._done_announced = False
        if odom is not None and self.waypoints:
            self._anchor = (
                float(odom.pose.position[0]),
                float(odom.pose.position[1]),
                odom.depth(frame),
            )
            self.index = self._nearest_segment(odom)

    def _nearest_segment(self, odom: Odometry) -> int:
        # Segment 0 would start at the vehicle itself, so it is scored as the
        # distance to its end waypoint; later segments by perpendicular distance.
        px, py = float(odom.pose.position[0]), float(odom.pose.position[1])
        best = 0
        best_d = math.hypot(self.waypoints[0].x - px, self.waypoints[0].y - py)
        for i in range(1, len(self.waypoints)):
            a, b = self.waypoints[i - 1], self.waypoints[i]
            dx, dy = b.x - a.x, b.y - a.y
            seg2 = dx * dx + dy * dy
            s = 0.0 if seg2 == 0.0 else max(0.0, min(1.0, ((px - a.x) * dx + (py - a.y) * dy) / seg2))
            d = math.hypot(px - (a.x + s * dx), py - (a.y + s * dy))
            if d < best_d:
                best, best_d = i, d
        return best

    def _segment_start(self, ctx: GuidanceContext) -> tuple[float, float, float]:
        if self.index == 0:
            return self._anchor
        prev = self.waypoints[self.index - 1]
        return prev.x, prev.y, prev.resolve_depth(ctx.seabed_depth)

    def evaluate(self, ctx: GuidanceContext) -> SetpointClaim | None:
        if not self.waypoints:
            raise EmptyPath(f"{self.instance_id}: no waypoints attached")
        if self._anchor is None:
            self._anchor = (
                float(ctx.odom.pose.position[0]),
                float(ctx.odom.pose.position[1]),
                ctx.odom.depth(ctx.frame),
            )
        px, py = float(ctx.odom.pose.position[0]), float(ctx.odom.pose.position[1])

        while self.index < len(self.waypoints):
            wp = self.waypoints[self.index]
            if math.hypot(wp.x - px, wp.y - py) <= self.acceptance_radius:
                self.index += 1
            else:
                break
        if self.index >= len(self.waypoints):
            if not self._done_announced:
                ctx.events.append("mission_done")
                self._done_announced = True
            return None

        wp = self.waypoints[self.index]
        ax, ay, adepth = self._segment_start(ctx)
        dx, dy = wp.x - ax, wp.y - ay
        seg_len = math.hypot(dx, dy)
        if seg_len < 1e-9:
            bearing = math.atan2(wp.y - py, wp.x - px)
            cross = 0.0
            s = 1.0
        else:
            bearing = math.atan2(dy, dx)
            tx, ty = dx / seg_len, dy / seg_len
            rx, ry = px - ax, py - ay
            cross = tx * ry - ty * rx
            s = max(0.0, min(1.0, (rx * tx + ry * ty) / seg_len))
        yaw_d = wrap_angle(bearing - math.atan2(cross, self.lookahead))
        depth_d = adepth + s * (wp.resolve_depth(ctx.seabed_depth) - adepth)
        speed = wp.speed if wp.speed is not None else self.cruise_speed
        return self._claim(
            {
                DofId.EARTH_TORQUE_Z: yaw_d,
                DofId.EARTH_FORCE_Z: depth_d,
                DofId.BODY_FORCE_X: speed,
            }
        )


class PeriodicSurfacing(Behavior):
    """Claims a shallow depth once a configured interval has elapsed.

    Dormant until `interval` seconds since the last completed surfacing (the
    timer starts at first evaluation); then claims {depth: surface_depth}
    until the vehicle has stayed above surface_threshold for hold_time, at
    which point surfacing_complete is emitted and the timer restarts.
    """

    kind = "periodic_surfacing"

    def __init__(self, instance_id: str, priority: int, params: dict | None = None):
        super().__init__(instance_id, priority, params)
        self.interval = float(self.params.get("interval", 600.0))
        self.surface_depth = float(self.params.get("surface_depth", 0.0))
        self.hold_time = float(self.params.get("hold_time", 5.0))
        self.surface_threshold = float(self.params.get("surface_threshold", 0.5))
        self._timer_start: float | None = None
        self._surfacing = False
        self._hold_start: float | None = None

    def evaluate(self, ctx: GuidanceContext) -> SetpointClaim | None:
        if self._timer_start is None:
            self._timer_start = ctx.t
        if not self._surfacing:
            if ctx.t - self._timer_start >= self.interval:
                self._surfacing = True
                self._hold_start = None
            else:
                return None
        depth = ctx.odom.depth(ctx.frame)
        if depth < self.surface_threshold:
            if self._hold_start is None:
                self._hold_start = ctx.t
            if ctx.t - self._hold_start >= self.hold_time:
                self._surfacing = False
                self._timer_start = ctx.t
                ctx.events.append("surfacing_complete")
                return None
        else:
            self._hold_start = None
        return self._claim({DofId.EARTH_FORCE_Z: self.surface_depth})


class Teleoperation(Behavior):
    """Passes operator setpoints through, claiming only the DOFs touched.

    Inputs older than staleness_timeout are dropped, so a silent operator
    console fails safe to whatever else claims those DOFs.
    """

    kind = "teleoperation"

    def __init__(self, instance_id: str, priority: int, params: dict | None = None):
        super().__init__(instance_id, priority, params)
        self.staleness_timeout = float(self.params.get("staleness_timeout", 3.0))

    def evaluate(self, ctx: GuidanceContext) -> SetpointClaim | None:
        fresh = {
            dof: inp.value
            for dof, inp in ctx.teleop.items()
            if ctx.t - inp.stamp <= self.staleness_timeout
        }
        if not fresh:
            return None
        return self._claim(fresh)


BEHAVIOR_KINDS = {
    PathFollowing.kind: PathFollowing,
    PeriodicSurfacing.kind: PeriodicSurfacing,
    Teleoperation.kind: Teleoperation,
}


@dataclass
class FsmState:
    name: str
    mode: str
    behaviors: list
    allowed_transitions: frozenset
    events: dict = field(default_factory=dict)  # event name -> target state

    def __post_init__(self):
        prios = [b.priority for b in self.behaviors]
        if len(prios) != len(set(prios)):
            raise ValueError(f"state {self.name!r}: duplicate priority")
        self.allowed_transitions = frozenset(self.allowed_transitions)


class Fsm:
    """State registry plus the active state; always in exactly one state."""

    def __init__(self, states, initial: str):
        self.states = {s.name: s for s in states}
        if initial not in self.states:
            raise UnknownState(initial)
        self.active = initial

    @property
    def state(self) -> FsmState:
        return self.states[self.active]

    def check_transition(self, target: str):
        """Raise if the transition is invalid; no-op targets are always valid."""
        if target not in self.states:
            raise UnknownState(target)
        if target != self.active and target not in self.state.allowed_transitions:
            raise TransitionNotAllowed(self.active, target)

    def request_transition(self, target: str, cause: str = "operator") -> bool:
        """Apply a transition. Returns False for the idempotent same-state case."""
        self.check_transition(target)
        if target == self.active:
            return False
        self.active = target
        return True

    def evaluate(self, ctx: GuidanceContext) -> dict:
        """Run the active behaviors and merge their claims.

        A path-following behavior with no mission attached simply contributes
        no claim; events appended to ctx.events are the runner's to route.
        """
        claims = []
        for b in self.state.behaviors:
            try:
                claim = b.evaluate(ctx)
            except EmptyPath:
                claim = None
            if claim is not None:
                claims.append(claim)
        return arbitrate(claims)

    def event_target(self, event: str) -> str | None:
        return self.state.events.get(event)
