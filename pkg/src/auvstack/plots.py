"""Render review figures and a delimited summary from a telemetry log."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .telemetry import read_log

_STATE_CHANNELS = ["surge", "depth", "roll", "pitch", "yaw"]


def _series(records, getter):
    out = []
    for r in records:
        try:
            out.append(getter(r))
        except (KeyError, IndexError, TypeError):
            out.append(math.nan)
    return out


def write_summary_csv(records, path: Path):
    fields = [
        "t",
        "state",
        "mode",
        "x",
        "y",
        "depth",
        "roll",
        "pitch",
        "yaw",
        "surge",
        "residual",
        "fault",
        "saturation",
    ]
    thruster_ids = [th["id"] for th in records[0].get("thrusters", [])] if records else []
    fields += [f"cmd_{tid}" for tid in thruster_ids]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for r in records:
            if "event" in r:
                continue
            pose = r["truth"]["pose"]
            row = {
                "t": r["t"],
                "state": r["state"],
                "mode": r["mode"],
                "x": pose["position"][0],
                "y": pose["position"][1],
                "depth": pose["depth"],
                "roll": pose["euler"][0],
                "pitch": pose["euler"][1],
                "yaw": pose["euler"][2],
                "surge": r["truth"]["twist"]["linear"][0],
                "residual": r["residual"],
                "fault": r["flags"]["fault"],
                "saturation": r["flags"]["saturation"],
            }
            for th in r.get("thrusters", []):
                row[f"cmd_{th['id']}"] = th["command"]
            writer.writerow(row)


def plot_track(records, path: Path, waypoints=None):
    fig, (ax_xy, ax_depth) = plt.subplots(1, 2, figsize=(11, 4.5))
    xs = _series(records, lambda r: r["truth"]["pose"]["position"][0])
    ys = _series(records, lambda r: r["truth"]["pose"]["position"][1])
    ts = _series(records, lambda r: r["t"])
    depth = _series(records, lambda r: r["truth"]["pose"]["depth"])
    depth_sp = _series(records, lambda r: r["setpoint"].get("depth", math.nan))

    ax_xy.plot(xs, ys, "r-", lw=1.0, label="vehicle")
    if waypoints:
        ax_xy.plot(
            [w["xy"][0] for w in waypoints],
            [w["xy"][1] for w in waypoints],
            "b--o",
            ms=4,
            lw=0.8,
            label="waypoints",
        )
    ax_xy.set_xlabel("x [m]")
    ax_xy.set_ylabel("y [m]")
    ax_xy.set_aspect("equal", adjustable="datalim")
    ax_xy.legend(loc="best", fontsize=8)
    ax_xy.set_title("horizontal track")

    ax_depth.plot(ts, depth, "r-", lw=1.0, label="depth")
    ax_depth.plot(ts, depth_sp, "b--", lw=1.0, label="desired")
    ax_depth.invert_yaxis()
    ax_depth.set_xlabel("t [s]")
    ax_depth.set_ylabel("depth [m]")
    ax_depth.legend(loc="best", fontsize=8)
    ax_depth.set_title("depth profile")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_actuators(records, path: Path):
    ts = _series(records, lambda r: r["t"])
    thruster_ids = [th["id"] for th in records[0].get("thrusters", [])] if records else []
    has_servo = any(
        "servo_angle" in th for r in records[:1] for th in r.get("thrusters", [])
    )
    n_rows = 2 if has_servo else 1
    fig, axes = plt.subplots(n_rows, 1, figsize=(10, 3.2 * n_rows), squeeze=False)
    ax = axes[0][0]
    for i, tid in enumerate(thruster_ids):
        cmds = _series(records, lambda r, i=i: r["thrusters"][i]["command"])
        ax.plot(ts, cmds, lw=0.9, label=tid)
    ax.set_ylabel("command")
    ax.set_xlabel("t [s]")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("thruster commands")
    if has_servo:
        ax2 = axes[1][0]
        for i, tid in enumerate(thruster_ids):
            if "servo_angle" not in records[0]["thrusters"][i]:
                continue
            angles = _series(records, lambda r, i=i: r["thrusters"][i]["servo_angle"])
            ax2.plot(ts, angles, lw=0.9, label=tid)
        ax2.set_ylabel("servo angle [rad]")
        ax2.set_xlabel("t [s]")
        ax2.legend(loc="best", fontsize=8)
        ax2.set_title("servo angles")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_states(records, path: Path):
    ts = _series(records, lambda r: r["t"])
    fig, axes = plt.subplots(len(_STATE_CHANNELS), 1, figsize=(10, 2.1 * len(_STATE_CHANNELS)), sharex=True)
    for ax, channel in zip(axes, _STATE_CHANNELS):
        if channel == "surge":
            current = _series(records, lambda r: r["truth"]["twist"]["linear"][0])
        elif channel == "depth":
            current = _series(records, lambda r: r["truth"]["pose"]["depth"])
        else:
            idx = {"roll": 0, "pitch": 1, "yaw": 2}[channel]
            current = _series(records, lambda r, idx=idx: r["truth"]["pose"]["euler"][idx])
        desired = _series(records, lambda r, c=channel: r["setpoint"][c])
        ax.plot(ts, current, "r-", lw=0.9, label="current")
        ax.plot(ts, desired, "b--", lw=0.9, label="desired")
        if channel == "depth":
            ax.invert_yaxis()
        ax.set_ylabel(channel)
        ax.legend(loc="best", fontsize=7)
    axes[-1].set_xlabel("t [s]")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_report(log_path, out_dir, waypoints=None) -> list[Path]:
    """Write all figures plus summary.csv into out_dir; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = [r for r in read_log(log_path) if "event" not in r]
    if not records:
        raise ValueError(f"{log_path}: no telemetry records")
    written = []
    for name, fn in (
        ("track.png", lambda p: plot_track(records, p, waypoints)),
        ("actuators.png", lambda p: plot_actuators(records, p)),
        ("states.png", lambda p: plot_states(records, p)),
    ):
        target = out_dir / name
        fn(target)
        written.append(target)
    csv_path = out_dir / "summary.csv"
    write_summary_csv(records, csv_path)
    written.append(csv_path)
    return written
