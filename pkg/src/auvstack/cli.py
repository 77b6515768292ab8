"""Command-line interface: run, validate, plot.

Exit codes: 0 success, 1 configuration/validation failure, 2 runtime fault.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import api, runner
from .config import ConfigError, load_runner


def _add_run_args(p: argparse.ArgumentParser):
    p.add_argument("--config", "-c", required=True, help="runner config YAML")
    p.add_argument("--mission", help="override the mission file (YAML or KML)")
    p.add_argument("--headless", action="store_true", help="run faster than real time, no pacing")
    p.add_argument("--duration", type=float, help="override run duration in seconds")
    p.add_argument("--seed", type=int, help="override the RNG seed")
    p.add_argument("--log", help="override the telemetry log path")
    p.add_argument("--bind", help="API bind address host:port ('' disables the API)")


def cmd_run(args) -> int:
    try:
        cfg = load_runner(args.config)
        if args.mission:
            cfg.mission_path = Path(args.mission)
        if args.duration is not None:
            cfg.duration = args.duration
        if args.seed is not None:
            cfg.seed = args.seed
        if args.log:
            cfg.log_path = Path(args.log)
        if args.bind is not None:
            cfg.bind = args.bind
        r = runner.load(cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    server = None
    if cfg.bind:
        server = api.serve_api(r, cfg.bind)
        print(f"api: http://{cfg.bind.partition(':')[0]}:{server.port}", file=sys.stderr)
    try:
        code = r.run(headless=args.headless)
    except KeyboardInterrupt:
        code = 0
    finally:
        if server is not None:
            server.stop()
    print(f"run finished: {r.tick_index} ticks, log {cfg.log_path}", file=sys.stderr)
    return code


def cmd_validate(args) -> int:
    try:
        r = runner.load(args.config)
    except ConfigError as e:
        print(f"invalid: {e}", file=sys.stderr)
        return 1
    summary = r.config_summary()
    print(f"ok: vehicle {summary['vehicle']!r}, {len(summary['thrusters'])} thrusters, "
          f"modes {summary['modes']}, states {summary['states']}")
    return 0


def cmd_plot(args) -> int:
    from .plots import render_report

    waypoints = None
    if args.mission:
        from .mission import load_mission

        waypoints = [wp.to_dict() for wp in load_mission(args.mission)]
    try:
        written = render_report(args.log, args.out_dir, waypoints)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for p in written:
        print(p)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="auvstack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a vehicle (simulated plant + GNC loop)")
    _add_run_args(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_val = sub.add_parser("validate", help="load and cross-check a configuration")
    p_val.add_argument("--config", "-c", required=True)
    p_val.set_defaults(fn=cmd_validate)

    p_plot = sub.add_parser("plot", help="render figures and summary.csv from a telemetry log")
    p_plot.add_argument("--log", required=True, help="telemetry JSONL file")
    p_plot.add_argument("--out-dir", default="plots", help="output directory")
    p_plot.add_argument("--mission", help="mission file to overlay on the track plot")
    p_plot.set_defaults(fn=cmd_plot)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
