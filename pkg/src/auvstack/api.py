"""HTTP command/telemetry service for a running vehicle.

Request/response endpoints mirror what an operator console needs: status,
track history, mission editing, FSM transitions, controller enable/disable,
teleoperation setpoints, and a server-push telemetry stream (Server-Sent
Events). Mutations are validated synchronously against a snapshot, then
queued for the control loop to apply at the next tick boundary; errors carry
machine-readable reason codes.
"""

from __future__ import annotations

import json
import queue
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .guidance import TransitionNotAllowed, UnknownState
from .mission import MissionError, waypoint_from_dict
from .runner import Command, Runner


def _json_bytes(payload) -> bytes:
    return json.dumps(payload).encode("utf-8")


class ApiServer:
    def __init__(self, runner: Runner, host: str, port: int):
        self.runner = runner
        handler = _make_handler(runner)
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.httpd.daemon_threads = True
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def start(self):
        self._thread.start()

    def stop(self):
        self.httpd.shutdown()
        self.httpd.server_close()


def serve_api(runner: Runner, bind: str) -> ApiServer:
    host, _, port = bind.partition(":")
    server = ApiServer(runner, host or "127.0.0.1", int(port or 0))
    server.start()
    return server


def _make_handler(runner: Runner):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet; the telemetry log is the record
            pass

        # -- plumbing ----------------------------------------------------------

        def _send(self, code: int, payload: dict):
            body = _json_bytes(payload)
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                data = json.loads(raw)
            except json.JSONDecodeError:
                raise ValueError("body is not valid JSON") from None
            if not isinstance(data, (dict, list)):
                raise ValueError("body must be a JSON object or list")
            return data

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        # -- GET ----------------------------------------------------------------

        def do_GET(self):
            path = self.path.split("?", 1)[0]
            if path == "/status":
                record = runner.latest_record()
                fsm = runner.fsm_snapshot()
                self._send(200, {"ready": record is not None, "fsm": fsm, "record": record})
            elif path == "/track":
                self._send(200, {"positions": runner.track_snapshot()})
            elif path == "/mission/waypoints":
                self._send(200, {"waypoints": runner.mission_snapshot()})
            elif path == "/config":
                self._send(200, runner.config_summary())
            elif path == "/telemetry":
                self._stream()
            else:
                self._send(404, {"reason": "unknown_endpoint", "detail": path})

        def _write_chunk(self, payload: bytes):
            self.wfile.write(b"%X\r\n" % len(payload) + payload + b"\r\n")
            self.wfile.flush()

        def _stream(self):
            sub = runner.subscribe()
            try:
                self.send_response(200)
                self.send_header("Content-Type", "text/event-stream")
                self.send_header("Cache-Control", "no-cache")
                self.send_header("Transfer-Encoding", "chunked")
                self.send_header("Access-Control-Allow-Origin", "*")
                self.end_headers()
                while True:
                    try:
                        record = sub.get(timeout=1.0)
                    except queue.Empty:
                        self._write_chunk(b": keepalive\n\n")
                        continue
                    data = json.dumps(record).encode("utf-8")
                    self._write_chunk(b"data: " + data + b"\n\n")
            except (BrokenPipeError, ConnectionResetError, OSError):
                pass
            finally:
                runner.unsubscribe(sub)

        # -- mutations ----------------------------------------------------------

        def do_PUT(self):
            path = self.path.split("?", 1)[0]
            if path != "/mission/waypoints":
                self._send(404, {"reason": "unknown_endpoint", "detail": path})
                return
            try:
                body = self._body()
            except ValueError as e:
                self._send(400, {"reason": "bad_json", "detail": str(e)})
                return
            entries = body.get("waypoints") if isinstance(body, dict) else body
            if not isinstance(entries, list) or not entries:
                self._send(400, {"reason": "invalid_mission", "detail": "waypoints must be a non-empty list"})
                return
            try:
                waypoints = [
                    waypoint_from_dict(w, runner.vehicle.datum, runner.frame, f"waypoints[{i}]")
                    for i, w in enumerate(entries)
                ]
            except (MissionError, ValueError, TypeError) as e:
                self._send(400, {"reason": "invalid_mission", "detail": str(e)})
                return
            runner.submit(Command("mission", waypoints))
            self._send(200, {"ok": True, "count": len(waypoints)})

        def do_POST(self):
            path = self.path.split("?", 1)[0]
            try:
                body = self._body()
            except ValueError as e:
                self._send(400, {"reason": "bad_json", "detail": str(e)})
                return

            if path == "/fsm/transition":
                target = body.get("target") if isinstance(body, dict) else None
                if not target:
                    self._send(400, {"reason": "missing_target"})
                    return
                try:
                    runner.fsm.check_transition(str(target))
                except UnknownState:
                    self._send(404, {"reason": "unknown_state", "detail": str(target)})
                    return
                except TransitionNotAllowed as e:
                    self._send(409, {"reason": "transition_not_allowed", "detail": str(e)})
                    return
                runner.submit(Command("transition", str(target)))
                self._send(202, {"ok": True, "target": str(target)})
            elif path == "/controller/enable":
                runner.submit(Command("enable", True))
                self._send(200, {"ok": True, "enabled": True})
            elif path == "/controller/disable":
                runner.submit(Command("enable", False))
                self._send(200, {"ok": True, "enabled": False})
            elif path == "/teleop":
                from .runner import parse_teleop

                try:
                    values = parse_teleop(body if isinstance(body, dict) else {})
                except (ValueError, TypeError) as e:
                    self._send(400, {"reason": "invalid_teleop", "detail": str(e)})
                    return
                runner.submit(Command("teleop", values))
                self._send(200, {"ok": True, "dofs": len(values)})
            elif path == "/payload":
                runner.submit(Command("payload", bool(body.get("on", False))))
                self._send(200, {"ok": True})
            elif path == "/stop":
                runner.submit(Command("stop"))
                self._send(202, {"ok": True})
            else:
                self._send(404, {"reason": "unknown_endpoint", "detail": path})

    return Handler
