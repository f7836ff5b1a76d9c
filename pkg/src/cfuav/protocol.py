"""Wire protocol: newline-delimited JSON request/response over byte streams.

One session serves one environment in strict lock-step: every request gets
exactly one response, in order. Floats are serialized with 17 significant
digits so a recorded transcript replays byte-identically. Malformed input
produces an error response and never corrupts environment state.
"""
from __future__ import annotations

import json
import socket
import sys

import numpy as np

from .config import ScenarioConfig
from .environment import Environment, InputRangeError, observation_length

PROTOCOL_VERSION = 1


def encode(obj) -> str:
    """JSON text with full-precision decimal floats and stable key order."""
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(encode(v) for v in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(k)}:{encode(v)}" for k, v in obj.items()) + "}"
    if obj is None:
        return "null"
    raise TypeError(f"cannot encode {type(obj).__name__}")


class Session:
    """Protocol state for one connection; create one per session."""

    def __init__(self, config: ScenarioConfig, observer=None):
        self.config = config
        self.env = Environment(config)
        self.has_state = False
        self.observer = observer  # called as observer(outcome) after each step

    def handle_line(self, line: str) -> tuple[str, bool]:
        """Process one request line; returns (response text, keep going)."""
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            return encode({"ok": False, "error": f"malformed request: {exc.msg}"}), True
        if not isinstance(request, dict) or "cmd" not in request:
            return encode({"ok": False, "error": "request must be an object with 'cmd'"}), True
        cmd = request["cmd"]
        try:
            if cmd == "hello":
                return encode({
                    "ok": True,
                    "n_max": self.config.n_max_users,
                    "k": self.config.n_orus,
                    "obs_len": observation_length(self.config),
                    "protocol_version": PROTOCOL_VERSION,
                }), True
            if cmd == "reset":
                seed = int(request["seed"])
                _, obs = self.env.reset(seed)
                self.has_state = True
                return encode({"ok": True, "obs": obs}), True
            if cmd == "step":
                if not self.has_state:
                    return encode({"ok": False, "error": "step before reset"}), True
                action = np.asarray(request["action"], dtype=float)
                _, obs, outcome, done = self.env.step(action)
                if self.observer is not None:
                    self.observer(outcome)
                return encode({
                    "ok": True,
                    "obs": obs,
                    "reward": outcome.reward,
                    "q1": outcome.q1,
                    "q2": outcome.q2,
                    "q3": outcome.q3,
                    "eps": outcome.eps,
                    "clusters": [sorted(int(k) for k in c) for c in outcome.clusters],
                    "done": done,
                }), True
            if cmd == "close":
                return encode({"ok": True}), False
            return encode({"ok": False, "error": f"unknown command '{cmd}'"}), True
        except (InputRangeError, KeyError, TypeError, ValueError) as exc:
            return encode({"ok": False, "error": f"{type(exc).__name__}: {exc}"}), True


def serve_streams(config: ScenarioConfig, reader, writer, observer=None) -> int:
    """Serve one session over binary file-like streams; returns steps served.

    Reads newline-delimited requests until EOF or a close command; blocks
    only while waiting for the next request.
    """
    session = Session(config, observer=observer)
    served = 0
    for raw_line in reader:
        line = raw_line.decode("utf-8").strip()
        if not line:
            continue
        response, keep_going = session.handle_line(line)
        writer.write(response.encode("utf-8") + b"\n")
        writer.flush()
        served += 1
        if not keep_going:
            break
    return served


def serve_stdio(config: ScenarioConfig, observer=None) -> int:
    return serve_streams(config, sys.stdin.buffer, sys.stdout.buffer, observer)


def serve_tcp(config: ScenarioConfig, host: str, port: int,
              observer=None, max_sessions: int | None = None) -> None:
    """Accept connections sequentially, one independent session each."""
    with socket.create_server((host, port)) as server:
        print(f"listening on {server.getsockname()[0]}:{server.getsockname()[1]}",
              file=sys.stderr)
        sessions = 0
        while max_sessions is None or sessions < max_sessions:
            conn, _ = server.accept()
            with conn:
                reader = conn.makefile("rb")
                writer = conn.makefile("wb")
                serve_streams(config, reader, writer, observer)
            sessions += 1
