"""Protocol client: drive an environment server over stdio or TCP.

The trainer never imports the simulator; everything goes through the
newline-delimited JSON protocol, so any server speaking protocol version 1
works.
"""
from __future__ import annotations

import json
import shlex
import socket
import subprocess

import numpy as np


class ProtocolError(RuntimeError):
    """Server replied ok=false or sent something unusable."""


class EnvClient:
    """One lock-step session against an environment server."""

    def __init__(self, endpoint: str):
        self._proc = None
        self._sock = None
        if endpoint.startswith("tcp://"):
            host, _, port = endpoint[len("tcp://"):].rpartition(":")
            self._sock = socket.create_connection((host, int(port)), timeout=60)
            self._reader = self._sock.makefile("rb")
            self._writer = self._sock.makefile("wb")
        else:
            self._proc = subprocess.Popen(
                shlex.split(endpoint),
                stdin=subprocess.PIPE, stdout=subprocess.PIPE)
            self._reader = self._proc.stdout
            self._writer = self._proc.stdin
        self.n_max = self.n_orus = self.obs_len = None

    # -- plumbing -----------------------------------------------------------

    def request(self, payload: dict) -> dict:
        try:
            self._writer.write((json.dumps(payload) + "\n").encode())
            self._writer.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"server closed the connection: {exc}") from exc
        line = self._reader.readline()
        if not line:
            raise ProtocolError("server closed the connection")
        reply = json.loads(line)
        if not reply.get("ok", False):
            raise ProtocolError(reply.get("error", "unknown server error"))
        return reply

    # -- commands -------------------------------------------------------------

    def hello(self) -> dict:
        reply = self.request({"cmd": "hello"})
        self.n_max, self.n_orus, self.obs_len = reply["n_max"], reply["k"], reply["obs_len"]
        if self.obs_len != self.n_max * (self.n_orus + 4):
            raise ProtocolError(
                f"observation length {self.obs_len} does not match "
                f"{self.n_max} slots of {self.n_orus + 4} values")
        return reply

    def reset(self, seed: int) -> np.ndarray:
        return np.asarray(self.request({"cmd": "reset", "seed": int(seed)})["obs"])

    def step(self, action: np.ndarray) -> dict:
        reply = self.request({"cmd": "step", "action": action.tolist()})
        reply["obs"] = np.asarray(reply["obs"])
        return reply

    def close(self) -> None:
        try:
            if self._writer and not self._writer.closed:
                try:
                    self.request({"cmd": "close"})
                except (ProtocolError, ValueError):
                    pass
                try:
                    self._writer.close()
                except OSError:
                    pass
        finally:
            if self._proc is not None:
                try:
                    self._proc.wait(timeout=15)
                except subprocess.TimeoutExpired:
                    self._proc.kill()
            if self._sock is not None:
                self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def activity_mask(self, obs: np.ndarray) -> np.ndarray:
        """Per-slot activity flags embedded in the observation layout."""
        stride = self.n_orus + 4
        return (obs[:: stride][: self.n_max] > 0.5).astype(np.float64)
