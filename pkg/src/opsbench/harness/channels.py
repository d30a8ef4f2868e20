"""Transports that carry protocol messages between harness and agent.

Three interchangeable channels: in-process (scripted agents), newline-
delimited JSON over a subprocess's standard streams, and an HTTP mode where
every harness message is POSTed and the response body carries the agent's
next message.
"""

from __future__ import annotations

import json
import subprocess
import threading
import urllib.error
import urllib.request
from queue import Empty, Queue
from typing import Optional, Protocol

from ..errors import OpsBenchError, ProtocolViolation


class ChannelError(OpsBenchError):
    """Transport failed or the agent went away."""


class AgentChannel(Protocol):
    def send(self, message: dict) -> None: ...

    def recv(self, timeout: float) -> dict: ...

    def close(self) -> None: ...


class InProcessChannel:
    """Drives a scripted agent object with receive()/emit() methods."""

    def __init__(self, agent):
        self.agent = agent

    def send(self, message: dict) -> None:
        self.agent.receive(message)

    def recv(self, timeout: float) -> dict:
        return self.agent.emit()

    def close(self) -> None:
        pass


class SubprocessChannel:
    """ndjson over the agent subprocess's stdin/stdout."""

    def __init__(self, command: list[str]):
        try:
            self._proc = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ChannelError(f"cannot start agent {command!r}: {exc}") from exc
        self._lines: Queue = Queue()
        self._closed = threading.Event()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        try:
            assert self._proc.stdout is not None
            for line in self._proc.stdout:
                line = line.strip()
                if line:
                    self._lines.put(line)
        finally:
            self._closed.set()
            self._lines.put(None)  # wake any pending recv

    def send(self, message: dict) -> None:
        if self._proc.poll() is not None or self._proc.stdin is None:
            raise ChannelError("agent process exited")
        try:
            self._proc.stdin.write(json.dumps(message, ensure_ascii=False) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ChannelError(f"agent pipe closed: {exc}") from exc

    def recv(self, timeout: float) -> dict:
        try:
            line = self._lines.get(timeout=timeout)
        except Empty:
            raise ChannelError("timeout waiting for agent message") from None
        if line is None:
            raise ChannelError("agent closed its output stream")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolViolation(f"agent sent malformed JSON: {exc}") from None

    def close(self) -> None:
        if self._proc.poll() is None:
            if self._proc.stdin is not None:
                try:
                    self._proc.stdin.close()
                except OSError:
                    pass
            try:
                self._proc.wait(timeout=3)
            except subprocess.TimeoutExpired:
                self._proc.kill()


class HttpChannel:
    """POST each harness message; the response body is the agent's reply.

    The reply to ``end`` may be empty.  Replies are buffered so recv()
    returns the message produced by the most recent send().
    """

    def __init__(self, url: str, timeout: float = 60.0):
        self.url = url
        self.timeout = timeout
        self._pending: Optional[str] = None

    def send(self, message: dict) -> None:
        payload = json.dumps(message, ensure_ascii=False).encode("utf-8")
        request = urllib.request.Request(
            self.url, data=payload, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                self._pending = response.read().decode("utf-8").strip()
        except (urllib.error.URLError, OSError, TimeoutError) as exc:
            raise ChannelError(f"agent endpoint unreachable: {exc}") from exc

    def recv(self, timeout: float) -> dict:
        if not self._pending:
            raise ChannelError("no pending agent message")
        line, self._pending = self._pending, None
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolViolation(f"agent sent malformed JSON: {exc}") from None

    def close(self) -> None:
        self._pending = None
