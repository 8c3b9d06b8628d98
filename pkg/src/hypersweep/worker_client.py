"""Subprocess objective: line-delimited JSON over the worker's stdin/stdout.

Protocol (one JSON object per line, UTF-8):
  worker -> client on start:  {"type": "hello", "protocol": 1}
  client -> worker:           {"type": "eval", "id", "config", "seed", "epochs"}
  worker -> client:           {"type": "result", "id", "status", ...}
  client -> worker:           {"type": "shutdown"}   (worker exits 0)

A per-evaluation timeout kills and respawns the worker once and yields a
timeout record rather than an exception.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
import uuid
from typing import Sequence

from .objective import STATUS_ERROR, STATUS_TIMEOUT, EvaluationRecord, Objective, ObjectiveError
from .space import Config, ConfigSpace

DEFAULT_HANDSHAKE_TIMEOUT = 30.0
DEFAULT_EVAL_TIMEOUT = 3600.0

PROTOCOL_VERSION = 1


class WorkerStartupError(ObjectiveError):
    """Worker could not be spawned or did not complete the hello handshake."""


class _WorkerProcess:
    """One worker subprocess with a background stdout reader."""

    def __init__(self, command: Sequence[str], handshake_timeout: float):
        try:
            self.proc = subprocess.Popen(
                list(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise WorkerStartupError(f"cannot spawn worker {command!r}: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        hello = self._next_message(handshake_timeout)
        if hello is None or hello.get("type") != "hello" or hello.get("protocol") != PROTOCOL_VERSION:
            self.kill()
            raise WorkerStartupError(f"invalid or missing hello from worker: {hello!r}")

    def _read_loop(self) -> None:
        assert self.proc.stdout is not None
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _next_message(self, timeout: float) -> dict | None:
        """Next JSON object line within timeout; skips non-protocol chatter."""
        import time

        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return None
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                return None
            if line is None:
                return None
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError:
                continue
            if isinstance(doc, dict) and "type" in doc:
                return doc

    def send(self, doc: dict) -> None:
        assert self.proc.stdin is not None
        self.proc.stdin.write(json.dumps(doc) + "\n")
        self.proc.stdin.flush()

    def request(self, doc: dict, timeout: float) -> dict | None:
        self.send(doc)
        return self._next_message(timeout)

    def shutdown(self, grace: float = 5.0) -> None:
        try:
            if self.proc.poll() is None:
                self.send({"type": "shutdown"})
                self.proc.wait(timeout=grace)
        except (OSError, subprocess.TimeoutExpired, BrokenPipeError):
            self.kill()

    def kill(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()
            self.proc.wait()


class WorkerObjective(Objective):
    """Objective served by one external worker process (requests serialized)."""

    def __init__(
        self,
        space: ConfigSpace,
        command: str | Sequence[str],
        handshake_timeout: float = DEFAULT_HANDSHAKE_TIMEOUT,
        eval_timeout: float = DEFAULT_EVAL_TIMEOUT,
    ):
        super().__init__(space)
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.handshake_timeout = handshake_timeout
        self.eval_timeout = eval_timeout
        self._lock = threading.Lock()
        self._worker: _WorkerProcess | None = _WorkerProcess(self.command, handshake_timeout)

    def run(self, config: Config, seed: int, epochs: int) -> EvaluationRecord:
        with self._lock:
            if self._worker is None or self._worker.proc.poll() is not None:
                self._worker = _WorkerProcess(self.command, self.handshake_timeout)
            request = {
                "type": "eval",
                "id": uuid.uuid4().hex,
                "config": dict(config),
                "seed": seed,
                "epochs": epochs,
            }
            try:
                reply = self._worker.request(request, self.eval_timeout)
            except (OSError, BrokenPipeError) as exc:
                self._worker.kill()
                self._worker = None
                return self._failed(config, seed, STATUS_ERROR, f"worker pipe failure: {exc}")
            if reply is None:
                # timeout or worker death: kill and respawn on next call
                self._worker.kill()
                self._worker = None
                return self._failed(
                    config, seed, STATUS_TIMEOUT,
                    f"no result within {self.eval_timeout}s",
                )
            if reply.get("type") != "result" or reply.get("id") != request["id"]:
                return self._failed(config, seed, STATUS_ERROR, f"protocol violation: {reply!r}")
            if reply.get("status") == "ok":
                try:
                    metrics = {k: float(v) for k, v in reply.get("metrics", {}).items()}
                    return self._ok(config, seed, metrics)
                except (TypeError, ValueError) as exc:
                    return self._failed(config, seed, STATUS_ERROR, str(exc))
            return self._failed(
                config, seed, STATUS_ERROR, reply.get("message", "worker error")
            )

    def close(self) -> None:
        with self._lock:
            if self._worker is not None:
                self._worker.shutdown()
                self._worker = None


class WorkerPool(Objective):
    """K identical workers, one in-flight request per worker."""

    def __init__(self, space: ConfigSpace, command: str | Sequence[str], size: int, **kwargs):
        super().__init__(space)
        if size < 1:
            raise ObjectiveError("pool size must be >= 1")
        self._workers: queue.Queue[WorkerObjective] = queue.Queue()
        self._all = [WorkerObjective(space, command, **kwargs) for _ in range(size)]
        for w in self._all:
            self._workers.put(w)

    def run(self, config: Config, seed: int, epochs: int) -> EvaluationRecord:
        worker = self._workers.get()
        try:
            return worker.run(config, seed, epochs)
        finally:
            self._workers.put(worker)

    def close(self) -> None:
        for w in self._all:
            w.close()
