"""Line-delimited JSON protocol for external agent processes.

Requests go to the child's stdin, one JSON object per line:

    {"role": "speaker", "trial_id": ..., "image_path": ...}
    {"role": "listener", "trial_id": ..., "message": ..., "candidate_paths": [...]}

and the child answers with {"message": ...} or {"choice": ...}. Practice
feedback is pushed as {"trial_id": ..., "correct": ..., "correct_index": ...}
with no reply expected. A silent child forfeits the trial via timeout.
"""

from __future__ import annotations

import json
import select
import shlex
import subprocess
import tempfile
from pathlib import Path
from typing import Sequence

from .engine import TrialRecord
from .imgio import write_pgm
from .render import Image, image_digest

DEFAULT_TIMEOUT = 30.0


class AgentProcessError(RuntimeError):
    pass


class AgentProcess:
    """One external agent process shared by any number of trials."""

    def __init__(self, command: str, timeout: float = DEFAULT_TIMEOUT):
        self.command = command
        self.timeout = timeout
        self.proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def request(self, payload: dict) -> dict:
        self.send(payload)
        line = self._read_line()
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise AgentProcessError(f"bad response line: {line!r}") from exc

    def send(self, payload: dict) -> None:
        if self.proc.poll() is not None:
            raise AgentProcessError("agent process exited")
        assert self.proc.stdin is not None
        self.proc.stdin.write(json.dumps(payload, sort_keys=True) + "\n")
        self.proc.stdin.flush()

    def _read_line(self) -> str:
        assert self.proc.stdout is not None
        ready, _, _ = select.select([self.proc.stdout], [], [], self.timeout)
        if not ready:
            raise AgentProcessError(f"no response within {self.timeout}s")
        line = self.proc.stdout.readline()
        if not line:
            raise AgentProcessError("agent process closed stdout")
        return line

    def close(self) -> None:
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class _ImageStore:
    """Maps images to stable PGM paths, writing each digest once."""

    def __init__(self, directory: str | Path | None = None):
        self.dir = Path(directory) if directory else Path(tempfile.mkdtemp(prefix="trial-images-"))
        self.dir.mkdir(parents=True, exist_ok=True)
        self.paths: dict[int, str] = {}

    def path(self, image: Image) -> str:
        digest = image_digest(image)
        if digest not in self.paths:
            path = self.dir / f"{digest:016x}.pgm"
            write_pgm(image, path)
            self.paths[digest] = str(path)
        return self.paths[digest]


class SubprocessSpeaker:
    def __init__(self, process: AgentProcess, store: _ImageStore | None = None):
        self.process = process
        self.store = store or _ImageStore()

    def speak(self, trial_id: str, target: Image) -> str:
        reply = self.process.request(
            {
                "role": "speaker",
                "trial_id": trial_id,
                "image_path": self.store.path(target),
            }
        )
        if "message" not in reply:
            raise AgentProcessError(f"speaker reply lacks message: {reply}")
        return reply["message"]

    def feedback(self, record: TrialRecord, correct_index: int) -> None:
        self.process.send(
            {
                "trial_id": record.question_id,
                "correct": record.correct,
                "correct_index": correct_index,
            }
        )


class SubprocessListener:
    def __init__(self, process: AgentProcess, store: _ImageStore | None = None):
        self.process = process
        self.store = store or _ImageStore()

    def choose(self, trial_id: str, message: str, candidates: Sequence[Image]) -> int:
        reply = self.process.request(
            {
                "role": "listener",
                "trial_id": trial_id,
                "message": message,
                "candidate_paths": [self.store.path(img) for img in candidates],
            }
        )
        if "choice" not in reply:
            raise AgentProcessError(f"listener reply lacks choice: {reply}")
        return int(reply["choice"])

    def feedback(self, record: TrialRecord, correct_index: int) -> None:
        self.process.send(
            {
                "trial_id": record.question_id,
                "correct": record.correct,
                "correct_index": correct_index,
            }
        )
