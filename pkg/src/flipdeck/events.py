"""Append-only event log: the single source of truth.

On-disk format (versioned, human-greppable):

    flipdeck-log v1
    {"crc":..., "kind":"session.created", "payload":{...}, "seq":1, "ts":0}
    {"crc":..., "kind":"vote.cast", ...}

One canonical JSON object per line, keys sorted. ``crc`` is the CRC-32 of
the record serialized without the crc field; it is verified on read.
A torn final line (crash mid-append) is detected and truncated away when the
log is reopened, so a restart never sees a partial record. A snapshot file
(``<log>.snap``) may sit alongside the log to bound replay time; it is an
optimization only and is cross-checked against its own checksum.
"""

from __future__ import annotations

import json
import os
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Optional, Union

from .errors import CorruptRecord, StorageFailure

MAGIC = "flipdeck-log v1"
SNAP_MAGIC = "flipdeck-snap v1"
DEFAULT_SNAPSHOT_EVERY = 10_000


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class EventEnvelope:
    seq: int
    ts: float
    kind: str
    payload: dict

    def body(self) -> dict:
        return {"seq": self.seq, "ts": self.ts, "kind": self.kind, "payload": self.payload}

    def checksum(self) -> int:
        return zlib.crc32(canonical_json(self.body()).encode("utf-8"))

    def line(self) -> str:
        record = dict(self.body())
        record["crc"] = self.checksum()
        return canonical_json(record)


def _parse_line(line: str) -> EventEnvelope:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptRecord(f"unparseable record: {exc}") from exc
    try:
        env = EventEnvelope(
            seq=record["seq"], ts=record["ts"], kind=record["kind"], payload=record["payload"]
        )
        crc = record["crc"]
    except (KeyError, TypeError) as exc:
        raise CorruptRecord(f"record missing fields: {exc}") from exc
    if env.checksum() != crc:
        raise CorruptRecord(f"checksum mismatch at seq {env.seq}")
    return env


class MemoryLog:
    """In-memory log with the EventLog interface, for tests and property runs."""

    def __init__(self) -> None:
        self._events: list[EventEnvelope] = []

    @property
    def last_seq(self) -> int:
        return self._events[-1].seq if self._events else 0

    def append(self, kind: str, payload: dict, ts: float) -> EventEnvelope:
        env = EventEnvelope(seq=self.last_seq + 1, ts=ts, kind=kind, payload=payload)
        self._events.append(env)
        return env

    def replay(self, from_seq: int = 1) -> Iterator[EventEnvelope]:
        for env in self._events:
            if env.seq >= from_seq:
                yield env

    def close(self) -> None:
        pass


class EventLog:
    """Durable file-backed log. Single appender; readers replay prefixes.

    Appends are flushed and fsynced before returning; a failure while writing
    raises StorageFailure and the torn tail is repaired on the next open.
    """

    def __init__(self, path: Union[str, Path], fsync: bool = True) -> None:
        self.path = Path(path)
        self._fsync = fsync
        self._last_seq = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            self._recover()
        else:
            with open(self.path, "w", encoding="utf-8") as f:
                f.write(MAGIC + "\n")
                f.flush()
                os.fsync(f.fileno())
        self._fh = open(self.path, "a", encoding="utf-8")

    def _recover(self) -> None:
        """Scan an existing file, find the last intact record, truncate after it."""
        good_end = 0
        with open(self.path, "r", encoding="utf-8", errors="replace") as f:
            header = f.readline()
            if header.rstrip("\n") != MAGIC:
                raise StorageFailure(f"{self.path} is not a {MAGIC} file")
            good_end = f.tell()
            while True:
                line = f.readline()
                if not line:
                    break
                if not line.endswith("\n"):
                    break  # torn tail from an interrupted append
                stripped = line.strip()
                if not stripped:
                    break
                try:
                    env = _parse_line(stripped)
                except CorruptRecord:
                    break
                if env.seq != self._last_seq + 1:
                    break
                self._last_seq = env.seq
                good_end = f.tell()
        if good_end < self.path.stat().st_size:
            with open(self.path, "r+", encoding="utf-8") as f:
                f.truncate(good_end)

    @property
    def last_seq(self) -> int:
        return self._last_seq

    def append(self, kind: str, payload: dict, ts: float) -> EventEnvelope:
        env = EventEnvelope(seq=self._last_seq + 1, ts=ts, kind=kind, payload=payload)
        data = env.line() + "\n"
        try:
            self._fh.write(data)
            self._fh.flush()
            if self._fsync:
                os.fsync(self._fh.fileno())
        except OSError as exc:
            raise StorageFailure(f"append failed: {exc}") from exc
        self._last_seq = env.seq
        return env

    def replay(self, from_seq: int = 1) -> Iterator[EventEnvelope]:
        """Yield intact records in order, stopping at the first invalid one.

        A torn or checksum-corrupt record ends the stream at the last valid
        seq; use verify() to distinguish corruption from a clean tail.
        """
        for env in self._iter(strict=False):
            if env.seq >= from_seq:
                yield env

    def verify(self) -> int:
        """Walk the whole log strictly; raises CorruptRecord, returns last seq."""
        last = 0
        for env in self._iter(strict=True):
            last = env.seq
        return last

    def _iter(self, strict: bool) -> Iterator[EventEnvelope]:
        with open(self.path, "r", encoding="utf-8", errors="replace") as f:
            header = f.readline()
            if header.rstrip("\n") != MAGIC:
                raise StorageFailure(f"{self.path} is not a {MAGIC} file")
            expected = 1
            for line in f:
                if not line.endswith("\n") or not line.strip():
                    if strict:
                        raise CorruptRecord(f"torn record after seq {expected - 1}")
                    return
                try:
                    env = _parse_line(line.strip())
                except CorruptRecord:
                    if strict:
                        raise
                    return
                if env.seq != expected:
                    if strict:
                        raise CorruptRecord(f"seq gap: expected {expected}, got {env.seq}")
                    return
                yield env
                expected += 1

    def close(self) -> None:
        self._fh.close()


Log = Union[EventLog, MemoryLog]


def rebuild(
    log: Log,
    apply: Callable[[EventEnvelope], None],
    from_seq: int = 1,
) -> int:
    """Replay the log through the given transition function; returns last seq."""
    last = from_seq - 1
    for env in log.replay(from_seq):
        apply(env)
        last = env.seq
    return last


def snapshot_path(log_path: Union[str, Path]) -> Path:
    return Path(str(log_path) + ".snap")


def write_snapshot(log_path: Union[str, Path], seq: int, state: dict) -> None:
    body = canonical_json({"seq": seq, "state": state})
    crc = zlib.crc32(body.encode("utf-8"))
    path = snapshot_path(log_path)
    tmp = path.with_suffix(".snap.tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(SNAP_MAGIC + "\n")
        f.write(body + "\n")
        f.write(str(crc) + "\n")
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def read_snapshot(log_path: Union[str, Path]) -> Optional[tuple[int, dict]]:
    """Latest snapshot as (seq, state), or None when absent or damaged."""
    path = snapshot_path(log_path)
    if not path.exists():
        return None
    try:
        with open(path, "r", encoding="utf-8") as f:
            if f.readline().rstrip("\n") != SNAP_MAGIC:
                return None
            body = f.readline().rstrip("\n")
            crc = int(f.readline().strip())
        if zlib.crc32(body.encode("utf-8")) != crc:
            return None
        record = json.loads(body)
        return record["seq"], record["state"]
    except (OSError, ValueError, KeyError):
        return None
