"""Append-only audit log with period queries, retention and export.

Storage is a single append-only file of self-describing JSON lines (each
carries a ``schema`` field), with a small sidecar checkpoint so recovery can
sanity-check the replay. All appenders funnel through one lock; readers see
a consistent prefix.

Actor strings follow the convention ``user:<id>``, ``device:<id>`` or
``system``.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import DegradedModeError, ValidationError

LINE_SCHEMA = "hub.event.v1"
CSV_HEADER = ["seq", "ts", "event_type", "entity_id", "actor", "details"]
CHECKPOINT_EVERY = 512

# Records flagged this way survive purge while the investigation stays open.
INVESTIGATION_HOLD_KEY = "investigation_hold"
INVESTIGATION_HOLD_OPEN = "open"


class EventType(Enum):
    STATE_CHANGE = "state_change"
    PANEL_OFF = "panel_off"
    MOTION_DETECTED = "motion_detected"
    RULE_FIRED = "rule_fired"
    DRY_RUN = "dry_run"
    ALERT = "alert"
    SECURITY = "security"
    CONFIG_CHANGE = "config_change"


@dataclass(frozen=True)
class EventRecord:
    """One immutable audit entry. ``details`` values are strings only."""

    seq: int
    ts: datetime
    event_type: EventType
    entity_id: str | None
    actor: str
    details: dict[str, str] = field(default_factory=dict)

    def to_line(self) -> str:
        doc = {
            "schema": LINE_SCHEMA,
            "seq": self.seq,
            "ts": self.ts.isoformat(),
            "event_type": self.event_type.value,
            "entity_id": self.entity_id,
            "actor": self.actor,
            "details": self.details,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_line(cls, line: str) -> "EventRecord":
        doc = json.loads(line)
        if doc.get("schema") != LINE_SCHEMA:
            raise ValidationError(f"unknown event line schema: {doc.get('schema')!r}")
        return cls(
            seq=int(doc["seq"]),
            ts=datetime.fromisoformat(doc["ts"]),
            event_type=EventType(doc["event_type"]),
            entity_id=doc.get("entity_id"),
            actor=doc["actor"],
            details={str(k): str(v) for k, v in doc.get("details", {}).items()},
        )

    @property
    def held(self) -> bool:
        return self.details.get(INVESTIGATION_HOLD_KEY) == INVESTIGATION_HOLD_OPEN


@dataclass(frozen=True)
class RetentionPolicy:
    """How long records are kept. ``max_age`` of None means forever."""

    max_age: timedelta | None
    set_by: str
    set_at: datetime


class LogStore:
    """Persistence port for the event log."""

    def append_line(self, line: str) -> None:
        raise NotImplementedError

    def read_lines(self) -> list[str]:
        raise NotImplementedError

    def rewrite(self, lines: Iterable[str]) -> None:
        raise NotImplementedError


class MemoryLogStore(LogStore):
    def __init__(self) -> None:
        self._lines: list[str] = []
        self.fail_appends = False  # test hook for degraded-mode behavior

    def append_line(self, line: str) -> None:
        if self.fail_appends:
            raise OSError("simulated storage failure")
        self._lines.append(line)

    def read_lines(self) -> list[str]:
        return list(self._lines)

    def rewrite(self, lines: Iterable[str]) -> None:
        self._lines = list(lines)


class FileLogStore(LogStore):
    """Append-only file, fsynced per append, with a sidecar checkpoint."""

    def __init__(self, path: str | os.PathLike[str], durable: bool = True):
        self.path = Path(path)
        self.durable = durable
        self._since_checkpoint = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.touch(exist_ok=True)

    @property
    def _checkpoint_path(self) -> Path:
        return self.path.with_suffix(self.path.suffix + ".checkpoint")

    def append_line(self, line: str) -> None:
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(line + "\n")
            f.flush()
            if self.durable:
                os.fsync(f.fileno())
        self._since_checkpoint += 1
        if self._since_checkpoint >= CHECKPOINT_EVERY:
            self._write_checkpoint()

    def read_lines(self) -> list[str]:
        text = self.path.read_text(encoding="utf-8")
        return [line for line in text.splitlines() if line.strip()]

    def rewrite(self, lines: Iterable[str]) -> None:
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            for line in lines:
                f.write(line + "\n")
            f.flush()
            if self.durable:
                os.fsync(f.fileno())
        os.replace(tmp, self.path)
        self._write_checkpoint()

    def _write_checkpoint(self) -> None:
        lines = self.read_lines()
        summary = {"records": len(lines), "bytes": self.path.stat().st_size}
        self._checkpoint_path.write_text(json.dumps(summary), encoding="utf-8")
        self._since_checkpoint = 0


class EventLog:
    """The hub's single audit log.

    Appends are serialized and durable before the new seq is returned.
    A storage failure flips the log into degraded mode: queries keep
    working, appends raise DegradedModeError until the store recovers.
    """

    def __init__(self, store: LogStore | None = None):
        self._store = store if store is not None else MemoryLogStore()
        self._lock = threading.Lock()
        self._records: list[EventRecord] = []
        self._ts_index: list[datetime] = []  # parallel to _records
        self._ts_sorted = True
        self._retention: RetentionPolicy | None = None
        self.degraded = False
        for line in self._store.read_lines():
            record = EventRecord.from_line(line)
            self._push(record)

    def _push(self, record: EventRecord) -> None:
        if self._ts_index and record.ts < self._ts_index[-1]:
            self._ts_sorted = False
        self._records.append(record)
        self._ts_index.append(record.ts)

    # -- append ----------------------------------------------------------

    def append(
        self,
        ts: datetime,
        event_type: EventType,
        actor: str,
        entity_id: str | None = None,
        details: dict[str, str] | None = None,
    ) -> int:
        with self._lock:
            seq = self._records[-1].seq + 1 if self._records else 1
            record = EventRecord(
                seq=seq,
                ts=ts,
                event_type=event_type,
                entity_id=entity_id,
                actor=actor,
                details=dict(details or {}),
            )
            try:
                self._store.append_line(record.to_line())
            except OSError as exc:
                self.degraded = True
                raise DegradedModeError(f"audit log storage failed: {exc}") from exc
            self.degraded = False
            self._push(record)
            return seq

    # -- queries ---------------------------------------------------------

    def query(
        self,
        period_from: datetime,
        period_to: datetime,
        event_type: EventType | None = None,
        entity_id: str | None = None,
    ) -> list[EventRecord]:
        """Records with from <= ts < to matching all filters, in seq order."""
        if period_from > period_to:
            raise ValidationError("query period is inverted (from > to)")
        with self._lock:
            candidates = self._window(period_from, period_to)
        out = []
        for record in candidates:
            if event_type is not None and record.event_type is not event_type:
                continue
            if entity_id is not None and record.entity_id != entity_id:
                continue
            out.append(record)
        return out

    def _window(self, period_from: datetime, period_to: datetime) -> list[EventRecord]:
        if self._ts_sorted:
            lo = bisect.bisect_left(self._ts_index, period_from)
            hi = bisect.bisect_left(self._ts_index, period_to)
            return self._records[lo:hi]
        return [r for r in self._records if period_from <= r.ts < period_to]

    def all_records(self) -> list[EventRecord]:
        with self._lock:
            return list(self._records)

    def records_after(self, seq: int, limit: int) -> list[EventRecord]:
        """Cursor pagination: records with seq > cursor, oldest first."""
        with self._lock:
            out = [r for r in self._records if r.seq > seq]
        return out[:limit]

    @property
    def last_seq(self) -> int:
        with self._lock:
            return self._records[-1].seq if self._records else 0

    # -- export ----------------------------------------------------------

    def export(
        self,
        period_from: datetime,
        period_to: datetime,
        fmt: str = "lines",
        event_type: EventType | None = None,
        entity_id: str | None = None,
    ) -> bytes:
        """Deterministic byte export. ``fmt`` is "csv" or "lines"."""
        records = self.query(period_from, period_to, event_type=event_type, entity_id=entity_id)
        if fmt == "lines":
            return ("".join(r.to_line() + "\n" for r in records)).encode("utf-8")
        if fmt == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in records:
                writer.writerow(
                    [
                        r.seq,
                        r.ts.isoformat(),
                        r.event_type.value,
                        r.entity_id if r.entity_id is not None else "",
                        r.actor,
                        json.dumps(r.details, sort_keys=True, separators=(",", ":")),
                    ]
                )
            return buf.getvalue().encode("utf-8")
        raise ValidationError(f"unknown export format: {fmt!r}")

    @staticmethod
    def records_from_lines(data: bytes) -> list[EventRecord]:
        """Parse a "lines" export back into records (round-trip import)."""
        return [
            EventRecord.from_line(line)
            for line in data.decode("utf-8").splitlines()
            if line.strip()
        ]

    # -- retention -------------------------------------------------------

    @property
    def retention(self) -> RetentionPolicy | None:
        return self._retention

    def set_retention(self, max_age: timedelta | None, actor: str, now: datetime) -> RetentionPolicy:
        """Change retention. Caller must have verified the actor's session;
        the change itself is logged."""
        policy = RetentionPolicy(max_age=max_age, set_by=actor, set_at=now)
        self._retention = policy
        self.append(
            ts=now,
            event_type=EventType.CONFIG_CHANGE,
            actor=actor,
            details={
                "change": "log_retention",
                "max_age": "unlimited" if max_age is None else str(max_age.total_seconds()),
            },
        )
        return policy

    def purge(self, now: datetime) -> int:
        """Drop records older than retention, keeping held security records.

        Surviving records keep their seq numbers; the store is rewritten.
        """
        with self._lock:
            if self._retention is None or self._retention.max_age is None:
                return 0
            cutoff = now - self._retention.max_age
            keep = [r for r in self._records if r.ts >= cutoff or r.held]
            removed = len(self._records) - len(keep)
            if removed:
                self._store.rewrite(r.to_line() for r in keep)
                self._records = keep
                self._ts_index = [r.ts for r in keep]
                self._ts_sorted = all(
                    self._ts_index[i] <= self._ts_index[i + 1]
                    for i in range(len(self._ts_index) - 1)
                )
            return removed
