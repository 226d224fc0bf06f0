"""Append-only thanks ledger and its aggregation into thanked objects.

Storage is a newline-delimited JSON file, one self-describing record per
line, with exactly the event fields documented in the README. Records are
never deleted; attaching a personal note appends a superseding copy of the
event, and replay keeps the latest record per event_id. Aggregates are
always rebuilt from the log, so the file is the whole truth.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from .scanner import Language, Scope

MAX_NOTE_LENGTH = 10_000

Target = tuple[str, tuple[str, ...]]


class LedgerError(Exception):
    """Base class for ledger failures."""


class ValidationError(LedgerError):
    """The event violates a type invariant; it was rejected, not dropped."""


class NotFoundError(LedgerError):
    pass


class ConflictError(LedgerError):
    """A second note on the same event."""


class StorageUnavailable(LedgerError):
    """Transient storage failure; the caller may retry."""


@dataclass(frozen=True)
class ThanksEvent:
    installation_id: str
    timestamp: datetime
    language: Language
    line_number: int
    line_text: str
    scope: Scope
    targets: tuple[Target, ...]
    note: str | None = None
    event_id: str | None = None

    def to_record(self) -> dict:
        return {
            "event_id": self.event_id,
            "installation_id": self.installation_id,
            "timestamp": self.timestamp.astimezone(timezone.utc).isoformat(),
            "language": self.language.value,
            "line_number": self.line_number,
            "line_text": self.line_text,
            "scope": self.scope.value,
            "targets": [
                {"package": pkg, "member_path": list(mp)} for pkg, mp in self.targets
            ],
            "note": self.note,
        }

    @classmethod
    def from_record(cls, record: dict) -> "ThanksEvent":
        return cls(
            event_id=record["event_id"],
            installation_id=record["installation_id"],
            timestamp=datetime.fromisoformat(record["timestamp"]),
            language=Language(record["language"]),
            line_number=record["line_number"],
            line_text=record["line_text"],
            scope=Scope(record["scope"]),
            targets=tuple(
                (t["package"], tuple(t["member_path"])) for t in record["targets"]
            ),
            note=record.get("note"),
        )


ObjectKey = tuple[Language, str]


@dataclass
class ThankedObject:
    object_key: ObjectKey
    display_line: str
    count: int = 0
    notes: list[str] = field(default_factory=list)
    targets: list[Target] = field(default_factory=list)
    scopes: list[Scope] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "language": self.object_key[0].value,
            "line_text": self.object_key[1],
            "display_line": self.display_line,
            "count": self.count,
            "notes": list(self.notes),
            "targets": [
                {"package": pkg, "member_path": list(mp)} for pkg, mp in self.targets
            ],
            "scopes": [s.value for s in self.scopes],
        }


def object_key_for(event: ThanksEvent) -> ObjectKey:
    # Object identity is the trimmed line content, per language.
    return (event.language, event.line_text.strip())


def _validate(event: ThanksEvent) -> None:
    if not event.installation_id:
        raise ValidationError("installation_id must be non-empty")
    if not event.line_text.strip():
        raise ValidationError("line_text must be non-empty after trimming")
    if event.line_number < 1:
        raise ValidationError("line_number must be 1-based")
    if event.timestamp.tzinfo is None:
        raise ValidationError("timestamp must be timezone-aware")
    if not event.targets:
        raise ValidationError("targets must be non-empty")
    if event.note is not None:
        _validate_note(event.note)


def _validate_note(note: str) -> None:
    if not note:
        raise ValidationError("note must be non-empty when present")
    if len(note) > MAX_NOTE_LENGTH:
        raise ValidationError("note exceeds %d characters" % MAX_NOTE_LENGTH)


class ThanksLedger:
    """Single-writer append log with multi-reader aggregation.

    Writes are serialized on a lock; reads work on a snapshot taken under
    the same lock, so aggregation never sees a half-applied append.
    """

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._events: dict[str, ThanksEvent] = {}
        self._order: list[str] = []
        self._replay()

    def _replay(self) -> None:
        if not os.path.exists(self.path):
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = ThanksEvent.from_record(json.loads(line))
                if event.event_id not in self._events:
                    self._order.append(event.event_id)
                self._events[event.event_id] = event

    def _append(self, event: ThanksEvent) -> None:
        try:
            os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event.to_record(), ensure_ascii=False) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageUnavailable(str(exc)) from exc

    def record_thanks(self, event: ThanksEvent) -> str:
        if event.event_id is not None:
            raise ValidationError("event_id is assigned by the ledger")
        _validate(event)
        assigned = replace(event, event_id=uuid.uuid4().hex)
        with self._lock:
            self._append(assigned)
            self._events[assigned.event_id] = assigned
            self._order.append(assigned.event_id)
        return assigned.event_id

    def attach_note(self, event_id: str, note_text: str) -> ThanksEvent:
        _validate_note(note_text)
        with self._lock:
            event = self._events.get(event_id)
            if event is None:
                raise NotFoundError("unknown event_id: %s" % event_id)
            if event.note is not None:
                raise ConflictError("event %s already has a note" % event_id)
            updated = replace(event, note=note_text)
            self._append(updated)
            self._events[event_id] = updated
        return updated

    def get(self, event_id: str) -> ThanksEvent:
        with self._lock:
            event = self._events.get(event_id)
        if event is None:
            raise NotFoundError("unknown event_id: %s" % event_id)
        return event

    def events(
        self, start: datetime | None = None, end: datetime | None = None
    ) -> list[ThanksEvent]:
        """Events in the half-open window [start, end), in append order."""
        if start is not None and end is not None and start > end:
            raise ValidationError("window start must not exceed end")
        with self._lock:
            snapshot = [self._events[eid] for eid in self._order]
        return [
            e
            for e in snapshot
            if (start is None or e.timestamp >= start)
            and (end is None or e.timestamp < end)
        ]

    def aggregate_objects(
        self, start: datetime | None = None, end: datetime | None = None
    ) -> list[ThankedObject]:
        return aggregate_events(self.events(start, end))

    def usage_summary(
        self, start: datetime | None = None, end: datetime | None = None
    ) -> dict:
        return usage_summary(self.events(start, end))


def aggregate_events(events: list[ThanksEvent]) -> list[ThankedObject]:
    """Partition events into thanked objects keyed by trimmed line content.

    Sum of counts equals the number of events; every note lands on exactly
    one object. Output order is first-appearance order, which is stable
    under replay.
    """
    objects: dict[ObjectKey, ThankedObject] = {}
    for event in events:
        key = object_key_for(event)
        obj = objects.get(key)
        if obj is None:
            obj = objects[key] = ThankedObject(key, key[1])
        obj.count += 1
        if event.note is not None:
            obj.notes.append(event.note)
        for target in event.targets:
            if target not in obj.targets:
                obj.targets.append(target)
        if event.scope not in obj.scopes:
            obj.scopes.append(event.scope)
    return list(objects.values())


LINE_BUCKET_SIZE = 10
LINE_BUCKET_COUNT = 10  # buckets 1-10 ... 91-100, then an overflow bucket


def line_bucket(line_number: int) -> str:
    index = (line_number - 1) // LINE_BUCKET_SIZE
    if index >= LINE_BUCKET_COUNT:
        return "%d+" % (LINE_BUCKET_SIZE * LINE_BUCKET_COUNT + 1)
    return "%d-%d" % (index * LINE_BUCKET_SIZE + 1, (index + 1) * LINE_BUCKET_SIZE)


def usage_summary(events: list[ThanksEvent]) -> dict:
    """The three engagement panels: per-installation counts, import vs
    other split, and a line-position histogram; plus notes per installation."""
    per_installation: dict[str, int] = {}
    notes_per_installation: dict[str, int] = {}
    split = {"import": 0, "other": 0}
    histogram: dict[str, int] = {}
    for event in events:
        per_installation[event.installation_id] = (
            per_installation.get(event.installation_id, 0) + 1
        )
        if event.note is not None:
            notes_per_installation[event.installation_id] = (
                notes_per_installation.get(event.installation_id, 0) + 1
            )
        if event.scope in (Scope.PACKAGE, Scope.MEMBER):
            split["import"] += 1
        else:
            split["other"] += 1
        bucket = line_bucket(event.line_number)
        histogram[bucket] = histogram.get(bucket, 0) + 1
    return {
        "total_thanks": len(events),
        "noted_thanks": sum(notes_per_installation.values()),
        "per_installation": per_installation,
        "scope_split": split,
        "line_histogram": histogram,
        "notes_per_installation": notes_per_installation,
    }
