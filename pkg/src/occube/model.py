"""Object-centric event log model.

An event maps attribute names to atomic values and object types to sets of
object identifiers. A log is a canonically ordered collection of such events
together with its attribute universe, object-type universe, and the
object-to-type assignment. Logs are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import datetime as dt
from collections.abc import Iterable, Iterator, Mapping, Set
from dataclasses import dataclass, field, replace

from occube.errors import ModelError

ACTIVITY = "activity"
TIMESTAMP = "timestamp"
RESERVED_ATTRIBUTES = frozenset({ACTIVITY, TIMESTAMP})

_UTC = dt.timezone.utc
_EPOCH = dt.datetime(1970, 1, 1, tzinfo=_UTC)
_MS = dt.timedelta(milliseconds=1)


class _Undefined:
    """Singleton marker returned for lookups of absent attributes."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "undefined"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined()


def normalize_timestamp(value: dt.datetime) -> dt.datetime:
    """Coerce to a UTC instant with millisecond precision.

    Naive datetimes are taken to already be in UTC; sub-millisecond digits
    are truncated so equality survives serialization round trips.
    """
    if value.tzinfo is None:
        value = value.replace(tzinfo=_UTC)
    else:
        value = value.astimezone(_UTC)
    return value - dt.timedelta(microseconds=value.microsecond % 1000)


def timestamp_millis(value: dt.datetime) -> int:
    """Milliseconds since the Unix epoch of a normalized timestamp."""
    return (value - _EPOCH) // _MS


def rfc3339(value: dt.datetime) -> str:
    """Render a normalized timestamp as RFC 3339 with milliseconds, Z offset."""
    value = normalize_timestamp(value)
    ms = value.microsecond // 1000
    return f"{value:%Y-%m-%dT%H:%M:%S}.{ms:03d}Z"


def parse_rfc3339(text: str) -> dt.datetime:
    """Parse an RFC 3339 timestamp; 'Z' and numeric offsets both accepted."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    return normalize_timestamp(dt.datetime.fromisoformat(raw))


def check_attribute_value(value):
    """Validate and normalize a single attribute value.

    Values are atomic: text, finite numbers, or timestamps. Collections,
    booleans, None, and non-finite floats are rejected.
    """
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        raise ValueError(f"attribute values must be text, number, or timestamp, got bool {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"attribute values must be finite, got {value!r}")
        return value
    if isinstance(value, dt.datetime):
        return normalize_timestamp(value)
    raise ValueError(f"attribute values must be atomic (text/number/timestamp), got {type(value).__name__}")


def value_sort_key(value):
    """Total deterministic order across the mixed attribute-value kinds."""
    if isinstance(value, dt.datetime):
        return (2, value.isoformat(), "")
    if isinstance(value, str):
        return (1, value, "")
    return (0, float(value), str(value))


def value_to_text(value) -> str:
    """Canonical text rendering used for labels and exports."""
    if isinstance(value, dt.datetime):
        return rfc3339(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


class AttributeMapping(Mapping):
    """Read-only view of an event's vmap; absent keys yield UNDEFINED."""

    __slots__ = ("_data",)

    def __init__(self, data: Mapping):
        self._data = data

    def __getitem__(self, key):
        return self._data.get(key, UNDEFINED)

    def get(self, key, default=UNDEFINED):
        return self._data.get(key, default)

    def __iter__(self) -> Iterator:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key) -> bool:
        return key in self._data

    def __repr__(self) -> str:
        return f"AttributeMapping({dict(self._data)!r})"


@dataclass(frozen=True)
class Event:
    """One event: identifier, attribute mapping, object mapping.

    ``vmap`` should contain the reserved attributes ``activity`` (text) and
    ``timestamp`` (UTC datetime); candidate logs missing them are still
    constructible so that :func:`validate_log` can report the violations.
    Treat ``vmap``/``omap`` as read-only.
    """

    id: str
    vmap: Mapping[str, object] = field(default_factory=dict)
    omap: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("event id must be a non-empty string")
        vmap = {str(k): check_attribute_value(v) for k, v in self.vmap.items()}
        omap = {}
        for ot, ids in self.omap.items():
            items = frozenset(ids)
            for oid in items:
                if not isinstance(oid, str) or not oid:
                    raise ValueError(f"object ids must be non-empty strings, got {oid!r}")
            omap[str(ot)] = items
        object.__setattr__(self, "vmap", vmap)
        object.__setattr__(self, "omap", omap)

    @property
    def activity(self):
        return self.vmap.get(ACTIVITY)

    @property
    def timestamp(self):
        return self.vmap.get(TIMESTAMP)

    def objects(self, object_type: str) -> frozenset[str]:
        return self.omap.get(object_type, frozenset())

    def sort_key(self) -> tuple[int, str]:
        ts = self.timestamp
        millis = timestamp_millis(ts) if isinstance(ts, dt.datetime) else -(2**62)
        return (millis, self.id)


class EventLog:
    """Canonically ordered, immutable object-centric event log.

    Events are sorted non-descending by timestamp with ties broken by event
    id (lexicographic). Each event's omap is normalized to be total over the
    log's object types (explicit empty sets). The log is constructible from
    arbitrary candidate data; invariant violations are surfaced by
    :func:`validate_log`, not by the constructor.
    """

    __slots__ = ("events", "attributes", "object_types", "objects", "_by_id")

    def __init__(
        self,
        events: Iterable[Event] = (),
        attributes: Iterable[str] | None = None,
        object_types: Iterable[str] | None = None,
        objects: Mapping[str, str] | None = None,
    ):
        ordered = sorted(events, key=Event.sort_key)
        if object_types is None:
            ot = set()
            for e in ordered:
                ot.update(e.omap)
        else:
            ot = set(object_types)
        if attributes is None:
            att = set(RESERVED_ATTRIBUTES)
            for e in ordered:
                att.update(e.vmap)
        else:
            att = set(attributes)

        normalized = []
        for e in ordered:
            if ot - e.omap.keys():
                omap = {t: e.omap.get(t, frozenset()) for t in ot}
                omap.update({t: s for t, s in e.omap.items() if t not in ot})
                e = replace(e, omap=omap)
            normalized.append(e)

        if objects is None:
            assignment: dict[str, str] = {}
            for e in normalized:
                for t in sorted(e.omap):
                    for oid in sorted(e.omap[t]):
                        assignment.setdefault(oid, t)
        else:
            assignment = dict(objects)

        self.events: tuple[Event, ...] = tuple(normalized)
        self.attributes: frozenset[str] = frozenset(att)
        self.object_types: frozenset[str] = frozenset(ot)
        self.objects: dict[str, str] = assignment
        by_id: dict[str, Event] = {}
        for e in self.events:
            by_id.setdefault(e.id, e)
        self._by_id = by_id

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        return (
            self.events == other.events
            and self.attributes == other.attributes
            and self.object_types == other.object_types
            and self.objects == other.objects
        )

    def __repr__(self) -> str:
        return (
            f"EventLog({len(self.events)} events, "
            f"{len(self.attributes)} attributes, {len(self.object_types)} object types)"
        )

    def event(self, event_id: str) -> Event:
        try:
            return self._by_id[event_id]
        except KeyError:
            raise ModelError("unknown-event-id", f"no event with id {event_id!r}") from None

    def has_event(self, event_id: str) -> bool:
        return event_id in self._by_id

    def activities(self) -> frozenset[str]:
        return frozenset(e.activity for e in self.events if isinstance(e.activity, str))

    def restrict(self, event_ids: Set[str]) -> "EventLog":
        """Sublog with the given events, preserving order, ATT, and OT.

        The type assignment is restricted to objects that still occur.
        """
        kept = [e for e in self.events if e.id in event_ids]
        occurring: set[str] = set()
        for e in kept:
            for ids in e.omap.values():
                occurring.update(ids)
        assignment = {oid: t for oid, t in self.objects.items() if oid in occurring}
        return EventLog(kept, self.attributes, self.object_types, assignment)


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validate_log."""

    rule: str
    event_id: str | None
    detail: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.rule}({self.event_id})" if self.event_id else self.rule


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def errors(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == "error")

    @property
    def warnings(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors

    def __iter__(self) -> Iterator[Violation]:
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)


def validate_log(log: EventLog) -> ValidationReport:
    """Check every log invariant; violations are data, not exceptions.

    The error list is empty exactly when the log satisfies all structural
    invariants (unique ids, reserved attributes present and typed, time
    ordering, attribute/type universes closed, functional type assignment).
    Events that reference no objects at all are flagged as warnings only.
    """
    out: list[Violation] = []
    seen: set[str] = set()
    dup_reported: set[str] = set()
    prev_key = None
    for e in log.events:
        if e.id in seen and e.id not in dup_reported:
            out.append(Violation("duplicate-event-id", e.id, "event identifier occurs more than once"))
            dup_reported.add(e.id)
        seen.add(e.id)

        act = e.vmap.get(ACTIVITY)
        if act is None:
            out.append(Violation("missing-activity", e.id, "reserved attribute 'activity' absent"))
        elif not isinstance(act, str):
            out.append(Violation("bad-activity-type", e.id, f"activity must be text, got {type(act).__name__}"))
        ts = e.vmap.get(TIMESTAMP)
        if ts is None:
            out.append(Violation("missing-timestamp", e.id, "reserved attribute 'timestamp' absent"))
        elif not isinstance(ts, dt.datetime):
            out.append(Violation("bad-timestamp-type", e.id, f"timestamp must be a time instant, got {type(ts).__name__}"))

        key = e.sort_key()
        if prev_key is not None and key < prev_key:
            out.append(Violation("time-order", e.id, "events not sorted by (timestamp, id)"))
        prev_key = key

        for name in e.vmap:
            if name not in log.attributes:
                out.append(Violation("unknown-attribute", e.id, f"attribute {name!r} not declared in ATT"))
        for t, ids in e.omap.items():
            if t not in log.object_types:
                out.append(Violation("unknown-object-type", e.id, f"object type {t!r} not declared in OT"))
            for oid in sorted(ids):
                assigned = log.objects.get(oid)
                if assigned is None:
                    out.append(Violation("type-unassigned", e.id, f"object {oid!r} has no type assignment"))
                elif assigned != t:
                    out.append(
                        Violation("type-conflict", e.id, f"object {oid!r} listed under {t!r} but assigned {assigned!r}")
                    )
        if e.omap and all(not ids for ids in e.omap.values()):
            out.append(Violation("no-objects", e.id, "event references no objects of any type", "warning"))
    return ValidationReport(tuple(out))


def vmap_of(log: EventLog, event_id: str) -> AttributeMapping:
    """The event's attribute mapping; absent attributes read as UNDEFINED."""
    return AttributeMapping(log.event(event_id).vmap)


def omap_of(log: EventLog, event_id: str) -> Mapping[str, frozenset[str]]:
    """The event's object mapping, total over the log's object types."""
    return log.event(event_id).omap


def objects_of_type(log: EventLog, object_type: str) -> frozenset[str]:
    """Union of the type's object sets over all events."""
    if object_type not in log.object_types:
        raise ModelError("unknown-object-type", f"object type {object_type!r} not declared in OT")
    out: set[str] = set()
    for e in log.events:
        out.update(e.omap.get(object_type, ()))
    return frozenset(out)


@dataclass(frozen=True)
class ValueSet:
    """Non-empty set of atomic values (or object ids) with a display label.

    The label addresses the set inside a granularity level (e.g. "2018" for
    a year bucket); when omitted it is derived from the contents.
    """

    values: frozenset
    label: str

    def __post_init__(self):
        if not isinstance(self.values, frozenset):
            object.__setattr__(self, "values", frozenset(self.values))
        if not self.values:
            raise ValueError("value sets must be non-empty")
        for v in self.values:
            check_attribute_value(v)
        if not isinstance(self.label, str) or not self.label:
            raise ValueError("value set label must be a non-empty string")

    @classmethod
    def of(cls, values: Iterable, label: str | None = None) -> "ValueSet":
        vals = frozenset(check_attribute_value(v) for v in values)
        if not vals:
            raise ValueError("value sets must be non-empty")
        if label is None:
            texts = [value_to_text(v) for v in sorted(vals, key=value_sort_key)]
            label = texts[0] if len(texts) == 1 else "{" + ",".join(texts) + "}"
        return cls(vals, label)

    def __contains__(self, value) -> bool:
        return value in self.values

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"ValueSet({self.label!r}, {len(self.values)} values)"


class ValueSetCollection(tuple):
    """Ordered collection of value sets: non-empty, labels unique.

    Members are kept sorted by label so enumeration order is deterministic.
    """

    def __new__(cls, members: Iterable[ValueSet]):
        items = tuple(members)
        if not items:
            raise ValueError("value set collections must be non-empty")
        for m in items:
            if not isinstance(m, ValueSet):
                raise ValueError(f"collection members must be ValueSet, got {type(m).__name__}")
        items = tuple(sorted(items, key=lambda m: m.label))
        labels = [m.label for m in items]
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise ValueError(f"duplicate member labels in collection: {dupes}")
        return super().__new__(cls, items)

    def by_label(self, label: str) -> ValueSet | None:
        for m in self:
            if m.label == label:
                return m
        return None

    def union_values(self) -> frozenset:
        out: set = set()
        for m in self:
            out.update(m.values)
        return frozenset(out)


def is_antichain(members: Iterable[ValueSet]) -> bool:
    """True when no member's values strictly contain another's.

    Grouped by size so the common all-singletons case costs nothing.
    """
    by_size: dict[int, list[frozenset]] = {}
    for m in members:
        by_size.setdefault(len(m.values), []).append(m.values)
    sizes = sorted(by_size)
    for i, small in enumerate(sizes):
        for big in sizes[i + 1 :]:
            for s in by_size[small]:
                for b in by_size[big]:
                    if s < b:
                        return False
    return True
