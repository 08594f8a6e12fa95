"""Object-centric event log serialization.

The on-disk form is canonical JSON with four top-level sections:
``attribute-names``, ``object-types``, ``objects`` (id to type), and
``events`` (ordered records: id, activity, RFC 3339 timestamp, attribute
map, per-type object-id lists). See docs/formats/ocel.md for the full,
bit-exact schema. Export is canonical (sorted keys, two-space indent,
trailing newline) so equal logs always serialize to equal bytes.
"""

from __future__ import annotations

import datetime as dt
import json
from typing import IO

from occube.errors import FormatError
from occube.model import ACTIVITY, TIMESTAMP, Event, EventLog, parse_rfc3339, rfc3339, validate_log


def encode_value(value):
    if isinstance(value, dt.datetime):
        return {"ts": rfc3339(value)}
    return value


def decode_value(raw, where: str):
    if isinstance(raw, (str, int, float)) and not isinstance(raw, bool):
        return raw
    if isinstance(raw, dict) and set(raw) == {"ts"} and isinstance(raw["ts"], str):
        try:
            return parse_rfc3339(raw["ts"])
        except ValueError as exc:
            raise FormatError("schema-error", f"{where}: bad timestamp {raw['ts']!r}: {exc}") from None
    raise FormatError("schema-error", f"{where}: unsupported value {raw!r}")


def read_source(source) -> str:
    """Accept text, bytes, or a readable stream; return text."""
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise FormatError("schema-error", f"{where}: missing mandatory field {key!r}")
    if not isinstance(doc[key], kind):
        raise FormatError("schema-error", f"{where}: field {key!r} has the wrong shape")
    return doc[key]


def log_to_doc(log: EventLog) -> dict:
    events = []
    for e in log.events:
        attributes = {
            name: encode_value(value) for name, value in e.vmap.items() if name not in (ACTIVITY, TIMESTAMP)
        }
        objects = {t: sorted(ids) for t, ids in e.omap.items()}
        events.append(
            {
                "id": e.id,
                "activity": e.activity,
                "timestamp": rfc3339(e.timestamp),
                "attributes": attributes,
                "objects": objects,
            }
        )
    return {
        "attribute-names": sorted(log.attributes),
        "object-types": sorted(log.object_types),
        "objects": dict(sorted(log.objects.items())),
        "events": events,
    }


def doc_to_log(doc, where: str = "ocel") -> EventLog:
    if not isinstance(doc, dict):
        raise FormatError("schema-error", f"{where}: top level must be an object")
    attribute_names = _require(doc, "attribute-names", list, where)
    object_types = _require(doc, "object-types", list, where)
    objects = _require(doc, "objects", dict, where)
    raw_events = _require(doc, "events", list, where)

    events = []
    for i, rec in enumerate(raw_events):
        ctx = f"{where}: event #{i}"
        if not isinstance(rec, dict):
            raise FormatError("schema-error", f"{ctx}: must be an object")
        eid = _require(rec, "id", str, ctx)
        activity = _require(rec, "activity", str, ctx)
        ts_raw = _require(rec, "timestamp", str, ctx)
        try:
            ts = parse_rfc3339(ts_raw)
        except ValueError as exc:
            raise FormatError("schema-error", f"{ctx}: bad timestamp {ts_raw!r}: {exc}") from None
        vmap = {ACTIVITY: activity, TIMESTAMP: ts}
        for name, raw in rec.get("attributes", {}).items():
            if name in (ACTIVITY, TIMESTAMP):
                raise FormatError("schema-error", f"{ctx}: {name!r} may not appear under attributes")
            vmap[name] = decode_value(raw, f"{ctx}: attribute {name!r}")
        omap = {}
        for t, ids in rec.get("objects", {}).items():
            if not isinstance(ids, list) or not all(isinstance(o, str) for o in ids):
                raise FormatError("schema-error", f"{ctx}: object ids of {t!r} must be a list of strings")
            omap[t] = ids
        try:
            events.append(Event(eid, vmap, omap))
        except ValueError as exc:
            raise FormatError("schema-error", f"{ctx}: {exc}") from None

    log = EventLog(events, attributes=attribute_names, object_types=object_types, objects=objects)
    report = validate_log(log)
    if not report.ok:
        first = "; ".join(str(v) for v in report.errors[:5])
        raise FormatError("validation-error", f"{where}: invalid log: {first}")
    return log


def import_ocel(source) -> EventLog:
    """Parse an OCEL document (text, bytes, or stream) into a validated log."""
    text = read_source(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("parse-error", f"ocel: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return doc_to_log(doc)


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def export_ocel(log: EventLog, stream: IO[str] | None = None) -> str:
    """Serialize a valid log; returns the text and optionally writes it."""
    report = validate_log(log)
    if not report.ok:
        first = "; ".join(str(v) for v in report.errors[:5])
        raise FormatError("validation-error", f"cannot export invalid log: {first}")
    text = canonical_json(log_to_doc(log))
    if stream is not None:
        try:
            stream.write(text)
        except OSError as exc:
            raise FormatError("io-error", str(exc)) from exc
    return text
