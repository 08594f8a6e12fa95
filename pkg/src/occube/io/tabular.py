"""Traditional-format conversion: CSV and XES to single-case-notion logs.

Both importers synthesize one object type (the case notion) and give every
event a singleton object set holding its case id. The XES profile is
minimal: traces with ``concept:name`` plus events with ``concept:name`` and
``time:timestamp``; anything else is ignored with a logged warning.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import logging
import xml.etree.ElementTree as ET
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import IO

from occube.discovery import ActivityFilter, flatten
from occube.errors import FormatError, ModelError
from occube.io.ocel import read_source
from occube.model import ACTIVITY, TIMESTAMP, Event, EventLog, normalize_timestamp, rfc3339, value_to_text

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CsvMappingConfig:
    """Column mapping for CSV import.

    ``timestamp_format`` is a strptime pattern; no format guessing happens.
    ``attribute_columns`` lists the extra columns to carry over as event
    attributes (always imported as text). ``case_notion`` names the single
    synthesized object type.
    """

    case_column: str
    activity_column: str
    timestamp_column: str
    timestamp_format: str = "%Y-%m-%d %H:%M:%S"
    attribute_columns: Sequence[str] = field(default_factory=tuple)
    case_notion: str = "case"

    def __post_init__(self):
        mandatory = (self.case_column, self.activity_column, self.timestamp_column)
        if len(set(mandatory)) != 3:
            raise ValueError(f"case/activity/timestamp columns must be three distinct names, got {mandatory}")
        object.__setattr__(self, "attribute_columns", tuple(self.attribute_columns))


def _event_id_width(count: int) -> int:
    return max(4, len(str(count)))


def import_csv(source, config: CsvMappingConfig) -> EventLog:
    """One event per data row; ids are zero-padded row ordinals."""
    text = read_source(source)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise FormatError("missing-column", "csv: empty input, header row is mandatory")
    header, data = rows[0], rows[1:]
    index: dict[str, int] = {}
    for name in (config.case_column, config.activity_column, config.timestamp_column, *config.attribute_columns):
        if name not in header:
            raise FormatError("missing-column", f"csv: column {name!r} not in header {header}")
        index[name] = header.index(name)

    width = _event_id_width(len(data))
    events = []
    for i, row in enumerate(data, start=1):
        def cell(name: str) -> str:
            j = index[name]
            return row[j] if j < len(row) else ""

        case_id = cell(config.case_column)
        activity = cell(config.activity_column)
        raw_ts = cell(config.timestamp_column)
        if not case_id or not activity or not raw_ts:
            raise FormatError("invalid-row", f"csv: row {i}: case/activity/timestamp must be non-empty")
        try:
            ts = normalize_timestamp(dt.datetime.strptime(raw_ts, config.timestamp_format))
        except ValueError:
            raise FormatError(
                "unparseable-timestamp",
                f"csv: row {i}: {raw_ts!r} does not match format {config.timestamp_format!r}",
            ) from None
        vmap = {ACTIVITY: activity, TIMESTAMP: ts}
        for name in config.attribute_columns:
            value = cell(name)
            if value != "":
                vmap[name] = value
        events.append(Event(f"{i:0{width}d}", vmap, {config.case_notion: {case_id}}))

    attributes = {ACTIVITY, TIMESTAMP, *config.attribute_columns}
    return EventLog(events, attributes=attributes, object_types={config.case_notion})


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _xes_attributes(element: ET.Element) -> dict[str, tuple[str, str]]:
    out = {}
    for child in element:
        kind = _local(child.tag)
        if kind in ("string", "date", "int", "float", "boolean", "id"):
            key = child.get("key")
            if key is not None:
                out[key] = (kind, child.get("value", ""))
    return out


def import_xes(source, case_notion: str = "case") -> EventLog:
    """Minimal XES: one object per trace, shared by the trace's events."""
    text = read_source(source)
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise FormatError("parse-error", f"xes: {exc}") from None
    if _local(root.tag) != "log":
        raise FormatError("parse-error", f"xes: root element must be <log>, got <{_local(root.tag)}>")

    ignored: set[str] = set()
    events = []
    counter = 0
    traces = [el for el in root if _local(el.tag) == "trace"]
    total = sum(len([x for x in tr if _local(x.tag) == "event"]) for tr in traces)
    width = _event_id_width(total)
    for t_idx, trace in enumerate(traces):
        t_attrs = _xes_attributes(trace)
        if "concept:name" not in t_attrs:
            raise FormatError("missing-concept-name", f"xes: trace #{t_idx} has no concept:name")
        case_id = t_attrs["concept:name"][1]
        ignored.update(k for k in t_attrs if k != "concept:name")
        for el in trace:
            if _local(el.tag) != "event":
                continue
            counter += 1
            attrs = _xes_attributes(el)
            if "concept:name" not in attrs:
                raise FormatError("missing-concept-name", f"xes: trace {case_id!r}: event #{counter} has no concept:name")
            if "time:timestamp" not in attrs:
                raise FormatError("missing-timestamp", f"xes: trace {case_id!r}: event #{counter} has no time:timestamp")
            try:
                ts = normalize_timestamp(dt.datetime.fromisoformat(attrs["time:timestamp"][1].replace("Z", "+00:00")))
            except ValueError as exc:
                raise FormatError("missing-timestamp", f"xes: trace {case_id!r}: bad timestamp: {exc}") from None
            ignored.update(k for k in attrs if k not in ("concept:name", "time:timestamp"))
            vmap = {ACTIVITY: attrs["concept:name"][1], TIMESTAMP: ts}
            events.append(Event(f"{counter:0{width}d}", vmap, {case_notion: {case_id}}))
    if ignored:
        logger.warning("xes import ignored %d attribute keys outside the minimal profile: %s", len(ignored), sorted(ignored))
    return EventLog(events, attributes={ACTIVITY, TIMESTAMP}, object_types={case_notion})


def _flattened_rows(log: EventLog, object_type: str, activity_filter: ActivityFilter | None):
    extra = sorted(a for a in log.attributes if a not in (ACTIVITY, TIMESTAMP))
    traces = flatten(log, object_type, activity_filter)
    return extra, traces


def export_flattened(
    log: EventLog,
    object_type: str,
    fmt: str,
    stream: IO[str] | None = None,
    activity_filter: ActivityFilter | None = None,
) -> str:
    """Write one trace per object of the chosen case notion, CSV or XES."""
    if object_type not in log.object_types:
        raise ModelError("unknown-object-type", f"object type {object_type!r} not declared in OT")
    if fmt not in ("csv", "xes"):
        raise FormatError("unknown-format", f"flattened export supports csv or xes, got {fmt!r}")
    extra, traces = _flattened_rows(log, object_type, activity_filter)

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["case", "activity", "timestamp", *extra])
        for trace in traces:
            for step in trace.steps:
                event = log.event(step.event_id)
                row = [trace.case_id, step.activity, rfc3339(step.timestamp)]
                for name in extra:
                    v = event.vmap.get(name)
                    row.append("" if v is None else value_to_text(v))
                writer.writerow(row)
        text = buf.getvalue()
    else:
        root = ET.Element("log", {"xes.version": "1.0"})
        for trace in traces:
            tr = ET.SubElement(root, "trace")
            ET.SubElement(tr, "string", {"key": "concept:name", "value": trace.case_id})
            for step in trace.steps:
                event = log.event(step.event_id)
                ev = ET.SubElement(tr, "event")
                ET.SubElement(ev, "string", {"key": "concept:name", "value": step.activity})
                ET.SubElement(ev, "date", {"key": "time:timestamp", "value": rfc3339(step.timestamp)})
                for name in extra:
                    v = event.vmap.get(name)
                    if v is None:
                        continue
                    if isinstance(v, dt.datetime):
                        ET.SubElement(ev, "date", {"key": name, "value": rfc3339(v)})
                    elif isinstance(v, int):
                        ET.SubElement(ev, "int", {"key": name, "value": str(v)})
                    elif isinstance(v, float):
                        ET.SubElement(ev, "float", {"key": name, "value": repr(v)})
                    else:
                        ET.SubElement(ev, "string", {"key": name, "value": str(v)})
        ET.indent(root)
        text = ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"

    if stream is not None:
        try:
            stream.write(text)
        except OSError as exc:
            raise FormatError("io-error", str(exc)) from exc
    return text
