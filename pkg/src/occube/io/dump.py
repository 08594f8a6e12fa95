"""Cube dumps: log + structure + view in one versioned, canonical document.

Saving then loading is the identity; the serialization is canonical so a
load/save round trip is byte-identical. View selections reference
granularity members by their index in the structure's member pool, which
keeps the view section compact and unambiguous. Schema in
docs/formats/dump.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO

from occube.cube import CubeStructure, CubeView, Dimension, check_view
from occube.errors import FormatError
from occube.io.ocel import canonical_json, decode_value, doc_to_log, encode_value, log_to_doc, read_source
from occube.model import EventLog, ValueSet, ValueSetCollection, value_sort_key

DUMP_VERSION = 1


@dataclass(frozen=True)
class CubeDump:
    log: EventLog
    structure: CubeStructure
    view: CubeView


def _structure_to_doc(structure: CubeStructure) -> dict:
    levels = {}
    for d in structure.dimension_names:
        levels[d] = [
            {
                "name": lv,
                "members": [
                    {
                        "label": m.label,
                        "values": [encode_value(v) for v in sorted(m.values, key=value_sort_key)],
                    }
                    for m in members
                ],
            }
            for lv, members in structure.levels[d].items()
        ]
    return {
        "dimensions": [{"name": d.name, "kind": d.kind} for d in structure.dimensions],
        "levels": levels,
        "default-levels": dict(structure.default_levels),
    }


def _structure_from_doc(doc: dict) -> CubeStructure:
    dims = [Dimension(d["name"], d["kind"]) for d in doc["dimensions"]]
    levels = {}
    for d, lvs in doc["levels"].items():
        levels[d] = {
            lv["name"]: ValueSetCollection(
                ValueSet.of(
                    [decode_value(v, f"dump: structure {d}/{lv['name']}") for v in m["values"]],
                    m["label"],
                )
                for m in lv["members"]
            )
            for lv in lvs
        }
    return CubeStructure(dims, levels, doc["default-levels"])


def _view_to_doc(view: CubeView, structure: CubeStructure) -> dict:
    sel = {}
    for d, members in view.sel.items():
        pool = {(m.label, m.values): i for i, m in enumerate(structure.gran(d))}
        try:
            sel[d] = sorted(pool[(m.label, m.values)] for m in members)
        except KeyError:
            raise FormatError("schema-error", f"dump: view selects members outside the granularity of {d!r}") from None
    return {"selected": list(view.selected), "sel": sel}


def _view_from_doc(doc: dict, structure: CubeStructure) -> CubeView:
    sel = {}
    for d, indices in doc["sel"].items():
        pool = structure.gran(d)
        try:
            sel[d] = ValueSetCollection(pool[i] for i in indices)
        except IndexError:
            raise FormatError("schema-error", f"dump: view index out of range for dimension {d!r}") from None
    view = CubeView(tuple(doc["selected"]), sel)
    check_view(view, structure)
    return view


def save_dump(dump: CubeDump, stream: IO[str] | None = None) -> str:
    doc = {
        "format": "occube-dump",
        "version": DUMP_VERSION,
        "log": log_to_doc(dump.log),
        "structure": _structure_to_doc(dump.structure),
        "view": _view_to_doc(dump.view, dump.structure),
    }
    text = canonical_json(doc)
    if stream is not None:
        try:
            stream.write(text)
        except OSError as exc:
            raise FormatError("io-error", str(exc)) from exc
    return text


def load_dump(source) -> CubeDump:
    text = read_source(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("parse-error", f"dump: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != "occube-dump":
        raise FormatError("schema-error", "dump: not an occube dump document")
    if doc.get("version") != DUMP_VERSION:
        raise FormatError("version-mismatch", f"dump: version {doc.get('version')!r}, expected {DUMP_VERSION}")
    for key in ("log", "structure", "view"):
        if key not in doc:
            raise FormatError("schema-error", f"dump: missing section {key!r}")
    log = doc_to_log(doc["log"], where="dump: log")
    try:
        structure = _structure_from_doc(doc["structure"])
        view = _view_from_doc(doc["view"], structure)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError("schema-error", f"dump: malformed structure/view section: {exc}") from None
    return CubeDump(log, structure, view)
