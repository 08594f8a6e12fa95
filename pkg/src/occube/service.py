"""Session-oriented service: import a log, build a cube, explore, export.

The session layer is plain functions over an in-memory Session object; the
FastAPI app and the headless script runner are both thin wrappers around
it, so a recorded operation script replays to byte-identical exports
whether driven over HTTP or from a file. Requests to the same session are
serialized by a per-session lock; distinct sessions are independent.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, File, Form, Query, Request, UploadFile
from fastapi.responses import JSONResponse, Response

from occube.cube import (
    CubeStructure,
    CubeView,
    Dimension,
    MaterializedView,
    build_structure,
    cell_sublog,
    change_granularity,
    default_view,
    dice,
    materialize,
    slice as cube_slice,
)
from occube.discovery import discover_mvp, export_dot, palette_for, threshold_model
from occube.errors import CubeError, FormatError, OccubeError
from occube.io.dump import CubeDump, save_dump
from occube.io.ocel import decode_value, export_ocel, import_ocel
from occube.io.tabular import CsvMappingConfig, export_flattened, import_csv, import_xes
from occube.model import EventLog

DEFAULT_UPLOAD_LIMIT = 50 * 1024 * 1024
MAX_PAGE_SIZE = 1000


@dataclass
class Session:
    id: str
    log: EventLog
    structure: CubeStructure | None = None
    view: CubeView | None = None
    history: list[dict] = field(default_factory=list)
    lock: threading.RLock = field(default_factory=threading.RLock)
    model_cache: dict = field(default_factory=dict)


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, log: EventLog) -> Session:
        session = Session(id=uuid.uuid4().hex, log=log)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise CubeError("unknown-session", f"no session {session_id!r}")
        return session


def import_payload(data: bytes, fmt: str, mapping: dict | None) -> EventLog:
    if fmt == "ocel":
        return import_ocel(data)
    if fmt == "csv":
        if not mapping:
            raise FormatError("missing-mapping", "csv import needs a column mapping")
        try:
            config = CsvMappingConfig(
                case_column=mapping["case_column"],
                activity_column=mapping["activity_column"],
                timestamp_column=mapping["timestamp_column"],
                timestamp_format=mapping.get("timestamp_format", "%Y-%m-%d %H:%M:%S"),
                attribute_columns=tuple(mapping.get("attribute_columns", ())),
                case_notion=mapping.get("case_notion", "case"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError("invalid-mapping", f"bad csv mapping: {exc}") from None
        return import_csv(data, config)
    if fmt == "xes":
        return import_xes(data)
    raise FormatError("unknown-format", f"format must be ocel, csv, or xes, got {fmt!r}")


def session_summary(session: Session) -> dict:
    log = session.log
    return {
        "session": session.id,
        "events": len(log),
        "attributes": sorted(log.attributes),
        "object_types": sorted(log.object_types),
        "activities": sorted(log.activities()),
    }


def _decode_granularity(spec):
    if isinstance(spec, str):
        return spec
    if isinstance(spec, list):
        return tuple(spec)
    if isinstance(spec, dict) and "levels" in spec:
        levels = {}
        for level in spec["levels"]:
            members = [
                (m["label"], [decode_value(v, f"granularity {level['name']}") for v in m["values"]])
                for m in level["members"]
            ]
            levels[level["name"]] = members
        return levels
    raise CubeError("unknown-granularity-spec", f"cannot interpret granularity spec {spec!r}")


def build_cube(session: Session, body: dict) -> dict:
    dims = []
    for d in body.get("dimensions", ()):
        if isinstance(d, str):
            dims.append(d)
        elif isinstance(d, dict) and "name" in d and "kind" in d:
            dims.append(Dimension(d["name"], d["kind"]))
        else:
            raise CubeError("unknown-dimension-name", f"bad dimension entry {d!r}")
    granularity = {name: _decode_granularity(g) for name, g in (body.get("granularity") or {}).items()}
    structure = build_structure(session.log, dims, granularity)
    session.structure = structure
    session.view = default_view(structure)
    session.history = []
    session.model_cache = {}
    return structure_summary(session)


def structure_summary(session: Session) -> dict:
    structure = session.structure
    dims = []
    for dim in structure.dimensions:
        name = dim.name
        dims.append(
            {
                "name": name,
                "kind": dim.kind,
                "n_values": len(structure.val(name)),
                "levels": {lv: len(members) for lv, members in structure.levels[name].items()},
                "default_level": structure.default_levels[name],
            }
        )
    return {"session": session.id, "dimensions": dims, "view": view_summary(session)}


def view_summary(session: Session) -> dict:
    view = session.view
    return {
        "selected": list(view.selected),
        "sel_sizes": {d: len(members) for d, members in sorted(view.sel.items())},
        "history_length": len(session.history),
    }


def _require_cube(session: Session) -> None:
    if session.structure is None or session.view is None:
        raise CubeError("cube-not-built", "build the cube first")


def _replay(session: Session) -> CubeView:
    view = default_view(session.structure)
    for record in session.history:
        view = _apply_to_view(session, view, record)
    return view


def _apply_to_view(session: Session, view: CubeView, body: dict) -> CubeView:
    op = body.get("op")
    if op == "slice":
        return cube_slice(view, body["dimension"], body["member"])
    if op == "dice":
        return dice(view, {d: list(labels) for d, labels in body["filter"].items()})
    if op == "change-granularity":
        dimension = body["dimension"]
        if "level" in body:
            return change_granularity(view, dimension, body["level"], session.structure)
        members = []
        pool = session.structure.gran(dimension)
        for label in body["members"]:
            found = [m for m in pool if m.label == label]
            if not found:
                raise CubeError("granularity-not-in-structure", f"no granularity member {label!r} on {dimension!r}")
            if len(found) > 1:
                raise CubeError("ambiguous-label", f"label {label!r} is ambiguous on {dimension!r}")
            members.append(found[0])
        return change_granularity(view, dimension, members, session.structure)
    raise CubeError("unknown-operation", f"op must be slice, dice, change-granularity, or undo, got {op!r}")


def apply_operation(session: Session, body: dict) -> dict:
    _require_cube(session)
    op = body.get("op")
    if op == "undo":
        if not session.history:
            raise CubeError("empty-history", "nothing to undo")
        session.history.pop()
        session.view = _replay(session)
    else:
        session.view = _apply_to_view(session, session.view, body)
        record = {k: v for k, v in body.items()}
        session.history.append(record)
    session.model_cache = {}
    return view_summary(session)


def _materialized(session: Session) -> MaterializedView:
    return materialize(session.view, session.structure, session.log, include_empty=False)


def cells_page(session: Session, page: int, page_size: int) -> dict:
    _require_cube(session)
    page_size = max(1, min(page_size, MAX_PAGE_SIZE))
    materialized = _materialized(session)
    total = len(materialized)
    if page < 1 or (page != 1 and (page - 1) * page_size >= total):
        raise CubeError("page-out-of-range", f"page {page} of {max(1, -(-total // page_size))}")
    start = (page - 1) * page_size
    end = min(start + page_size, total)
    cells = []
    for i in range(start, end):
        cell, ids = materialized.entry(i)
        cells.append({"coords": cell.labels(), "events": len(ids)})
    return {
        "session": session.id,
        "page": page,
        "page_size": page_size,
        "total_cells": total,
        "cell_space": materialized.cell_space,
        "cells": cells,
    }


def _view_key(view: CubeView):
    return (view.selected, tuple((d, tuple(m.label for m in view.sel[d])) for d in sorted(view.sel)))


def _filter_key(activity_filter):
    if not activity_filter:
        return None
    return tuple((ot, tuple(sorted(acts))) for ot, acts in sorted(activity_filter.items()))


def _hidden_filtered_log(session: Session) -> EventLog:
    # events surviving every dimension's selection filter, selected or hidden
    global_view = CubeView((), session.view.sel)
    materialized = materialize(global_view, session.structure, session.log, include_empty=False)
    if len(materialized) == 0:
        return session.log.restrict(set())
    _, ids = materialized.entry(0)
    return session.log.restrict(set(ids))


def _cell_log(session: Session, cell_labels: dict) -> EventLog:
    view = session.view
    if set(cell_labels) != set(view.selected):
        raise CubeError("unknown-cell", f"cell must assign exactly the selected dimensions {list(view.selected)}")
    materialized = _materialized(session)
    from occube.cube import Cell

    coords = []
    for d in view.selected:
        member = view.sel[d].by_label(cell_labels[d])
        if member is None:
            raise CubeError("unknown-cell", f"{cell_labels[d]!r} is not selected on {d!r}")
        coords.append((d, member))
    ids = materialized.events_of(Cell(tuple(coords)))
    return session.log.restrict(set(ids))


def _model_doc(log: EventLog, activity_filter, min_node_freq: int, min_edge_freq: int, mode: str) -> dict:
    model = threshold_model(discover_mvp(log, activity_filter), min_node_freq, min_edge_freq)
    return {
        "nodes": [{"activity": n.activity, "frequency": n.frequency} for n in model.nodes],
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "object_type": e.object_type,
                "frequency": e.frequency,
                "performance": {
                    "mean": e.performance.mean,
                    "median": e.performance.median,
                    "min": e.performance.min,
                    "max": e.performance.max,
                },
            }
            for e in model.edges
        ],
        "dot": export_dot(model, mode),
    }


def get_model(
    session: Session,
    scope: str = "whole",
    cell_labels: dict | None = None,
    activity_filter: dict | None = None,
    min_node_freq: int = 0,
    min_edge_freq: int = 0,
    mode: str = "frequency",
) -> dict:
    _require_cube(session)
    if scope not in ("whole", "cell"):
        raise CubeError("unknown-scope", f"scope must be whole or cell, got {scope!r}")
    if scope == "cell" and cell_labels is None:
        raise CubeError("unknown-cell", "scope=cell needs a cell coordinate")
    key = (
        _view_key(session.view),
        scope,
        tuple(sorted((cell_labels or {}).items())),
        _filter_key(activity_filter),
        min_node_freq,
        min_edge_freq,
        mode,
    )
    cached = session.model_cache.get(key)
    if cached is not None:
        return cached

    whole = _model_doc(_hidden_filtered_log(session), activity_filter, min_node_freq, min_edge_freq, mode)
    cell_doc = None
    if scope == "cell":
        cell_doc = _model_doc(_cell_log(session, cell_labels), activity_filter, min_node_freq, min_edge_freq, mode)
    result = {
        "session": session.id,
        "scope": scope,
        "mode": mode,
        "palette": palette_for(session.log.object_types),
        "whole": whole,
        "cell": cell_doc,
    }
    session.model_cache[key] = result
    return result


def export_artifact(session: Session, what: str, params: dict) -> tuple[str, str, str]:
    """Produce (filename, media type, text) for a requested export."""
    if what == "ocel":
        scope = params.get("scope", "whole")
        if scope == "cell":
            _require_cube(session)
            log = _cell_log(session, params.get("cell") or {})
            return "cell.ocel.json", "application/json", export_ocel(log)
        return "log.ocel.json", "application/json", export_ocel(session.log)
    if what == "flattened":
        ot = params.get("ot")
        if not ot:
            raise CubeError("missing-case-notion", "flattened export needs the ot parameter")
        fmt = params.get("fmt", "csv")
        scope = params.get("scope", "whole")
        log = session.log
        if scope == "cell":
            _require_cube(session)
            log = _cell_log(session, params.get("cell") or {})
        text = export_flattened(log, ot, fmt)
        media = "text/csv" if fmt == "csv" else "application/xml"
        return f"flattened-{ot}.{fmt}", media, text
    if what == "dump":
        _require_cube(session)
        text = save_dump(CubeDump(session.log, session.structure, session.view))
        return "cube.dump.json", "application/json", text
    if what == "dot":
        _require_cube(session)
        doc = get_model(
            session,
            scope=params.get("scope", "whole"),
            cell_labels=params.get("cell"),
            activity_filter=params.get("filter"),
            min_node_freq=int(params.get("min_node_freq", 0)),
            min_edge_freq=int(params.get("min_edge_freq", 0)),
            mode=params.get("mode", "frequency"),
        )
        text = doc["cell"]["dot"] if params.get("scope") == "cell" else doc["whole"]["dot"]
        return "model.dot", "text/vnd.graphviz", text
    raise CubeError("unknown-export", f"what must be ocel, flattened, dump, or dot, got {what!r}")


# ----------------------------------------------------------------- HTTP layer

_STATUS_BY_CODE = {
    "unknown-session": 404,
    "unknown-cell": 404,
    "page-out-of-range": 416,
    "missing-case-notion": 422,
    "incompatible-structure": 422,
    "unknown-dimension-name": 422,
    "payload-too-large": 413,
}


def _http_error(exc: OccubeError):
    if isinstance(exc, FormatError):
        status = 400
    else:
        status = _STATUS_BY_CODE.get(exc.code, 409)
    return JSONResponse(status_code=status, content={"code": exc.code, "detail": exc.message})


def create_app(upload_limit: int | None = None):
    """FastAPI application exposing the session API (plus optional static UI)."""
    if upload_limit is None:
        upload_limit = int(os.environ.get("OCCUBE_UPLOAD_LIMIT", DEFAULT_UPLOAD_LIMIT))

    app = FastAPI(title="occube", version="0.1.0")
    store = SessionStore()
    app.state.store = store

    @app.exception_handler(OccubeError)
    async def _on_error(request: Request, exc: OccubeError):
        return _http_error(exc)

    @app.post("/sessions")
    def create_session(
        file: UploadFile = File(...),
        format: str = Form("ocel"),
        mapping: str | None = Form(None),
    ):
        data = file.file.read()
        if len(data) > upload_limit:
            raise CubeError("payload-too-large", f"upload exceeds {upload_limit} bytes")
        mapping_doc = None
        if mapping:
            try:
                mapping_doc = json.loads(mapping)
            except json.JSONDecodeError as exc:
                raise FormatError("invalid-mapping", f"mapping is not valid JSON: {exc}") from None
        log = import_payload(data, format, mapping_doc)
        session = store.create(log)
        return session_summary(session)

    @app.post("/sessions/{session_id}/cube")
    def post_cube(session_id: str, body: dict):
        session = store.get(session_id)
        with session.lock:
            return build_cube(session, body)

    @app.post("/sessions/{session_id}/ops")
    def post_op(session_id: str, body: dict):
        session = store.get(session_id)
        with session.lock:
            return apply_operation(session, body)

    @app.get("/sessions/{session_id}/cells")
    def get_cells(session_id: str, page: int = Query(1), page_size: int = Query(100)):
        session = store.get(session_id)
        with session.lock:
            return cells_page(session, page, page_size)

    @app.get("/sessions/{session_id}/model")
    def get_model_endpoint(
        session_id: str,
        scope: str = Query("whole"),
        cell: str | None = Query(None),
        filter: str | None = Query(None),
        min_node_freq: int = Query(0),
        min_edge_freq: int = Query(0),
        mode: str = Query("frequency"),
    ):
        session = store.get(session_id)
        with session.lock:
            return get_model(
                session,
                scope=scope,
                cell_labels=_parse_json_param(cell, "cell"),
                activity_filter=_parse_json_param(filter, "filter"),
                min_node_freq=min_node_freq,
                min_edge_freq=min_edge_freq,
                mode=mode,
            )

    @app.get("/sessions/{session_id}/export")
    def get_export(
        session_id: str,
        what: str = Query(...),
        scope: str = Query("whole"),
        cell: str | None = Query(None),
        ot: str | None = Query(None),
        fmt: str = Query("csv"),
        filter: str | None = Query(None),
        min_node_freq: int = Query(0),
        min_edge_freq: int = Query(0),
        mode: str = Query("frequency"),
    ):
        session = store.get(session_id)
        with session.lock:
            filename, media, text = export_artifact(
                session,
                what,
                {
                    "scope": scope,
                    "cell": _parse_json_param(cell, "cell"),
                    "ot": ot,
                    "fmt": fmt,
                    "filter": _parse_json_param(filter, "filter"),
                    "min_node_freq": min_node_freq,
                    "min_edge_freq": min_edge_freq,
                    "mode": mode,
                },
            )
        return Response(
            content=text,
            media_type=media,
            headers={"Content-Disposition": f'attachment; filename="{filename}"'},
        )

    ui_dir = os.environ.get("OCCUBE_UI_DIR")
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app


def _parse_json_param(raw: str | None, name: str):
    if raw is None or raw == "":
        return None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FormatError("invalid-parameter", f"{name} is not valid JSON: {exc}") from None
