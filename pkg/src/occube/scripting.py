"""Headless execution of recorded exploration scripts.

A script is a JSON document describing one session end to end: the input
log, the cube to build, the operations to apply, and the exports to write.
Running the same script twice produces byte-identical outputs. Schema in
docs/formats/script.md.
"""

from __future__ import annotations

import json
from pathlib import Path

from occube.errors import FormatError
from occube.service import Session, apply_operation, build_cube, export_artifact, import_payload


def run_script(script: dict, base_dir: Path, out_dir: Path) -> list[Path]:
    """Execute a script document; returns the written output paths."""
    if "input" not in script:
        raise FormatError("schema-error", "script: missing 'input'")
    input_path = base_dir / script["input"]
    try:
        data = input_path.read_bytes()
    except OSError as exc:
        raise FormatError("io-error", f"script: cannot read input {input_path}: {exc}") from None
    log = import_payload(data, script.get("format", "ocel"), script.get("mapping"))
    session = Session(id="script", log=log)

    if "cube" in script:
        build_cube(session, script["cube"])
    for op in script.get("operations", ()):
        apply_operation(session, op)

    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for spec in script.get("exports", ()):
        if "what" not in spec or "out" not in spec:
            raise FormatError("schema-error", "script: each export needs 'what' and 'out'")
        filename, _media, text = export_artifact(session, spec["what"], spec)
        del filename
        path = out_dir / spec["out"]
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise FormatError("io-error", f"script: cannot write {path}: {exc}") from None
        written.append(path)
    return written


def load_script(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError("io-error", f"cannot read script {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("parse-error", f"script: line {exc.lineno}: {exc.msg}") from None
