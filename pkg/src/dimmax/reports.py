"""Machine-readable outputs: JSON reports, CSV/TSV tables, schema validation.

The JSON report is deterministic for a fixed config and seed: keys are
sorted, floats serialize through Python's repr, and anything time- or
host-dependent goes to a separate metadata file instead.  Writes are atomic
(write to a sibling temp file, then rename).
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from importlib import resources
from typing import Any

import numpy as np

SCHEMA_VERSION = 1


def to_jsonable(obj: Any) -> Any:
    """Recursively convert dataclasses / numpy objects to plain JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and (obj != obj):  # NaN is not valid JSON
        return None
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def _atomic_write(path: str, data: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, doc: dict) -> str:
    _atomic_write(path, json.dumps(to_jsonable(doc), sort_keys=True, indent=2) + "\n")
    return path


def write_delimited(path: str, rows, header: list[str], sep: str) -> str:
    lines = [sep.join(header)]
    for row in rows:
        lines.append(sep.join(repr(float(v)) if isinstance(v, (float, np.floating))
                              else str(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def write_csv(path: str, rows, header: list[str]) -> str:
    return write_delimited(path, rows, header, ",")


def write_tsv(path: str, rows, header: list[str]) -> str:
    return write_delimited(path, rows, header, "\t")


def load_schema() -> dict:
    text = resources.files("dimmax.schemas").joinpath("report_v1.json").read_text()
    return json.loads(text)


def validate_report(doc: dict) -> None:
    """Raise jsonschema.ValidationError if the report violates the shipped schema."""
    import jsonschema

    jsonschema.validate(instance=to_jsonable(doc), schema=load_schema())


def report_envelope(command: str, config: dict, results: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": to_jsonable(config),
        "results": to_jsonable(results),
    }
