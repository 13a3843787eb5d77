"""Read run configurations and write analysis outputs.

Inputs: JSON configuration files, payload dictionaries and table rows produced by the CLI.
Outputs: Deterministic JSON (sorted keys, shortest round-trip floats) and CSV (17 significant
digits, '\n' line endings) on a file or standard output. Acts as the single file access layer.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from collections.abc import Iterable, Mapping, Sequence
from importlib import resources
from pathlib import Path
from typing import Any, TextIO

from .errors import InvalidParameters
from .welander import PARAMETER_NAMES

SCHEMA_NAMES = ("analyze", "cycle", "events")


def load_run_config(path: str | Path) -> dict[str, dict[str, Any]]:
    """Load a JSON run configuration.

    Inputs: path to a file holding either {"params": {...}, "options": {...}} or a flat object
    whose parameter keys are alpha, beta, epsilon, k0, k1 (other keys become options).
    Outputs: dict with `params` and `options` mappings; neither is validated here.
    Raises: InvalidParameters when the file cannot be read or is not a JSON object.
    """

    source = Path(path)
    try:
        document = json.loads(source.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidParameters(f"cannot read config file {source}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidParameters(f"config file {source} is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(document, dict):
        raise InvalidParameters(f"config file {source} must hold a JSON object")

    if "params" in document or "options" in document:
        params, options = document.get("params", {}), document.get("options", {})
        if not isinstance(params, dict) or not isinstance(options, dict):
            raise InvalidParameters(f"config file {source}: `params` and `options` must be objects")
        return {"params": dict(params), "options": dict(options)}
    params = {key: value for key, value in document.items() if key in PARAMETER_NAMES}
    options = {key: value for key, value in document.items() if key not in PARAMETER_NAMES}
    return {"params": params, "options": options}


def _finite(payload: Any) -> Any:
    if isinstance(payload, float) and not math.isfinite(payload):
        return None
    if isinstance(payload, Mapping):
        return {str(key): _finite(value) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_finite(value) for value in payload]
    return payload


def dumps_json(payload: Mapping[str, Any]) -> str:
    return json.dumps(_finite(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, path: str | Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def write_json(payload: Mapping[str, Any], path: str | Path | None = None) -> None:
    """Write `payload` as indented JSON with sorted keys; non-finite floats become null."""

    _emit(dumps_json(payload), path)


def format_cell(value: Any) -> str:
    """Render one CSV cell: floats with 17 significant digits, booleans lower-case, None empty."""

    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_rows(handle: TextIO, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"CSV row has {len(row)} cells, header has {len(header)}")
        writer.writerow([format_cell(value) for value in row])


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: str | Path | None = None) -> None:
    """Write a comma-separated table with a header row.

    Inputs: header (column names), rows (sequences of the same length), optional output path.
    Outputs: None; writes to `path` or standard output.
    Raises: ValueError when a row length differs from the header.
    """

    if path is None:
        _write_rows(sys.stdout, header, rows)
        return
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        _write_rows(handle, header, rows)


def load_schema(name: str) -> dict[str, Any]:
    """Return one of the shipped JSON schemas (analyze, cycle, events)."""

    if name not in SCHEMA_NAMES:
        raise InvalidParameters(f"unknown schema {name!r}; choose from {', '.join(SCHEMA_NAMES)}")
    text = (resources.files("welander_filippov") / "schemas" / f"{name}.schema.json").read_text(encoding="utf-8")
    document: dict[str, Any] = json.loads(text)
    return document
