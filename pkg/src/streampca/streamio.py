"""Wire formats: event lines in, snapshot messages out.

Events arrive as newline-delimited JSON objects:

    {"id": "p-17", "values": [0.1, 0.2], "t": 3.5, "group": "b"}

``id`` and ``values`` are required; ``t`` defaults to 0 and ``group`` to
null.  Snapshots leave as JSON objects with ``kind`` = "snapshot" and a
monotonically increasing ``seq``; the same shape is used for NDJSON export
files and for WebSocket broadcast, so an exported replay is byte for byte
what a client would have received.

Serialization is deterministic: keys are sorted and floats use Python's
shortest round-trip repr, so identical snapshots produce identical bytes.
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator, TextIO

import numpy as np

from .pipeline import LayoutSnapshot, StreamEvent


class EventFormatError(ValueError):
    """Raised for lines that do not parse into a valid event."""


def parse_event(line: str) -> StreamEvent:
    """Parse one NDJSON event line."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise EventFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise EventFormatError(f"event must be an object, got {type(obj).__name__}")
    if "id" not in obj or "values" not in obj:
        raise EventFormatError("event needs 'id' and 'values' fields")
    point_id = obj["id"]
    if not isinstance(point_id, str) or not point_id:
        raise EventFormatError("'id' must be a non-empty string")
    values = obj["values"]
    if not isinstance(values, list) or not values:
        raise EventFormatError("'values' must be a non-empty array")
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise EventFormatError(f"'values' must be numeric: {exc}") from exc
    if arr.ndim != 1:
        raise EventFormatError("'values' must be a flat array")
    t = obj.get("t", 0.0)
    if not isinstance(t, (int, float)) or isinstance(t, bool):
        raise EventFormatError("'t' must be a number")
    group = obj.get("group")
    if group is not None and not isinstance(group, str):
        raise EventFormatError("'group' must be a string or null")
    return StreamEvent(point_id=point_id, values=arr, t=float(t), group=group)


def format_event(event: StreamEvent) -> str:
    """One NDJSON line for an event (no trailing newline)."""
    obj = {
        "id": event.point_id,
        "values": [float(v) for v in event.values],
        "t": event.t,
    }
    if event.group is not None:
        obj["group"] = event.group
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def read_events(stream: TextIO) -> Iterator[tuple[int, StreamEvent]]:
    """Yield (line_number, event) pairs, skipping blank lines."""
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            yield lineno, parse_event(line)
        except EventFormatError as exc:
            raise EventFormatError(f"line {lineno}: {exc}") from exc


def write_events(stream: TextIO, events: Iterable[StreamEvent]):
    for event in events:
        stream.write(format_event(event) + "\n")


def snapshot_to_dict(snapshot: LayoutSnapshot) -> dict:
    """Snapshot as a JSON-ready dict (the wire shape)."""
    return {
        "kind": "snapshot",
        "seq": snapshot.seq,
        "t": snapshot.t,
        "beta": snapshot.beta,
        "stored": snapshot.stored,
        "positions": {
            pid: [pos[0], pos[1]] for pid, pos in snapshot.positions.items()
        },
        "uncertainties": {
            pid: {
                "l": rec.width,
                "u": rec.strain,
                "v": rec.loading_gap,
                "w": rec.combined,
                "beta": rec.beta,
            }
            for pid, rec in snapshot.uncertainties.items()
        },
        "trails": {
            pid: [[x, y, w] for x, y, w in trail]
            for pid, trail in snapshot.trails.items()
        },
        "groups": dict(snapshot.groups),
        "transform": {
            "scale": snapshot.transform.scale,
            "translation": snapshot.transform.translation.tolist(),
            "rotation": snapshot.transform.rotation.tolist(),
        },
        "new_ids": list(snapshot.new_ids),
        "removed_ids": list(snapshot.removed_ids),
        "completions": [
            {"id": c.point_id, "l": c.width, "w": c.combined, "e": c.error}
            for c in snapshot.completions
        ],
        # stage timings stay off the wire: they are wall-clock volatile and
        # would break byte-identical replays of the same stream.
    }


def snapshot_to_json(snapshot: LayoutSnapshot) -> str:
    return json.dumps(
        snapshot_to_dict(snapshot), sort_keys=True, separators=(",", ":")
    )


def write_snapshots(stream: TextIO, snapshots: Iterable[LayoutSnapshot]):
    """NDJSON export of a snapshot sequence."""
    for snapshot in snapshots:
        stream.write(snapshot_to_json(snapshot) + "\n")


def read_snapshots(stream: TextIO) -> Iterator[dict]:
    """Re-import an NDJSON export as wire dicts."""
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EventFormatError(f"line {lineno}: not valid JSON: {exc}") from exc
        if not isinstance(obj, dict) or obj.get("kind") != "snapshot":
            raise EventFormatError(f"line {lineno}: not a snapshot message")
        yield obj
