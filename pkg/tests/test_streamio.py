import io
import json

import numpy as np
import pytest

from streampca.pipeline import Pipeline, PipelineConfig
from streampca.streamio import (
    EventFormatError,
    format_event,
    parse_event,
    read_events,
    read_snapshots,
    snapshot_to_dict,
    snapshot_to_json,
    write_events,
    write_snapshots,
)
from streampca.synthetic import progressive_events


def test_parse_minimal_event():
    ev = parse_event('{"id": "a", "values": [1, 2.5]}')
    assert ev.point_id == "a"
    assert np.array_equal(ev.values, [1.0, 2.5])
    assert ev.t == 0.0
    assert ev.group is None


def test_parse_full_event():
    ev = parse_event('{"id": "a", "values": [1], "t": 3.5, "group": "bus"}')
    assert ev.t == 3.5
    assert ev.group == "bus"


@pytest.mark.parametrize(
    "line",
    [
        "not json at all",
        "[1, 2, 3]",
        '{"values": [1]}',
        '{"id": "a"}',
        '{"id": "", "values": [1]}',
        '{"id": 7, "values": [1]}',
        '{"id": "a", "values": []}',
        '{"id": "a", "values": "xyz"}',
        '{"id": "a", "values": ["x"]}',
        '{"id": "a", "values": [[1], [2]]}',
        '{"id": "a", "values": [1], "t": "soon"}',
        '{"id": "a", "values": [1], "t": true}',
        '{"id": "a", "values": [1], "group": 4}',
    ],
)
def test_parse_rejects_malformed(line):
    with pytest.raises(EventFormatError):
        parse_event(line)


def test_format_parse_round_trip():
    rng = np.random.default_rng(0)
    events = list(
        progressive_events(rng.normal(size=(4, 3)), boot=2, id_prefix="r")
    )
    text = io.StringIO()
    write_events(text, events)
    text.seek(0)
    back = [ev for _, ev in read_events(text)]
    assert len(back) == len(events)
    for a, b in zip(events, back):
        assert a.point_id == b.point_id
        assert np.array_equal(a.values, b.values)
        assert a.t == b.t
        assert a.group == b.group


def test_read_events_reports_line_numbers():
    text = io.StringIO('{"id": "a", "values": [1]}\n\nbroken\n')
    it = read_events(text)
    lineno, ev = next(it)
    assert (lineno, ev.point_id) == (1, "a")
    with pytest.raises(EventFormatError, match="line 3"):
        next(it)


def make_snapshots(n_extra=4):
    rng = np.random.default_rng(1)
    pipe = Pipeline(PipelineConfig(dims=3, batch_size=2))
    snaps = [pipe.bootstrap(rng.normal(size=(6, 3)), [f"b{i}" for i in range(6)])]
    for ev in progressive_events(
        rng.normal(size=(n_extra, 3)), boot=2, id_prefix="s"
    ):
        snap = pipe.ingest(ev)
        if snap is not None:
            snaps.append(snap)
    return snaps


def test_snapshot_wire_shape():
    snap = make_snapshots()[-1]
    obj = snapshot_to_dict(snap)
    assert obj["kind"] == "snapshot"
    assert obj["seq"] == snap.seq
    assert set(obj["positions"]) == set(snap.positions)
    assert "stats" not in obj  # wall-clock timings never reach the wire
    assert set(obj["transform"]) == {"scale", "translation", "rotation"}
    for rec in obj["uncertainties"].values():
        assert set(rec) == {"l", "u", "v", "w", "beta"}


def test_snapshot_json_is_deterministic():
    snaps = make_snapshots()
    a = [snapshot_to_json(s) for s in snaps]
    b = [snapshot_to_json(s) for s in snaps]
    assert a == b
    # sorted compact keys: stable byte layout
    assert a[0].startswith('{"beta":')
    assert " " not in a[0].split('"positions"')[0]


def test_export_reimport_round_trip():
    snaps = make_snapshots()
    out = io.StringIO()
    write_snapshots(out, snaps)
    out.seek(0)
    back = list(read_snapshots(out))
    assert back == [
        json.loads(snapshot_to_json(s)) for s in snaps
    ]
    assert [o["seq"] for o in back] == [s.seq for s in snaps]


def test_read_snapshots_rejects_foreign_lines():
    with pytest.raises(EventFormatError, match="line 1"):
        list(read_snapshots(io.StringIO('{"kind": "other"}\n')))
    with pytest.raises(EventFormatError, match="not valid JSON"):
        list(read_snapshots(io.StringIO("junk\n")))
