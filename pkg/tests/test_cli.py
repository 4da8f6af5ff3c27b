"""Command-line interface: replay, export and bench subcommands."""

import json

import numpy as np
import pytest

from streampca import cli
from streampca.pipeline import Pipeline, PipelineConfig, StreamEvent
from streampca.streamio import snapshot_to_dict, write_events


def write_event_file(path, events):
    with open(path, "w", encoding="utf-8") as out:
        write_events(out, events)


@pytest.fixture
def four_point_file(tmp_path):
    """Four complete 3-feature points; at batch=2 a replay emits 2 snapshots."""
    rng = np.random.default_rng(3)
    events = [
        StreamEvent(point_id=f"p{i}", values=rng.normal(size=3), t=float(i))
        for i in range(4)
    ]
    path = tmp_path / "events.ndjson"
    write_event_file(path, events)
    return path


# ---------------------------------------------------------------- parser


def test_parser_defaults():
    args = cli.build_parser().parse_args(["replay", "--input", "x", "--dims", "4"])
    assert args.command == "replay"
    assert args.rate == 0.0
    assert args.components == 2
    assert args.batch == 2
    assert args.forget == 1.0
    assert args.seed == 0


def test_parser_grid_lists():
    args = cli.build_parser().parse_args(["bench", "--grid-d", "4,8", "--grid-n", "20"])
    assert args.grid_d == [4, 8]
    assert args.grid_n == [20]
    defaults = cli.build_parser().parse_args(["bench"])
    assert defaults.grid_d == [10, 100, 1000]
    assert defaults.grid_n == [100, 1000, 10000]
    assert defaults.reps == 10


def test_parser_rejects_bad_grid(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["bench", "--grid-d", "a,b"])
    assert "comma-separated ints" in capsys.readouterr().err


def test_parser_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args([])


def test_parser_requires_input():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["replay", "--dims", "4"])


# ---------------------------------------------------------------- replay


def test_replay_prints_one_line_per_snapshot(four_point_file, capsys):
    code = cli.main(["replay", "--input", str(four_point_file), "--dims", "3"])
    assert code == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 2
    assert out[0].startswith("seq=1 ")
    assert out[1].startswith("seq=2 ")
    assert "path=full" in out[0]
    assert "stored=2" in out[0]
    assert "stored=4" in out[1]


def test_replay_honors_rate_flag(four_point_file, capsys):
    # high rate so the sleep branch runs without slowing the suite
    code = cli.main(
        ["replay", "--input", str(four_point_file), "--dims", "3", "--rate", "5000"]
    )
    assert code == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 2


def test_replay_skips_bad_lines_with_diagnostics(tmp_path, capsys):
    rng = np.random.default_rng(5)
    good = [
        StreamEvent(point_id=f"g{i}", values=rng.normal(size=3), t=float(i))
        for i in range(2)
    ]
    path = tmp_path / "mixed.ndjson"
    with open(path, "w", encoding="utf-8") as out:
        out.write(
            '{"id": "g0", "values": [%s], "t": 0.0}\n'
            % ", ".join(str(v) for v in good[0].values)
        )
        out.write("this is not json\n")
        out.write('{"id": "wide", "values": [1, 2, 3, 4, 5], "t": 1.0}\n')
        out.write(
            '{"id": "g1", "values": [%s], "t": 2.0}\n'
            % ", ".join(str(v) for v in good[1].values)
        )
    code = cli.main(["replay", "--input", str(path), "--dims", "3"])
    assert code == 0
    captured = capsys.readouterr()
    assert len(captured.out.strip().splitlines()) == 1  # one surviving batch
    assert "line 2:" in captured.err
    assert "line 3:" in captured.err
    assert "2 bad line(s) skipped" in captured.err


def test_replay_missing_file_exits_nonzero(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["replay", "--input", str(tmp_path / "nope.ndjson"), "--dims", "3"])
    assert exc.value.code == 2
    assert "cannot open" in capsys.readouterr().err


# ---------------------------------------------------------------- export


def expected_snapshots(events_path, dims):
    pipe = Pipeline(PipelineConfig(dims=dims, n_components=2, batch_size=2, seed=0))
    out = []
    with open(events_path, encoding="utf-8") as stream:
        for line in stream:
            from streampca.streamio import parse_event

            snap = pipe.ingest(parse_event(line))
            if snap is not None:
                out.append(snapshot_to_dict(snap))
    return out


def test_export_matches_in_memory_replay(four_point_file, tmp_path, capsys):
    out_path = tmp_path / "snaps.ndjson"
    code = cli.main(
        ["export", "--input", str(four_point_file), "--dims", "3", "--out", str(out_path)]
    )
    assert code == 0
    assert "wrote 2 snapshots" in capsys.readouterr().out
    with open(out_path, encoding="utf-8") as stream:
        exported = [json.loads(line) for line in stream if line.strip()]
    assert exported == expected_snapshots(four_point_file, 3)


def test_export_same_seed_is_byte_identical(four_point_file, tmp_path):
    paths = [tmp_path / "a.ndjson", tmp_path / "b.ndjson"]
    for path in paths:
        cli.main(
            [
                "export",
                "--input",
                str(four_point_file),
                "--dims",
                "3",
                "--seed",
                "7",
                "--out",
                str(path),
            ]
        )
    assert paths[0].read_bytes() == paths[1].read_bytes()


# ---------------------------------------------------------------- bench


def test_bench_prints_table_and_writes_summaries(tmp_path, capsys):
    out_path = tmp_path / "bench.json"
    code = cli.main(
        [
            "bench",
            "--grid-d",
            "4",
            "--grid-n",
            "30",
            "--reps",
            "2",
            "--out",
            str(out_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "dims" in out and "partial" in out
    cells = json.loads(out_path.read_text())
    assert len(cells) == 1
    cell = cells[0]
    assert cell["dims"] == 4 and cell["n"] == 30
    for stage in ("a1_ms", "a2_ms", "a3_ms", "b1_ms", "b2_ms"):
        stats = cell["stages"][stage]
        assert len({"mean_ms", "median_ms", "max_ms"} - set(stats)) == 0
        assert stats["mean_ms"] <= stats["max_ms"]
    for path in ("full", "partial"):
        assert cell[path]["mean_ms"] > 0.0
        assert cell[path]["median_ms"] <= cell[path]["max_ms"]


def test_bench_grid_covers_cells_in_order(tmp_path):
    out_path = tmp_path / "grid.json"
    cli.main(
        [
            "bench",
            "--grid-d",
            "4,6",
            "--grid-n",
            "20,30",
            "--reps",
            "1",
            "--out",
            str(out_path),
        ]
    )
    cells = json.loads(out_path.read_text())
    assert [(c["dims"], c["n"]) for c in cells] == [(4, 20), (4, 30), (6, 20), (6, 30)]
