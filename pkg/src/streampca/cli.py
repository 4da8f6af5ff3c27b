"""Command-line tools: replay a stream, export snapshots, run benchmarks.

    streampca replay --input events.ndjson --dims 4 --rate 20
    streampca export --input events.ndjson --dims 4 --out snapshots.ndjson
    streampca bench --grid-d 10,100,1000 --grid-n 100,1000,10000 --reps 10

Replay prints one line per emitted snapshot; export writes the snapshot
stream as NDJSON; bench prints a latency table over the requested grid.
Malformed or contract-violating event lines produce a diagnostic on
stderr naming the line, and processing continues.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .bench import format_report, run_grid
from .pipeline import EventRejected, Pipeline, PipelineConfig
from .streamio import EventFormatError, parse_event, write_snapshots


def _int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints: {exc}")
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _add_pipeline_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--dims", type=int, required=True, help="feature count D")
    parser.add_argument(
        "--components", type=int, default=2, help="projection components (default 2)"
    )
    parser.add_argument(
        "--batch", type=int, default=2, help="model update batch size (default 2)"
    )
    parser.add_argument(
        "--forget",
        type=float,
        default=1.0,
        help="forgetting factor in (0, 1]; 1 keeps all history (default 1)",
    )
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streampca",
        description="Streaming PCA layouts: replay, export and benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    replay = sub.add_parser("replay", help="run a recorded event stream")
    replay.add_argument("--input", required=True, help="NDJSON event file")
    replay.add_argument(
        "--rate",
        type=float,
        default=0.0,
        help="events per second; 0 replays as fast as possible (default 0)",
    )
    _add_pipeline_flags(replay)

    export = sub.add_parser("export", help="replay and write snapshots to a file")
    export.add_argument("--input", required=True, help="NDJSON event file")
    export.add_argument("--out", required=True, help="NDJSON snapshot output file")
    _add_pipeline_flags(export)

    bench = sub.add_parser("bench", help="latency grid benchmark")
    bench.add_argument(
        "--grid-d",
        type=_int_list,
        default=[10, 100, 1000],
        help="comma-separated feature counts (default 10,100,1000)",
    )
    bench.add_argument(
        "--grid-n",
        type=_int_list,
        default=[100, 1000, 10000],
        help="comma-separated stored-point counts (default 100,1000,10000)",
    )
    bench.add_argument(
        "--reps", type=int, default=10, help="timed repetitions per cell (default 10)"
    )
    bench.add_argument("--batch", type=int, default=2)
    bench.add_argument("--components", type=int, default=2)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", help="also write per-cell summaries as JSON")
    return parser


def _config_from(args) -> PipelineConfig:
    return PipelineConfig(
        dims=args.dims,
        n_components=args.components,
        batch_size=args.batch,
        forget=args.forget,
        seed=args.seed,
    )


def _replay_lines(path: str, pipe: Pipeline, on_snapshot, rate: float = 0.0) -> int:
    """Feed a file through a pipeline; returns the number of bad lines."""
    bad = 0
    delay = 1.0 / rate if rate > 0 else 0.0
    try:
        stream = open(path, encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot open {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)
    with stream:
        for lineno, line in enumerate(stream, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                event = parse_event(line)
                snapshot = pipe.ingest(event)
            except (EventFormatError, EventRejected) as exc:
                print(f"line {lineno}: {exc}", file=sys.stderr)
                bad += 1
                continue
            if snapshot is not None:
                on_snapshot(snapshot)
            if delay:
                time.sleep(delay)
    return bad


def _snapshot_line(snapshot) -> str:
    stats = snapshot.stats
    path = stats.get("path", "?")
    timing = " ".join(
        f"{key}={stats[key]:.2f}"
        for key in ("a1_ms", "a2_ms", "a3_ms", "b1_ms", "b2_ms", "total_ms")
        if key in stats
    )
    return (
        f"seq={snapshot.seq} t={snapshot.t:.3f} path={path} "
        f"stored={snapshot.stored} partial={len(snapshot.uncertainties)} "
        f"beta={snapshot.beta:.3f} {timing}"
    )


def cmd_replay(args) -> int:
    pipe = Pipeline(_config_from(args))
    bad = _replay_lines(
        args.input, pipe, lambda s: print(_snapshot_line(s)), rate=args.rate
    )
    if bad:
        print(f"{bad} bad line(s) skipped", file=sys.stderr)
    return 0


def cmd_export(args) -> int:
    pipe = Pipeline(_config_from(args))
    snapshots = []
    bad = _replay_lines(args.input, pipe, snapshots.append)
    with open(args.out, "w", encoding="utf-8") as out:
        write_snapshots(out, snapshots)
    print(f"wrote {len(snapshots)} snapshots to {args.out}")
    if bad:
        print(f"{bad} bad line(s) skipped", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    cells = run_grid(
        args.grid_d,
        args.grid_n,
        reps=args.reps,
        batch_size=args.batch,
        n_components=args.components,
        seed=args.seed,
    )
    print(format_report(cells))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as out:
            json.dump([cell.summary() for cell in cells], out, indent=2)
        print(f"wrote summaries to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"replay": cmd_replay, "export": cmd_export, "bench": cmd_bench}[
        args.command
    ]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
