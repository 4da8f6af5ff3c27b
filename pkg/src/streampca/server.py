"""WebSocket broadcast server for live layout streaming.

Clients connect to ``/stream`` and immediately receive the current
snapshot (with the pipeline configuration attached), then every later
snapshot as it is produced.  Each session has a latest-only mailbox: a
slow client skips intermediate frames instead of lagging behind, and
never sees frames out of order.  ``/healthz`` reports the snapshot
sequence number and stored-point count.

Clients may send a selection message to opt into focus tracking:

    {"kind": "select", "seq": 7, "mode": "selected-points", "ids": [...]}

Modes are "off", "new-points", "selected-points" and "both".  While
tracking is active, the session's snapshots carry a ``focus`` rectangle:
the bounding box of the tracked points grown by a 20% margin per side.
Unknown ids are pruned and echoed back in the ack; malformed messages get
an error reply and do not terminate the session.

Events come either from an NDJSON replay file (optionally rate-limited)
or from a line-oriented TCP feed.  Bad lines are logged and skipped.
"""

from __future__ import annotations

import argparse
import asyncio
import contextlib
import json
import logging
import os
import sys

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .pipeline import EventRejected, LayoutSnapshot, Pipeline, PipelineConfig
from .streamio import EventFormatError, parse_event, snapshot_to_dict

log = logging.getLogger(__name__)

TRACKING_MODES = ("off", "new-points", "selected-points", "both")
FOCUS_MARGIN = 0.2
_FALLBACK_HALF_EXTENT = 1.0


class Session:
    """One connected client: selection state plus a latest-only mailbox."""

    def __init__(self, websocket: WebSocket, loop: asyncio.AbstractEventLoop):
        self.websocket = websocket
        self.loop = loop
        self.mode = "off"
        self.ids: frozenset[str] = frozenset()
        self.latest: str | None = None
        self.fresh = asyncio.Event()

    def deliver(self, payload: str):
        """Overwrite the mailbox; safe to call from any thread."""
        self.latest = payload
        try:
            running = asyncio.get_running_loop()
        except RuntimeError:
            running = None
        if running is self.loop:
            self.fresh.set()
        else:
            self.loop.call_soon_threadsafe(self.fresh.set)


def focus_rectangle(snapshot: LayoutSnapshot, mode: str, ids: frozenset[str]):
    """Axis-aligned focus rect for the tracked points, or None."""
    tracked: set[str] = set()
    if mode in ("new-points", "both"):
        tracked.update(snapshot.uncertainties)
        tracked.update(snapshot.new_ids)
    if mode in ("selected-points", "both"):
        tracked.update(ids)
    tracked &= snapshot.positions.keys()
    if not tracked:
        return None
    xs = [snapshot.positions[pid][0] for pid in tracked]
    ys = [snapshot.positions[pid][1] for pid in tracked]
    cx = (min(xs) + max(xs)) / 2.0
    cy = (min(ys) + max(ys)) / 2.0
    hw = (max(xs) - min(xs)) / 2.0
    hh = (max(ys) - min(ys)) / 2.0
    if hw == 0.0 and hh == 0.0:
        hw = hh = _FALLBACK_HALF_EXTENT
    hw *= 1.0 + FOCUS_MARGIN
    hh *= 1.0 + FOCUS_MARGIN
    return {"x0": cx - hw, "y0": cy - hh, "x1": cx + hw, "y1": cy + hh}


class StreamService:
    """Owns the pipeline and fans snapshots out to sessions."""

    def __init__(self, pipeline: Pipeline):
        self.pipeline = pipeline
        self.sessions: set[Session] = set()

    def ingest(self, event) -> LayoutSnapshot | None:
        snapshot = self.pipeline.ingest(event)
        if snapshot is not None:
            self.broadcast(snapshot)
        return snapshot

    def broadcast(self, snapshot: LayoutSnapshot):
        base_dict = None
        base_json = None
        for session in self.sessions:
            if base_dict is None:
                base_dict = snapshot_to_dict(snapshot)
                base_json = json.dumps(
                    base_dict, sort_keys=True, separators=(",", ":")
                )
            session.deliver(self._payload(session, snapshot, base_dict, base_json))

    def _payload(self, session, snapshot, base_dict, base_json) -> str:
        if session.mode == "off":
            return base_json
        rect = focus_rectangle(snapshot, session.mode, session.ids)
        enriched = dict(base_dict)
        if rect is not None:
            enriched["focus"] = rect
        return json.dumps(enriched, sort_keys=True, separators=(",", ":"))

    def joining_payload(self, session: Session) -> str | None:
        """Current snapshot with the pipeline configuration attached."""
        snapshot = self.pipeline.current_snapshot
        if snapshot is None:
            return None
        config = self.pipeline.config
        enriched = snapshot_to_dict(snapshot)
        enriched["config"] = {
            "dims": config.dims,
            "components": config.n_components,
            "batch": config.batch_size,
            "forget": config.forget,
        }
        rect = (
            focus_rectangle(snapshot, session.mode, session.ids)
            if session.mode != "off"
            else None
        )
        if rect is not None:
            enriched["focus"] = rect
        return json.dumps(enriched, sort_keys=True, separators=(",", ":"))

    def handle_select(self, session: Session, message: dict) -> dict:
        seq = message.get("seq", 0)
        if not isinstance(seq, int):
            seq = 0
        mode = message.get("mode", "off")
        if mode not in TRACKING_MODES:
            return {
                "kind": "error",
                "seq": seq,
                "message": f"unknown mode {mode!r}; expected one of {list(TRACKING_MODES)}",
            }
        raw_ids = message.get("ids", [])
        if not isinstance(raw_ids, list) or not all(
            isinstance(i, str) for i in raw_ids
        ):
            return {"kind": "error", "seq": seq, "message": "'ids' must be strings"}
        snapshot = self.pipeline.current_snapshot
        known = snapshot.positions.keys() if snapshot is not None else set()
        kept = [pid for pid in raw_ids if pid in known]
        if mode == "selected-points" and not kept:
            return {
                "kind": "error",
                "seq": seq,
                "message": "selected-points tracking needs at least one known id",
            }
        session.mode = mode
        session.ids = frozenset(kept)
        # Re-deliver the current frame so the focus change applies now.
        if snapshot is not None:
            base_dict = snapshot_to_dict(snapshot)
            base_json = json.dumps(base_dict, sort_keys=True, separators=(",", ":"))
            session.deliver(self._payload(session, snapshot, base_dict, base_json))
        return {"kind": "ack", "seq": seq, "mode": mode, "ids": sorted(kept)}


def create_app(service: StreamService, source=None) -> FastAPI:
    """Wire the service into a FastAPI app; ``source`` is an optional
    coroutine function started for the app's lifetime."""

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(source()) if source is not None else None
        try:
            yield
        finally:
            if task is not None:
                task.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await task

    app = FastAPI(lifespan=lifespan)
    app.state.service = service

    @app.get("/healthz")
    async def healthz():
        return {
            "seq": service.pipeline.seq,
            "stored_points": service.pipeline.stored_count,
        }

    @app.websocket("/stream")
    async def stream(websocket: WebSocket):
        await websocket.accept()
        session = Session(websocket, asyncio.get_running_loop())
        service.sessions.add(session)
        greeting = service.joining_payload(session)
        if greeting is not None:
            await websocket.send_text(greeting)

        async def sender():
            while True:
                await session.fresh.wait()
                session.fresh.clear()
                payload = session.latest
                if payload is not None:
                    await websocket.send_text(payload)

        send_task = asyncio.create_task(sender())
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    message = json.loads(text)
                except json.JSONDecodeError:
                    await websocket.send_text(
                        json.dumps(
                            {"kind": "error", "seq": 0, "message": "not valid JSON"}
                        )
                    )
                    continue
                if not isinstance(message, dict) or message.get("kind") != "select":
                    await websocket.send_text(
                        json.dumps(
                            {
                                "kind": "error",
                                "seq": message.get("seq", 0)
                                if isinstance(message, dict)
                                else 0,
                                "message": "expected a select message",
                            }
                        )
                    )
                    continue
                reply = service.handle_select(session, message)
                await websocket.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await send_task
            service.sessions.discard(session)

    return app


async def replay_source(service: StreamService, path: str, rate: float = 0.0):
    """Feed an NDJSON event file, optionally paced to ``rate`` events/s."""
    delay = 1.0 / rate if rate > 0 else 0.0
    with open(path, encoding="utf-8") as stream:
        for lineno, line in enumerate(stream, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                service.ingest(parse_event(line))
            except (EventFormatError, EventRejected) as exc:
                log.warning("line %d: %s", lineno, exc)
            if delay:
                await asyncio.sleep(delay)
            else:
                await asyncio.sleep(0)
    log.info("replay finished after %d lines", lineno)


async def socket_source(service: StreamService, host: str, port: int):
    """Feed events from a line-oriented TCP connection."""
    reader, _ = await asyncio.open_connection(host, port)
    lineno = 0
    while True:
        raw = await reader.readline()
        if not raw:
            break
        lineno += 1
        line = raw.decode("utf-8", errors="replace").strip()
        if not line:
            continue
        try:
            service.ingest(parse_event(line))
        except (EventFormatError, EventRejected) as exc:
            log.warning("line %d: %s", lineno, exc)
        await asyncio.sleep(0)
    log.info("feed closed after %d lines", lineno)


def _env(name: str, default=None):
    return os.environ.get(f"STREAMPCA_{name}", default)


def build_parser() -> argparse.ArgumentParser:
    """Flags, with STREAMPCA_* environment variables as fallbacks."""
    parser = argparse.ArgumentParser(
        prog="streampca-server",
        description="Serve layout snapshots over WebSocket.",
    )
    parser.add_argument("--host", default=_env("HOST", "127.0.0.1"))
    parser.add_argument("--port", type=int, default=int(_env("PORT", "8000")))
    source = parser.add_mutually_exclusive_group()
    source.add_argument(
        "--input", default=_env("INPUT"), help="NDJSON event file to replay"
    )
    source.add_argument(
        "--connect",
        default=_env("CONNECT"),
        metavar="HOST:PORT",
        help="line-oriented TCP event feed",
    )
    parser.add_argument(
        "--rate",
        type=float,
        default=float(_env("RATE", "0")),
        help="replay pace in events/s (0 = flat out)",
    )
    parser.add_argument("--dims", type=int, default=_env("DIMS"))
    parser.add_argument("--components", type=int, default=int(_env("COMPONENTS", "2")))
    parser.add_argument("--batch", type=int, default=int(_env("BATCH", "2")))
    parser.add_argument("--forget", type=float, default=float(_env("FORGET", "1.0")))
    parser.add_argument("--seed", type=int, default=int(_env("SEED", "0")))
    parser.add_argument(
        "--coalesce-window",
        type=float,
        default=float(_env("COALESCE_WINDOW", "0")),
        help="merge partial updates closer than this many stream seconds",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    import uvicorn

    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dims is None:
        parser.error("--dims (or STREAMPCA_DIMS) is required")
    if bool(args.input) == bool(args.connect):
        parser.error("exactly one of --input / --connect is required")
    args.dims = int(args.dims)
    config = PipelineConfig(
        dims=args.dims,
        n_components=args.components,
        batch_size=args.batch,
        forget=args.forget,
        seed=args.seed,
        coalesce_window=args.coalesce_window,
    )
    service = StreamService(Pipeline(config))
    if args.input:
        def source():
            return replay_source(service, args.input, args.rate)
    else:
        host, _, port = args.connect.rpartition(":")
        if not host or not port.isdigit():
            print("--connect expects HOST:PORT", file=sys.stderr)
            return 2
        def source():
            return socket_source(service, host, int(port))
    app = create_app(service, source)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
