"""Streaming orchestration: events in, layout snapshots out.

The pipeline owns all mutable state: the incremental PCA model, the stored
(fully observed) points, the cumulative display transform, the registry of
in-flight partial points, and the adaptive uncertainty blend.  Ingesting
one event produces at most one snapshot, via one of two paths:

* full path, when enough completed points buffered up to fill a batch:
  model update + projection of every stored point (a1), similarity
  alignment of the new layout onto the previous display (a2), then
  completion audits, the blend-weight step and retention (a3);
* partial path, for a grown partial point: sub-layout build and placement
  (b1), then its uncertainty statistics (b2).

Per-stage wall times are reported in each snapshot's ``stats`` so that the
server, the replay tool and the benchmark all read one instrumentation
point.  Snapshots are immutable and safe to hand to other threads; all
mutation happens inside ``ingest`` on the caller's thread.
"""

from __future__ import annotations

import math
import logging
from dataclasses import dataclass, field
from time import perf_counter

import numpy as np

from . import alignment, ipca
from .alignment import SimilarityTransform
from .placement import (
    MAX_ITERATIONS,
    DistanceProfile,
    PartialRegistry,
    SubLayout,
    build_sub_layout,
)
from .uncertainty import (
    BETA_INITIAL,
    CompletionProfile,
    UncertaintyRecord,
    UncertaintyState,
    combined_uncertainty,
    loading_uncertainty,
    observed_error,
    update_beta,
)

log = logging.getLogger(__name__)

_BOOTSTRAP_CHUNK = 512


class EventRejected(ValueError):
    """Raised for events that violate the stream contract."""

    def __init__(self, point_id: str, reason: str):
        super().__init__(f"event for {point_id!r} rejected: {reason}")
        self.point_id = point_id
        self.reason = reason


@dataclass(frozen=True)
class StreamEvent:
    """One observation: the first ``len(values)`` features of a point."""

    point_id: str
    values: np.ndarray
    t: float = 0.0
    group: str | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError(f"values must be 1-d, got shape {vals.shape}")
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)

    @property
    def width(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class PipelineConfig:
    """Tuning knobs for one pipeline instance.

    ``retention`` is "keep-all" (stored points accumulate forever) or
    "match-forgetting" (stored points are capped near the model's
    effective history m / (1 - f), oldest dropped first).  ``anchor_cap``
    optionally subsamples placement anchors above that count to bound the
    cost of a single placement on very large displays.
    """

    dims: int
    n_components: int = 2
    batch_size: int = 2
    forget: float = 1.0
    retention: str = "keep-all"
    align: bool = True
    coalesce_window: float = 0.0
    trail_length: int = 8
    stage_duration_ms: float = 300.0
    anchor_cap: int | None = None
    max_iterations: int = MAX_ITERATIONS
    seed: int = 0

    def __post_init__(self):
        if self.dims < 1:
            raise ValueError("dims must be >= 1")
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")
        if not 0.0 < self.forget <= 1.0:
            raise ValueError(f"forget must be in (0, 1], got {self.forget}")
        if self.retention not in ("keep-all", "match-forgetting"):
            raise ValueError(f"unknown retention mode {self.retention!r}")
        if self.coalesce_window < 0.0:
            raise ValueError("coalesce_window must be >= 0")
        if self.anchor_cap is not None and self.anchor_cap < 2:
            raise ValueError("anchor_cap must be >= 2")

    @property
    def stored_cap(self) -> float:
        """Stored-point ceiling implied by the retention mode."""
        if self.retention == "keep-all" or self.forget == 1.0:
            return math.inf
        # nudge below the exact ratio so rounding dust cannot push an
        # integral effective history over the next ceiling
        return math.ceil(self.batch_size / (1.0 - self.forget) - 1e-9)


@dataclass(frozen=True)
class CompletionSample:
    """Displayed uncertainty vs. observed error for one (point, width)."""

    point_id: str
    width: int
    combined: float
    error: float


@dataclass(frozen=True)
class LayoutSnapshot:
    """Immutable view of the display after one update.

    ``positions`` covers stored points and placed partial points alike;
    ``uncertainties`` and ``trails`` only partial points.  ``transform``
    is the cumulative similarity transform from raw projection space to
    display space.  ``stats`` carries the per-stage timings of the update
    that produced this snapshot.
    """

    seq: int
    t: float
    positions: dict[str, tuple[float, float]]
    uncertainties: dict[str, UncertaintyRecord]
    trails: dict[str, tuple[tuple[float, float, float], ...]]
    groups: dict[str, str]
    transform: SimilarityTransform
    new_ids: tuple[str, ...]
    removed_ids: tuple[str, ...]
    completions: tuple[CompletionSample, ...]
    beta: float
    stored: int
    stats: dict[str, float | str] = field(default_factory=dict)


class Pipeline:
    """Single-writer streaming state machine; see the module docstring."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self._model = ipca.PcaModel.empty(
            config.dims, config.n_components, config.forget
        )
        self._rng = np.random.default_rng(config.seed)
        self._registry = PartialRegistry(config.dims, config.trail_length)
        self._uncertainty = UncertaintyState(beta=BETA_INITIAL)

        # Stored fully observed points, in arrival order.
        self._values = np.empty((0, config.dims))
        self._ids: list[str] = []
        self._row_of: dict[str, int] = {}
        self._groups: dict[str, str] = {}
        self._display = np.zeros((0, config.n_components))
        self._transform = SimilarityTransform.identity(config.n_components)

        # Completed points waiting for a full batch, insertion ordered.
        self._buffer: dict[str, tuple[np.ndarray, str | None]] = {}

        self._sub_cache: dict[int, tuple[int, SubLayout]] = {}
        self._epoch = 0
        self._seq = 0
        self._last_partial_emit = -math.inf
        self._current: LayoutSnapshot | None = None
        self._warned_anchor_cap = False

    # ------------------------------------------------------------------ #
    # public surface

    @property
    def seq(self) -> int:
        return self._seq

    @property
    def beta(self) -> float:
        return self._uncertainty.beta

    @property
    def stored_count(self) -> int:
        return len(self._ids)

    @property
    def model(self) -> ipca.PcaModel:
        return self._model

    @property
    def current_snapshot(self) -> LayoutSnapshot | None:
        return self._current

    def bootstrap(
        self,
        points: np.ndarray,
        ids: list[str],
        groups: list[str] | None = None,
        t: float = 0.0,
    ) -> LayoutSnapshot:
        """Seed the pipeline with a block of complete points, one snapshot.

        Equivalent to streaming the points as full events but without the
        per-batch projection and alignment work, which makes large cold
        starts cheap.
        """
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.config.dims:
            raise ValueError(f"bootstrap points must be (n, {self.config.dims})")
        if pts.shape[0] != len(ids) or len(set(ids)) != len(ids):
            raise ValueError("bootstrap needs one unique id per row")
        if pts.shape[0] < self.config.batch_size:
            raise ValueError("bootstrap needs at least one full batch")
        for pid in ids:
            if pid in self._row_of or self._registry.is_absorbed(pid):
                raise ValueError(f"point {pid!r} already known")

        t0 = perf_counter()
        n = pts.shape[0]
        bounds = list(range(0, n, _BOOTSTRAP_CHUNK)) + [n]
        if len(bounds) > 2 and bounds[-1] - bounds[-2] == 1:
            # A lone trailing row cannot form a batch on its own; merge it
            # into the previous chunk.
            bounds.pop(-2)
        for lo, hi in zip(bounds, bounds[1:]):
            self._model = ipca.update(self._model, pts[lo:hi])
        self._epoch += 1
        self._append_stored(ids, pts, groups)
        raw = ipca.project(self._model, self._values[: len(self._ids)])
        self._transform = SimilarityTransform.identity(self.config.n_components)
        self._display = raw
        for pid in ids:
            self._registry.mark_absorbed(pid)
        elapsed = (perf_counter() - t0) * 1000.0
        placed = self._flush_parked()
        return self._emit(
            t=t,
            new_ids=tuple(ids) + placed,
            removed_ids=(),
            completions=(),
            stats={"path": "bootstrap", "total_ms": elapsed},
        )

    def ingest(self, event: StreamEvent) -> LayoutSnapshot | None:
        """Feed one event; returns a snapshot when the display changed."""
        self._validate(event)
        pid = event.point_id

        if pid in self._buffer:
            buffered, _ = self._buffer[pid]
            if event.width == buffered.shape[0] and np.array_equal(
                event.values, buffered
            ):
                return None
            raise EventRejected(pid, "point already complete and awaiting batch")

        try:
            status = self._registry.observe(
                pid, event.values, group=event.group, t=event.t
            )
        except ValueError as exc:
            raise EventRejected(pid, str(exc)) from exc
        if event.group is not None:
            self._groups[pid] = event.group

        if event.width == self.config.dims:
            return self._on_complete(pid, event.t)
        if status == "unchanged":
            return None
        if len(self._ids) < 2:
            # Not enough anchors yet: the point stays parked in the
            # registry and is placed right after bootstrap.
            return None
        return self._partial_update(pid, event.t, status)

    # ------------------------------------------------------------------ #
    # internals: storage

    def _validate(self, event: StreamEvent):
        if event.width < 1 or event.width > self.config.dims:
            raise EventRejected(
                event.point_id,
                f"width {event.width} outside [1, {self.config.dims}]",
            )
        if not np.all(np.isfinite(event.values)):
            raise EventRejected(event.point_id, "non-finite values")
        if self._registry.is_absorbed(event.point_id):
            raise EventRejected(event.point_id, "point already absorbed")

    def _append_stored(self, ids, pts, groups=None):
        count = len(self._ids)
        needed = count + pts.shape[0]
        if needed > self._values.shape[0]:
            capacity = max(needed, 2 * self._values.shape[0], 64)
            grown = np.empty((capacity, self.config.dims))
            grown[:count] = self._values[:count]
            self._values = grown
        self._values[count:needed] = pts
        for offset, pid in enumerate(ids):
            self._row_of[pid] = count + offset
        self._ids.extend(ids)
        if groups is not None:
            for pid, grp in zip(ids, groups):
                if grp is not None:
                    self._groups[pid] = grp

    def _apply_retention(self) -> tuple[str, ...]:
        cap = self.config.stored_cap
        count = len(self._ids)
        if count <= cap:
            return ()
        drop = int(count - cap)
        removed = tuple(self._ids[:drop])
        self._values[: count - drop] = self._values[drop:count].copy()
        self._display = self._display[drop:]
        self._ids = self._ids[drop:]
        self._row_of = {pid: i for i, pid in enumerate(self._ids)}
        for pid in removed:
            self._groups.pop(pid, None)
        return removed

    # ------------------------------------------------------------------ #
    # internals: full path

    def _on_complete(self, pid: str, t: float) -> LayoutSnapshot | None:
        tracked = self._registry.get(pid)
        timings = None
        if tracked.records and len(self._ids) >= 2:
            # Final placement at full width: gives the l = D strain and
            # the last estimated distances the completion audit compares
            # against the real layout.  Points that arrived complete in a
            # single event have no placement history and skip this.
            timings = self._place_partial(pid, t)
        self._buffer[pid] = (tracked.values.copy(), self._groups.get(pid))
        if len(self._buffer) >= self.config.batch_size:
            return self._full_update(t)
        if timings is not None:
            return self._emit_partial_snapshot(
                pid, t, {"path": "partial", **timings}
            )
        return None

    def _full_update(self, t: float) -> LayoutSnapshot:
        batch_ids = list(self._buffer)
        pts = np.vstack([self._buffer[pid][0] for pid in batch_ids])
        batch_groups = [self._buffer[pid][1] for pid in batch_ids]
        saved_buffer = dict(self._buffer)
        saved = (
            self._model,
            self._epoch,
            self._display,
            self._transform,
            self._uncertainty,
            len(self._ids),
        )
        popped: list = []
        self._buffer.clear()
        try:
            t0 = perf_counter()
            self._model = ipca.update(self._model, pts)
            self._epoch += 1
            prev_count = len(self._ids)
            prev_display = self._display
            self._append_stored(batch_ids, pts, batch_groups)
            raw = ipca.project(self._model, self._values[: len(self._ids)])
            t1 = perf_counter()

            if self.config.align and prev_count >= 1:
                transform = alignment.fit(prev_display, raw[:prev_count])
            else:
                transform = SimilarityTransform.identity(self.config.n_components)
            self._transform = transform
            self._display = transform.apply(raw)
            t2 = perf_counter()

            completions: list[CompletionSample] = []
            profiles: list[CompletionProfile] = []
            for pid in batch_ids:
                if pid not in self._registry:
                    self._registry.mark_absorbed(pid)
                    continue
                tracked = self._registry.complete(pid)
                popped.append(tracked)
                if not tracked.records:
                    continue
                profile = self._audit_completion(pid, tracked)
                if profile is not None:
                    profiles.append(profile)
                    for width in sorted(profile.errors):
                        record = tracked.records[width]
                        completions.append(
                            CompletionSample(
                                point_id=pid,
                                width=width,
                                combined=record.combined,
                                error=profile.errors[width],
                            )
                        )
            if profiles:
                self._uncertainty = update_beta(self._uncertainty, profiles)
            removed = self._apply_retention()
            t3 = perf_counter()
        except Exception:
            # A failed stage aborts the frame: restore every structure the
            # stages touched so the previous snapshot stays current.
            self._buffer = saved_buffer
            (
                self._model,
                self._epoch,
                self._display,
                self._transform,
                self._uncertainty,
                prev_count,
            ) = saved
            del self._ids[prev_count:]
            self._row_of = {pid: i for i, pid in enumerate(self._ids)}
            for pid in batch_ids:
                self._registry.unmark_absorbed(pid)
            for tracked in popped:
                self._registry.restore(tracked)
            raise

        placed = self._flush_parked()
        return self._emit(
            t=t,
            new_ids=tuple(batch_ids) + placed,
            removed_ids=removed,
            completions=tuple(completions),
            stats={
                "path": "full",
                "a1_ms": (t1 - t0) * 1000.0,
                "a2_ms": (t2 - t1) * 1000.0,
                "a3_ms": (t3 - t2) * 1000.0,
            },
        )

    def _audit_completion(self, pid, tracked) -> CompletionProfile | None:
        """Compare each recorded placement against where the point ended up."""
        row = self._row_of.get(pid)
        if row is None:
            return None
        final_pos = self._display[row]
        errors: dict[int, float] = {}
        strains: dict[int, float] = {}
        gaps: dict[int, float] = {}
        for width, record in tracked.records.items():
            anchor_rows = [
                self._row_of[a] for a in record.anchor_ids if a in self._row_of
            ]
            if not anchor_rows:
                continue
            keep = [
                i
                for i, a in enumerate(record.anchor_ids)
                if a in self._row_of
            ]
            sigma = np.linalg.norm(
                final_pos - self._display[anchor_rows], axis=1
            )
            errors[width] = observed_error(sigma, record.anchor_distances[keep])
            strains[width] = record.strain
            gaps[width] = record.loading_gap
        if not errors:
            return None
        return CompletionProfile(
            point_id=pid, strains=strains, loading_gaps=gaps, errors=errors
        )

    def _flush_parked(self) -> tuple[str, ...]:
        """Place partial points that arrived before the display existed."""
        if len(self._ids) < 2:
            return ()
        placed = []
        for tracked in self._registry.tracked():
            if not tracked.records:
                self._place_partial(tracked.point_id, tracked.first_seen)
                placed.append(tracked.point_id)
        return tuple(placed)

    # ------------------------------------------------------------------ #
    # internals: partial path

    def _sub_layout(self, width: int) -> SubLayout:
        cached = self._sub_cache.get(width)
        if cached is not None and cached[0] == self._epoch:
            return cached[1]
        layout = build_sub_layout(
            self._values[: len(self._ids)],
            width,
            self.config.n_components,
            rng=self._rng,
        )
        self._sub_cache[width] = (self._epoch, layout)
        return layout

    def _anchor_rows(self) -> np.ndarray | None:
        """Row indices used as anchors, evenly subsampled above the cap."""
        count = len(self._ids)
        cap = self.config.anchor_cap
        if cap is None or count <= cap:
            return None
        if not self._warned_anchor_cap:
            log.info("subsampling %d stored points to %d anchors", count, cap)
            self._warned_anchor_cap = True
        return np.linspace(0, count - 1, cap).round().astype(int)

    def _place_partial(self, pid: str, t: float):
        """Run stages b1/b2 for one tracked point; returns stage timings."""
        tracked = self._registry.get(pid)
        width = tracked.width

        t0 = perf_counter()
        layout = self._sub_layout(width)
        rows = self._anchor_rows()
        if rows is None:
            anchor_ids = tuple(self._ids)
            distances = layout.distances_from(tracked.values[:width])
            anchors = self._display
        else:
            anchor_ids = tuple(self._ids[i] for i in rows)
            distances = np.linalg.norm(
                layout.place(tracked.values[:width]) - layout.positions[rows],
                axis=1,
            )
            anchors = self._display[rows]
        profile = DistanceProfile(distances=distances, anchors=anchors)
        placed = self._registry.reestimate_on_growth(
            pid, profile, anchor_ids, self.config.max_iterations
        )
        t1 = perf_counter()

        record = tracked.records[width]
        record.loading_gap = loading_uncertainty(
            ipca.pc_loadings(self._model), width
        )
        record.beta = self._uncertainty.beta
        record.combined = combined_uncertainty(
            placed.strain, record.loading_gap, record.beta
        )
        self._registry.append_trail(pid, placed.position, record.combined)
        t2 = perf_counter()
        return {"b1_ms": (t1 - t0) * 1000.0, "b2_ms": (t2 - t1) * 1000.0}

    def _partial_update(self, pid: str, t: float, status: str) -> LayoutSnapshot | None:
        timings = self._place_partial(pid, t)
        window = self.config.coalesce_window
        if (
            window > 0.0
            and status != "new"
            and t - self._last_partial_emit < window
        ):
            # Burst coalescing: keep the state fresh, skip the frame.
            return None
        stats = {"path": "partial", **timings}
        return self._emit_partial_snapshot(pid, t, stats)

    def _emit_partial_snapshot(self, pid, t, stats) -> LayoutSnapshot:
        self._last_partial_emit = t
        tracked = self._registry.get(pid)
        new_ids = (pid,) if len(tracked.records) == 1 else ()
        return self._emit(
            t=t, new_ids=new_ids, removed_ids=(), completions=(), stats=stats
        )

    # ------------------------------------------------------------------ #
    # internals: snapshot assembly

    def _emit(self, t, new_ids, removed_ids, completions, stats) -> LayoutSnapshot:
        count = len(self._ids)
        positions: dict[str, tuple[float, float]] = dict(
            zip(self._ids, map(tuple, self._display[:count].tolist()))
        )
        uncertainties: dict[str, UncertaintyRecord] = {}
        trails: dict[str, tuple] = {}
        for tracked in self._registry.tracked():
            latest = tracked.latest
            if latest is None:
                continue
            positions[tracked.point_id] = (
                float(latest.position[0]),
                float(latest.position[1]),
            )
            uncertainties[tracked.point_id] = UncertaintyRecord(
                point_id=tracked.point_id,
                width=latest.width,
                strain=latest.strain,
                loading_gap=latest.loading_gap,
                combined=latest.combined,
                beta=latest.beta,
            )
            trails[tracked.point_id] = tuple(tracked.trail)
        groups = {pid: grp for pid, grp in self._groups.items() if pid in positions}

        self._seq += 1
        stats = dict(stats)
        stats["n_stored"] = count
        stats["n_partial"] = len(uncertainties)
        snapshot = LayoutSnapshot(
            seq=self._seq,
            t=t,
            positions=positions,
            uncertainties=uncertainties,
            trails=trails,
            groups=groups,
            transform=self._transform,
            new_ids=new_ids,
            removed_ids=removed_ids,
            completions=completions,
            beta=self._uncertainty.beta,
            stored=count,
            stats=stats,
        )
        self._current = snapshot
        return snapshot
