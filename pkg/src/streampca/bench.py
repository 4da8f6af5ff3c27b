"""Latency benchmark over a (dims, stored-points) grid.

For each grid cell the pipeline is seeded with n uniform [-1, 1] points,
then timed on its two paths in steady state:

* full path: feed one batch of complete points, read the a1 (model update
  and projection), a2 (alignment) and a3 (bookkeeping) stage times from
  the resulting snapshot;
* partial path: feed one event revealing half the features of a fresh
  point, read b1 (sub-layout and placement) and b2 (uncertainty).

Each path runs ``reps`` times on fresh ids after one untimed warmup
repetition.  Means, medians and maxima come straight from the pipeline's
own stage stats, so the benchmark measures exactly what the server would
spend per update.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import mean, median

import numpy as np

from .pipeline import Pipeline, PipelineConfig, StreamEvent
from .synthetic import uniform_points

STAGE_BUDGET_MS = {"full": 100.0, "partial": 120.0}
FULL_STAGES = ("a1_ms", "a2_ms", "a3_ms")
PARTIAL_STAGES = ("b1_ms", "b2_ms")


@dataclass
class BenchCell:
    """Timings for one (dims, n) grid cell; stage -> list of ms samples."""

    dims: int
    n: int
    samples: dict[str, list[float]] = field(default_factory=dict)

    def add(self, stats: dict, stages):
        for stage in stages:
            self.samples.setdefault(stage, []).append(float(stats[stage]))

    def total(self, stages) -> list[float]:
        """Per-rep path totals (stage times of one rep summed)."""
        rows = [self.samples[stage] for stage in stages]
        return [sum(streak) for streak in zip(*rows)]

    def summary(self) -> dict:
        out = {"dims": self.dims, "n": self.n, "stages": {}}
        for stage, vals in self.samples.items():
            out["stages"][stage] = {
                "mean_ms": mean(vals),
                "median_ms": median(vals),
                "max_ms": max(vals),
            }
        for path, stages in (("full", FULL_STAGES), ("partial", PARTIAL_STAGES)):
            totals = self.total(stages)
            out[path] = {
                "mean_ms": mean(totals),
                "median_ms": median(totals),
                "max_ms": max(totals),
            }
        return out


def run_cell(
    dims: int,
    n: int,
    reps: int = 10,
    batch_size: int = 2,
    n_components: int = 2,
    seed: int = 0,
) -> BenchCell:
    """Benchmark one grid cell; see the module docstring for the protocol."""
    config = PipelineConfig(
        dims=dims,
        n_components=n_components,
        batch_size=batch_size,
        seed=seed,
    )
    pipe = Pipeline(config)
    rng = np.random.default_rng(seed)
    base = uniform_points(n, dims, seed=seed)
    pipe.bootstrap(base, [f"s-{i:06d}" for i in range(n)])

    cell = BenchCell(dims=dims, n=n)
    partial_width = max(1, dims // 2)
    serial = 0

    def full_rep() -> dict:
        nonlocal serial
        snap = None
        for _ in range(batch_size):
            values = rng.uniform(-1.0, 1.0, size=dims)
            snap = pipe.ingest(
                StreamEvent(point_id=f"f-{serial:06d}", values=values)
            )
            serial += 1
        assert snap is not None and snap.stats["path"] == "full"
        return snap.stats

    def partial_rep() -> dict:
        nonlocal serial
        values = rng.uniform(-1.0, 1.0, size=partial_width)
        snap = pipe.ingest(
            StreamEvent(point_id=f"q-{serial:06d}", values=values)
        )
        serial += 1
        assert snap is not None and snap.stats["path"] == "partial"
        return snap.stats

    full_rep()  # warmup, untimed
    for _ in range(reps):
        cell.add(full_rep(), FULL_STAGES)
    partial_rep()  # warmup pays the sub-layout build for this width
    for _ in range(reps):
        cell.add(partial_rep(), PARTIAL_STAGES)
    return cell


def run_grid(
    dims_list,
    n_list,
    reps: int = 10,
    batch_size: int = 2,
    n_components: int = 2,
    seed: int = 0,
) -> list[BenchCell]:
    return [
        run_cell(dims, n, reps, batch_size, n_components, seed)
        for dims in dims_list
        for n in n_list
    ]


def format_report(cells: list[BenchCell]) -> str:
    """Human-readable grid report with budget verdicts."""
    lines = [
        f"{'dims':>6} {'n':>8}   "
        f"{'full med/mean/max (ms)':>26}   {'partial med/mean/max (ms)':>26}"
    ]
    for cell in cells:
        s = cell.summary()
        full = s["full"]
        part = s["partial"]
        full_ok = "ok" if full["median_ms"] <= STAGE_BUDGET_MS["full"] else "OVER"
        part_ok = "ok" if part["median_ms"] <= STAGE_BUDGET_MS["partial"] else "OVER"
        lines.append(
            f"{cell.dims:>6} {cell.n:>8}   "
            f"{full['median_ms']:>8.2f}/{full['mean_ms']:>7.2f}/{full['max_ms']:>7.2f}"
            f" {full_ok:>4}   "
            f"{part['median_ms']:>8.2f}/{part['mean_ms']:>7.2f}/{part['max_ms']:>7.2f}"
            f" {part_ok:>4}"
        )
    return "\n".join(lines)
