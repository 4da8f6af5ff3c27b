"""Synthetic streams for demos, benchmarks and statistical tests.

The clustered generator plants points around latent 2-d cluster centers
and lifts them into D dimensions through a random linear map plus noise,
so the data has real principal structure: early features already carry
signal, which is what makes partial placement informative.  The
progressive scheduler then replays such data the way a slow feed would:
a handful of complete points to boot the display, then points whose
features arrive one by one.
"""

from __future__ import annotations

import numpy as np

from .pipeline import StreamEvent


def uniform_points(n: int, dims: int, seed: int = 0) -> np.ndarray:
    """Uniform [-1, 1] points, the benchmark's data model."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(n, dims))


def clustered_points(
    n: int,
    dims: int,
    n_clusters: int = 3,
    noise: float = 0.08,
    seed: int = 0,
) -> tuple[np.ndarray, list[str]]:
    """Latent 2-d clusters lifted to ``dims`` features; returns (values, groups)."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-2.0, 2.0, size=(n_clusters, 2))
    lift = rng.normal(size=(2, dims))
    labels = rng.integers(0, n_clusters, size=n)
    latent = centers[labels] + rng.normal(scale=0.35, size=(n, 2))
    values = latent @ lift + rng.normal(scale=noise, size=(n, dims))
    groups = [f"c{label}" for label in labels]
    return values, groups


def progressive_events(
    values: np.ndarray,
    groups: list[str] | None = None,
    boot: int = 4,
    pair_size: int = 2,
    id_prefix: str = "p",
    t_step: float = 0.1,
) -> list[StreamEvent]:
    """Replay schedule: ``boot`` complete points, then progressive reveal.

    After boot, points advance in groups of ``pair_size``: the group's
    members take turns revealing one more feature until all are complete,
    so completions arrive together and immediately form a model batch.
    """
    values = np.asarray(values, dtype=float)
    n, dims = values.shape
    if groups is None:
        groups = [None] * n
    if not boot >= pair_size:
        raise ValueError("need at least one full batch of boot points")
    events: list[StreamEvent] = []
    t = 0.0

    def emit(i: int, width: int):
        nonlocal t
        events.append(
            StreamEvent(
                point_id=f"{id_prefix}-{i:04d}",
                values=values[i, :width].copy(),
                t=round(t, 6),
                group=groups[i],
            )
        )
        t += t_step

    for i in range(min(boot, n)):
        emit(i, dims)
    for start in range(boot, n, pair_size):
        members = range(start, min(start + pair_size, n))
        for width in range(1, dims + 1):
            for i in members:
                emit(i, width)
    return events


def iris_events(values: np.ndarray, species: list[str]) -> list[StreamEvent]:
    """One complete event per observation, in dataset order."""
    return [
        StreamEvent(
            point_id=f"iris-{i:03d}",
            values=row.copy(),
            t=float(i),
            group=species[i],
        )
        for i, row in enumerate(np.asarray(values, dtype=float))
    ]
