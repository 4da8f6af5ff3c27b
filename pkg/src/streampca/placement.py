"""Placement of partially observed points into the current 2D layout.

A point whose first l of D features are known cannot go through the full
PCA projection.  Instead, a *sub-layout* is built from the same l-feature
prefix of the stored points; distances between the new point and the
stored points inside that sub-layout act as a proxy for their eventual
distances in the display.  The point is then placed by least squares:

    minimize over (alpha, x):  sum_i (s_i - alpha * ||x - q_i||)^2

where s_i are the sub-layout distances (in prefix units), q_i the
displayed positions of the stored points, and alpha a free scale bridging
the two spaces.  The problem is non-convex, so it is optimized
with Adadelta from a distance-weighted initial guess, keeping the best
iterate seen.  ``alpha = 0`` (objective = sum s_i^2) is always feasible,
which bounds the returned residual and hence the strain statistic later.

Sub-layouts of large stored sets use a seeded randomized range-finder
instead of a full SVD; the pipeline additionally caches sub-layouts per
(prefix length, model epoch) so bursts of same-width events pay once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adadelta import Adadelta

# Above this (rows * cols * min(rows, cols)) flop estimate the sub-layout
# SVD switches to the randomized range-finder.
_EXACT_SVD_FLOPS = 1e8
_OVERSAMPLE = 8
_POWER_ITERATIONS = 1

# Optimizer defaults: iteration cap and relative-improvement stop.
MAX_ITERATIONS = 1000
RELATIVE_TOLERANCE = 1e-9
# a post-stall optimizer reset must earn at least this much relative
# improvement in its first window or the search ends
_RESTART_PAYOFF = 1e-6
_STALL_WINDOW = 10


@dataclass(frozen=True)
class SubLayout:
    """PCA layout of the stored points restricted to their first l features."""

    mean: np.ndarray
    basis: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        for arr in (self.mean, self.basis, self.positions):
            arr.setflags(write=False)

    @property
    def width(self) -> int:
        return self.mean.shape[0]

    def place(self, values: np.ndarray) -> np.ndarray:
        """Project an l-wide value prefix into this sub-layout."""
        vals = np.asarray(values, dtype=float)
        if vals.shape != (self.width,):
            raise ValueError(
                f"expected {self.width} values, got shape {vals.shape}"
            )
        return (vals - self.mean) @ self.basis

    def distances_from(self, values: np.ndarray) -> np.ndarray:
        """Sub-layout distances from a value prefix to every stored point."""
        return np.linalg.norm(self.place(values) - self.positions, axis=1)


def _top_right_singular_vectors(centered: np.ndarray, k: int, rng) -> np.ndarray:
    """First k right singular vectors, randomized when the exact SVD is big."""
    n, width = centered.shape
    r = min(n, width)
    k = min(k, r)
    if float(n) * width * r <= _EXACT_SVD_FLOPS or r <= k + _OVERSAMPLE:
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        return vt[:k].T
    if rng is None:
        rng = np.random.default_rng(0)
    sketch = min(r, k + _OVERSAMPLE)
    probe = rng.standard_normal((width, sketch))
    y = centered @ probe
    for _ in range(_POWER_ITERATIONS):
        y, _ = np.linalg.qr(centered @ (centered.T @ y))
    q, _ = np.linalg.qr(y)
    _, _, vt = np.linalg.svd(q.T @ centered, full_matrices=False)
    return vt[:k].T


def build_sub_layout(
    stored: np.ndarray, width: int, n_components: int = 2, rng=None
) -> SubLayout:
    """Sub-layout of ``stored[:, :width]`` with up to ``n_components`` axes.

    When the prefix offers fewer directions than requested (width or rank
    too small) the layout keeps what exists and pads projections with a
    zero coordinate so downstream distances stay well defined.
    """
    pts = np.asarray(stored, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("sub-layout needs at least 2 stored points")
    if not 1 <= width <= pts.shape[1]:
        raise ValueError(f"prefix width must be in [1, {pts.shape[1]}], got {width}")
    prefix = pts[:, :width]
    mean = prefix.mean(axis=0)
    centered = prefix - mean
    basis = _top_right_singular_vectors(centered, n_components, rng)
    if basis.shape[1] < n_components:
        basis = np.hstack(
            [basis, np.zeros((width, n_components - basis.shape[1]))]
        )
    return SubLayout(mean=mean, basis=basis, positions=centered @ basis)


@dataclass(frozen=True)
class DistanceProfile:
    """Target distances s_i and display anchors q_i for one placement."""

    distances: np.ndarray
    anchors: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.distances, float)
        q = np.asarray(self.anchors, float)
        if s.ndim != 1 or q.ndim != 2 or s.shape[0] != q.shape[0]:
            raise ValueError(
                f"profile shapes disagree: {s.shape} distances, {q.shape} anchors"
            )
        if s.shape[0] < 1:
            raise ValueError("profile needs at least one anchor")
        if np.any(s < 0.0) or not np.all(np.isfinite(s)) or not np.all(np.isfinite(q)):
            raise ValueError("distances must be finite and non-negative")
        object.__setattr__(self, "distances", s)
        object.__setattr__(self, "anchors", q)
        s.setflags(write=False)
        q.setflags(write=False)


@dataclass(frozen=True)
class EstimatedPlacement:
    """Result of one placement: position, scale, residual and strain."""

    position: np.ndarray
    alpha: float
    residual: float
    strain: float
    underdetermined: bool
    iterations: int


def placement_objective(alpha: float, x: np.ndarray, profile: DistanceProfile) -> float:
    """sum_i (s_i - alpha * ||x - q_i||)^2."""
    d = np.linalg.norm(x - profile.anchors, axis=1)
    r = profile.distances - alpha * d
    return float(r @ r)


def placement_gradient(alpha, x, profile):
    """Analytic gradient of the objective in (alpha, x).

    Where x coincides with an anchor the distance term is non-smooth; that
    anchor contributes zero to the position gradient (a valid subgradient).
    """
    _, g_alpha, g_x = _value_and_gradient(alpha, x, profile)
    return g_alpha, g_x


def _value_and_gradient(alpha, x, profile):
    """Objective and gradient in one pass over the anchors.

    This sits in the hot loop at n up to 10k anchors, so it avoids
    temporaries where it can.
    """
    diff = x - profile.anchors
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    r = d * -alpha
    r += profile.distances
    value = float(r @ r)
    g_alpha = -2.0 * float(r @ d)
    if d.min() > 0.0:
        w = np.divide(r, d, out=r)
    else:
        # x sits exactly on an anchor; that term's direction is undefined
        # and a zero contribution is a valid subgradient
        w = np.where(d > 0.0, r / np.where(d > 0.0, d, 1.0), 0.0)
    g_x = -2.0 * alpha * (w @ diff)
    return value, g_alpha, g_x


def _initial_guess(profile: DistanceProfile) -> np.ndarray:
    """Inverse-distance-weighted anchor mean: near anchors pull harder."""
    s = profile.distances
    eps = 1e-9 * max(float(s.max()), 1.0)
    w = 1.0 / (s + eps)
    return (w[:, None] * profile.anchors).sum(axis=0) / w.sum()


def estimate(
    profile: DistanceProfile,
    init: tuple[float, np.ndarray] | None = None,
    max_iterations: int = MAX_ITERATIONS,
) -> EstimatedPlacement:
    """Place one point against a distance profile.

    ``init`` warm-starts from a previous placement of the same point.  The
    returned residual never exceeds sum s_i^2 because alpha = 0 achieves
    exactly that; if the optimizer ends above it, alpha = 0 wins instead.
    """
    s = profile.distances
    q = profile.anchors
    n, k = q.shape
    s_sq = float(s @ s)
    underdetermined = n < k + 1

    if s_sq == 0.0:
        # All anchors claim distance zero: sit on the first one, done.
        return EstimatedPlacement(
            position=q[0].copy(),
            alpha=1.0,
            residual=0.0,
            strain=0.0,
            underdetermined=underdetermined,
            iterations=0,
        )

    if init is not None:
        alpha = float(init[0])
        x = np.asarray(init[1], dtype=float).copy()
        # the objective is an exact quadratic in alpha at fixed x, so snap
        # alpha there first; a warm start then only has to move x, which
        # keeps re-estimates still when growth merely rescales distances
        d0 = np.linalg.norm(x - q, axis=1)
        denom0 = float(d0 @ d0)
        if denom0 > 0.0:
            alpha = float(d0 @ s) / denom0
    else:
        alpha = 1.0
        x = _initial_guess(profile)

    optimizer = Adadelta(1 + k)
    best_value = placement_objective(alpha, x, profile)
    best_alpha, best_x = alpha, x.copy()
    window_anchor = best_value
    iterations = 0
    restarted = False

    for iterations in range(1, max_iterations + 1):
        value, g_alpha, g_x = _value_and_gradient(alpha, x, profile)
        if value < best_value:
            best_value = value
            best_alpha = alpha
            best_x = x.copy()
        delta = optimizer.step(np.concatenate(([g_alpha], g_x)))
        alpha += delta[0]
        x = x + delta[1:]
        if iterations % _STALL_WINDOW == 0:
            improvement = window_anchor - best_value
            floor = max(window_anchor, 1e-300)
            if improvement < RELATIVE_TOLERANCE * floor:
                if restarted:
                    break
                # Adadelta never anneals its step size, so near a minimum it
                # settles into an overshooting cycle around the solution.
                # Jumping back to the best iterate with cleared accumulators
                # breaks the cycle; if the next window still brings nothing,
                # we are done.
                alpha, x = best_alpha, best_x.copy()
                optimizer = Adadelta(1 + k)
                restarted = True
            elif restarted and improvement < _RESTART_PAYOFF * floor:
                # the reset bought only dust: stop before burning the budget
                break
            else:
                restarted = False
            window_anchor = best_value
    value = placement_objective(alpha, x, profile)
    if value < best_value:
        best_value = value
        best_alpha = alpha
        best_x = x.copy()

    # The objective is an exact least-squares problem in alpha alone, so a
    # closed-form refresh at the best position can only improve things.
    d = np.linalg.norm(best_x - profile.anchors, axis=1)
    denom = float(d @ d)
    if denom > 0.0:
        alpha_star = float(d @ s) / denom
        refreshed = placement_objective(alpha_star, best_x, profile)
        if refreshed < best_value:
            best_value = refreshed
            best_alpha = alpha_star

    if best_value > s_sq:
        best_alpha, best_value = 0.0, s_sq
    strain = min(1.0, np.sqrt(best_value / s_sq))
    return EstimatedPlacement(
        position=best_x,
        alpha=best_alpha,
        residual=best_value,
        strain=float(strain),
        underdetermined=underdetermined,
        iterations=iterations,
    )


@dataclass
class PlacementRecord:
    """One placement of one partial point at prefix length l.

    Keeps what the error audit at completion time needs: which anchors the
    point was placed against and the distances the placement implied, plus
    the uncertainty statistics shown for this l.
    """

    width: int
    position: np.ndarray
    alpha: float
    residual: float
    strain: float
    loading_gap: float = 0.0
    combined: float = 0.0
    beta: float = 0.5
    anchor_ids: tuple[str, ...] = ()
    anchor_distances: np.ndarray | None = None


@dataclass
class TrackedPartial:
    """Everything known about one in-flight partially observed point."""

    point_id: str
    values: np.ndarray
    group: str | None = None
    first_seen: float = 0.0
    records: dict[int, PlacementRecord] = field(default_factory=dict)
    trail: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def width(self) -> int:
        return self.values.shape[0]

    @property
    def latest(self) -> PlacementRecord | None:
        if not self.records:
            return None
        return self.records[max(self.records)]


class PartialRegistry:
    """Tracks in-flight partial points and validates how they grow.

    Per id, the revealed width l may only grow, and every event must
    restate the earlier values exactly (prefix extension).  Absorbed ids
    are remembered so that stale retransmissions are rejected rather than
    silently resurrecting a completed point.
    """

    def __init__(self, dims: int, trail_length: int = 8):
        self.dims = dims
        self.trail_length = trail_length
        self._tracked: dict[str, TrackedPartial] = {}
        self._absorbed: set[str] = set()

    def __contains__(self, point_id: str) -> bool:
        return point_id in self._tracked

    def __len__(self) -> int:
        return len(self._tracked)

    def ids(self) -> list[str]:
        return list(self._tracked)

    def get(self, point_id: str) -> TrackedPartial:
        return self._tracked[point_id]

    def tracked(self) -> list[TrackedPartial]:
        return list(self._tracked.values())

    def mark_absorbed(self, point_id: str):
        self._absorbed.add(point_id)

    def is_absorbed(self, point_id: str) -> bool:
        return point_id in self._absorbed

    def observe(self, point_id: str, values: np.ndarray, group=None, t=0.0) -> str:
        """Record an event; returns "new", "grown" or "unchanged"."""
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1 or not 1 <= vals.shape[0] <= self.dims:
            raise ValueError(
                f"values must be a prefix of width 1..{self.dims}, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("values contain non-finite entries")
        if point_id in self._absorbed:
            raise ValueError(f"point {point_id!r} was already absorbed")

        tracked = self._tracked.get(point_id)
        if tracked is None:
            self._tracked[point_id] = TrackedPartial(
                point_id=point_id, values=vals.copy(), group=group, first_seen=t
            )
            return "new"
        if vals.shape[0] < tracked.width:
            raise ValueError(
                f"point {point_id!r} shrank from {tracked.width} to {vals.shape[0]} values"
            )
        if not np.array_equal(vals[: tracked.width], tracked.values):
            raise ValueError(
                f"point {point_id!r} changed already revealed values"
            )
        if vals.shape[0] == tracked.width:
            return "unchanged"
        tracked.values = vals.copy()
        return "grown"

    def reestimate_on_growth(
        self,
        point_id: str,
        profile: DistanceProfile,
        anchor_ids: tuple[str, ...],
        max_iterations: int = MAX_ITERATIONS,
    ) -> EstimatedPlacement:
        """Re-place a tracked point after its width grew, warm-starting.

        Storing the result under the current width makes the call
        idempotent: repeating it for a width that already has a record
        just returns that record's placement.
        """
        tracked = self._tracked[point_id]
        width = tracked.width
        existing = tracked.records.get(width)
        if existing is not None:
            return EstimatedPlacement(
                position=existing.position,
                alpha=existing.alpha,
                residual=existing.residual,
                strain=existing.strain,
                underdetermined=False,
                iterations=0,
            )
        warm = None
        latest = tracked.latest
        if latest is not None:
            warm = (latest.alpha, latest.position)
        placed = estimate(profile, init=warm, max_iterations=max_iterations)
        tracked.records[width] = PlacementRecord(
            width=width,
            position=placed.position,
            alpha=placed.alpha,
            residual=placed.residual,
            strain=placed.strain,
            anchor_ids=anchor_ids,
            anchor_distances=np.linalg.norm(
                placed.position - profile.anchors, axis=1
            ),
        )
        return placed

    def append_trail(self, point_id: str, position: np.ndarray, combined: float):
        tracked = self._tracked[point_id]
        tracked.trail.append((float(position[0]), float(position[1]), float(combined)))
        if len(tracked.trail) > self.trail_length:
            del tracked.trail[: len(tracked.trail) - self.trail_length]

    def complete(self, point_id: str) -> TrackedPartial:
        """Remove a point that has been absorbed into the model."""
        tracked = self._tracked.pop(point_id)
        self._absorbed.add(point_id)
        return tracked

    def restore(self, tracked: TrackedPartial):
        """Undo a completion (used when an update frame aborts midway)."""
        self._tracked[tracked.point_id] = tracked
        self._absorbed.discard(tracked.point_id)

    def unmark_absorbed(self, point_id: str):
        self._absorbed.discard(point_id)
