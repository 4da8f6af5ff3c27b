"""Uncertainty statistics for partially observed points.

Two complementary signals are blended into the single value shown to the
viewer.  The *strain* U measures how badly the distance profile had to be
distorted to place the point:

    U = sqrt(residual / sum_i s_i^2)            in [0, 1]

The *loading gap* V measures how much of the principal-component weight
falls outside the revealed feature prefix:

    V = 1 - mean_i ( sum_{j<=l} |w_ij| / sum_j |w_ij| )

with w the loadings of the current model.  The combined value is the
convex blend W = beta * U + (1 - beta) * V.

The blend weight adapts online.  Whenever points complete, their placement
errors against the final layout become observable; the ratio of the
full-width error to the mean strain (rho) and the growth of error with
missing features relative to V (phi) yield a target rho / (rho + phi).
Beta then takes one Adadelta-style step toward the averaged target, which
keeps the adjustment smooth under noisy targets.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import logging
import math

import numpy as np

from .adadelta import DECAY, EPS

log = logging.getLogger(__name__)

BETA_INITIAL = 0.5


def strain_uncertainty(residual: float, distances: np.ndarray) -> float:
    """Normalized placement strain, clipped into [0, 1].

    A profile of all-zero distances carries no distortable information, so
    its strain is 0 by convention.
    """
    s = np.asarray(distances, dtype=float)
    s_sq = float(s @ s)
    if s_sq <= 0.0:
        return 0.0
    if residual < 0.0:
        raise ValueError(f"residual must be non-negative, got {residual}")
    return float(min(1.0, math.sqrt(min(residual / s_sq, 1.0))))


def loading_uncertainty(loadings: np.ndarray, width: int) -> float:
    """Fraction of absolute component weight outside the first ``width`` dims.

    A component whose weights are all zero contributes no gap (its ratio is
    taken as 1, i.e. fully covered) so degenerate trailing components do
    not inflate V.
    """
    w = np.abs(np.asarray(loadings, dtype=float))
    if w.ndim != 2:
        raise ValueError(f"loadings must be 2-d, got shape {w.shape}")
    k, dims = w.shape
    if not 1 <= width <= dims:
        raise ValueError(f"width must be in [1, {dims}], got {width}")
    covered = w[:, :width].sum(axis=1)
    total = w.sum(axis=1)
    ratio = np.ones(k)
    nonzero = total > 0.0
    ratio[nonzero] = covered[nonzero] / total[nonzero]
    return float(min(1.0, max(0.0, 1.0 - ratio.mean())))


def combined_uncertainty(strain: float, loading_gap: float, beta: float) -> float:
    """Convex blend W = beta * U + (1 - beta) * V."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    return beta * strain + (1.0 - beta) * loading_gap


def observed_error(final_distances: np.ndarray, estimated_distances: np.ndarray) -> float:
    """Mean absolute gap between final and estimated anchor distances."""
    sigma = np.asarray(final_distances, dtype=float)
    s_est = np.asarray(estimated_distances, dtype=float)
    if sigma.shape != s_est.shape or sigma.ndim != 1:
        raise ValueError(
            f"distance vectors must match, got {sigma.shape} and {s_est.shape}"
        )
    if sigma.shape[0] == 0:
        raise ValueError("need at least one anchor distance")
    return float(np.abs(sigma - s_est).mean())


@dataclass(frozen=True)
class UncertaintyRecord:
    """Per-point uncertainty as shown for one prefix width."""

    point_id: str
    width: int
    strain: float
    loading_gap: float
    combined: float
    beta: float


@dataclass(frozen=True)
class CompletionProfile:
    """Audit trail of one completed point: per-width U, V and observed e."""

    point_id: str
    strains: dict[int, float]
    loading_gaps: dict[int, float]
    errors: dict[int, float]

    @property
    def final_width(self) -> int:
        return max(self.errors)


@dataclass(frozen=True)
class UncertaintyState:
    """Adaptive blend weight with its Adadelta accumulators."""

    beta: float = BETA_INITIAL
    step: int = 0
    avg_sq_grad: float = 0.0
    avg_sq_step: float = 0.0
    skipped: int = 0


def _completion_target(profile: CompletionProfile) -> float | None:
    """Blend target rho / (rho + phi) for one completed point, if defined.

    rho compares the irreducible full-width error to the mean strain; phi
    compares the error growth over partial widths to the loading gaps.
    Degenerate denominators (no strain, no gap, non-positive rho + phi)
    make the target undefined and the point is skipped.
    """
    widths = sorted(profile.errors)
    final = profile.final_width
    e_final = profile.errors[final]
    # The expectation runs over the full width, treating unrecorded
    # prefixes as zero strain, so sparse histories read as low strain.
    mean_strain = sum(profile.strains.values()) / final
    sum_gap = float(sum(profile.loading_gaps.values()))
    if mean_strain <= 0.0 or sum_gap <= 0.0:
        return None
    rho = e_final / mean_strain
    phi = sum(profile.errors[w] - e_final for w in widths) / sum_gap
    if rho + phi <= 0.0:
        return None
    return min(1.0, max(0.0, rho / (rho + phi)))


def update_beta(
    state: UncertaintyState, completions: list[CompletionProfile]
) -> UncertaintyState:
    """One adaptive step of the blend weight from completed-point audits.

    Targets of all completions in this round are averaged before the step.
    Rounds with no usable completion leave beta untouched (only the skip
    counter moves), so sparse or degenerate streams cannot destabilize it.
    """
    targets = []
    for profile in completions:
        target = _completion_target(profile)
        if target is None:
            log.debug("beta target undefined for %s, skipping", profile.point_id)
        else:
            targets.append(target)
    if not targets:
        return replace(state, skipped=state.skipped + 1)

    target = float(np.mean(targets))
    grad = state.beta - target
    avg_sq_grad = DECAY * state.avg_sq_grad + (1.0 - DECAY) * grad * grad
    delta = -math.sqrt(state.avg_sq_step + EPS) / math.sqrt(avg_sq_grad + EPS) * grad
    avg_sq_step = DECAY * state.avg_sq_step + (1.0 - DECAY) * delta * delta
    beta = min(1.0, max(0.0, state.beta + delta))
    return UncertaintyState(
        beta=beta,
        step=state.step + 1,
        avg_sq_grad=avg_sq_grad,
        avg_sq_step=avg_sq_step,
        skipped=state.skipped,
    )
