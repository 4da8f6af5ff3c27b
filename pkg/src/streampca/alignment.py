"""Similarity-transform alignment between consecutive 2D layouts.

After every PCA update the freshly projected layout can be arbitrarily
rotated, reflected, scaled and shifted relative to what is currently on
screen, because principal components are only defined up to sign and the
mean drifts.  To keep the display stable, the new layout is mapped back
onto the previous one with the orthogonal Procrustes transform extended
with uniform scaling and translation: centroids are matched, the scale is
the ratio of root-mean-square spreads, and the rotation (possibly a
reflection) comes from the SVD of the cross-covariance of the centered
point sets.

If the fitted transform would overlap the paired points worse than the
plain centroid shift does, the fit falls back to that translation-only
transform, so ``fit`` never increases the mismatch it is asked to reduce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Frobenius norm below which a point set is treated as collapsed to a point.
_COLLAPSED = 1e-12


@dataclass(frozen=True)
class SimilarityTransform:
    """Maps row vectors p to ``scale * (p + translation) @ rotation``."""

    scale: float
    translation: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "translation", np.asarray(self.translation, float))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, float))
        self.translation.setflags(write=False)
        self.rotation.setflags(write=False)

    @classmethod
    def identity(cls, k: int = 2) -> "SimilarityTransform":
        return cls(1.0, np.zeros(k), np.eye(k))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one point or an (n, k) block of points."""
        pts = np.asarray(points, dtype=float)
        return self.scale * (pts + self.translation) @ self.rotation

    def invert(self) -> "SimilarityTransform":
        return SimilarityTransform(
            scale=1.0 / self.scale,
            translation=-self.scale * (self.translation @ self.rotation),
            rotation=self.rotation.T,
        )

    def then(self, other: "SimilarityTransform") -> "SimilarityTransform":
        """Composition: ``self`` first, then ``other``."""
        return SimilarityTransform(
            scale=self.scale * other.scale,
            translation=self.translation
            + (other.translation @ self.rotation.T) / self.scale,
            rotation=self.rotation @ other.rotation,
        )


@dataclass(frozen=True)
class PointCorrespondence:
    """Paired previous/current positions of the same points, row by row."""

    prev: np.ndarray
    curr: np.ndarray

    def __post_init__(self):
        prev = np.asarray(self.prev, float)
        curr = np.asarray(self.curr, float)
        if prev.ndim != 2 or prev.shape != curr.shape:
            raise ValueError(
                f"paired layouts must share a shape, got {prev.shape} and {curr.shape}"
            )
        if prev.shape[0] < 1:
            raise ValueError("correspondence needs at least one pair")
        object.__setattr__(self, "prev", prev)
        object.__setattr__(self, "curr", curr)


def residual(transform: SimilarityTransform, prev, curr) -> float:
    """Frobenius mismatch ||transform(curr) - prev||."""
    return float(np.linalg.norm(transform.apply(curr) - np.asarray(prev, float)))


def fit(prev: np.ndarray, curr: np.ndarray) -> SimilarityTransform:
    """Least-squares similarity transform taking ``curr`` onto ``prev``.

    Degenerate inputs (either set collapsed to a single location) yield the
    translation matching the centroids with unit scale and no rotation.
    """
    pair = PointCorrespondence(prev, curr)
    prev = pair.prev
    curr = pair.curr
    k = prev.shape[1]

    prev_centroid = prev.mean(axis=0)
    curr_centroid = curr.mean(axis=0)
    x = prev - prev_centroid
    y = curr - curr_centroid
    x_norm = float(np.linalg.norm(x))
    y_norm = float(np.linalg.norm(y))

    shift_only = SimilarityTransform(1.0, prev_centroid - curr_centroid, np.eye(k))
    if x_norm <= _COLLAPSED or y_norm <= _COLLAPSED:
        return shift_only

    scale = x_norm / y_norm
    # Polar factor of the cross-covariance gives the optimal rotation for
    # row-convention application (reflections allowed).
    u, _, vt = np.linalg.svd(y.T @ x)
    rotation = u @ vt
    translation = (prev_centroid @ rotation.T) / scale - curr_centroid
    fitted = SimilarityTransform(scale, translation, rotation)

    # Uncorrelated layouts can make the scaled fit worse than doing almost
    # nothing; never return a transform that loses to the centroid shift.
    if residual(fitted, prev, curr) > residual(shift_only, prev, curr):
        return shift_only
    return fitted
