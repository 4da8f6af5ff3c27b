"""Incremental PCA with a forgetting factor.

Implements the sequential Karhunen-Loeve style update with running mean
(Ross et al., "Incremental Learning for Robust Visual Tracking", 2008):
given the SVD of the data seen so far, a batch of m new observations is
absorbed by taking the SVD of a small augmented matrix built from

  * the previous basis rows scaled by ``f * singular_values``,
  * the mean-centered batch, and
  * a rank-one mean-correction row that accounts for the shift between the
    old and new sample means.

The factorization is then truncated, so one update costs O(D * (k + m)^2)
regardless of how many observations the model has already absorbed.  The
forgetting factor ``f`` downweights history; with batches of size m the
effective number of contributing observations converges to m / (1 - f).

Models are values: ``update`` returns a new ``PcaModel`` and never touches
its input, so any snapshot of the model can be read concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative floor below which singular values are considered numerical noise.
SINGULAR_VALUE_FLOOR = 1e-12


@dataclass(frozen=True)
class PcaModel:
    """Running PCA state: mean, basis and singular values of the history.

    ``basis`` has one column per retained component (column-orthonormal),
    ``singular_values`` is non-negative and descending.  ``n_effective`` is
    the observation mass after forgetting, and ``n_components`` the number
    of components exposed by :func:`project` / :func:`pc_loadings`.
    """

    mean: np.ndarray
    basis: np.ndarray
    singular_values: np.ndarray
    n_effective: float
    forget: float
    n_components: int
    dims: int

    def __post_init__(self):
        if not 0.0 < self.forget <= 1.0:
            raise ValueError(f"forgetting factor must be in (0, 1], got {self.forget}")
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")
        if self.dims < 1:
            raise ValueError("dims must be >= 1")
        for arr in (self.mean, self.basis, self.singular_values):
            arr.setflags(write=False)

    @classmethod
    def empty(cls, dims: int, n_components: int = 2, forget: float = 1.0) -> "PcaModel":
        """A model that has absorbed nothing yet."""
        return cls(
            mean=np.zeros(dims),
            basis=np.zeros((dims, 0)),
            singular_values=np.zeros(0),
            n_effective=0.0,
            forget=forget,
            n_components=n_components,
            dims=dims,
        )

    @property
    def rank(self) -> int:
        """Number of retained components (may exceed ``n_components``)."""
        return self.basis.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.n_effective == 0.0


@dataclass(frozen=True)
class Batch:
    """A block of m >= 2 fully observed points with their identifiers."""

    points: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise ValueError("batch needs at least 2 rows")
        if pts.shape[0] != len(self.ids):
            raise ValueError("one id per row required")
        if not np.all(np.isfinite(pts)):
            raise ValueError("batch contains non-finite values")
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)


def update(model: PcaModel, points: np.ndarray) -> PcaModel:
    """Absorb a batch of m >= 2 complete points and return the new model.

    The mean becomes the forgetting-weighted running mean; the basis and
    singular values come from the SVD of the augmented matrix described in
    the module docstring, truncated to min(D, n_components + m) components.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != model.dims:
        raise ValueError(
            f"batch must be 2-d with width {model.dims}, got shape {pts.shape}"
        )
    m = pts.shape[0]
    if m < 2:
        raise ValueError(f"batch needs at least 2 points, got {m}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("batch contains non-finite values")

    batch_mean = pts.mean(axis=0)
    old_mass = model.forget * model.n_effective
    new_mass = old_mass + m

    if model.is_empty:
        mean = batch_mean
        augmented = pts - batch_mean
    else:
        mean = (old_mass * model.mean + m * batch_mean) / new_mass
        correction = math.sqrt(old_mass * m / new_mass) * (batch_mean - model.mean)
        augmented = np.vstack(
            [
                (model.forget * model.singular_values)[:, None] * model.basis.T,
                pts - batch_mean,
                correction[None, :],
            ]
        )

    _, svals, vt = np.linalg.svd(augmented, full_matrices=False)
    keep = min(model.dims, model.n_components + m, svals.size)
    svals = svals[:keep].copy()
    basis = vt[:keep].T.copy()
    if svals.size and svals[0] > 0.0:
        svals[svals < SINGULAR_VALUE_FLOOR * svals[0]] = 0.0

    return PcaModel(
        mean=mean,
        basis=basis,
        singular_values=svals,
        n_effective=new_mass,
        forget=model.forget,
        n_components=model.n_components,
        dims=model.dims,
    )


def project(model: PcaModel, points: np.ndarray) -> np.ndarray:
    """Project rows of width D onto the first ``n_components`` components."""
    k = model.n_components
    if model.rank < k:
        raise ValueError(
            f"projection needs {k} components, model has only {model.rank}"
        )
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != model.dims:
        raise ValueError(f"points must have width {model.dims}, got {pts.shape[1]}")
    out = (pts - model.mean) @ model.basis[:, :k]
    return out[0] if single else out


def pc_loadings(model: PcaModel) -> np.ndarray:
    """Loadings sqrt(eigenvalue_i) * basis_ij as a (n_components, D) matrix.

    Eigenvalues follow the sample-covariance convention
    ``s_i^2 / max(n_effective - 1, 1)``.  The per-model scalar cancels
    wherever loadings enter as ratios, so only the relative magnitudes
    matter downstream.
    """
    if model.is_empty:
        raise ValueError("cannot compute loadings of an empty model")
    k = model.n_components
    if model.rank < k:
        raise ValueError(
            f"loadings need {k} components, model has only {model.rank}"
        )
    eigvals = model.singular_values[:k] ** 2 / max(model.n_effective - 1.0, 1.0)
    return np.sqrt(eigvals)[:, None] * model.basis[:, :k].T


def effective_history(forget: float, batch_size: int) -> float:
    """Number of observations that still influence the model: m / (1 - f).

    Returns ``math.inf`` when f = 1 (nothing is ever forgotten).
    """
    if not 0.0 < forget <= 1.0:
        raise ValueError(f"forgetting factor must be in (0, 1], got {forget}")
    if batch_size < 2:
        raise ValueError(f"batch size must be >= 2, got {batch_size}")
    if forget == 1.0:
        return math.inf
    return batch_size / (1.0 - forget)
