import csv
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def iris():
    """(values (150, 4), species labels) from the bundled CSV."""
    with open(DATA / "iris.csv", newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    values = np.array([[float(v) for v in row[:4]] for row in rows])
    species = [row[4] for row in rows]
    return values, species


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles (radians) between the column spans of a and b."""
    qa, _ = np.linalg.qr(a)
    qb, _ = np.linalg.qr(b)
    cos = np.linalg.svd(qa.T @ qb, compute_uv=False)
    return np.arccos(np.clip(cos, -1.0, 1.0))


def batch_pca(points: np.ndarray, k: int):
    """(mean, components (D, k), singular values) of plain batch PCA."""
    mean = points.mean(axis=0)
    _, svals, vt = np.linalg.svd(points - mean, full_matrices=False)
    return mean, vt[:k].T, svals


def pairwise(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))
