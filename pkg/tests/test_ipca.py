import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from streampca import ipca
from conftest import batch_pca, pairwise, principal_angles


def stream_model(points, k=2, m=2, forget=1.0):
    model = ipca.PcaModel.empty(points.shape[1], n_components=k, forget=forget)
    for i in range(0, points.shape[0] - points.shape[0] % m, m):
        model = ipca.update(model, points[i : i + m])
    return model


# --------------------------------------------------------------------- #
# construction and validation

def test_empty_model():
    model = ipca.PcaModel.empty(5)
    assert model.is_empty
    assert model.rank == 0
    assert model.n_effective == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"forget": 0.0},
        {"forget": 1.5},
        {"n_components": 0},
        {"dims": 0},
    ],
)
def test_invalid_construction(kwargs):
    base = {"dims": 4, "n_components": 2, "forget": 1.0}
    base.update(kwargs)
    with pytest.raises(ValueError):
        ipca.PcaModel.empty(base["dims"], base["n_components"], base["forget"])


def test_update_rejects_bad_batches():
    model = ipca.PcaModel.empty(3)
    with pytest.raises(ValueError):
        ipca.update(model, np.ones((1, 3)))  # fewer than 2 points
    with pytest.raises(ValueError):
        ipca.update(model, np.ones((2, 4)))  # wrong width
    bad = np.ones((2, 3))
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        ipca.update(model, bad)


def test_batch_type_validation():
    with pytest.raises(ValueError):
        ipca.Batch(points=np.ones((2, 3)), ids=("a",))
    with pytest.raises(ValueError):
        ipca.Batch(points=np.ones((1, 3)), ids=("a",))
    batch = ipca.Batch(points=np.ones((2, 3)), ids=("a", "b"))
    assert batch.points.shape == (2, 3)


def test_model_is_immutable():
    rng = np.random.default_rng(0)
    model = stream_model(rng.normal(size=(10, 3)))
    with pytest.raises(ValueError):
        model.basis[0, 0] = 99.0
    before = model.mean.copy()
    ipca.update(model, rng.normal(size=(4, 3)))
    assert np.array_equal(model.mean, before)


# --------------------------------------------------------------------- #
# oracle equivalence against batch PCA

def test_single_batch_equals_batch_pca():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 6))
    model = ipca.update(ipca.PcaModel.empty(6, n_components=2), X)
    mean, comps, svals = batch_pca(X, 2)
    assert np.allclose(model.mean, mean, atol=1e-12)
    assert np.allclose(model.singular_values[:2], svals[:2], atol=1e-10)
    # arccos resolution near zero is ~sqrt(eps), so one ulp of SVD jitter
    # already reads as an angle of ~2e-8; the bound cannot be tighter
    assert principal_angles(model.basis[:, :2], comps).max() < 1e-6


@pytest.mark.parametrize("n,dims,m", [(100, 8, 2), (500, 50, 4), (120, 10, 3)])
def test_streaming_matches_batch_when_rank_kept(n, dims, m):
    # retained rank k + m >= D keeps the factorization exact for any data
    rng = np.random.default_rng(n + dims)
    k = dims - m
    X = rng.normal(size=(n, dims)) @ np.diag(np.linspace(3, 0.1, dims))
    model = stream_model(X, k=k, m=m)
    used = X[: n - n % m]
    mean, comps, _ = batch_pca(used, k)
    assert np.abs(model.mean - mean).max() < 1e-10
    assert principal_angles(model.basis[:, :k], comps).max() < 1e-4


@pytest.mark.parametrize("n,dims", [(200, 30), (500, 50)])
def test_streaming_matches_batch_on_low_rank_data(n, dims):
    # when k + m < D the truncation is only harmless if the data itself
    # concentrates in a few directions; plant a dominant 2-d subspace
    rng = np.random.default_rng(dims)
    basis = np.linalg.qr(rng.normal(size=(dims, 2)))[0]
    X = rng.normal(size=(n, 2)) @ np.diag([5.0, 2.0]) @ basis.T
    X += 1e-8 * rng.normal(size=(n, dims))
    model = stream_model(X, k=2, m=2)
    mean, comps, _ = batch_pca(X, 2)
    assert np.abs(model.mean - mean).max() < 1e-10
    assert principal_angles(model.basis[:, :2], comps).max() < 1e-4


def test_iris_subspace_and_distances(iris):
    X, _ = iris
    model = stream_model(X, k=2, m=2)
    mean, comps, _ = batch_pca(X, 2)
    assert principal_angles(model.basis[:, :2], comps).max() < 1e-4
    d_inc = pairwise(ipca.project(model, X))
    d_bat = pairwise((X - mean) @ comps)
    denom = np.where(d_bat > 0, d_bat, 1.0)
    assert (np.abs(d_inc - d_bat) / denom).max() < 1e-3


def test_mean_is_batch_order_insensitive():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 7))
    model_a = stream_model(X, m=3)
    perm = rng.permutation(20)  # permute whole batches
    X_shuffled = X.reshape(20, 3, 7)[perm].reshape(60, 7)
    model_b = stream_model(X_shuffled, m=3)
    assert np.abs(model_a.mean - model_b.mean).max() < 1e-10


# --------------------------------------------------------------------- #
# forgetting

def test_forgetting_weighted_mean_oracle():
    # with f < 1 the mean is the f-geometric weighted mean of batch means
    rng = np.random.default_rng(9)
    f, m = 0.8, 2
    batches = [rng.normal(size=(m, 3)) for _ in range(12)]
    model = ipca.PcaModel.empty(3, forget=f)
    for b in batches:
        model = ipca.update(model, b)
    weights = np.array([f ** (len(batches) - 1 - j) for j in range(len(batches))])
    means = np.array([b.mean(axis=0) for b in batches])
    expected = (weights[:, None] * means).sum(axis=0) / weights.sum()
    assert np.abs(model.mean - expected).max() < 1e-10
    assert model.n_effective == pytest.approx(m * weights.sum())


def test_forgetting_tracks_recent_data():
    rng = np.random.default_rng(10)
    early = rng.normal(size=(100, 4)) + np.array([10.0, 0, 0, 0])
    late = rng.normal(size=(100, 4)) - np.array([10.0, 0, 0, 0])
    data = np.vstack([early, late])
    drifting = stream_model(data, forget=0.8)
    sticky = stream_model(data, forget=1.0)
    # the forgetful model should sit close to the recent cluster
    assert abs(drifting.mean[0] - late.mean(axis=0)[0]) < 1.0
    assert abs(sticky.mean[0]) < 2.0  # f=1 stays between the clusters


def test_effective_history():
    assert ipca.effective_history(0.998, 2) == pytest.approx(1000.0)
    assert ipca.effective_history(0.5, 4) == pytest.approx(8.0)
    assert ipca.effective_history(1.0, 2) == math.inf
    for bad in (0.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            ipca.effective_history(bad, 2)
    with pytest.raises(ValueError):
        ipca.effective_history(0.9, 1)


# --------------------------------------------------------------------- #
# projection and loadings

def test_project_shapes_and_errors():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(20, 5))
    model = stream_model(X, k=2)
    assert ipca.project(model, X).shape == (20, 2)
    assert ipca.project(model, X[0]).shape == (2,)
    with pytest.raises(ValueError):
        ipca.project(model, np.ones((3, 4)))
    empty = ipca.PcaModel.empty(5)
    with pytest.raises(ValueError, match="components"):
        ipca.project(empty, X)


def test_projection_centers_data():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 4)) + 100.0
    model = stream_model(X)
    proj = ipca.project(model, X)
    assert np.abs(proj.mean(axis=0)).max() < 1e-9


def test_loadings_concentrate_on_active_dims():
    model = ipca.PcaModel(
        mean=np.zeros(3),
        basis=np.eye(3)[:, :2],
        singular_values=np.array([2.0, 0.0]),
        n_effective=10.0,
        forget=1.0,
        n_components=2,
        dims=3,
    )
    w = ipca.pc_loadings(model)
    assert w.shape == (2, 3)
    assert w[0, 0] > 0 and np.allclose(w[0, 1:], 0)
    assert np.allclose(w[1], 0)  # zero singular value -> zero loadings


def test_loadings_match_batch_pca_on_iris(iris):
    X, _ = iris
    model = stream_model(X, k=2, m=2)
    w_inc = np.abs(ipca.pc_loadings(model))
    mean, comps, svals = batch_pca(X, 2)
    lam = svals[:2] ** 2 / (X.shape[0] - 1)
    w_bat = np.abs(np.sqrt(lam)[:, None] * comps.T)
    for row in range(2):
        ratio = w_inc[row] / w_bat[row]
        assert ratio.max() / ratio.min() < 1 + 1e-3


def test_loadings_need_a_model():
    with pytest.raises(ValueError):
        ipca.pc_loadings(ipca.PcaModel.empty(4))


# --------------------------------------------------------------------- #
# structural invariants

@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    dims=st.integers(3, 12),
    batches=st.integers(1, 8),
    forget=st.sampled_from([1.0, 0.9, 0.5]),
)
def test_update_invariants(seed, dims, batches, forget):
    rng = np.random.default_rng(seed)
    model = ipca.PcaModel.empty(dims, n_components=2, forget=forget)
    m = int(rng.integers(2, 5))
    for _ in range(batches):
        model = ipca.update(model, rng.normal(size=(m, dims)))
        # basis stays orthonormal, singular values sorted and non-negative
        gram = model.basis.T @ model.basis
        assert np.abs(gram - np.eye(model.rank)).max() < 1e-10
        s = model.singular_values
        assert (s >= 0).all() and (np.diff(s) <= 1e-12).all()
        assert model.rank <= min(dims, model.n_components + m)
        assert np.isfinite(model.mean).all()


def test_update_cost_flat_in_history():
    # absorbing a batch must not slow down as history accumulates
    rng = np.random.default_rng(7)
    model = ipca.PcaModel.empty(200, n_components=2)

    def absorb_times(count):
        nonlocal model
        times = []
        for _ in range(count):
            batch = rng.normal(size=(2, 200))
            t0 = time.perf_counter()
            model = ipca.update(model, batch)
            times.append(time.perf_counter() - t0)
        return times

    early = np.median(absorb_times(50))
    absorb_times(400)
    late = np.median(absorb_times(50))
    assert late < 5 * early + 1e-3
