import math

import numpy as np
import pytest

from rglab import (
    GaussianVector,
    RngStream,
    abs_moment_normal,
    expected_abs_det_mc,
    gaussian_density,
    psd_factor,
    regression_split,
)
from rglab.errors import (
    DimensionMismatch,
    FactorizationFailure,
    SingularBlock,
    SingularCovariance,
)


# ---------------------------------------------------------------- psd_factor

def test_factor_reconstructs_pd_matrix():
    rng = np.random.default_rng(0)
    b = rng.standard_normal((5, 5))
    cov = b @ b.T + np.eye(5)
    f = psd_factor(cov)
    assert np.allclose(f @ f.T, cov, atol=1e-10)


def test_factor_handles_rank_deficiency():
    b = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    cov = b @ b.T  # rank 2 in dim 3
    f = psd_factor(cov)
    assert f.shape[1] <= 2
    assert np.allclose(f @ f.T, cov, atol=1e-10)


def test_factor_clips_tiny_negative_eigenvalue():
    q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((4, 4)))
    cov = q @ np.diag([2.0, 1.0, 0.5, -1e-14]) @ q.T
    f = psd_factor(cov)
    assert np.allclose(f @ f.T, cov, atol=1e-8)


def test_factor_rejects_indefinite():
    with pytest.raises(FactorizationFailure):
        psd_factor(np.diag([1.0, -0.5]))


def test_factor_rejects_asymmetric():
    with pytest.raises(FactorizationFailure):
        psd_factor(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_factor_zero_matrix():
    f = psd_factor(np.zeros((3, 3)))
    assert np.allclose(f @ f.T, 0.0)


# ------------------------------------------------------------------- density

def test_density_standard_normal_values():
    assert gaussian_density(np.eye(1), [0.0]) == pytest.approx(1.0 / math.sqrt(2 * math.pi), rel=1e-15)
    assert gaussian_density(np.eye(2), [0.0, 0.0]) == pytest.approx(1.0 / (2 * math.pi), rel=1e-15)
    assert gaussian_density(np.eye(1), [1.0]) == pytest.approx(
        math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-15
    )


def test_density_matches_scipy():
    from scipy.stats import multivariate_normal

    rng = np.random.default_rng(3)
    b = rng.standard_normal((3, 3))
    cov = b @ b.T + 0.5 * np.eye(3)
    y = rng.standard_normal(3)
    assert gaussian_density(cov, y) == pytest.approx(
        multivariate_normal(mean=np.zeros(3), cov=cov).pdf(y), rel=1e-12
    )


def test_density_singular_raises():
    with pytest.raises(SingularCovariance):
        gaussian_density(np.diag([1.0, 0.0]), [0.0, 0.0])
    with pytest.raises(SingularCovariance):
        gaussian_density(np.diag([1e-200, 1e-200]), [0.0, 0.0])


def test_density_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        gaussian_density(np.eye(2), [0.0, 0.0, 0.0])


# ---------------------------------------------------------------- regression

def test_regression_split_against_inverse():
    rng = np.random.default_rng(4)
    b = rng.standard_normal((5, 5))
    joint = b @ b.T + np.eye(5)
    n0 = 2
    a, k_cond = regression_split(joint, n0)
    k00 = joint[:n0, :n0]
    k01 = joint[:n0, n0:]
    k10 = joint[n0:, :n0]
    k11 = joint[n0:, n0:]
    a_ref = k10 @ np.linalg.inv(k00)
    assert np.allclose(a, a_ref, atol=1e-10)
    assert np.allclose(k_cond, k11 - a_ref @ k01, atol=1e-10)
    # Residual covariance is PSD.
    assert np.linalg.eigvalsh(k_cond).min() > -1e-10


def test_regression_split_empirical():
    # Sample the joint, regress, and check the residual is decorrelated.
    rng = np.random.default_rng(5)
    b = rng.standard_normal((4, 4))
    joint = b @ b.T + np.eye(4)
    a, k_cond = regression_split(joint, 2)
    gv = GaussianVector(joint)
    x = gv.sample(RngStream(11), 200_000)
    x0, x1 = x[:, :2], x[:, 2:]
    resid = x1 - x0 @ a.T
    cross = resid.T @ x0 / x.shape[0]
    assert np.abs(cross).max() < 0.05
    emp = np.cov(resid.T)
    assert np.allclose(emp, k_cond, atol=0.05)


def test_regression_split_singular_block():
    joint = np.diag([0.0, 1.0])
    with pytest.raises(SingularBlock):
        regression_split(joint, 1)


# ------------------------------------------------------------ absolute moment

def test_abs_moment_exact_points():
    assert abs_moment_normal(0.0, 1.0) == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-15)
    assert abs_moment_normal(3.0, 0.0) == 3.0
    assert abs_moment_normal(-3.0, 0.0) == 3.0
    # Far from zero the folded mean is |mu|.
    assert abs_moment_normal(50.0, 1.0) == pytest.approx(50.0, rel=1e-12)
    assert abs_moment_normal(-50.0, 1.0) == pytest.approx(50.0, rel=1e-12)


def test_abs_moment_symmetry():
    for mu in (0.3, 1.7, 4.2):
        for sigma in (0.2, 1.0, 5.0):
            assert abs_moment_normal(mu, sigma) == pytest.approx(
                abs_moment_normal(-mu, sigma), rel=1e-14
            )


def test_abs_moment_against_mc_oracle():
    # Oracle uses numpy's own generator, an unrelated normal transform.
    rng = np.random.default_rng(6)
    n = 400_000
    for mu, sigma in [(0.0, 1.0), (0.7, 0.4), (-1.3, 2.5)]:
        z = np.abs(mu + sigma * rng.standard_normal(n))
        band = 4.0 * z.std() / math.sqrt(n)
        assert abs(abs_moment_normal(mu, sigma) - z.mean()) < band


# ------------------------------------------------------------- |det| estimate

def test_expected_abs_det_identity_2x2():
    # det of an iid standard normal 2x2 matrix is standard Laplace: E|det| = 1.
    est, se = expected_abs_det_mc(np.eye(2), 2, 200_000, RngStream(21))
    assert abs(est - 1.0) < 4 * se
    assert se < 0.01


def test_expected_abs_det_column_scaling():
    # Scaling column covariance by diag(4, 9) scales |det| by 6.
    est, se = expected_abs_det_mc(np.diag([4.0, 9.0]), 2, 200_000, RngStream(22))
    assert abs(est - 6.0) < 4 * se


def test_expected_abs_det_m1_matches_abs_moment():
    est, se = expected_abs_det_mc(np.array([[2.25]]), 1, 200_000, RngStream(23))
    assert abs(est - abs_moment_normal(0.0, 1.5)) < 4 * se


def test_expected_abs_det_deterministic():
    a = expected_abs_det_mc(np.eye(3), 3, 1000, RngStream(9, 2))
    b = expected_abs_det_mc(np.eye(3), 3, 1000, RngStream(9, 2))
    assert a == b


def test_expected_abs_det_shape_check():
    with pytest.raises(DimensionMismatch):
        expected_abs_det_mc(np.eye(3), 2, 100, RngStream(0))


# ------------------------------------------------------------------- sampling

def test_gaussian_vector_empirical_covariance():
    rng = np.random.default_rng(8)
    b = rng.standard_normal((3, 3))
    cov = b @ b.T + np.eye(3)
    x = GaussianVector(cov).sample(RngStream(31), 150_000)
    emp = np.cov(x.T)
    assert np.abs(emp - cov).max() < 0.08


def test_gaussian_vector_single_draw_shape():
    gv = GaussianVector(np.eye(4))
    assert gv.sample(RngStream(0)).shape == (4,)
