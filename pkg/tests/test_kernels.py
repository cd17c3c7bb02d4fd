import math

import numpy as np
import pytest

from rglab import (
    bargmann_fock_kernel,
    dehomogenized_kernel,
    isotropic_series_kernel,
    joint_field_gradient_cov,
    kernel_eval,
    kernel_sup_distance,
    kostlan_kernel,
    rescaled_kernel,
    sample_kostlan,
    scalar_profile,
    seed_stream,
)
from rglab.errors import DimensionMismatch
from rglab.polys import rescaled_eval


# ------------------------------------------------------------- kernel values

def test_kostlan_kernel_is_dot_power():
    spec = kostlan_kernel(3)
    x = np.array([1.0, 0.5, -0.5])
    y = np.array([1.0, 2.0, 0.0])
    assert kernel_eval(spec, x, y) == pytest.approx(float(x @ y) ** 3, rel=1e-14)


def test_dehomogenized_matches_kostlan_on_chart():
    spec_h = kostlan_kernel(4)
    spec_c = dehomogenized_kernel(4)
    u = np.array([0.3, -0.8])
    v = np.array([0.1, 0.4])
    lifted = kernel_eval(spec_h, np.concatenate([[1.0], u]), np.concatenate([[1.0], v]))
    assert kernel_eval(spec_c, u, v) == pytest.approx(lifted, rel=1e-14)


def test_rescaled_kernel_value():
    # (1 + u v / d)^d at scalar points
    spec = rescaled_kernel(10)
    assert kernel_eval(spec, 0.5, 1.0) == pytest.approx((1 + 0.05) ** 10, rel=1e-14)


def test_bargmann_fock_kernel_is_exponential():
    spec = bargmann_fock_kernel()
    u = np.array([0.5, 0.5])
    v = np.array([1.0, 1.0])
    assert kernel_eval(spec, u, v) == pytest.approx(math.e, rel=1e-14)


def test_kernels_are_rotation_invariant():
    theta = 0.7
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    u = np.array([0.3, -0.2])
    v = np.array([-0.1, 0.6])
    for spec in (bargmann_fock_kernel(), rescaled_kernel(7)):
        assert kernel_eval(spec, rot @ u, rot @ v) == pytest.approx(kernel_eval(spec, u, v), rel=1e-12)


# ----------------------------------------------------------- scalar profiles

def test_profile_derivatives_match_finite_differences():
    h1, h2 = 1e-6, 1e-4
    for spec in (rescaled_kernel(6), bargmann_fock_kernel(), kostlan_kernel(5), dehomogenized_kernel(4)):
        for s0 in (0.0, 0.4, -0.3):
            f = lambda s: scalar_profile(spec, s, 0)
            d1 = scalar_profile(spec, s0, 1)
            d2 = scalar_profile(spec, s0, 2)
            assert d1 == pytest.approx((f(s0 + h1) - f(s0 - h1)) / (2 * h1), abs=1e-6)
            assert d2 == pytest.approx((f(s0 + h2) - 2 * f(s0) + f(s0 - h2)) / h2**2, abs=1e-4 * (1 + abs(d2)))


def test_cos_power_moments_via_joint_cov():
    # psi(s) = cos^d(s): variance 1 and derivative variance d at any angle
    joint = joint_field_gradient_cov(isotropic_series_kernel([0.0] * 9 + [1.0]), 2.1)
    assert joint == pytest.approx(np.diag([1.0, 9.0]))


# ------------------------------------------------------- joint covariances

def test_joint_cov_isotropic_series_is_diagonal():
    joint = joint_field_gradient_cov(isotropic_series_kernel([0.0, 0.5, 0.5]), 0.3)
    assert joint == pytest.approx(np.diag([1.0, 1.5]))


def test_joint_cov_bargmann_fock_closed_form():
    u = 0.6
    joint = joint_field_gradient_cov(bargmann_fock_kernel(), u)
    e = math.exp(u * u)
    want = np.array([[e, u * e], [u * e, (1 + u * u) * e]])
    assert joint == pytest.approx(want, rel=1e-12)


def test_joint_cov_two_dim_shape_and_symmetry():
    joint = joint_field_gradient_cov(bargmann_fock_kernel(), np.array([0.3, -0.2]))
    assert joint.shape == (3, 3)
    assert np.abs(joint - joint.T).max() < 1e-14
    assert np.all(np.linalg.eigvalsh(joint) > 0)


def test_joint_cov_rejects_homogeneous_kernel():
    with pytest.raises(DimensionMismatch):
        joint_field_gradient_cov(kostlan_kernel(3), 0.5)


# -------------------------------------------------------------- convergence

def test_rescaled_converges_to_bargmann_fock():
    grid = np.linspace(-1.0, 1.0, 21)
    dists = [kernel_sup_distance(rescaled_kernel(d), bargmann_fock_kernel(), grid) for d in (10, 20, 40, 80)]
    assert all(a > b for a, b in zip(dists, dists[1:]))
    assert kernel_sup_distance(rescaled_kernel(100), bargmann_fock_kernel(), grid) <= 0.03


def test_dehomogenized_lift_distance_is_zero():
    grid = np.linspace(-0.5, 0.5, 9)
    assert kernel_sup_distance(dehomogenized_kernel(5), kostlan_kernel(5), grid) < 1e-12


def test_first_derivative_distance_also_shrinks():
    grid = np.linspace(-1.0, 1.0, 11)
    d20 = kernel_sup_distance(rescaled_kernel(20), bargmann_fock_kernel(), grid, deriv_order=1)
    d80 = kernel_sup_distance(rescaled_kernel(80), bargmann_fock_kernel(), grid, deriv_order=1)
    assert d80 < d20


# ---------------------------------------------------- empirical consistency

def test_rescaled_kernel_matches_sampled_covariance():
    d = 12
    spec = rescaled_kernel(d)
    u = np.array([0.4])
    v = np.array([-0.6])
    s = seed_stream(14)
    prods = []
    for t in range(12000):
        p = sample_kostlan(1, 1, d, s.child(t))
        prods.append(rescaled_eval(p, u)[0] * rescaled_eval(p, v)[0])
    prods = np.array(prods)
    target = kernel_eval(spec, u, v)
    assert abs(prods.mean() - target) < 4 * prods.std() / math.sqrt(len(prods))
