import math

import numpy as np
import pytest

from rglab import frame_volume, jacobian, projection_angle, subspace_angle
from rglab.errors import ContainmentViolation, DimensionMismatch


def _complement(basis: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(basis)
    full, _ = np.linalg.qr(np.hstack([q, np.eye(basis.shape[0])]))
    return full[:, basis.shape[1] : basis.shape[0]]


# --------------------------------------------------------------- frame_volume

def test_frame_volume_known_values():
    assert frame_volume(np.eye(3)) == pytest.approx(1.0)
    assert frame_volume(np.array([[2.0, 0.0], [0.0, 3.0]])) == pytest.approx(6.0)
    assert frame_volume(np.array([[1.0, 1.0], [0.0, 0.0]])) == pytest.approx(0.0)
    assert frame_volume(np.empty((3, 0))) == pytest.approx(1.0)


def test_frame_volume_parallelogram():
    v = np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
    assert frame_volume(v) == pytest.approx(1.0)  # shear-invariant area


# ------------------------------------------------------------ subspace_angle

def test_one_dim_angle_is_abs_sine():
    for theta in (0.1, 0.5, 1.2, 2.7):
        v = np.array([[1.0], [0.0]])
        w = np.array([[math.cos(theta)], [math.sin(theta)]])
        assert subspace_angle(v, w) == pytest.approx(abs(math.sin(theta)), abs=1e-12)


def test_angle_is_symmetric_and_bounded():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        v = rng.standard_normal((n, int(rng.integers(1, n))))
        w = rng.standard_normal((n, int(rng.integers(1, n))))
        a = subspace_angle(v, w)
        assert 0.0 <= a <= 1.0 + 1e-12
        assert a == pytest.approx(subspace_angle(w, v), abs=1e-11)


def test_angle_one_on_containment_and_orthogonality():
    e1 = np.array([[1.0], [0.0], [0.0]])
    e12 = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    e3 = np.array([[0.0], [0.0], [1.0]])
    assert subspace_angle(e1, e12) == pytest.approx(1.0)
    assert subspace_angle(e12, e1) == pytest.approx(1.0)
    assert subspace_angle(e1, e3) == pytest.approx(1.0)


def test_angle_zero_on_shared_direction_in_general_position():
    # V and W share a line but are otherwise generic: the angle vanishes
    v = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]])
    w = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    # shared e1 is split off; remaining directions e2 vs e3 are orthogonal
    assert subspace_angle(v, w) == pytest.approx(1.0)
    w_degenerate = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1e-12], [0.0, 0.0]])
    assert subspace_angle(v, w_degenerate) == pytest.approx(1.0, abs=1e-9)


def test_complement_duality_on_random_pairs():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        v = rng.standard_normal((n, int(rng.integers(1, n))))
        w = rng.standard_normal((n, int(rng.integers(1, n))))
        direct = subspace_angle(v, w)
        dual = subspace_angle(_complement(v), _complement(w))
        worst = max(worst, abs(direct - dual))
    assert worst <= 1e-9


# ---------------------------------------------------------- projection_angle

def test_projection_matches_subspace_angle_in_general_position():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(3, 8))
        kv = int(rng.integers(1, n - 1))
        kw = int(rng.integers(1, n - kv + 1))
        v = rng.standard_normal((n, kv))
        w = rng.standard_normal((n, kw))
        assert projection_angle(v, w) == pytest.approx(subspace_angle(v, w), abs=1e-9)


def test_projection_rejects_contained_subspace():
    v = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    w = np.array([[1.0], [1.0], [0.0]])
    with pytest.raises(ContainmentViolation):
        projection_angle(v, w)


# ------------------------------------------------------------------ jacobian

def test_jacobian_orthonormal_is_one():
    a = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    assert jacobian(a, np.eye(2), np.eye(3)) == pytest.approx(1.0)


def test_jacobian_scales_with_metric():
    a = np.array([[2.0], [0.0]])
    assert jacobian(a, np.eye(1), np.eye(2)) == pytest.approx(2.0)
    # doubling the source metric halves the volume stretch by sqrt(det)
    assert jacobian(a, 4.0 * np.eye(1), np.eye(2)) == pytest.approx(1.0)


def test_jacobian_coarea_case():
    a = np.array([[1.0, 2.0]])  # R^2 -> R^1
    want = math.sqrt(5.0)
    assert jacobian(a, np.eye(2), np.eye(1)) == pytest.approx(want)


def test_jacobian_rejects_bad_metric_shapes():
    a = np.array([[1.0], [0.0]])
    with pytest.raises(DimensionMismatch):
        jacobian(a, np.eye(2), np.eye(2))
