"""Frame volumes, angles between linear subspaces, and metric Jacobians.

The angle between subspaces V, W <= R^n is

    sigma(V, W) = vol(v w) / (vol(v) vol(w)),

where v, w are bases of the parts of V and W complementary to V cap W and
vol(f) = sqrt(det(f^T f)). Containment cases are defined to be 1. An
equivalent form used as a cross-check projects w onto V^perp.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ContainmentViolation, DimensionMismatch

RANK_TOL = 1e-9


def frame_volume(frame) -> float:
    """sqrt(det(F^T F)): the volume of the parallelepiped spanned by the columns."""
    f = np.atleast_2d(np.asarray(frame, dtype=float))
    if f.shape[1] == 0:
        return 1.0
    s = np.linalg.svd(f, compute_uv=False)
    if f.shape[1] > f.shape[0]:
        return 0.0
    return float(np.prod(s[: f.shape[1]]))


def _orthonormal_basis(frame: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(frame)
    keep = np.abs(np.diag(r)) > RANK_TOL * max(1.0, np.abs(r).max())
    return q[:, keep]


def _split_off_intersection(qv: np.ndarray, qw: np.ndarray):
    """Orthonormal bases of V cap W, V cap (V cap W)^perp, W cap (V cap W)^perp."""
    if qv.shape[1] == 0 or qw.shape[1] == 0:
        return np.zeros((qv.shape[0], 0)), qv, qw
    u, s, vt = np.linalg.svd(qv.T @ qw)
    ncap = int(np.sum(s >= 1.0 - RANK_TOL))
    inter = qv @ u[:, :ncap] if ncap else np.zeros((qv.shape[0], 0))
    v_rest = qv @ u[:, ncap:]
    w_rest = qw @ vt[ncap:, :].T
    return inter, v_rest, w_rest


def subspace_angle(v_frame, w_frame) -> float:
    """sigma(V, W) in (0, 1]; returns 1 on containment either way."""
    v = np.atleast_2d(np.asarray(v_frame, dtype=float))
    w = np.atleast_2d(np.asarray(w_frame, dtype=float))
    if v.shape[0] != w.shape[0]:
        raise DimensionMismatch("frames live in different ambient dimensions")
    qv = _orthonormal_basis(v)
    qw = _orthonormal_basis(w)
    _, v_rest, w_rest = _split_off_intersection(qv, qw)
    if v_rest.shape[1] == 0 or w_rest.shape[1] == 0:
        return 1.0
    return frame_volume(np.hstack([v_rest, w_rest]))


def projection_angle(v_frame, w_frame) -> float:
    """sigma(V, W) = vol(proj_{V^perp} w) / vol(w); requires W not contained in V."""
    v = np.atleast_2d(np.asarray(v_frame, dtype=float))
    w = np.atleast_2d(np.asarray(w_frame, dtype=float))
    if v.shape[0] != w.shape[0]:
        raise DimensionMismatch("frames live in different ambient dimensions")
    qv = _orthonormal_basis(v)
    qw = _orthonormal_basis(w)
    _, _, w_rest = _split_off_intersection(qv, qw)
    if w_rest.shape[1] == 0:
        raise ContainmentViolation("W is contained in V; the projection form degenerates")
    proj = w_rest - qv @ (qv.T @ w_rest)
    return frame_volume(proj) / frame_volume(w_rest)


def jacobian(a, g1, g2) -> float:
    """Jacobian of the linear map A: (R^m, g1) -> (R^n, g2).

    For m <= n this is sqrt(det(A^T g2 A) / det(g1)); for m > n the
    coarea factor sqrt(det(A g1^{-1} A^T) det(g2)). Rank-deficient maps
    give 0.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n, m = a.shape
    g1 = np.atleast_2d(np.asarray(g1, dtype=float))
    g2 = np.atleast_2d(np.asarray(g2, dtype=float))
    if g1.shape != (m, m) or g2.shape != (n, n):
        raise DimensionMismatch("metric shapes must match the map")
    if m <= n:
        num = np.linalg.det(a.T @ g2 @ a)
        den = np.linalg.det(g1)
        return math.sqrt(max(num, 0.0) / den)
    num = np.linalg.det(a @ np.linalg.solve(g1, a.T)) * np.linalg.det(g2)
    return math.sqrt(max(num, 0.0))
