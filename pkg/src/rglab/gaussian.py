"""Centered Gaussian vectors: sampling, densities, conditioning.

Conventions. A centered Gaussian vector on R^s with covariance S has density

    rho_S(y) = exp(-y^T S^{-1} y / 2) / ((2 pi)^{s/2} det(S)^{1/2}),

and conditioning a joint vector (X0, X1) on X0 = x gives the affine
regression X1 = A x + Y with A = K10 K00^{-1} and residual covariance
K11 - K10 K00^{-1} K01.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.linalg import lapack
from scipy.special import erf

from .errors import DimensionMismatch, FactorizationFailure, SingularBlock, SingularCovariance
from .streams import RngStream

# Relative PSD tolerance: eigenvalues below -PSD_TOL * trace are rejected.
PSD_TOL = 1e-10


def psd_factor(covariance: np.ndarray) -> np.ndarray:
    """Lower factor F with F F^T ~= covariance, tolerant of semidefiniteness.

    Pivoted Cholesky (LAPACK pstrf) with tolerance PSD_TOL * trace; if the
    matrix is not PSD to that accuracy the factorization falls back to an
    eigendecomposition with negative eigenvalues clipped at zero. Raises
    FactorizationFailure when an eigenvalue sits below -PSD_TOL * trace.
    """
    cov = np.asarray(covariance, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DimensionMismatch(f"covariance must be square, got {cov.shape}")
    n = cov.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    scale = float(np.abs(cov).max())
    if scale == 0.0:
        return np.zeros((n, n))
    if np.abs(cov - cov.T).max() > 1e-8 * scale:
        raise FactorizationFailure("covariance is not symmetric")
    cov = 0.5 * (cov + cov.T)
    trace = float(np.trace(cov))

    c, piv, rank, info = lapack.dpstrf(cov, lower=1, tol=PSD_TOL * max(trace, 0.0))
    if info >= 0:
        L = np.tril(c)
        L[:, rank:] = 0.0
        F = np.empty_like(L)
        F[piv - 1, :] = L
        if np.abs(cov - F @ F.T).max() <= 1e-8 * scale:
            return F[:, :rank]

    # Not PSD to pstrf's liking; clip the spectrum.
    w, v = np.linalg.eigh(cov)
    if w[0] < -PSD_TOL * max(trace, scale):
        raise FactorizationFailure(
            f"covariance eigenvalue {w[0]:.3e} below PSD tolerance"
        )
    w = np.clip(w, 0.0, None)
    keep = w > 0
    return v[:, keep] * np.sqrt(w[keep])


class GaussianVector:
    """Centered Gaussian on R^s; the factor is computed once at construction."""

    def __init__(self, covariance: np.ndarray):
        self.covariance = np.asarray(covariance, dtype=float)
        self.factor = psd_factor(self.covariance)
        self.dim = self.covariance.shape[0]

    def sample(self, stream: RngStream, n: int | None = None) -> np.ndarray:
        """One draw (shape (s,)) or n draws (shape (n, s))."""
        if n is None:
            return self.factor @ stream.normals(self.factor.shape[1])
        z = stream.normals((n, self.factor.shape[1]))
        return z @ self.factor.T


def sample_gaussian_vector(gv: GaussianVector, stream: RngStream, n: int | None = None):
    return gv.sample(stream, n)


def gaussian_density(covariance: np.ndarray, y: np.ndarray) -> float:
    """Density of N(0, covariance) at y; SingularCovariance below det 1e-300."""
    cov = np.asarray(covariance, dtype=float)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    s = y.shape[0]
    if cov.shape != (s, s):
        raise DimensionMismatch(f"covariance {cov.shape} does not match point of dim {s}")
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0 or logdet < math.log(1e-300):
        raise SingularCovariance("covariance determinant below 1e-300")
    q = float(y @ np.linalg.solve(cov, y))
    return math.exp(-0.5 * q - 0.5 * logdet - 0.5 * s * math.log(2.0 * math.pi))


class RegressionSplit(NamedTuple):
    regression_matrix: np.ndarray
    conditional_covariance: np.ndarray


def regression_split(joint: np.ndarray, split_at: int) -> RegressionSplit:
    """Split a joint covariance of (X0, X1) at dim(X0) = split_at.

    Returns (A, K_cond): X1 = A X0 + Y with Y independent of X0 and
    Cov(Y) = K_cond = K11 - K10 K00^{-1} K01. Raises SingularBlock when
    the X0 block is not positive definite.
    """
    n0 = split_at
    K = np.asarray(joint, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionMismatch(f"joint covariance must be square, got {K.shape}")
    if not 0 < n0 < K.shape[0]:
        raise DimensionMismatch(f"n0={n0} out of range for dim {K.shape[0]}")
    K00 = K[:n0, :n0]
    K01 = K[:n0, n0:]
    K11 = K[n0:, n0:]
    try:
        c = cho_factor(K00, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularBlock("conditioning block is not positive definite") from exc
    A = cho_solve(c, K01).T  # K10 K00^{-1}, using symmetry of the joint
    K_cond = K11 - A @ K01
    return RegressionSplit(A, 0.5 * (K_cond + K_cond.T))


def abs_moment_normal(mu: float, sigma: float) -> float:
    """E|Z| for Z ~ N(mu, sigma^2), in closed form.

    E|Z| = sigma sqrt(2/pi) exp(-mu^2 / (2 sigma^2)) + mu erf(mu / (sigma sqrt 2)).
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0.0:
        return abs(mu)
    z = mu / sigma
    return sigma * math.sqrt(2.0 / math.pi) * math.exp(-0.5 * z * z) + mu * erf(
        z / math.sqrt(2.0)
    )


def expected_abs_det_mc(
    column_covariance: np.ndarray,
    m: int,
    trials: int,
    stream: RngStream,
    mean: np.ndarray | None = None,
):
    """Monte Carlo E|det G| for G with iid columns ~ N(0, column_covariance).

    Returns (estimate, stderr). An optional mean matrix shifts G (used for
    noncentral conditional Jacobians); the columns stay independent.
    """
    cov = np.asarray(column_covariance, dtype=float)
    if cov.shape != (m, m):
        raise DimensionMismatch(f"column covariance {cov.shape}, expected ({m}, {m})")
    if trials < 2:
        raise ValueError("trials must be at least 2")
    F = psd_factor(cov)
    z = stream.normals((trials, F.shape[1], m))
    g = F @ z
    if mean is not None:
        g = g + np.asarray(mean, dtype=float)
    d = np.abs(np.linalg.det(g))
    est = float(d.mean())
    stderr = float(d.std(ddof=1) / math.sqrt(trials))
    return est, stderr
