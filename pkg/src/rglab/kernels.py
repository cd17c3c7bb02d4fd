"""Covariance kernels of the sampled fields, with exact derivatives.

All variants are scalar profiles times the k x k identity:

    kostlan(d)          K(x, y) = (x . y)^d            x, y in R^{m+1}
    dehomogenized(d)    K(u, v) = (1 + u . v)^d        u, v in R^m
    rescaled(d)         K(u, v) = (1 + u . v / d)^d    u, v in R^m
    bargmann_fock       K(u, v) = exp(u . v)           u, v in R^m
    isotropic_series    K(a, b) = sum_l c_l cos^l(a-b) angles on the circle

The joint covariance of (X(u), grad X(u)) needed by the Kac-Rice integrand
comes from differentiating these profiles analytically: for K = phi(u . v),

    Cov(X, d_j X)   = u_j phi'(|u|^2)
    Cov(d_i X, d_j X) = delta_ij phi'(|u|^2) + u_i u_j phi''(|u|^2),

and for the stationary series psi(s) = sum_l c_l cos^l(s),

    Var X = psi(0),  Cov(X, X') = 0,  Var X' = -psi''(0) = sum_l l c_l.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .errors import DimensionMismatch

# Central-difference step for derivative sup distances (diagnostic only).
KERNEL_FD_STEP = 1e-4

_VARIANTS = ("kostlan", "dehomogenized", "rescaled", "bargmann_fock", "isotropic_series")


@dataclass(frozen=True)
class KernelSpec:
    variant: str
    k: int = 1
    d: int | None = None
    coefficients: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if self.variant in ("kostlan", "dehomogenized", "rescaled"):
            if self.d is None or self.d < 0:
                raise ValueError(f"variant {self.variant} needs a degree d >= 0")
        if self.variant == "isotropic_series":
            if self.coefficients is None or any(c < 0 for c in self.coefficients):
                raise ValueError("isotropic_series needs coefficients c_l >= 0")


def kostlan_kernel(d: int, k: int = 1) -> KernelSpec:
    return KernelSpec("kostlan", k=k, d=d)


def dehomogenized_kernel(d: int, k: int = 1) -> KernelSpec:
    return KernelSpec("dehomogenized", k=k, d=d)


def rescaled_kernel(d: int, k: int = 1) -> KernelSpec:
    return KernelSpec("rescaled", k=k, d=d)


def bargmann_fock_kernel(k: int = 1) -> KernelSpec:
    return KernelSpec("bargmann_fock", k=k)


def isotropic_series_kernel(coefficients, k: int = 1) -> KernelSpec:
    return KernelSpec("isotropic_series", k=k, coefficients=tuple(float(c) for c in coefficients))


def _falling(d: int, r: int) -> float:
    # d (d-1) ... (d-r+1)
    out = 1.0
    for i in range(r):
        out *= d - i
    return out


def scalar_profile(spec: KernelSpec, s, order: int = 0):
    """phi^(order)(s) for the dot-product variants (s = u . v)."""
    s = np.asarray(s, dtype=float)
    d = spec.d
    if spec.variant == "kostlan":
        if order > d:
            return np.zeros_like(s)
        return _falling(d, order) * s ** (d - order)
    if spec.variant == "dehomogenized":
        if order > d:
            return np.zeros_like(s)
        return _falling(d, order) * (1.0 + s) ** (d - order)
    if spec.variant == "rescaled":
        if order > d:
            return np.zeros_like(s)
        return (_falling(d, order) / d**order) * (1.0 + s / d) ** (d - order)
    if spec.variant == "bargmann_fock":
        return np.exp(s)
    raise ValueError(f"variant {spec.variant} has no dot-product profile")


def _series_psi(coefficients, s, order: int = 0):
    # psi(s) = sum_l c_l cos^l(s) and its first two derivatives
    s = np.asarray(s, dtype=float)
    c, si = np.cos(s), np.sin(s)
    out = np.zeros_like(s)
    for ell, cl in enumerate(coefficients):
        if cl == 0.0:
            continue
        if order == 0:
            out += cl * c**ell
        elif order == 1:
            if ell >= 1:
                out += cl * (-ell * c ** (ell - 1) * si)
        elif order == 2:
            if ell >= 2:
                out += cl * ell * (ell - 1) * c ** (ell - 2) * si**2
            if ell >= 1:
                out += cl * (-ell * c**ell)
        else:
            raise ValueError("series derivatives implemented up to order 2")
    return out


def _point_dim(spec: KernelSpec, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise DimensionMismatch("kernel points must be vectors or scalars")
    return x


def kernel_eval(spec: KernelSpec, x, y) -> np.ndarray:
    """K(x, y) as a k x k matrix (scalar profile times identity)."""
    x = _point_dim(spec, x)
    y = _point_dim(spec, y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"point dims {x.shape} vs {y.shape}")
    if spec.variant == "isotropic_series":
        if x.size != 1:
            raise DimensionMismatch("isotropic_series points are angles (dim 1)")
        val = float(_series_psi(spec.coefficients, x[0] - y[0]))
    else:
        val = float(scalar_profile(spec, float(x @ y)))
    return val * np.eye(spec.k)


def joint_field_gradient_cov(spec: KernelSpec, u) -> np.ndarray:
    """Covariance of (X(u), d_1 X(u), ..., d_m X(u)) for one component.

    Exact analytic formulas per variant; the isotropic series is stationary
    on the circle, so u enters only through the angle (and drops out).
    """
    u = _point_dim(spec, u)
    if spec.variant == "isotropic_series":
        if u.size != 1:
            raise DimensionMismatch("isotropic_series points are angles (dim 1)")
        k00 = float(_series_psi(spec.coefficients, 0.0))
        k11 = float(-_series_psi(spec.coefficients, 0.0, order=2))
        return np.array([[k00, 0.0], [0.0, k11]])
    if spec.variant == "kostlan":
        raise DimensionMismatch(
            "kostlan is homogeneous ambient; restrict to the circle with "
            "isotropic_series([0]*d + [1]) or use the dehomogenized chart"
        )
    m = u.size
    s = float(u @ u)
    p0 = float(scalar_profile(spec, s))
    p1 = float(scalar_profile(spec, s, 1))
    p2 = float(scalar_profile(spec, s, 2))
    cov = np.empty((m + 1, m + 1))
    cov[0, 0] = p0
    cov[0, 1:] = u * p1
    cov[1:, 0] = u * p1
    cov[1:, 1:] = p1 * np.eye(m) + p2 * np.outer(u, u)
    return cov


def _lift(spec: KernelSpec, u: np.ndarray) -> np.ndarray:
    # kostlan is compared on the affine chart x0 = 1
    if spec.variant == "kostlan":
        return np.concatenate([[1.0], u])
    return u


def _fd_mixed(spec: KernelSpec, x, y, ax, ay, h: float) -> float:
    # nested central differences along axis lists ax (in x) and ay (in y)
    if ax:
        j = ax[0]
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        return (_fd_mixed(spec, xp, y, ax[1:], ay, h) - _fd_mixed(spec, xm, y, ax[1:], ay, h)) / (
            2 * h
        )
    if ay:
        j = ay[0]
        yp, ym = y.copy(), y.copy()
        yp[j] += h
        ym[j] -= h
        return (_fd_mixed(spec, x, yp, ax, ay[1:], h) - _fd_mixed(spec, x, ym, ax, ay[1:], h)) / (
            2 * h
        )
    return kernel_eval(spec, _lift(spec, x), _lift(spec, y))[0, 0]


def _axis_lists(dim: int, r: int):
    out = [()]
    if r >= 1:
        out += [(j,) for j in range(dim)]
    if r >= 2:
        out += [(i, j) for i in range(dim) for j in range(i, dim)]
    return out


def kernel_sup_distance(spec_a: KernelSpec, spec_b: KernelSpec, grid, deriv_order: int = 0) -> float:
    """sup over grid pairs of the max-norm gap of mixed partials up to (r, r).

    Central differences with step 1e-4; kostlan variants are lifted to the
    chart x0 = 1 so they are comparable with the affine variants.
    """
    if deriv_order not in (0, 1, 2):
        raise ValueError("deriv_order must be 0, 1, or 2")
    pts = np.asarray(grid, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    dim = pts.shape[1]
    h = KERNEL_FD_STEP
    worst = 0.0
    axes = _axis_lists(dim, deriv_order)
    for x in pts:
        for y in pts:
            for ax in axes:
                for ay in axes:
                    if deriv_order == 0 and (ax or ay):
                        continue
                    va = _fd_mixed(spec_a, x, y, list(ax), list(ay), h)
                    vb = _fd_mixed(spec_b, x, y, list(ax), list(ay), h)
                    worst = max(worst, abs(va - vb))
    return worst
