"""Condition numbers of defining equations, reach-based equations, Betti
bounds, the sharp lower-bound family, semicontinuity checks, and tensor
Chebyshev approximation.

The condition number of f on a domain D is kappa_l = nu_l / min(m, delta)
with nu_l the sup of the l-jet norm, m the boundary margin min_{dD}|f| and
delta = inf sqrt(f^2 + |grad f|^2). For a set Z with reach rho the canonical
equation f = g_rho(d_Z) built here satisfies kappa_1 <= 2(1 + 1/rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import CenterOverlap, ConcavityViolation, NonTransversalInstance
from .grids import GridFunction, marching_squares_components, sample_grid

# ---------------------------------------------------------- condition report

@dataclass(frozen=True)
class ConditionReport:
    nu0: float
    nu1: float
    m: float
    delta: float
    kappa0: float
    kappa1: float
    h: float


def condition_report(g: GridFunction, boundary_samples=None) -> ConditionReport:
    """Grid approximations of nu_0, nu_1, the boundary margin m, delta and
    the condition numbers kappa_l = nu_l / min(m, delta).

    boundary_samples: field values on the boundary of the intended domain;
    defaults to the values on the edge rows/columns of the grid box.
    """
    if g.grad_x is None or g.grad_y is None:
        raise ValueError("condition_report needs gradients on the grid")
    v, gx, gy = g.values, g.grad_x, g.grad_y
    jet = np.sqrt(v * v + gx * gx + gy * gy)
    nu0 = float(np.abs(v).max())
    nu1 = float(jet.max())
    delta = float(jet.min())
    if boundary_samples is None:
        boundary = np.concatenate([v[0, :], v[-1, :], v[:, 0], v[:, -1]])
    else:
        boundary = np.asarray(boundary_samples, dtype=float).ravel()
    m = float(np.abs(boundary).min())
    denom = min(m, delta)
    if denom <= 0.0:
        kappa0 = kappa1 = float("inf")
    else:
        kappa0, kappa1 = nu0 / denom, nu1 / denom
    return ConditionReport(nu0, nu1, m, delta, kappa0, kappa1, g.h)


# --------------------------------------------------------------- reach bridge

def _bridge_q(x: np.ndarray) -> np.ndarray:
    # increasing concave profile on [0, 1]: q(0)=0, q(1)=2/3, q'(0)=1, q'(1)=0,
    # q''(0)=q''(1)=0 and q'' = -20 x^3 (1 - x) <= 0 throughout
    return x - x**5 + (2.0 / 3.0) * x**6


def _bridge_qp(x: np.ndarray) -> np.ndarray:
    return 1.0 - 5.0 * x**4 + 4.0 * x**5


@dataclass(frozen=True)
class BridgeProfile:
    """The odd ramp g: identity to rho/2, concave bridge, plateau 3 rho/4."""

    rho: float

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        rho = self.rho
        w = 0.375 * rho
        x = np.clip((a - 0.5 * rho) / w, 0.0, 1.0)
        out = np.where(a <= 0.5 * rho, a, 0.5 * rho + w * _bridge_q(x))
        return np.sign(s) * np.where(a >= 0.875 * rho, 0.75 * rho, out)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        rho = self.rho
        w = 0.375 * rho
        x = np.clip((a - 0.5 * rho) / w, 0.0, 1.0)
        out = np.where(a <= 0.5 * rho, 1.0, _bridge_qp(x))
        return np.where(a >= 0.875 * rho, 0.0, out)


class _ReachField:
    """f = g_rho(d_Z) with the chain-rule gradient."""

    def __init__(self, bridge: BridgeProfile, d_z, grad_d):
        self._bridge = bridge
        self._d_z = d_z
        self._grad_d = grad_d

    def __call__(self, pts):
        return self._bridge(np.asarray(self._d_z(pts), dtype=float))

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = np.asarray(self._d_z(pts), dtype=float)
        slope = self._bridge.derivative(d)
        if self._grad_d is not None:
            nd = np.asarray(self._grad_d(pts), dtype=float).reshape(-1, 2)
        else:
            step = 1e-6
            ex = np.array([step, 0.0])
            ey = np.array([0.0, step])
            nd = np.column_stack(
                [
                    (np.asarray(self._d_z(pts + ex)) - np.asarray(self._d_z(pts - ex))) / (2 * step),
                    (np.asarray(self._d_z(pts + ey)) - np.asarray(self._d_z(pts - ey))) / (2 * step),
                ]
            )
        return slope.reshape(-1, 1) * nd


@dataclass(frozen=True)
class ReachEquation:
    signed_distance: object
    rho: float
    bridge: BridgeProfile
    f: _ReachField


def reach_equation(d_z, rho: float, grad_d=None) -> ReachEquation:
    """Defining equation f = g_rho(d_Z) for a set of reach rho.

    g_rho is the identity up to rho/2, a concave C^2 bridge on
    [rho/2, 7 rho/8], and the constant 3 rho/4 beyond; all bridge invariants
    (identity segment, plateau, oddness, slope in [0, 1], concavity on a
    1e-3 grid) are verified numerically before the field is returned.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    bridge = BridgeProfile(rho)
    _verify_bridge(bridge)
    return ReachEquation(d_z, rho, bridge, _ReachField(bridge, d_z, grad_d))


def _verify_bridge(bridge: BridgeProfile):
    rho = bridge.rho
    step = 1e-3 * rho
    s = np.arange(0.0, 2.0 * rho + step, step)
    g = bridge(s)
    gp = bridge.derivative(s)
    ramp = s <= 0.5 * rho
    if np.abs(g[ramp] - s[ramp]).max() > 1e-12 * rho:
        raise ConcavityViolation("bridge does not reduce to the identity below rho/2")
    flat = s >= 0.875 * rho
    if np.abs(g[flat] - 0.75 * rho).max() > 1e-12 * rho:
        raise ConcavityViolation("bridge does not plateau at 3 rho/4")
    if np.abs(bridge(-s) + g).max() > 1e-12 * rho:
        raise ConcavityViolation("bridge is not odd")
    if gp.min() < -1e-12 or gp.max() > 1.0 + 1e-12:
        raise ConcavityViolation("bridge slope leaves [0, 1]")
    second = (gp[2:] - gp[:-2]) / (2.0 * step)
    if second.max() > 1e-9:
        raise ConcavityViolation(f"bridge second derivative reaches {second.max():.3e} > 1e-9")


# ---------------------------------------------------------------- the bounds

def milnor_thom_bound(d: float, n: int) -> float:
    """d (2d - 1)^(n-1): total Betti bound for a degree-d hypersurface in R^n."""
    if d <= 0 or n <= 0:
        raise ValueError("parameters must be positive")
    return float(d * (2 * d - 1) ** (n - 1))


def witdash_bound(kappa1: float, n: int, a0: float) -> float:
    """(a0 kappa_1 + 1)^n: Betti bound through the approximation degree."""
    if kappa1 <= 0 or n <= 0 or a0 <= 0:
        raise ValueError("parameters must be positive")
    return float((a0 * kappa1 + 1.0) ** n)


def reach_bound(rho: float, n: int, c2: float) -> float:
    """c2 (1 + 1/rho)^n: Betti bound for a set of reach rho."""
    if rho <= 0 or n <= 0 or c2 <= 0:
        raise ValueError("parameters must be positive")
    return float(c2 * (1.0 + 1.0 / rho) ** n)


def bounds(kind: str, **params) -> float:
    dispatch = {
        "milnor_thom": milnor_thom_bound,
        "witdash": witdash_bound,
        "reach": reach_bound,
    }
    if kind not in dispatch:
        raise ValueError(f"unknown bound kind {kind!r}; expected one of {sorted(dispatch)}")
    return dispatch[kind](**params)


# ----------------------------------------------------------- the sharp family

class DiskBaseField:
    """Radial base equation: -1 inside r=0.2, +1 outside r=0.8, zero at r=0.5.

    The profile is the quintic smoothstep, so the gradient is continuous and
    the field is identically 1 near and outside the unit circle.
    """

    def __call__(self, pts):
        r = np.hypot(*np.asarray(pts, dtype=float).reshape(-1, 2).T)
        t = np.clip((r - 0.2) / 0.6, 0.0, 1.0)
        return -1.0 + 2.0 * (10.0 * t**3 - 15.0 * t**4 + 6.0 * t**5)

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        r = np.hypot(pts[:, 0], pts[:, 1])
        t = np.clip((r - 0.2) / 0.6, 0.0, 1.0)
        dgdr = (2.0 / 0.6) * 30.0 * t**2 * (1.0 - t) ** 2
        safe = np.where(r > 0.0, r, 1.0)
        return (dgdr / safe).reshape(-1, 1) * pts


class SharpFamilyField:
    """f_k = 1 - #centers + sum_i base(k (x - z_i)): shrunken copies of the base."""

    def __init__(self, base, k: float, centers: np.ndarray):
        self.base = base
        self.k = float(k)
        self.centers = np.asarray(centers, dtype=float).reshape(-1, 2)

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = np.full(pts.shape[0], 1.0 - self.centers.shape[0])
        for z in self.centers:
            out += self.base(self.k * (pts - z))
        return out

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = np.zeros_like(pts)
        for z in self.centers:
            out += self.k * self.base.gradient(self.k * (pts - z))
        return out


def sharp_family(base, k: float, centers) -> SharpFamilyField:
    """Plant shrunken copies of the base zero set at the given centers.

    Centers must be separated by more than 2/k so the supports (radius 1/k)
    stay disjoint; then b0 of the zero set is #centers times that of the base
    while kappa_1 grows at most linearly in k.
    """
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    if k <= 0:
        raise ValueError("k must be positive")
    for i in range(centers.shape[0]):
        for j in range(i + 1, centers.shape[0]):
            if np.hypot(*(centers[i] - centers[j])) <= 2.0 / k:
                raise CenterOverlap(f"centers {i} and {j} are closer than 2/k")
    return SharpFamilyField(base, k, centers)


def lattice_centers(k: float, count: int) -> np.ndarray:
    """The `count` lattice points of spacing 2.05/k nearest the origin.

    Spacing exceeds the 2/k separation requirement of sharp_family; with
    count ~ k^2/4 all selected centers keep their 1/k support inside the
    unit disk.
    """
    spacing = 2.05 / k
    reach = int(math.ceil(1.0 / spacing)) + 1
    ii, jj = np.meshgrid(np.arange(-reach, reach + 1), np.arange(-reach, reach + 1))
    pts = spacing * np.column_stack([ii.ravel(), jj.ravel()]).astype(float)
    radii = np.hypot(pts[:, 0], pts[:, 1])
    order = np.lexsort((pts[:, 1], pts[:, 0], radii))
    pts = pts[order]
    if count > pts.shape[0]:
        raise ValueError("not enough lattice points inside the disk")
    chosen = pts[:count]
    if np.hypot(chosen[:, 0], chosen[:, 1]).max() + 1.0 / k >= 1.0:
        raise ValueError(f"{count} centers do not fit inside the unit disk at k={k}")
    return chosen


# ------------------------------------------------------------- semicontinuity

@dataclass(frozen=True)
class SemicontinuityVerdict:
    passed: bool
    b0_before: int
    b0_after: int
    sup_perturbation: float
    margin: float


class _SumField:
    def __init__(self, f, g):
        self._f, self._g = f, g

    def __call__(self, pts):
        return np.asarray(self._f(pts), dtype=float) + np.asarray(self._g(pts), dtype=float)


def semicontinuity_check(f, g, box, h: float) -> SemicontinuityVerdict:
    """Verify b0(Z(f)) <= b0(Z(f + g)) for a perturbation below the margin.

    The margin is min(m, delta) of f on the grid; perturbations at or above
    it are rejected (the monotonicity statement has no force there). Either
    field failing the grid transversality test raises NonTransversalInstance
    so the caller can skip the draw rather than record a bogus verdict.
    """
    grid_f = sample_grid(f, box, h)
    report = condition_report(grid_f)
    margin = min(report.m, report.delta)

    grid_g = sample_grid(g, box, h)
    sup_g = float(np.abs(grid_g.values).max())
    if sup_g >= margin:
        raise ValueError(f"sup|g| = {sup_g:.3e} is not below the margin {margin:.3e}")

    contour_before = marching_squares_components(grid_f)
    if not contour_before.transversal:
        raise NonTransversalInstance("base field is not transversal on the grid")
    perturbed = GridFunction(grid_f.box, h, grid_f.values + grid_g.values)
    contour_after = marching_squares_components(perturbed)
    if not contour_after.transversal:
        raise NonTransversalInstance("perturbed field is not transversal on the grid")

    b0_before = contour_before.n_components
    b0_after = contour_after.n_components
    return SemicontinuityVerdict(b0_before <= b0_after, b0_before, b0_after, sup_g, margin)


# --------------------------------------------------- Chebyshev approximation

class ChebyshevPoly2:
    """Tensor Chebyshev interpolant on a box, evaluated via chebval2d."""

    def __init__(self, coef: np.ndarray, box):
        self.coef = coef
        self.box = box

    def _map(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        (x0, x1), (y0, y1) = self.box
        u = (2.0 * pts[:, 0] - (x0 + x1)) / (x1 - x0)
        v = (2.0 * pts[:, 1] - (y0 + y1)) / (y1 - y0)
        return u, v

    def __call__(self, pts):
        u, v = self._map(pts)
        return C.chebval2d(u, v, self.coef)


def chebyshev_approximate(f, box, degree: int):
    """Tensor Chebyshev interpolant of per-axis degree d, plus its sup error.

    Interpolation at the degree-(d+1) Chebyshev-Gauss nodes reproduces
    polynomials of degree <= d exactly; the sup error is measured on a
    4x finer uniform grid over the box.
    """
    (x0, x1), (y0, y1) = box
    n = degree + 1
    theta = np.pi * (2.0 * np.arange(n) + 1.0) / (2.0 * n)
    u = np.cos(theta)
    xs = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * u
    ys = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * u
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    samples = np.asarray(f(pts), dtype=float).reshape(n, n)

    basis = np.cos(np.outer(np.arange(n), theta)) * (2.0 / n)
    basis[0, :] *= 0.5
    coef = basis @ samples @ basis.T
    poly = ChebyshevPoly2(coef, box)

    m = 4 * n
    fx = np.linspace(x0, x1, m)
    fy = np.linspace(y0, y1, m)
    fgx, fgy = np.meshgrid(fx, fy, indexing="ij")
    fpts = np.column_stack([fgx.ravel(), fgy.ravel()])
    ref = np.asarray(f(fpts), dtype=float).ravel()
    sup_error = float(np.abs(ref - poly(fpts)).max())
    return poly, sup_error
