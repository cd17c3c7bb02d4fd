"""Kac-Rice expected zero counts: closed forms and numerical quadrature.

The counting formula integrates a density over the parameter domain:

    E #X^{-1}(t) = integral_M E{ |det d_u X| | X(u) = t } rho_{X(u)}(t) du.

For isotropic fields on the sphere (covariance K(x . y)) everything reduces
to the two moment matrices Sigma_0 = K(1) and Sigma_1 = K'(1):

    E #X^{-1}(y) = 2 sqrt(det Sigma_1 / det Sigma_0) exp(-y^T Sigma_0^{-1} y / 2)

for point targets, with the submanifold version integrating
2 sqrt(det(nu^T Sigma_1 nu)) rho over W against its volume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateAtPoint,
    DimensionMismatch,
    NonOrthonormalFraming,
    SingularCovariance,
)
from .gaussian import abs_moment_normal, expected_abs_det_mc, gaussian_density, regression_split
from .kernels import KernelSpec, joint_field_gradient_cov
from .streams import RngStream

QUAD_NODES_PER_UNIT = 32


@dataclass(frozen=True)
class IsotropicMoments:
    sigma0: np.ndarray
    sigma1: np.ndarray

    @property
    def k(self) -> int:
        return self.sigma0.shape[0]


def isotropic_moments(series: Sequence, k: int = 1) -> IsotropicMoments:
    """Moments Sigma_0 = K(1), Sigma_1 = K'(1) of K(t) = sum_l c_l t^l.

    Coefficients may be scalars (scalar profile times identity) or k x k
    PSD matrices K_l; then Sigma_0 = sum K_l and Sigma_1 = sum_l l K_l.
    """
    terms = [np.asarray(c, dtype=float) for c in series]
    if not terms:
        raise ValueError("series must be nonempty")
    if terms[0].ndim == 0:
        if any(t < 0 for t in terms):
            raise ValueError("scalar series coefficients must be nonnegative")
        s0 = float(sum(terms))
        s1 = float(sum(ell * t for ell, t in enumerate(terms)))
        return IsotropicMoments(s0 * np.eye(k), s1 * np.eye(k))
    s0 = sum(terms)
    s1 = sum(ell * t for ell, t in enumerate(terms))
    if s0.shape != (k, k):
        raise DimensionMismatch(f"matrix coefficients have shape {terms[0].shape}, expected ({k}, {k})")
    return IsotropicMoments(np.asarray(s0, dtype=float), np.asarray(s1, dtype=float))


def _det_ratio_sqrt(sigma1: np.ndarray, sigma0: np.ndarray) -> float:
    sign0, logdet0 = np.linalg.slogdet(sigma0)
    if sign0 <= 0:
        raise SingularCovariance("Sigma_0 must be positive definite")
    sign1, logdet1 = np.linalg.slogdet(sigma1)
    if sign1 <= 0:
        return 0.0
    return math.exp(0.5 * (logdet1 - logdet0))


def isotropic_point_expectation(mom: IsotropicMoments, y) -> float:
    """2 sqrt(det Sigma_1 / det Sigma_0) exp(-y^T Sigma_0^{-1} y / 2)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape[0] != mom.k:
        raise DimensionMismatch(f"target dim {y.shape[0]} != k = {mom.k}")
    ratio = _det_ratio_sqrt(mom.sigma1, mom.sigma0)
    if ratio == 0.0:
        return 0.0
    q = float(y @ np.linalg.solve(mom.sigma0, y))
    return 2.0 * ratio * math.exp(-0.5 * q)


def shub_smale_expectation(degrees: Sequence[int]) -> float:
    """sqrt(d_1 ... d_m): expected projective solution count of a square system."""
    degrees = list(degrees)
    if not degrees or any(d < 1 for d in degrees):
        raise ValueError("degrees must be integers >= 1")
    return math.sqrt(math.prod(degrees))


@dataclass(frozen=True)
class MixedKostlanSpec:
    """Mixture sum_l A_l psi_l of independent degree-l Kostlan maps."""

    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "matrices", tuple(np.atleast_2d(np.asarray(a, dtype=float)) for a in self.matrices)
        )


def mixed_kostlan_expectation(spec: MixedKostlanSpec | Sequence) -> float:
    """2 sqrt(det(sum_l l A_l A_l^T) / det(sum_l A_l A_l^T))."""
    mats = spec.matrices if isinstance(spec, MixedKostlanSpec) else MixedKostlanSpec(tuple(spec)).matrices
    s0 = sum(a @ a.T for a in mats)
    s1 = sum(ell * (a @ a.T) for ell, a in enumerate(mats))
    return 2.0 * _det_ratio_sqrt(np.asarray(s1, float), np.asarray(s0, float))


# ------------------------------------------------------- submanifold targets

@dataclass(frozen=True)
class Chart:
    """One parameterized piece of the target W with its volume weight.

    dim 0: param() is the point itself (domain ignored).
    dim 1: param(t) -> point, domain (a, b), weight(t) = |gamma'(t)|.
    dim 2: param(t1, t2) -> point, domain ((a, b), (c, d)), weight = area factor.
    """

    dim: int
    param: Callable
    domain: tuple | None = None
    weight: Callable | None = None


@dataclass(frozen=True)
class NormalFraming:
    """Orthonormal normal frames nu(y) (k x codim) along W, plus charts."""

    normal_frame: Callable
    charts: tuple[Chart, ...]


def _gl_nodes(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _submanifold_integrand(mom: IsotropicMoments, y: np.ndarray, nu: np.ndarray) -> float:
    k = mom.k
    m = nu.shape[1]
    if nu.shape[0] != k:
        raise DimensionMismatch(f"normal frame is {nu.shape}, expected ({k}, codim)")
    if np.abs(nu.T @ nu - np.eye(m)).max() > 1e-9:
        raise NonOrthonormalFraming("normal frame columns are not orthonormal")
    sign0, logdet0 = np.linalg.slogdet(mom.sigma0)
    if sign0 <= 0:
        raise SingularCovariance("Sigma_0 must be positive definite")
    gram = nu.T @ mom.sigma1 @ nu
    signg, logdetg = np.linalg.slogdet(gram)
    if signg <= 0:
        return 0.0
    q = float(y @ np.linalg.solve(mom.sigma0, y))
    return (
        2.0
        * math.exp(0.5 * logdetg - 0.5 * q - 0.5 * logdet0)
        / (2.0 * math.pi) ** (0.5 * (k - m))
    )


def isotropic_submanifold_expectation(
    mom: IsotropicMoments, framing: NormalFraming, quad: int = 64
) -> float:
    """Expected count of X hitting W, integrated chart by chart (Gauss-Legendre)."""
    total = 0.0
    for chart in framing.charts:
        if chart.dim == 0:
            y = np.atleast_1d(np.asarray(chart.param(), dtype=float))
            total += _submanifold_integrand(mom, y, framing.normal_frame(y))
        elif chart.dim == 1:
            a, b = chart.domain
            ts, ws = _gl_nodes(a, b, quad)
            for t, w in zip(ts, ws):
                y = np.atleast_1d(np.asarray(chart.param(t), dtype=float))
                vol = chart.weight(t) if chart.weight is not None else 1.0
                total += w * vol * _submanifold_integrand(mom, y, framing.normal_frame(y))
        elif chart.dim == 2:
            (a, b), (c, d) = chart.domain
            t1, w1 = _gl_nodes(a, b, quad)
            t2, w2 = _gl_nodes(c, d, quad)
            for ti, wi in zip(t1, w1):
                for tj, wj in zip(t2, w2):
                    y = np.atleast_1d(np.asarray(chart.param(ti, tj), dtype=float))
                    vol = chart.weight(ti, tj) if chart.weight is not None else 1.0
                    total += wi * wj * vol * _submanifold_integrand(
                        mom, y, framing.normal_frame(y)
                    )
        else:
            raise ValueError("charts of dimension > 2 are not supported")
    return total


# ------------------------------------------------------------- 1-D densities

def kac_rice_density_1d(spec: KernelSpec, u: float, t: float = 0.0) -> float:
    """The Kac-Rice integrand E{|X'(u)| | X(u) = t} rho_{X(u)}(t) for scalar fields.

    The joint covariance of (X(u), X'(u)) comes from exact kernel derivatives;
    conditioning is Gaussian regression; the inner expectation is the folded
    normal mean.
    """
    if spec.k != 1:
        raise DimensionMismatch("density is for scalar fields (k = 1)")
    joint = joint_field_gradient_cov(spec, [u] if np.isscalar(u) else u)
    if joint.shape != (2, 2):
        raise DimensionMismatch("1-D density needs a 1-D parameter")
    k00 = joint[0, 0]
    if k00 <= 1e-14:
        raise DegenerateAtPoint(f"field variance {k00:.3e} at u = {u}")
    a, k_cond = regression_split(joint, 1)
    mean = float(a[0, 0]) * t
    sd = math.sqrt(max(float(k_cond[0, 0]), 0.0))
    return abs_moment_normal(mean, sd) * gaussian_density(np.array([[k00]]), [t])


def _density_point_md(
    spec: KernelSpec, u: np.ndarray, t: np.ndarray, mc_trials: int, stream: RngStream
):
    # k = m >= 2: conditional Jacobian rows are iid Gaussians; |det| by MC
    m = u.shape[0]
    k = spec.k
    if k != m:
        raise DimensionMismatch("point targets need dim(domain) = k")
    joint = joint_field_gradient_cov(spec, u)
    k00 = joint[0, 0]
    if k00 <= 1e-14:
        raise DegenerateAtPoint(f"field variance {k00:.3e} at u = {u}")
    a, k_cond = regression_split(joint, 1)
    row_mean = np.outer(t, a[:, 0])  # row i: conditional mean of grad X_i
    est, se = expected_abs_det_mc(k_cond, m, mc_trials, stream, mean=row_mean.T)
    rho = gaussian_density(k00 * np.eye(k), t)
    return est * rho, se * rho


def kac_rice_expectation(
    spec: KernelSpec,
    domain,
    t=0.0,
    quad_nodes: int = QUAD_NODES_PER_UNIT,
    mc_trials: int = 2000,
    stream: RngStream | None = None,
):
    """Integrate the Kac-Rice density over an interval or box.

    Composite Gauss-Legendre with quad_nodes per unit length and one halving
    refinement; the error estimate is the refinement delta plus (for vector
    fields, where the inner expectation is Monte Carlo) the integrated MC
    standard error. Returns (value, error_estimate).
    """
    domain = np.asarray(domain, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.size == 1 and spec.k > 1:
        t = np.full(spec.k, float(t[0]))
    if t.size != spec.k:
        raise DimensionMismatch(f"target level has dim {t.size}, field has k = {spec.k}")
    if domain.ndim == 1:
        a, b = domain
        coarse = _integrate_interval(spec, a, b, t, quad_nodes, 1, mc_trials, stream)
        fine = _integrate_interval(spec, a, b, t, quad_nodes, 2, mc_trials, stream)
        value, mc_err = fine
        return value, abs(fine[0] - coarse[0]) + mc_err
    if domain.shape == (2, 2):
        coarse = _integrate_box(spec, domain, t, quad_nodes, 1, mc_trials, stream)
        fine = _integrate_box(spec, domain, t, quad_nodes, 2, mc_trials, stream)
        value, mc_err = fine
        return value, abs(fine[0] - coarse[0]) + mc_err
    raise DimensionMismatch("domain must be an interval (a, b) or a 2x2 box")


def _panels(a: float, b: float, refine: int):
    n = max(1, math.ceil(abs(b - a))) * refine
    edges = np.linspace(a, b, n + 1)
    return zip(edges[:-1], edges[1:])


def _integrate_interval(spec, a, b, t, quad_nodes, refine, mc_trials, stream):
    total = 0.0
    mc_err = 0.0
    node_id = 0
    for pa, pb in _panels(a, b, refine):
        xs, ws = _gl_nodes(pa, pb, quad_nodes)
        for x, w in zip(xs, ws):
            if spec.k == 1:
                total += w * kac_rice_density_1d(spec, x, float(np.atleast_1d(t)[0]))
            else:
                sub = (stream or RngStream(0)).child(node_id)
                val, se = _density_point_md(
                    spec, np.array([x]), np.atleast_1d(np.asarray(t, float)), mc_trials, sub
                )
                total += w * val
                mc_err += w * se
            node_id += 1
    return total, mc_err


def _integrate_box(spec, box, t, quad_nodes, refine, mc_trials, stream):
    (a, b), (c, d) = box
    total = 0.0
    mc_err = 0.0
    node_id = 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    for pa, pb in _panels(a, b, refine):
        xs, wxs = _gl_nodes(pa, pb, quad_nodes)
        for pc, pd in _panels(c, d, refine):
            ys, wys = _gl_nodes(pc, pd, quad_nodes)
            for x, wx in zip(xs, wxs):
                for y, wy in zip(ys, wys):
                    sub = (stream or RngStream(0)).child(node_id)
                    val, se = _density_point_md(spec, np.array([x, y]), t, mc_trials, sub)
                    total += wx * wy * val
                    mc_err += wx * wy * se
                    node_id += 1
    return total, mc_err
