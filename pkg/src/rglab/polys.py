"""Kostlan random polynomial maps and the truncated Bargmann-Fock field.

A degree-d Kostlan map P: R^{m+1} -> R^k is

    P(x) = sum_{|alpha| = d} xi_alpha (d! / (alpha_0! ... alpha_m!))^{1/2} x^alpha

with xi_alpha iid standard normal k-vectors. Coefficients are stored already
multiplied by the square-root multinomial weight, so evaluation is a plain
monomial sum and the coefficient of index alpha has component variance
(d choose alpha).

The rescaled field X_d(u) = P(1, u/sqrt(d)) converges to the Bargmann-Fock
field X_inf(u) = sum_beta xi_beta u^beta with xi_beta ~ N(0, 1/beta!);
sampling truncates the series at total degree N with an explicit tail bound.
"""

from __future__ import annotations

import json
import math

import numpy as np
from scipy.special import gammaln

from .errors import DimensionMismatch, DomainError
from .streams import RngStream

MULTI_INDEX_ORDER = "graded-lex"


def enumerate_multi_indices(nvars: int, degree: int) -> np.ndarray:
    """All exponent tuples with |alpha| = degree, graded-lex ordered.

    Within the fixed total degree the order is lexicographic with the first
    variable most significant, so (2,0) precedes (1,1) precedes (0,2).
    Returns an integer array of shape (C(degree+nvars-1, nvars-1), nvars).
    """
    if nvars < 1 or degree < 0:
        raise ValueError("need nvars >= 1 and degree >= 0")
    if nvars == 1:
        return np.array([[degree]], dtype=np.int64)
    rows = []
    for e0 in range(degree, -1, -1):
        tail = enumerate_multi_indices(nvars - 1, degree - e0)
        head = np.full((tail.shape[0], 1), e0, dtype=np.int64)
        rows.append(np.hstack([head, tail]))
    return np.vstack(rows)


def enumerate_multi_indices_affine(nvars: int, max_degree: int) -> np.ndarray:
    """All exponent tuples with |beta| <= max_degree, degree-major graded-lex."""
    blocks = [enumerate_multi_indices(nvars, j) for j in range(max_degree + 1)]
    return np.vstack(blocks)


def _log_multinomial(degree: int, exps: np.ndarray) -> np.ndarray:
    # log of d!/(alpha_0! ... alpha_m!) per row
    return gammaln(degree + 1.0) - gammaln(exps + 1.0).sum(axis=1)


class PolyMap:
    """Dense polynomial map R^nvars -> R^k with explicit monomial support."""

    def __init__(self, exps: np.ndarray, coeffs: np.ndarray):
        exps = np.asarray(exps, dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None]
        if exps.ndim != 2 or coeffs.shape[0] != exps.shape[0]:
            raise DimensionMismatch("coefficient rows must match multi-index rows")
        self.exps = exps
        self.coeffs = coeffs
        self.nvars = exps.shape[1]
        self.k = coeffs.shape[1]
        self.max_exp = int(exps.max()) if exps.size else 0

    def _monomials(self, x: np.ndarray) -> np.ndarray:
        # power-table product; avoids an (N, terms, nvars) intermediate
        n = x.shape[0]
        mono = np.ones((n, self.exps.shape[0]))
        p = np.arange(self.max_exp + 1)
        for j in range(self.nvars):
            table = x[:, j][:, None] ** p[None, :]
            mono *= table[:, self.exps[:, j]]
        return mono

    def eval(self, x: np.ndarray) -> np.ndarray:
        """Values at one point (nvars,) -> (k,) or a batch (N, nvars) -> (N, k)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if pts.shape[1] != self.nvars:
            raise DimensionMismatch(f"points have dim {pts.shape[1]}, map expects {self.nvars}")
        vals = self._monomials(pts) @ self.coeffs
        return vals[0] if single else vals

    def eval_and_grad(self, x: np.ndarray):
        """Values and Jacobians: ((k,), (k, nvars)) or ((N, k), (N, k, nvars))."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if pts.shape[1] != self.nvars:
            raise DimensionMismatch(f"points have dim {pts.shape[1]}, map expects {self.nvars}")
        n = pts.shape[0]
        p = np.arange(self.max_exp + 1)
        tables = [pts[:, j][:, None] ** p[None, :] for j in range(self.nvars)]
        mono = np.ones((n, self.exps.shape[0]))
        for j in range(self.nvars):
            mono *= tables[j][:, self.exps[:, j]]
        vals = mono @ self.coeffs
        jac = np.empty((n, self.k, self.nvars))
        for j in range(self.nvars):
            dmono = np.ones((n, self.exps.shape[0]))
            for j2 in range(self.nvars):
                e = self.exps[:, j2]
                if j2 == j:
                    e = np.maximum(e - 1, 0)
                dmono *= tables[j2][:, e]
            dmono *= self.exps[:, j]  # zero exponent kills the shifted term
            jac[:, :, j] = dmono @ self.coeffs
        return (vals[0], jac[0]) if single else (vals, jac)


class HomogeneousPolyMap(PolyMap):
    """Degree-d homogeneous map R^{m+1} -> R^k in graded-lex storage."""

    def __init__(self, m: int, k: int, d: int, coeffs: np.ndarray):
        exps = enumerate_multi_indices(m + 1, d)
        super().__init__(exps, coeffs)
        if self.k != k:
            raise DimensionMismatch(f"coefficients have k={self.k}, declared {k}")
        self.m = m
        self.d = d

    def affine_chart(self) -> PolyMap:
        """Restriction to the chart x0 = 1, as a polynomial in the last m variables."""
        return PolyMap(self.exps[:, 1:], self.coeffs)


def sample_kostlan(m: int, k: int, d: int, stream: RngStream) -> HomogeneousPolyMap:
    """Draw a Kostlan map: coefficient variance (d choose alpha) per component."""
    exps = enumerate_multi_indices(m + 1, d)
    weights = np.exp(0.5 * _log_multinomial(d, exps))
    xi = stream.normals((exps.shape[0], k))
    return HomogeneousPolyMap(m, k, d, weights[:, None] * xi)


def eval_and_grad(P: PolyMap, x: np.ndarray):
    return P.eval_and_grad(x)


class IsotropicMixtureSample:
    """Sum of independent homogeneous parts of different degrees on R^2.

    Part l is a degree-l Kostlan sample scaled by sqrt(c_l), so the
    restriction to the unit circle has covariance sum_l c_l cos^l(theta-phi).
    """

    def __init__(self, parts):
        self.parts = tuple(parts)
        for p in self.parts:
            if p.m != 1 or p.k != 1:
                raise DimensionMismatch("mixture parts must be scalar binary forms")

    def eval_circle(self, theta):
        theta = np.asarray(theta, dtype=float)
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        out = sum(p.eval(pts)[:, 0] for p in self.parts)
        return float(out[0]) if single else out


def sample_isotropic_mixture(coefficients, stream: RngStream) -> IsotropicMixtureSample:
    """Draw a field on the circle with covariance sum_l c_l cos^l of the angle gap."""
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.ndim != 1 or coefficients.size == 0:
        raise ValueError("coefficients must be a nonempty 1-D sequence")
    if np.any(coefficients < 0):
        raise ValueError("mixture coefficients must be nonnegative")
    if not np.any(coefficients > 0):
        raise ValueError("at least one mixture coefficient must be positive")
    parts = []
    for ell, c in enumerate(coefficients):
        if c == 0.0:
            continue
        part = sample_kostlan(1, 1, ell, stream.child(ell))
        parts.append(HomogeneousPolyMap(1, 1, ell, math.sqrt(c) * part.coeffs))
    return IsotropicMixtureSample(parts)


def rescaled_eval(P: HomogeneousPolyMap, u: np.ndarray) -> np.ndarray:
    """Rescaled Kostlan field X_d(u) = P(1, u / sqrt(d))."""
    if P.d < 1:
        raise ValueError("rescaling requires degree >= 1")
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    pts = u[None, :] if single else u
    if pts.shape[1] != P.m:
        raise DimensionMismatch(f"points have dim {pts.shape[1]}, expected m={P.m}")
    lifted = np.hstack([np.ones((pts.shape[0], 1)), pts / math.sqrt(P.d)])
    vals = P.eval(lifted)
    return vals[0] if single else vals


def bf_truncation_order(m: int, radius: float, eps: float) -> int:
    """Smallest N with sum_{j>N} (m R^2)^j / j! <= eps on the radius-R ball."""
    if radius <= 0 or eps <= 0:
        raise ValueError("radius and eps must be positive")
    t = m * radius * radius
    n = 0
    while True:
        if _exp_tail(t, n) <= eps:
            return n
        n += 1
        if n > 10_000:
            raise RuntimeError("truncation order search did not converge")


def _exp_tail(t: float, n: int) -> float:
    # sum_{j > n} t^j / j!, summed forward so there is no cancellation
    if t == 0.0:
        return 0.0
    log_term = (n + 1) * math.log(t) - math.lgamma(n + 2)
    term = math.exp(log_term)
    total = 0.0
    j = n + 1
    while term > total * 1e-18 + 1e-320:
        total += term
        j += 1
        term *= t / j
    return total


class BargmannFockSample(PolyMap):
    """Truncated Bargmann-Fock draw: coefficients xi_beta ~ N(0, 1/beta! I_k).

    Valid on |u| <= radius, where the discarded tail variance is at most eps;
    evaluation outside raises DomainError instead of extrapolating.
    """

    def __init__(self, m: int, k: int, order: int, coeffs: np.ndarray, radius: float):
        exps = enumerate_multi_indices_affine(m, order)
        super().__init__(exps, coeffs)
        self.m = m
        self.order = order
        self.radius = float(radius)
        self.eps = _exp_tail(m * radius * radius, order)

    def _check_domain(self, x: np.ndarray):
        pts = x[None, :] if x.ndim == 1 else x
        r = np.sqrt((pts * pts).sum(axis=1))
        if r.max() > self.radius * (1 + 1e-12):
            raise DomainError(
                f"point radius {r.max():.6g} exceeds validity radius {self.radius:.6g}"
            )

    def eval(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        return super().eval(x)

    def eval_and_grad(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        return super().eval_and_grad(x)


def sample_bargmann_fock(
    m: int, k: int, N: int, stream: RngStream, radius: float = 1.0
) -> BargmannFockSample:
    """Draw the order-N truncation of the Bargmann-Fock field."""
    if N < 0:
        raise ValueError("truncation order must be nonnegative")
    exps = enumerate_multi_indices_affine(m, N)
    sd = np.exp(-0.5 * gammaln(exps + 1.0).sum(axis=1))
    xi = stream.normals((exps.shape[0], k))
    return BargmannFockSample(m, k, N, sd[:, None] * xi, radius)


# ------------------------------------------------------------- serialization

def polymap_to_json(P: HomogeneousPolyMap) -> str:
    """Serialize with 17-significant-digit decimals (bit-exact on re-parse)."""
    coeffs = ", ".join(format(c, ".17g") for c in P.coeffs.ravel(order="C"))
    return (
        f'{{"m": {P.m}, "k": {P.k}, "d": {P.d}, '
        f'"order": "{MULTI_INDEX_ORDER}", "coeffs": [{coeffs}]}}'
    )


def polymap_from_json(text: str) -> HomogeneousPolyMap:
    doc = json.loads(text)
    if doc.get("order") != MULTI_INDEX_ORDER:
        raise ValueError(f"unsupported multi-index order {doc.get('order')!r}")
    coeffs = np.array(doc["coeffs"], dtype=float).reshape(-1, doc["k"])
    return HomogeneousPolyMap(doc["m"], doc["k"], doc["d"], coeffs)
