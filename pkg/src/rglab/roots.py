"""Exact-count root finding for sampled polynomial maps.

Per-instance counts are integers, not estimates: Sturm chains count distinct
real roots of univariate polynomials, Sylvester resultant elimination reduces
small bivariate systems, and a Monte-Carlo harness averages certified counts
across seeded samples.

The Sturm chains run in floating point with per-step coefficient
normalization. Whenever a remainder's leading coefficient degrades below
1e-12 of the remainder's scale the result is flagged certified=False and the
caller resamples; the resample rate is surfaced so the bias stays quantified.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P

from .errors import DegenerateSystem, ExcessiveResampling, ZeroPolynomial
from .polys import HomogeneousPolyMap, IsotropicMixtureSample
from .streams import RngStream

MAX_DEGREE = 64
LEAD_TOL = 1e-12
DEDUP_RADIUS = 1e-7
_MAX_ATTEMPTS = 64


@dataclass(frozen=True)
class UnivariatePoly:
    """Dense univariate polynomial, coefficients in ascending order, degree <= 64."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        if c.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        if c.size > MAX_DEGREE + 1:
            raise ValueError(f"degree {c.size - 1} exceeds the supported maximum {MAX_DEGREE}")
        object.__setattr__(self, "coefficients", c)

    def __call__(self, x):
        return P.polyval(x, self.coefficients)


@dataclass(frozen=True)
class CountResult:
    count: int
    certified: bool
    residual: float


def _trim_leading(c: np.ndarray, tol_scale: float):
    """Drop leading (highest-order) coefficients below tolerance; report if any."""
    tol = LEAD_TOL * tol_scale
    last = c.size - 1
    while last > 0 and abs(c[last]) <= tol:
        last -= 1
    return c[: last + 1], last < c.size - 1


def _sturm_chain(c: np.ndarray):
    """Sturm chain of c with per-step max-coefficient normalization.

    Returns (chain, degraded). degraded flags leading-coefficient loss in any
    remainder, which makes the endpoint sign pattern untrustworthy.
    """
    degraded = False
    chain = [c]
    if c.size > 1:
        d1 = P.polyder(c)
        d1 = d1 / np.abs(d1).max()
        chain.append(d1)
    while chain[-1].size > 1:
        _, rem = P.polydiv(chain[-2], chain[-1])
        rem = np.atleast_1d(rem)
        scale = np.abs(rem).max()
        if scale <= 1e-14:
            # chain terminated early: a nontrivial gcd (multiple roots) or
            # cancellation; either way the squarefree assumption is suspect
            degraded = True
            break
        nxt = -rem / scale
        nxt, dropped = _trim_leading(nxt, 1.0)
        degraded = degraded or dropped
        chain.append(nxt)
    return chain, degraded


def _variations(signs) -> int:
    signs = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(signs[:-1], signs[1:]) if a * b < 0)


def _variations_at_infinity(chain, positive: bool) -> int:
    signs = []
    for f in chain:
        lead = f[-1]
        deg = f.size - 1
        s = np.sign(lead)
        if not positive and deg % 2 == 1:
            s = -s
        signs.append(s)
    return _variations(signs)


def _variations_at(chain, x: float) -> int:
    return _variations([np.sign(P.polyval(x, f)) for f in chain])


def _poly_scale_at(c: np.ndarray, x) -> np.ndarray:
    return P.polyval(np.abs(x), np.abs(c))


def _newton_polish(c: np.ndarray, starts: np.ndarray, iters: int = 40):
    dc = P.polyder(c)
    x = np.asarray(starts, dtype=float).copy()
    for _ in range(iters):
        fx = P.polyval(x, c)
        dfx = P.polyval(x, dc)
        step = np.where(np.abs(dfx) > 1e-300, fx / np.where(dfx == 0, 1.0, dfx), 0.0)
        x = x - step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(x))):
            break
    res = np.abs(P.polyval(x, c))
    ok = res <= 1e-12 * np.maximum(1.0, _poly_scale_at(c, x))
    return x[ok], res[ok]


def _dedup_sorted(xs: np.ndarray, radius: float = DEDUP_RADIUS):
    if xs.size == 0:
        return xs
    xs = np.sort(xs)
    keep = [xs[0]]
    for v in xs[1:]:
        if v - keep[-1] > radius * (1.0 + abs(v)):
            keep.append(v)
    return np.asarray(keep)


def _bisection_roots(chain, c: np.ndarray, total: int):
    """Sturm-guided isolation: split until each interval holds one root."""
    if total == 0:
        return np.empty(0)
    bound = 1.0 + np.abs(c[:-1]).max() / abs(c[-1])
    work = [(-bound, bound, total)]
    roots = []
    while work:
        a, b, n = work.pop()
        if n == 0:
            continue
        if n == 1 or b - a < 1e-13 * (1.0 + abs(a) + abs(b)):
            roots.append(0.5 * (a + b))
            continue
        mid = 0.5 * (a + b)
        left = _variations_at(chain, a) - _variations_at(chain, mid)
        work.append((a, mid, left))
        work.append((mid, b, n - left))
    polished, _ = _newton_polish(c, np.asarray(roots))
    return polished


def count_real_roots(p) -> CountResult:
    """Distinct real roots of p, counted by a Sturm chain.

    Roots are located from the companion-matrix spectrum and polished by
    Newton to residual 1e-12 (falling back to Sturm-guided bisection when
    the polished set disagrees); certified=False whenever the chain degrades
    or the located roots cannot confirm the count.
    """
    c = p.coefficients if isinstance(p, UnivariatePoly) else UnivariatePoly(p).coefficients
    scale = np.abs(c).max() if c.size else 0.0
    if scale == 0.0:
        raise ZeroPolynomial("all coefficients vanish")
    c, _ = _trim_leading(c, scale)
    c = c / np.abs(c).max()
    if c.size == 1:
        return CountResult(0, True, 0.0)

    chain, degraded = _sturm_chain(c)
    total = _variations_at_infinity(chain, False) - _variations_at_infinity(chain, True)
    total = max(total, 0)

    cand = np.roots(c[::-1])
    real = cand[np.abs(cand.imag) <= 1e-7 * (1.0 + np.abs(cand))].real
    polished, res = _newton_polish(c, real)
    roots = _dedup_sorted(polished)
    if roots.size != total and not degraded:
        roots = _dedup_sorted(_bisection_roots(chain, c, total))
    certified = (not degraded) and roots.size == total
    residual = float(np.abs(P.polyval(roots, c)).max()) if roots.size else 0.0
    return CountResult(int(total), certified, residual)


def _homog_chart_coeffs(poly: HomogeneousPolyMap) -> np.ndarray:
    if poly.k != 1 or poly.m != 1:
        raise ValueError("expected a scalar binary form (k = 1, m = 1)")
    return poly.coeffs[:, 0]


def projective_zero_count(poly) -> CountResult:
    """Zeros in RP^1 of a scalar binary form: chart roots plus the point at infinity.

    The graded-lex coefficient vector of a degree-d form is exactly the
    ascending chart polynomial P(1, t); [0:1] is a zero iff the t^d
    coefficient vanishes below 1e-12 of the coefficient scale. The count on
    the circle S^1 is twice the value returned here.
    """
    c = _homog_chart_coeffs(poly) if isinstance(poly, HomogeneousPolyMap) else np.asarray(poly, float)
    scale = np.abs(c).max() if c.size else 0.0
    if scale == 0.0:
        raise ZeroPolynomial("all coefficients vanish")
    at_infinity = 1 if abs(c[-1]) <= LEAD_TOL * scale else 0
    affine = count_real_roots(UnivariatePoly(c))
    return CountResult(affine.count + at_infinity, affine.certified, affine.residual)


def sphere_zero_count(poly) -> CountResult:
    """Zeros on S^1 of a scalar binary form: antipodal doubling of RP^1."""
    r = projective_zero_count(poly)
    return CountResult(2 * r.count, r.certified, r.residual)


def circle_count_mixture(sample: IsotropicMixtureSample) -> CountResult:
    """Zeros on S^1 of a mixture of homogeneous parts of different degrees.

    The substitution (cos t, sin t) = ((1-s^2)/(1+s^2), 2s/(1+s^2)) turns the
    restriction to the circle into a single polynomial of degree 2L in s
    (the angle pi maps to s = infinity and is covered by the leading
    coefficient, which equals the field value at angle pi).
    """
    parts = sample.parts
    if not parts:
        raise ZeroPolynomial("mixture has no parts")
    top = max(p.d for p in parts)
    one_plus = np.array([1.0, 0.0, 1.0])  # 1 + s^2
    acc = np.zeros(1)
    for part in parts:
        c = _homog_chart_coeffs(part)
        d = part.d
        # P(1 - s^2, 2s) expanded term by term
        expanded = np.zeros(1)
        for j, cj in enumerate(c):
            if cj == 0.0:
                continue
            term = P.polypow(np.array([1.0, 0.0, -1.0]), d - j) if d - j else np.array([1.0])
            term = P.polymul(term, P.polypow(np.array([0.0, 2.0]), j) if j else np.array([1.0]))
            expanded = P.polyadd(expanded, cj * term)
        lift = P.polypow(one_plus, top - d) if top > d else np.array([1.0])
        acc = P.polyadd(acc, P.polymul(expanded, lift))
    full = np.zeros(2 * top + 1)
    full[: acc.size] = acc
    scale = np.abs(full).max()
    if scale == 0.0:
        raise ZeroPolynomial("mixture restriction vanishes identically")
    at_pi = 1 if abs(full[-1]) <= LEAD_TOL * scale else 0
    affine = count_real_roots(UnivariatePoly(full))
    return CountResult(affine.count + at_pi, affine.certified, affine.residual)


# ---------------------------------------------------------- bivariate systems

def _y_coefficient_table(chart) -> list[np.ndarray]:
    """Coefficients of y^j as x-polynomials for a chart polynomial in (x, y)."""
    exps = chart.exps
    coeffs = chart.coeffs[:, 0]
    dy = int(exps[:, 1].max())
    dx = int(exps[:, 0].max())
    table = [np.zeros(dx + 1) for _ in range(dy + 1)]
    for (ex, ey), cval in zip(exps, coeffs):
        table[int(ey)][int(ex)] += cval
    return table


def _effective_y_degree(table, scale) -> int:
    dy = len(table) - 1
    while dy > 0 and np.abs(table[dy]).max() <= LEAD_TOL * scale:
        dy -= 1
    return dy


def _sylvester_det(a: np.ndarray, b: np.ndarray) -> float:
    # a, b descending coefficient vectors in y evaluated at a fixed x
    n, m = a.size - 1, b.size - 1
    s = np.zeros((n + m, n + m))
    for i in range(m):
        s[i, i : i + n + 1] = a
    for i in range(n):
        s[m + i, i : i + m + 1] = b
    return float(np.linalg.det(s))


def _real_candidates(roots: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    return roots[np.abs(roots.imag) <= tol * (1.0 + np.abs(roots))].real


def system_count_rp2(p1: HomogeneousPolyMap, p2: HomogeneousPolyMap) -> CountResult:
    """Common zeros in RP^2 of two scalar forms of degree <= 4.

    The affine chart x0 = 1 is solved by Sylvester resultant elimination in
    the second variable (the resultant is interpolated from determinant
    samples at Chebyshev points), candidates are polished by a 2x2 Newton
    iteration and deduplicated at radius 1e-7; zeros at infinity come from
    the common roots of the two degree forms. certified=False on
    near-degenerate resultants or unconfirmed candidates.
    """
    for p in (p1, p2):
        if p.k != 1 or p.m != 2:
            raise ValueError("expected scalar forms in three homogeneous variables")
        if p.d > 4:
            raise ValueError("degrees above 4 are not supported")
    q1, q2 = p1.affine_chart(), p2.affine_chart()
    s1 = np.abs(p1.coeffs).max()
    s2 = np.abs(p2.coeffs).max()
    if s1 == 0.0 or s2 == 0.0:
        raise ZeroPolynomial("a form vanishes identically")
    t1, t2 = _y_coefficient_table(q1), _y_coefficient_table(q2)
    e1, e2 = _effective_y_degree(t1, s1), _effective_y_degree(t2, s2)

    certified = True
    if e1 == 0 and e2 == 0:
        raise DegenerateSystem("both forms are independent of the eliminated variable")

    resultant_route = e1 > 0 and e2 > 0
    if not resultant_route:
        # one equation constrains x alone; its roots feed the other equation
        xpoly = t1[0] if e1 == 0 else t2[0]
        rx = count_real_roots(UnivariatePoly(xpoly))
        certified &= rx.certified
        xs = _real_candidates(np.roots(np.trim_zeros(xpoly[::-1], "f")), tol=1e-8)
        if xs.size != rx.count:
            certified = False
        res_scale = np.abs(xpoly).max()
    else:
        n = p1.d * p2.d
        nodes = np.cos(np.pi * (2 * np.arange(n + 1) + 1) / (2 * (n + 1)))
        dets = np.array(
            [
                _sylvester_det(
                    np.array([P.polyval(x, t1[j]) for j in range(e1, -1, -1)]),
                    np.array([P.polyval(x, t2[j]) for j in range(e2, -1, -1)]),
                )
                for x in nodes
            ]
        )
        res_scale = np.abs(dets).max()
        sys_scale = s1**e2 * s2**e1
        if res_scale <= 1e-13 * sys_scale:
            raise DegenerateSystem("resultant vanishes identically: positive-dimensional or shared factor")
        if res_scale <= 1e-8 * sys_scale:
            certified = False
        series = C.chebfit(nodes, dets / res_scale, n)
        rroots = C.chebroots(series)
        ambiguous = (np.abs(rroots.imag) > 1e-8 * (1.0 + np.abs(rroots))) & (
            np.abs(rroots.imag) <= 1e-4 * (1.0 + np.abs(rroots))
        )
        if np.any(ambiguous):
            certified = False
        xs = _real_candidates(rroots, tol=1e-8)

    # Back-substitute each x-candidate and polish on the full system. On the
    # resultant route every real resultant root generically carries a real
    # intersection (a complex conjugate pair over a real x forces a gcd of
    # degree >= 2, a measure-zero event), so each root must confirm at least
    # one point; candidates from the non-shared roots of the first equation
    # are expected to fail the polish and are dropped silently. On the
    # x-polynomial route the roots of the second equation at x0 are all
    # genuine, so every one of them must confirm.
    points = []
    for x0 in xs:
        table = t1 if e1 > 0 else t2
        ecur = e1 if e1 > 0 else e2
        ycoeffs = np.array([P.polyval(x0, table[j]) for j in range(ecur + 1)])
        if np.abs(ycoeffs).max() == 0.0:
            certified = False
            continue
        ys = _real_candidates(np.roots(np.trim_zeros(ycoeffs[::-1], "f")))
        confirmed = 0
        for y0 in ys:
            pt, ok = _newton_system(q1, q2, np.array([x0, y0]), s1, s2, p1.d, p2.d)
            if ok:
                points.append(pt)
                confirmed += 1
        if resultant_route:
            if confirmed == 0:
                certified = False
        elif confirmed != len(ys):
            certified = False
    points = _dedup_points(points)
    count = len(points)

    residual = 0.0
    for pt in points:
        residual = max(
            residual,
            abs(float(q1.eval(pt)[0])) / _chart_scale(s1, p1.d, pt),
            abs(float(q2.eval(pt)[0])) / _chart_scale(s2, p2.d, pt),
        )

    count += _common_zeros_at_infinity(p1, p2)

    if count > p1.d * p2.d:
        certified = False
    return CountResult(count, certified, residual)


def _chart_scale(coeff_scale: float, d: int, pt: np.ndarray) -> float:
    return coeff_scale * max(1.0, float(np.hypot(pt[0], pt[1]))) ** d


def _newton_system(q1, q2, start: np.ndarray, s1: float, s2: float, d1: int, d2: int):
    pt = start.astype(float).copy()
    for _ in range(40):
        v1, j1 = q1.eval_and_grad(pt)
        v2, j2 = q2.eval_and_grad(pt)
        f = np.array([float(v1[0]), float(v2[0])])
        jac = np.vstack([np.asarray(j1).reshape(1, 2), np.asarray(j2).reshape(1, 2)])
        if abs(np.linalg.det(jac)) < 1e-300:
            return pt, False
        step = np.linalg.solve(jac, f)
        pt = pt - step
        if np.abs(step).max() <= 1e-14 * (1.0 + np.abs(pt).max()):
            break
    r1 = abs(float(q1.eval(pt)[0])) / _chart_scale(s1, d1, pt)
    r2 = abs(float(q2.eval(pt)[0])) / _chart_scale(s2, d2, pt)
    return pt, (r1 <= 1e-10 and r2 <= 1e-10)


def _dedup_points(points, radius: float = DEDUP_RADIUS):
    kept: list[np.ndarray] = []
    for pt in points:
        if all(np.hypot(*(pt - q)) > radius * (1.0 + np.hypot(*pt)) for q in kept):
            kept.append(pt)
    return kept


def _degree_form_coeffs(p: HomogeneousPolyMap) -> np.ndarray:
    """Binary form in (x1, x2): the terms of p with zero x0 exponent."""
    c = np.zeros(p.d + 1)
    for (e0, _, e2), cval in zip(p.exps, p.coeffs[:, 0]):
        if e0 == 0:
            c[int(e2)] += cval
    return c


def _common_zeros_at_infinity(p1: HomogeneousPolyMap, p2: HomogeneousPolyMap) -> int:
    g1, g2 = _degree_form_coeffs(p1), _degree_form_coeffs(p2)
    sc1, sc2 = np.abs(g1).max(), np.abs(g2).max()
    if sc1 == 0.0 or sc2 == 0.0:
        return 0
    count = 0
    trimmed = np.trim_zeros(g1[::-1], "f")
    if trimmed.size > 1:
        for t in _real_candidates(np.roots(trimmed), tol=1e-8):
            if abs(P.polyval(t, g2)) <= 1e-8 * sc2 * (1.0 + abs(t)) ** p2.d:
                count += 1
    if abs(g1[-1]) <= LEAD_TOL * sc1 and abs(g2[-1]) <= LEAD_TOL * sc2:
        count += 1
    return count


# ----------------------------------------------------------------- MC harness

class Welford:
    """Streaming mean/variance accumulator."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def push(self, x: float):
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    @property
    def stderr(self) -> float:
        if self.n < 2:
            return float("inf")
        return math.sqrt(self.m2 / (self.n - 1) / self.n)


@dataclass
class McCountResult:
    mean: float
    stderr: float
    resample_rate: float
    trials: int = 0
    resamples: int = 0

    def __iter__(self):
        return iter((self.mean, self.stderr, self.resample_rate))


def mc_expected_count(sampler, counter, trials: int, s: RngStream, threads: int = 1) -> McCountResult:
    """Average certified counts over seeded trials.

    sampler(stream) draws one instance; counter(instance) returns a
    CountResult. Uncertified or degenerate instances are resampled from fresh
    child streams of the same trial (so results do not depend on scheduling);
    the resample rate must stay below 1%, and 5% aborts.
    """
    if trials < 30:
        raise ValueError("need at least 30 trials")

    def one_trial(t: int):
        base = s.child(t)
        for attempt in range(_MAX_ATTEMPTS):
            try:
                result = counter(sampler(base.child(attempt)))
            except DegenerateSystem:
                continue
            if result.certified:
                return float(result.count), attempt
        raise ExcessiveResampling(f"trial {t}: no certified instance in {_MAX_ATTEMPTS} attempts")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one_trial, range(trials)))
    else:
        outcomes = [one_trial(t) for t in range(trials)]

    acc = Welford()
    resamples = 0
    for value, attempt in outcomes:
        acc.push(value)
        resamples += attempt
    rate = resamples / (trials + resamples)
    if rate >= 0.05:
        raise ExcessiveResampling(f"resample rate {rate:.2%} is at or above 5%")
    stderr = 0.0 if acc.m2 <= 0.0 else acc.stderr
    return McCountResult(acc.mean, stderr, rate, trials, resamples)
