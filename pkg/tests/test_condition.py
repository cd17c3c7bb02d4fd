import math

import numpy as np
import pytest

from rglab import (
    BridgeProfile,
    DiskBaseField,
    GridFunction,
    RingDistance,
    bounds,
    chebyshev_approximate,
    condition_report,
    lattice_centers,
    marching_squares_components,
    milnor_thom_bound,
    reach_bound,
    reach_equation,
    sample_grid,
    semicontinuity_check,
    sharp_family,
    witdash_bound,
)
from rglab.condition import _verify_bridge
from rglab.errors import CenterOverlap, ConcavityViolation, NonTransversalInstance

BOX = ((-1.0, 1.0), (-1.0, 1.0))


class Field:
    def __init__(self, f, grad=None):
        self._f = f
        if grad is not None:
            self.gradient = grad

    def __call__(self, pts):
        return self._f(pts)


def circle_field(r2):
    return Field(lambda pts: pts[:, 0] ** 2 + pts[:, 1] ** 2 - r2, lambda pts: 2.0 * pts)


# ------------------------------------------------------------ condition report

def test_report_circle_oracle():
    # x^2 + y^2 - 1/4 on [-1,1]^2: extrema at the corners and the origin are
    # all grid points, so every report entry has a hand value
    g = sample_grid(circle_field(0.25), BOX, 1.0 / 16.0)
    r = condition_report(g)
    assert r.nu0 == pytest.approx(1.75)
    assert r.nu1 == pytest.approx(math.sqrt(1.75**2 + 8.0))
    assert r.m == pytest.approx(0.75)
    assert r.delta == pytest.approx(0.25)  # jet minimum sits at the origin
    assert r.kappa0 == pytest.approx(7.0)
    assert r.kappa1 == pytest.approx(math.sqrt(177.0))


def test_report_boundary_crossing_gives_infinite_kappa():
    # the zero lines x = +-1/2 cross the top and bottom edges, so the default
    # boundary margin vanishes and the condition numbers blow up
    f = Field(
        lambda pts: pts[:, 0] ** 2 - 0.25,
        lambda pts: np.column_stack([2.0 * pts[:, 0], 0.0 * pts[:, 1]]),
    )
    g = sample_grid(f, BOX, 1.0 / 16.0)
    r = condition_report(g)
    assert r.m == 0.0
    assert math.isinf(r.kappa0) and math.isinf(r.kappa1)

    # restricting attention to the x-boundary restores the oracle values
    r = condition_report(g, boundary_samples=[0.75])
    assert r.m == pytest.approx(0.75)
    assert r.nu1 == pytest.approx(math.sqrt(73.0) / 4.0)
    assert r.kappa0 == pytest.approx(3.0)
    assert r.kappa1 == pytest.approx(math.sqrt(73.0))


@pytest.mark.parametrize("lam", [0.5, 3.0])
def test_report_scale_invariance(lam):
    g1 = sample_grid(circle_field(0.25), BOX, 1.0 / 16.0)
    f = Field(
        lambda pts: lam * (pts[:, 0] ** 2 + pts[:, 1] ** 2 - 0.25),
        lambda pts: 2.0 * lam * pts,
    )
    g2 = sample_grid(f, BOX, 1.0 / 16.0)
    r1, r2 = condition_report(g1), condition_report(g2)
    assert r2.nu0 == pytest.approx(lam * r1.nu0)
    assert r2.kappa0 == pytest.approx(r1.kappa0)
    assert r2.kappa1 == pytest.approx(r1.kappa1)


def test_report_requires_gradients():
    g = GridFunction(BOX, 0.25, np.ones((9, 9)))
    with pytest.raises(ValueError):
        condition_report(g)


# ---------------------------------------------------------------- reach bridge

@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
def test_bridge_profile_invariants(rho):
    b = BridgeProfile(rho)
    s = np.linspace(-2.0 * rho, 2.0 * rho, 4001)
    g = b(s)
    ramp = np.abs(s) <= 0.5 * rho
    assert np.abs(g[ramp] - s[ramp]).max() == 0.0
    flat = np.abs(s) >= 0.875 * rho
    assert np.abs(np.abs(g[flat]) - 0.75 * rho).max() < 1e-15 * rho
    assert np.abs(b(-s) + g).max() == 0.0
    gp = b.derivative(s)
    assert gp.min() >= 0.0 and gp.max() <= 1.0

    # derivative is the true derivative and never increases in |s|
    h = 1e-6 * rho
    fd = (b(s + h) - b(s - h)) / (2.0 * h)
    assert np.abs(fd - gp).max() < 1e-7
    pos = s > 0
    assert np.diff(gp[pos]).max() <= 1e-12


def test_reach_equation_field_and_gradient():
    ring = RingDistance(1.0)
    eq = reach_equation(ring, 1.0, grad_d=ring.gradient)
    pts = np.array([[0.2, 0.1], [1.3, 0.0], [0.0, 2.5], [-1.1, 0.4]])
    d = ring(pts)
    assert np.allclose(eq.f(pts), eq.bridge(d))
    # chain-rule gradient against central differences
    step = 1e-6
    for e in (np.array([step, 0.0]), np.array([0.0, step])):
        fd = (eq.f(pts + e) - eq.f(pts - e)) / (2.0 * step)
        idx = 0 if e[0] > 0 else 1
        assert np.abs(eq.f.gradient(pts)[:, idx] - fd).max() < 1e-6


def test_reach_equation_rejects_nonpositive_rho():
    for rho in (0.0, -1.0):
        with pytest.raises(ValueError):
            reach_equation(RingDistance(1.0), rho)


@pytest.mark.parametrize("rho,h", [(0.5, 5e-3), (1.0, 5e-3), (2.0, 1e-2)])
def test_reach_kappa_within_bound(rho, h):
    ring = RingDistance(rho)
    eq = reach_equation(ring, rho, grad_d=ring.gradient)
    ext = 3.0 * rho
    grid = sample_grid(eq.f, ((-ext, ext), (-ext, ext)), h)
    theta = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
    boundary = eq.f(ext * np.column_stack([np.cos(theta), np.sin(theta)]))
    r = condition_report(grid, boundary_samples=boundary)
    assert 1.0 <= r.kappa1 <= 2.0 * (1.0 + 1.0 / rho) * (1.0 + 5.0 * h)
    assert marching_squares_components(grid).n_components == 1


def test_corrupted_bridge_rejected():
    class SteepBridge(BridgeProfile):
        def derivative(self, s):
            return 1.2 * super().derivative(s)

    with pytest.raises(ConcavityViolation):
        _verify_bridge(SteepBridge(1.0))

    class BumpyBridge(BridgeProfile):
        # a rising spike in the derivative just before the plateau, where the
        # honest slope is nearly flat, so the second difference turns positive
        def derivative(self, s):
            a = np.abs(np.asarray(s, dtype=float))
            bump = 0.3 * np.exp(-(((a - 0.86) / 0.015) ** 2))
            return super().derivative(s) + bump

    with pytest.raises(ConcavityViolation):
        _verify_bridge(BumpyBridge(1.0))


# --------------------------------------------------------------------- bounds

def test_bound_values():
    assert milnor_thom_bound(2, 2) == 6.0
    assert milnor_thom_bound(3, 1) == 3.0
    assert witdash_bound(1.0, 2, 1.0) == 4.0
    assert reach_bound(1.0, 2, 1.0) == 4.0
    assert milnor_thom_bound(3, 2) > milnor_thom_bound(2, 2)


def test_bounds_dispatch_and_validation():
    assert bounds("milnor_thom", d=2, n=2) == 6.0
    assert bounds("witdash", kappa1=1.0, n=2, a0=1.0) == 4.0
    assert bounds("reach", rho=1.0, n=2, c2=1.0) == 4.0
    with pytest.raises(ValueError):
        bounds("unknown", d=2)
    with pytest.raises(ValueError):
        milnor_thom_bound(0, 2)
    with pytest.raises(ValueError):
        witdash_bound(-1.0, 2, 1.0)
    with pytest.raises(ValueError):
        reach_bound(1.0, 2, 0.0)


# --------------------------------------------------------------- sharp family

def test_disk_base_field_profile():
    base = DiskBaseField()
    pts = np.array([[0.0, 0.0], [0.5, 0.0], [0.0, -0.5], [0.9, 0.0], [0.05, 0.05]])
    vals = base(pts)
    assert vals[0] == pytest.approx(-1.0)
    assert abs(vals[1]) < 1e-12 and abs(vals[2]) < 1e-12
    assert vals[3] == pytest.approx(1.0)
    assert vals[4] == pytest.approx(-1.0)  # still inside the flat core
    # gradient vanishes on the flat regions and matches differences between
    step = 1e-6
    mid = np.array([[0.4, 0.3]])
    fd = np.array(
        [
            (base(mid + [step, 0.0]) - base(mid - [step, 0.0]))[0] / (2 * step),
            (base(mid + [0.0, step]) - base(mid - [0.0, step]))[0] / (2 * step),
        ]
    )
    assert np.abs(base.gradient(mid)[0] - fd).max() < 1e-6
    assert np.abs(base.gradient(np.array([[0.0, 0.0], [0.95, 0.0]]))).max() == 0.0


def test_sharp_family_b0_matches_centers_and_kappa_grows_linearly():
    base = DiskBaseField()
    gb = sample_grid(base, BOX, 1.0 / 64.0)
    kb = condition_report(gb).kappa1
    ratios = []
    for k in (2, 4):
        n = max(1, round(k * k / 4))
        fk = sharp_family(base, k, lattice_centers(k, n))
        gk = sample_grid(fk, BOX, 1.0 / (64.0 * k))
        b0 = marching_squares_components(gk).n_components
        kappa1 = condition_report(gk).kappa1
        assert b0 == n
        assert kappa1 <= 1.02 * k * kb
        ratios.append(b0 / kappa1**2)
    # b0 ~ kappa_1^2: the ratio is bounded below along the family
    assert min(ratios) > 0.006
    assert ratios[0] == pytest.approx(ratios[1], rel=1e-6)


def test_sharp_family_rejects_overlapping_centers():
    with pytest.raises(CenterOverlap):
        sharp_family(DiskBaseField(), 2.0, [[0.0, 0.0], [0.5, 0.0]])
    with pytest.raises(ValueError):
        sharp_family(DiskBaseField(), -1.0, [[0.0, 0.0]])


def test_lattice_centers_counts_and_separation():
    for k, count in ((2, 1), (4, 4), (8, 16)):
        centers = lattice_centers(k, count)
        assert centers.shape == (count, 2)
        assert np.hypot(centers[:, 0], centers[:, 1]).max() + 1.0 / k < 1.0
        for i in range(count):
            for j in range(i + 1, count):
                assert np.hypot(*(centers[i] - centers[j])) > 2.0 / k
    with pytest.raises(ValueError):
        lattice_centers(2, 4)  # second ring of spacing-1.025 points leaves the disk


# -------------------------------------------------------------- semicontinuity

def test_semicontinuity_zero_perturbation_is_equality():
    f = circle_field(0.27)
    zero = Field(lambda pts: np.zeros(len(pts)))
    v = semicontinuity_check(f, zero, BOX, 1.0 / 64.0)
    assert v.passed
    assert v.b0_before == v.b0_after == 1
    assert v.sup_perturbation == 0.0
    assert v.margin == pytest.approx(0.27)


def test_semicontinuity_small_bump_can_only_add_components():
    f = circle_field(0.27)
    bump = Field(
        lambda pts: -0.25 * np.exp(-(((pts[:, 0] - 0.65) ** 2 + pts[:, 1] ** 2)) / 0.003)
    )
    v = semicontinuity_check(f, bump, BOX, 1.0 / 128.0)
    assert v.passed
    assert v.b0_before == 1
    assert v.b0_after == 2  # the dip carves a new oval near (0.65, 0)
    assert v.sup_perturbation < v.margin


def test_semicontinuity_rejects_perturbation_at_margin():
    f = circle_field(0.27)
    big = Field(lambda pts: np.full(len(pts), 0.27))
    with pytest.raises(ValueError):
        semicontinuity_check(f, big, BOX, 1.0 / 64.0)


def test_semicontinuity_flags_grid_aligned_zero_set():
    f = circle_field(0.25)  # zeros at (+-1/2, 0), (0, +-1/2): grid points
    small = Field(lambda pts: np.full(len(pts), 0.1))
    with pytest.raises(NonTransversalInstance):
        semicontinuity_check(f, small, BOX, 1.0 / 16.0)


# ------------------------------------------------------ Chebyshev approximation

def test_chebyshev_reproduces_low_degree_polynomials():
    f = Field(lambda pts: 3.0 * pts[:, 0] ** 2 * pts[:, 1] - pts[:, 1] ** 3 + 0.5 * pts[:, 0])
    box = ((-1.0, 1.0), (-2.0, 0.5))
    poly, sup_error = chebyshev_approximate(f, box, 4)
    assert sup_error < 1e-12
    pts = np.array([[0.3, -1.7], [-0.9, 0.4], [0.0, -0.75]])
    assert np.abs(poly(pts) - f(pts)).max() < 1e-12


def test_chebyshev_error_decays_with_degree():
    f = Field(lambda pts: np.exp(pts[:, 0] * pts[:, 1]))
    errs = [chebyshev_approximate(f, BOX, d)[1] for d in (4, 8, 16)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-10
