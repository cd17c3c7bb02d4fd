"""Plane-field adapters used by the experiments.

Grid operations expect a callable f(points) with an optional f.gradient;
these wrappers put sampled polynomial charts, trigonometric perturbations
and signed distances into that shape.
"""

from __future__ import annotations

import math

import numpy as np

from .polys import PolyMap, sample_kostlan
from .streams import RngStream


class PlaneField:
    """Scalar polynomial chart R^2 -> R as a field with analytic gradient."""

    def __init__(self, chart: PolyMap):
        if chart.k != 1 or chart.nvars != 2:
            raise ValueError("expected a scalar chart in two variables")
        self.chart = chart

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return self.chart.eval(pts)[:, 0]

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        _, jac = self.chart.eval_and_grad(pts)
        return jac[:, 0, :]


def kostlan_plane_field(d: int, stream: RngStream) -> PlaneField:
    """Affine chart of a sampled scalar Kostlan form of degree d on the plane."""
    return PlaneField(sample_kostlan(2, 1, d, stream).affine_chart())


class TrigField:
    """sum_i a_i cos(pi f_i . x) + b_i sin(pi f_i . x), with analytic gradient."""

    def __init__(self, cos_amp, sin_amp, freqs):
        self.cos_amp = np.asarray(cos_amp, dtype=float)
        self.sin_amp = np.asarray(sin_amp, dtype=float)
        self.freqs = np.asarray(freqs, dtype=float)

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        phase = np.pi * pts @ self.freqs.T
        return np.cos(phase) @ self.cos_amp + np.sin(phase) @ self.sin_amp

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        phase = np.pi * pts @ self.freqs.T
        weights = -np.sin(phase) * self.cos_amp + np.cos(phase) * self.sin_amp
        return np.pi * weights @ self.freqs

    def scaled(self, factor: float) -> "TrigField":
        return TrigField(factor * self.cos_amp, factor * self.sin_amp, self.freqs)


def random_trig_field(stream: RngStream, max_freq: int = 2, amplitude: float = 1.0) -> TrigField:
    """Random low-frequency trigonometric field on the plane."""
    freqs = [(m, n) for m in range(max_freq + 1) for n in range(-max_freq, max_freq + 1)]
    freqs = np.array([f for f in freqs if f != (0, 0) and (f[0] > 0 or f[1] > 0)], dtype=float)
    draws = amplitude * stream.normals((2, freqs.shape[0])) / math.sqrt(freqs.shape[0])
    return TrigField(draws[0], draws[1], freqs)


class RingDistance:
    """Signed distance to the circle of the given radius (negative inside)."""

    def __init__(self, radius: float = 1.0):
        self.radius = float(radius)

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return np.hypot(pts[:, 0], pts[:, 1]) - self.radius

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        r = np.hypot(pts[:, 0], pts[:, 1])
        safe = np.where(r > 0.0, r, 1.0)
        return pts / safe.reshape(-1, 1)
