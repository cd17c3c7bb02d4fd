"""Grid sampling and 2-D topology of zero sets.

A scalar field is sampled on a regular grid; its zero curve is extracted by
marching squares (16-case table, saddles resolved by the cell-center average
sign) with components tracked by union-find over crossing-edge ids, and the
sublevel set {f <= 0} is treated as a cubical complex for Betti numbers
(b1 = b0 - chi in the plane).

Grid values are never trusted at exact zero: values are perturbed by
+1e-12 * nu0, and any |value| < 1e-9 * nu0 marks the instance
non-transversal so callers can resample instead of trusting the contour.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import NonFiniteValue, TieUnresolved

_EVAL_CHUNK = 1 << 22
_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass
class GridFunction:
    """Samples of a scalar field on a regular grid over an axis-aligned box."""

    box: tuple
    h: float
    values: np.ndarray
    grad_x: np.ndarray | None = None
    grad_y: np.ndarray | None = None

    @property
    def xs(self) -> np.ndarray:
        (x0, _), _ = self.box
        return x0 + self.h * np.arange(self.values.shape[0])

    @property
    def ys(self) -> np.ndarray:
        _, (y0, _) = self.box
        return y0 + self.h * np.arange(self.values.shape[1])

    @property
    def nu0(self) -> float:
        return float(np.abs(self.values).max())


def _axis_points(lo: float, hi: float, h: float) -> np.ndarray:
    n = (hi - lo) / h
    if abs(n - round(n)) > 1e-6:
        raise ValueError(f"h={h} does not divide the edge [{lo}, {hi}]")
    return lo + h * np.arange(int(round(n)) + 1)


def _eval_chunked(f, pts: np.ndarray) -> np.ndarray:
    out = np.empty(pts.shape[0])
    for lo in range(0, pts.shape[0], _EVAL_CHUNK):
        chunk = pts[lo : lo + _EVAL_CHUNK]
        try:
            vals = np.asarray(f(chunk), dtype=float).reshape(chunk.shape[0], -1)[:, 0]
        except (TypeError, ValueError):
            vals = np.array([float(np.atleast_1d(f(p))[0]) for p in chunk])
        out[lo : lo + _EVAL_CHUNK] = vals
    return out


def sample_grid(f, box, h: float) -> GridFunction:
    """Evaluate f (and its gradient) on the grid of spacing h over the box.

    The gradient comes from f.gradient when the callable provides one,
    otherwise from second-order central differences of the sampled values.
    """
    (x0, x1), (y0, y1) = box
    xs = _axis_points(x0, x1, h)
    ys = _axis_points(y0, y1, h)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    shape = gx.shape

    values = _eval_chunked(f, pts).reshape(shape)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue("field produced non-finite values on the grid")

    gradient = getattr(f, "gradient", None)
    if gradient is not None:
        grads = np.empty((pts.shape[0], 2))
        for lo in range(0, pts.shape[0], _EVAL_CHUNK):
            chunk = pts[lo : lo + _EVAL_CHUNK]
            grads[lo : lo + _EVAL_CHUNK] = np.asarray(gradient(chunk), dtype=float).reshape(
                chunk.shape[0], 2
            )
        if not np.all(np.isfinite(grads)):
            raise NonFiniteValue("gradient produced non-finite values on the grid")
        grad_x = grads[:, 0].reshape(shape)
        grad_y = grads[:, 1].reshape(shape)
    else:
        grad_x, grad_y = np.gradient(values, h, edge_order=2)
    return GridFunction(((x0, x1), (y0, y1)), h, values, grad_x, grad_y)


@dataclass
class ContourSet:
    """Marching-squares output: segments, their component labels, transversality."""

    segments: np.ndarray  # (S, 2, 2) endpoint coordinates
    component_labels: np.ndarray  # (S,) component index per segment
    transversal: bool
    segment_edges: np.ndarray  # (S, 2) crossing-edge ids per segment

    @property
    def n_components(self) -> int:
        return int(self.component_labels.max()) + 1 if self.component_labels.size else 0


class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, a: int) -> int:
        root = a
        while self.parent.setdefault(root, root) != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


# case -> list of segments, each a pair of local edges (B, R, T, L)
_B, _R, _T, _L = 0, 1, 2, 3
_CASE_SEGMENTS = {
    1: [(_L, _B)],
    2: [(_B, _R)],
    3: [(_L, _R)],
    4: [(_R, _T)],
    6: [(_B, _T)],
    7: [(_L, _T)],
    8: [(_T, _L)],
    9: [(_B, _T)],
    11: [(_R, _T)],
    12: [(_L, _R)],
    13: [(_B, _R)],
    14: [(_L, _B)],
}
_SADDLE = {
    # (case, center inside) -> segments
    (5, True): [(_B, _R), (_L, _T)],
    (5, False): [(_L, _B), (_R, _T)],
    (10, True): [(_L, _B), (_R, _T)],
    (10, False): [(_B, _R), (_L, _T)],
}


def marching_squares_components(g: GridFunction) -> ContourSet:
    """Extract the zero curve of the grid field and label its components.

    b0 is the number of union-find classes over crossing edges; saddle cells
    (cases 5 and 10) are split according to the sign of the cell-center
    average, which is the documented convention for component counts.
    """
    v = g.values
    nu0 = float(np.abs(v).max())
    if nu0 == 0.0:
        return ContourSet(np.empty((0, 2, 2)), np.empty(0, dtype=int), False, np.empty((0, 2), dtype=int))
    v = np.where(v == 0.0, 1e-12 * nu0, v)
    transversal = not bool(np.any(np.abs(v) < 1e-9 * nu0))

    inside = v < 0.0
    c00 = inside[:-1, :-1]
    c10 = inside[1:, :-1]
    c11 = inside[1:, 1:]
    c01 = inside[:-1, 1:]
    case = (
        c00.astype(np.uint8)
        + 2 * c10.astype(np.uint8)
        + 4 * c11.astype(np.uint8)
        + 8 * c01.astype(np.uint8)
    )
    ci, cj = np.nonzero((case > 0) & (case < 15))

    nx, ny = v.shape
    h_edges = (nx - 1) * ny  # edge ids: x-direction first, then y-direction
    xs, ys = g.xs, g.ys

    def edge_id(i: int, j: int, local: int) -> int:
        if local == _B:
            return i * ny + j
        if local == _T:
            return i * ny + (j + 1)
        if local == _L:
            return h_edges + i * (ny - 1) + j
        return h_edges + (i + 1) * (ny - 1) + j

    def crossing(i: int, j: int, local: int):
        if local in (_B, _T):
            jj = j if local == _B else j + 1
            va, vb = v[i, jj], v[i + 1, jj]
            t = va / (va - vb)
            return (xs[i] + t * g.h, ys[jj])
        ii = i if local == _L else i + 1
        va, vb = v[ii, j], v[ii, j + 1]
        t = va / (va - vb)
        return (xs[ii], ys[j] + t * g.h)

    uf = _UnionFind()
    seg_pts = []
    seg_edges = []
    for i, j in zip(ci.tolist(), cj.tolist()):
        k = int(case[i, j])
        if k in (5, 10):
            center = v[i, j] + v[i + 1, j] + v[i + 1, j + 1] + v[i, j + 1]
            locs = _SADDLE[(k, center < 0.0)]
        else:
            locs = _CASE_SEGMENTS[k]
        for la, lb in locs:
            ea, eb = edge_id(i, j, la), edge_id(i, j, lb)
            uf.union(ea, eb)
            seg_pts.append((crossing(i, j, la), crossing(i, j, lb)))
            seg_edges.append((ea, eb))

    if not seg_pts:
        return ContourSet(np.empty((0, 2, 2)), np.empty(0, dtype=int), transversal, np.empty((0, 2), dtype=int))

    roots = [uf.find(ea) for ea, _ in seg_edges]
    order = {r: n for n, r in enumerate(dict.fromkeys(roots))}
    labels = np.array([order[r] for r in roots], dtype=int)
    return ContourSet(np.asarray(seg_pts), labels, transversal, np.asarray(seg_edges, dtype=int))


def betti_sublevel(g: GridFunction) -> tuple[int, int]:
    """(b0, b1) of the cubical complex carried by {f <= 0}.

    b0 counts 4-connected components; b1 = b0 - chi with
    chi = V - E + F of the complex.
    """
    v = g.values
    nu0 = float(np.abs(v).max())
    if nu0 == 0.0:
        return 0, 0
    v = np.where(v == 0.0, 1e-12 * nu0, v)
    inside = v < 0.0
    _, b0 = ndimage.label(inside, structure=_FOUR_CONNECTED)
    vertices = int(inside.sum())
    edges = int((inside[:-1, :] & inside[1:, :]).sum()) + int((inside[:, :-1] & inside[:, 1:]).sum())
    faces = int((inside[:-1, :-1] & inside[1:, :-1] & inside[:-1, 1:] & inside[1:, 1:]).sum())
    chi = vertices - edges + faces
    return int(b0), int(b0 - chi)


def _component_paths(c: ContourSet):
    """Ordered crossing points per component; flags whether each is a cycle."""
    adj: dict[int, list[tuple[int, int]]] = {}
    for s, (ea, eb) in enumerate(c.segment_edges):
        adj.setdefault(int(ea), []).append((s, int(eb)))
        adj.setdefault(int(eb), []).append((s, int(ea)))

    point_of: dict[int, tuple] = {}
    for s, (ea, eb) in enumerate(c.segment_edges):
        point_of[int(ea)] = tuple(c.segments[s, 0])
        point_of[int(eb)] = tuple(c.segments[s, 1])

    seen_segments = set()
    paths = []
    endpoints = [e for e, nbrs in adj.items() if len(nbrs) == 1]
    starts = endpoints + list(adj.keys())
    for start in starts:
        nbrs = [(s, o) for s, o in adj[start] if s not in seen_segments]
        if not nbrs:
            continue
        chain = [start]
        cur = start
        while True:
            step = [(s, o) for s, o in adj[cur] if s not in seen_segments]
            if not step:
                break
            s, nxt = step[0]
            seen_segments.add(s)
            chain.append(nxt)
            cur = nxt
        cycle = chain[0] == chain[-1] and len(chain) > 2
        pts = [point_of[e] for e in (chain[:-1] if cycle else chain)]
        paths.append((np.asarray(pts), cycle))
    return paths


def critical_count_on_curve(c: ContourSet, direction) -> int:
    """Local extrema of the height <x, direction> summed over contour components.

    Tied heights trigger a retry with a rotated direction (5 attempts, then
    TieUnresolved). Open components count their endpoints as extrema.
    """
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.hypot(*direction)
    paths = _component_paths(c)
    if not paths:
        return 0
    scale = float(np.abs(c.segments).max()) + 1.0
    golden = 2.399963229728653

    for attempt in range(6):
        if attempt:
            rot = attempt * golden
            m = np.array([[math.cos(rot), -math.sin(rot)], [math.sin(rot), math.cos(rot)]])
            d = m @ direction
        else:
            d = direction
        total = 0
        tied = False
        for pts, cycle in paths:
            hts = pts @ d
            diffs = np.diff(np.append(hts, hts[0]) if cycle else hts)
            if np.any(np.abs(diffs) <= 1e-12 * scale):
                tied = True
                break
            signs = np.sign(diffs)
            if cycle:
                flips = int(np.sum(signs != np.roll(signs, 1)))
                total += flips
            else:
                total += 2 + int(np.sum(signs[:-1] != signs[1:]))
        if not tied:
            return total
    raise TieUnresolved("height ties persisted through 5 rotated directions")


# ------------------------------------------------------------- serialization

def grid_to_json(g: GridFunction) -> str:
    return json.dumps(
        {"box": [list(b) for b in g.box], "h": g.h, "values": g.values.tolist()}
    )


def grid_from_json(text: str) -> GridFunction:
    obj = json.loads(text)
    values = np.asarray(obj["values"], dtype=float)
    box = tuple(tuple(b) for b in obj["box"])
    return GridFunction(box, float(obj["h"]), values)


def contour_to_csv(c: ContourSet, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["component", "x0", "y0", "x1", "y1"])
        for label, seg in zip(c.component_labels, c.segments):
            writer.writerow([int(label), seg[0, 0], seg[0, 1], seg[1, 0], seg[1, 1]])
