"""Experiment harness.

    rglab <experiment> [--param value]... --seed S --trials N --out FILE [--check]

Experiments: mc-count, kacrice-quadrature, closed-form, rescale-distance,
nodal-betti, kappa, semicontinuity, sharp-family.

Runs write JSON-lines records

    {"formula": ..., "params": {...}, "value": ..., "error_estimate": ...,
     "seed": ..., "config": {...}}

with the resolved configuration embedded verbatim; rerunning with the
embedded config (--config FILE, flags mirror the JSON keys) reproduces each
value bit for bit. Sweeps (--sweep name=v1,v2,...) write CSV with the fixed
header

    experiment,param,param_value,value,stderr,seed

one row per parameter value. With --check the exit code is 0 iff every
requested tolerance holds (1 otherwise, 2 for usage errors). RGLAB_THREADS
caps trial parallelism.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .condition import (
    DiskBaseField,
    condition_report,
    lattice_centers,
    reach_equation,
    sharp_family,
)
from .errors import InvalidParams, NonTransversalInstance, RglabError, UnknownExperiment
from .fields import RingDistance, kostlan_plane_field, random_trig_field
from .grids import marching_squares_components, betti_sublevel, critical_count_on_curve, sample_grid
from .kacrice import (
    isotropic_moments,
    isotropic_point_expectation,
    kac_rice_expectation,
    mixed_kostlan_expectation,
    shub_smale_expectation,
)
from .kernels import bargmann_fock_kernel, isotropic_series_kernel, kernel_sup_distance, rescaled_kernel
from .polys import sample_isotropic_mixture, sample_kostlan
from .roots import (
    circle_count_mixture,
    mc_expected_count,
    projective_zero_count,
    sphere_zero_count,
    system_count_rp2,
)
from .streams import seed_stream

SWEEP_HEADER = ["experiment", "param", "param_value", "value", "stderr", "seed"]


def _parse_numbers(text: str, cast=float):
    try:
        return [cast(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise InvalidParams(f"could not parse {text!r} as comma-separated numbers") from exc


def _require(cfg, key, kind, hint):
    value = cfg.get(key)
    if value is None:
        raise InvalidParams(f"--{key.replace('_', '-')} is required for {hint}")
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise InvalidParams(f"--{key.replace('_', '-')}={value!r} is not a valid {kind.__name__}") from exc


def _threads() -> int:
    raw = os.environ.get("RGLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ------------------------------------------------------------- experiments

def _run_mc_count(cfg):
    geometry = cfg.get("geometry", "circle")
    trials = int(cfg["trials"])
    stream = seed_stream(int(cfg["seed"]))
    threads = _threads()
    params = {"geometry": geometry, "trials": trials}
    if geometry == "circle":
        d = _require(cfg, "d", int, "circle counts")
        sampler = lambda s: sample_kostlan(1, 1, d, s)
        counter = sphere_zero_count
        closed = 2.0 * math.sqrt(d)
        params["d"] = d
    elif geometry == "projective":
        d = _require(cfg, "d", int, "projective counts")
        sampler = lambda s: sample_kostlan(1, 1, d, s)
        counter = projective_zero_count
        closed = math.sqrt(d)
        params["d"] = d
    elif geometry == "rp2":
        degrees = cfg.get("degrees")
        if degrees is None:
            raise InvalidParams("--degrees d1,d2 is required for rp2 systems")
        d1, d2 = (int(x) for x in degrees)
        sampler = lambda s: (sample_kostlan(2, 1, d1, s.child(0)), sample_kostlan(2, 1, d2, s.child(1)))
        counter = lambda pair: system_count_rp2(*pair)
        closed = shub_smale_expectation([d1, d2])
        params["degrees"] = [d1, d2]
    elif geometry == "mixture":
        series = cfg.get("series") or [0.0, 0.5, 0.5]
        sampler = lambda s: sample_isotropic_mixture(series, s)
        counter = circle_count_mixture
        closed = isotropic_point_expectation(isotropic_moments(series, 1), [0.0])
        params["series"] = list(series)
    else:
        raise InvalidParams(f"unknown geometry {geometry!r}; expected circle|projective|rp2|mixture")
    mc = mc_expected_count(sampler, counter, trials, stream, threads=threads)
    params["resample_rate"] = mc.resample_rate
    params["closed_form"] = closed
    ok = abs(mc.mean - closed) <= 4.0 * mc.stderr if mc.stderr > 0 else mc.mean == closed
    return [
        {
            "formula": f"mc-count-{geometry}",
            "params": params,
            "value": mc.mean,
            "error_estimate": mc.stderr,
            "ok": ok,
        }
    ]


_KERNEL_DEFAULT_DOMAIN = {
    "cos-power": (0.0, 2.0 * math.pi),
    "cos-series": (0.0, 2.0 * math.pi),
    "bargmann-fock": (0.0, 1.0),
    "rescaled": (0.0, 1.0),
}


def _run_kacrice_quadrature(cfg):
    kernel = cfg.get("kernel", "cos-power")
    if kernel not in _KERNEL_DEFAULT_DOMAIN:
        raise InvalidParams(f"unknown kernel {kernel!r}; expected {sorted(_KERNEL_DEFAULT_DOMAIN)}")
    domain = cfg.get("domain") or _KERNEL_DEFAULT_DOMAIN[kernel]
    a, b = float(domain[0]), float(domain[1])
    t = float(cfg.get("t", 0.0))
    quad_nodes = int(cfg.get("quad_nodes", 32))
    mc_trials = int(cfg.get("mc_trials", 2000))
    length = b - a

    reference = None
    tol = cfg.get("tol")
    if kernel == "cos-power":
        d = _require(cfg, "d", int, "the cos^d kernel")
        spec = isotropic_series_kernel([0.0] * d + [1.0])
        mom = isotropic_moments([0.0] * d + [1.0], 1)
        params = {"kernel": kernel, "d": d}
        reference = isotropic_point_expectation(mom, [t]) * length / (2.0 * math.pi)
        tol = 1e-6 * abs(reference) if tol is None else float(tol)
    elif kernel == "cos-series":
        series = cfg.get("series")
        if series is None:
            raise InvalidParams("--series c0,c1,... is required for cos-series kernels")
        spec = isotropic_series_kernel(series)
        mom = isotropic_moments(series, 1)
        params = {"kernel": kernel, "series": list(series)}
        reference = isotropic_point_expectation(mom, [t]) * length / (2.0 * math.pi)
        tol = 1e-5 * abs(reference) if tol is None else float(tol)
    elif kernel == "bargmann-fock":
        spec = bargmann_fock_kernel()
        params = {"kernel": kernel}
        if t == 0.0:
            reference = length / math.pi
            tol = 1e-6 if tol is None else float(tol)
    else:
        d = _require(cfg, "d", int, "the rescaled kernel")
        spec = rescaled_kernel(d)
        params = {"kernel": kernel, "d": d}
        if t == 0.0:
            reference = length / math.pi
            tol = 1e-3 if tol is None else float(tol)

    value, err = kac_rice_expectation(
        spec, (a, b), t, quad_nodes=quad_nodes, mc_trials=mc_trials, stream=seed_stream(int(cfg["seed"]))
    )
    params.update({"domain": [a, b], "t": t, "quad_nodes": quad_nodes})
    ok = True
    if reference is not None:
        params["closed_form"] = reference
        ok = abs(value - reference) <= float(tol)
    return [
        {
            "formula": f"kac-rice-{kernel}",
            "params": params,
            "value": value,
            "error_estimate": err,
            "ok": ok,
        }
    ]


def _run_closed_form(cfg):
    formula = cfg.get("formula", "shub-smale")
    if formula == "shub-smale":
        degrees = cfg.get("degrees")
        if degrees is None:
            raise InvalidParams("--degrees d1,...,dm is required for shub-smale")
        value = shub_smale_expectation([int(x) for x in degrees])
        params = {"formula": formula, "degrees": [int(x) for x in degrees]}
    elif formula == "point":
        series = cfg.get("series")
        if series is None:
            raise InvalidParams("--series c0,c1,... is required for the point formula")
        y = float(cfg.get("y", 0.0))
        value = isotropic_point_expectation(isotropic_moments(series, 1), [y])
        params = {"formula": formula, "series": list(series), "y": y}
    elif formula == "mixed-kostlan":
        series = cfg.get("series")
        if series is None:
            raise InvalidParams("--series a0,a1,... (scalar matrices) is required for mixed-kostlan")
        value = mixed_kostlan_expectation([np.array([[float(a)]]) for a in series])
        params = {"formula": formula, "series": list(series)}
    else:
        raise InvalidParams(f"unknown formula {formula!r}; expected shub-smale|point|mixed-kostlan")
    expect = cfg.get("expect")
    ok = True if expect is None else abs(value - float(expect)) <= 1e-9 * max(1.0, abs(float(expect)))
    if expect is not None:
        params["expect"] = float(expect)
    return [{"formula": formula, "params": params, "value": value, "error_estimate": 0.0, "ok": ok}]


def _run_rescale_distance(cfg):
    d = _require(cfg, "d", int, "rescale-distance")
    points = int(cfg.get("points", 41))
    extent = float(cfg.get("extent", 1.0))
    order = int(cfg.get("order", 0))
    tol = float(cfg.get("tol") or 0.03)
    grid = np.linspace(-extent, extent, points)
    value = kernel_sup_distance(rescaled_kernel(d), bargmann_fock_kernel(), grid, deriv_order=order)
    params = {"d": d, "points": points, "extent": extent, "order": order, "tol": tol}
    return [
        {
            "formula": "rescaled-vs-bargmann-fock-sup",
            "params": params,
            "value": value,
            "error_estimate": 0.0,
            "ok": value <= tol,
        }
    ]


def _transversal_kostlan_grid(d, seed, box, h, max_attempts=20):
    for attempt in range(max_attempts):
        field = kostlan_plane_field(d, seed_stream(seed).child(attempt))
        grid = sample_grid(field, box, h)
        contour = marching_squares_components(grid)
        if contour.transversal:
            return field, grid, contour, attempt
    raise NonTransversalInstance(f"no transversal draw in {max_attempts} attempts")


def _run_nodal_betti(cfg):
    d = int(cfg.get("d") or 4)
    extent = float(cfg.get("extent", 1.0))
    h = float(cfg.get("h") or 1.0 / 64.0)
    box = ((-extent, extent), (-extent, extent))
    seed = int(cfg["seed"])
    field, grid, contour, attempt = _transversal_kostlan_grid(d, seed, box, h)
    b0_curve = contour.n_components
    b0_sub, b1_sub = betti_sublevel(grid)
    crit = critical_count_on_curve(contour, (1.0, 0.0)) if b0_curve else 0
    ok = b0_curve <= crit / 2.0 if b0_curve else True
    if cfg.get("check"):
        _, _, contour_fine, _ = _transversal_kostlan_grid(d, seed, box, h / 2.0, max_attempts=attempt + 1)
        ok = ok and contour_fine.n_components == b0_curve
    params = {
        "d": d,
        "h": h,
        "extent": extent,
        "b0_sublevel": b0_sub,
        "b1_sublevel": b1_sub,
        "critical_points": crit,
        "resampled": attempt,
    }
    return [
        {
            "formula": "nodal-b0",
            "params": params,
            "value": float(b0_curve),
            "error_estimate": 0.0,
            "ok": ok,
        }
    ]


def _run_kappa(cfg):
    mode = cfg.get("mode", "reach")
    if mode == "reach":
        rho = float(cfg.get("rho", 1.0))
        h = float(cfg.get("h") or 5e-3)
        extent = 3.0 * rho
        ring = RingDistance(rho)
        equation = reach_equation(ring, rho, grad_d=ring.gradient)
        grid = sample_grid(equation.f, ((-extent, extent), (-extent, extent)), h)
        theta = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
        boundary_pts = extent * np.column_stack([np.cos(theta), np.sin(theta)])
        report = condition_report(grid, boundary_samples=equation.f(boundary_pts))
        b0 = marching_squares_components(grid).n_components
        bound = 2.0 * (1.0 + 1.0 / rho) * (1.0 + 5.0 * h)
        ok = report.kappa1 <= bound and b0 == 1
        params = {
            "mode": mode,
            "rho": rho,
            "h": h,
            "b0": b0,
            "bound": bound,
            "nu1": report.nu1,
            "delta": report.delta,
            "margin": report.m,
        }
        value = report.kappa1
    elif mode == "field":
        d = int(cfg.get("d") or 4)
        h = float(cfg.get("h") or 1.0 / 64.0)
        extent = float(cfg.get("extent", 1.0))
        box = ((-extent, extent), (-extent, extent))
        _, grid, contour, attempt = _transversal_kostlan_grid(d, int(cfg["seed"]), box, h)
        report = condition_report(grid)
        ok = report.kappa1 >= 1.0 if contour.n_components else True
        params = {
            "mode": mode,
            "d": d,
            "h": h,
            "extent": extent,
            "b0": contour.n_components,
            "nu0": report.nu0,
            "nu1": report.nu1,
            "delta": report.delta,
            "margin": report.m,
            "resampled": attempt,
        }
        value = report.kappa1
    else:
        raise InvalidParams(f"unknown kappa mode {mode!r}; expected reach|field")
    return [{"formula": f"kappa-{mode}", "params": params, "value": value, "error_estimate": 0.0, "ok": ok}]


def _run_semicontinuity(cfg):
    from .condition import semicontinuity_check

    trials = int(cfg["trials"])
    d = int(cfg.get("d") or 4)
    h = float(cfg.get("h") or 1.0 / 64.0)
    extent = float(cfg.get("extent", 1.0))
    frac = float(cfg.get("frac", 0.5))
    box = ((-extent, extent), (-extent, extent))
    seed = int(cfg["seed"])

    failures = 0
    skipped = 0
    completed = 0
    pts_probe = None
    for t in range(trials):
        s = seed_stream(seed).child(t)
        field = kostlan_plane_field(d, s.child(0))
        try:
            grid = sample_grid(field, box, h)
            report = condition_report(grid)
            margin = min(report.m, report.delta)
            if margin <= 0.0:
                skipped += 1
                continue
            bump = random_trig_field(s.child(1))
            if pts_probe is None:
                gx, gy = np.meshgrid(grid.xs, grid.ys, indexing="ij")
                pts_probe = np.column_stack([gx.ravel(), gy.ravel()])
            sup0 = float(np.abs(bump(pts_probe)).max())
            if sup0 == 0.0:
                skipped += 1
                continue
            verdict = semicontinuity_check(field, bump.scaled(frac * margin / sup0), box, h)
        except NonTransversalInstance:
            skipped += 1
            continue
        completed += 1
        if not verdict.passed:
            failures += 1
    params = {
        "trials": trials,
        "completed": completed,
        "skipped": skipped,
        "d": d,
        "h": h,
        "frac": frac,
    }
    return [
        {
            "formula": "semicontinuity-failures",
            "params": params,
            "value": float(failures),
            "error_estimate": 0.0,
            "ok": failures == 0,
        }
    ]


def _run_sharp_family(cfg):
    k = int(cfg.get("k") or 4)
    h = float(cfg.get("h") or 1.0 / (64.0 * k))
    n_centers = int(cfg.get("centers") or max(1, round(k * k / 4)))
    base = DiskBaseField()
    centers = lattice_centers(k, n_centers)
    fk = sharp_family(base, k, centers)
    box = ((-1.0, 1.0), (-1.0, 1.0))
    grid = sample_grid(fk, box, h)
    theta = np.linspace(0.0, 2.0 * math.pi, 2048, endpoint=False)
    rim = np.column_stack([np.cos(theta), np.sin(theta)])
    report = condition_report(grid, boundary_samples=fk(rim))
    b0 = marching_squares_components(grid).n_components

    base_grid = sample_grid(base, box, 1.0 / 64.0)
    base_report = condition_report(base_grid, boundary_samples=base(rim))

    ratio = b0 / report.kappa1**2
    ok = b0 == n_centers and report.kappa1 <= k * base_report.kappa1 * 1.02
    params = {
        "k": k,
        "h": h,
        "centers": n_centers,
        "b0": b0,
        "kappa1": report.kappa1,
        "base_kappa1": base_report.kappa1,
    }
    return [
        {
            "formula": "sharp-family-ratio",
            "params": params,
            "value": ratio,
            "error_estimate": 0.0,
            "ok": ok,
        }
    ]


EXPERIMENTS = {
    "mc-count": _run_mc_count,
    "kacrice-quadrature": _run_kacrice_quadrature,
    "closed-form": _run_closed_form,
    "rescale-distance": _run_rescale_distance,
    "nodal-betti": _run_nodal_betti,
    "kappa": _run_kappa,
    "semicontinuity": _run_semicontinuity,
    "sharp-family": _run_sharp_family,
}


# --------------------------------------------------------------- plumbing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rglab", description=__doc__.split("\n\n")[1])
    parser.add_argument("experiment", nargs="?", help="|".join(EXPERIMENTS))
    parser.add_argument("--config", help="JSON file of defaults mirroring the flags")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--out", help="output path (JSON lines, or CSV for sweeps); stdout if omitted")
    parser.add_argument("--check", action="store_true", help="exit 0 iff all tolerances hold")
    parser.add_argument("--sweep", help="parameter sweep, e.g. d=1,4,9,16,25")
    parser.add_argument("--d", type=int)
    parser.add_argument("--degrees", help="comma-separated degrees, e.g. 4,9")
    parser.add_argument("--series", help="comma-separated kernel coefficients c0,c1,...")
    parser.add_argument("--geometry", help="mc-count: circle|projective|rp2|mixture")
    parser.add_argument("--kernel", help="kacrice-quadrature: cos-power|cos-series|bargmann-fock|rescaled")
    parser.add_argument("--formula", help="closed-form: shub-smale|point|mixed-kostlan")
    parser.add_argument("--domain", help="integration interval a,b")
    parser.add_argument("--quad-nodes", type=int, dest="quad_nodes")
    parser.add_argument("--mc-trials", type=int, dest="mc_trials")
    parser.add_argument("--t", type=float, help="target level")
    parser.add_argument("--y", type=float, help="target point for the closed point formula")
    parser.add_argument("--points", type=int, help="grid points for rescale-distance")
    parser.add_argument("--extent", type=float, help="half-width of the box / grid extent")
    parser.add_argument("--order", type=int, help="derivative order for kernel distances")
    parser.add_argument("--tol", type=float, help="tolerance override for --check")
    parser.add_argument("--expect", type=float, help="expected value for closed-form --check")
    parser.add_argument("--h", type=float, help="grid spacing")
    parser.add_argument("--rho", type=float, help="reach for kappa mode=reach")
    parser.add_argument("--mode", help="kappa: reach|field")
    parser.add_argument("--k", type=int, help="shrink factor for sharp-family")
    parser.add_argument("--centers", type=int, help="number of centers for sharp-family")
    parser.add_argument("--frac", type=float, help="perturbation size as a fraction of the margin")
    return parser


def _resolve_config(argv) -> dict:
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = {key: value for key, value in vars(args).items() if value not in (None, False)}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        for key, value in loaded.items():
            cfg.setdefault(key, value)
    cfg.pop("config", None)
    cfg.setdefault("seed", 0)
    cfg.setdefault("trials", 2000)
    if isinstance(cfg.get("degrees"), str):
        cfg["degrees"] = _parse_numbers(cfg["degrees"], int)
    if isinstance(cfg.get("series"), str):
        cfg["series"] = _parse_numbers(cfg["series"], float)
    if isinstance(cfg.get("domain"), str):
        domain = _parse_numbers(cfg["domain"], float)
        if len(domain) != 2:
            raise InvalidParams("--domain needs exactly two numbers a,b")
        cfg["domain"] = domain
    return cfg


def _parse_sweep(text: str):
    if "=" not in text:
        raise InvalidParams("--sweep expects name=v1,v2,...")
    name, _, values = text.partition("=")
    name = name.strip()
    parsed = []
    for tok in values.split(","):
        tok = tok.strip()
        if tok == "":
            continue
        try:
            parsed.append(int(tok))
        except ValueError:
            try:
                parsed.append(float(tok))
            except ValueError as exc:
                raise InvalidParams(f"sweep value {tok!r} is not a number") from exc
    if not parsed:
        raise InvalidParams("sweep range is empty")
    return name, parsed


def _run_once(cfg: dict):
    name = cfg.get("experiment")
    if not name:
        raise UnknownExperiment("no experiment given; expected one of " + ", ".join(EXPERIMENTS))
    if name not in EXPERIMENTS:
        raise UnknownExperiment(f"unknown experiment {name!r}; expected one of " + ", ".join(EXPERIMENTS))
    return EXPERIMENTS[name](cfg)


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    try:
        cfg = _resolve_config(argv)
        check = bool(cfg.get("check"))
        out_path = cfg.pop("out", None)

        if cfg.get("sweep"):
            param, values = _parse_sweep(cfg["sweep"])
            buf = io.StringIO()
            writer = csv.writer(buf)
            writer.writerow(SWEEP_HEADER)
            all_ok = True
            for value in values:
                row_cfg = dict(cfg)
                row_cfg[param] = value
                records = _run_once(row_cfg)
                for rec in records:
                    all_ok = all_ok and rec["ok"]
                    writer.writerow(
                        [
                            cfg["experiment"],
                            param,
                            repr(value),
                            repr(float(rec["value"])),
                            repr(float(rec["error_estimate"])),
                            cfg["seed"],
                        ]
                    )
            _emit(buf.getvalue(), out_path)
            return 0 if (all_ok or not check) else 1

        records = _run_once(cfg)
        lines = []
        all_ok = True
        for rec in records:
            all_ok = all_ok and rec["ok"]
            payload = {
                "formula": rec["formula"],
                "params": rec["params"],
                "value": rec["value"],
                "error_estimate": rec["error_estimate"],
                "seed": cfg["seed"],
                "config": cfg,
            }
            lines.append(json.dumps(payload, sort_keys=True))
        _emit("\n".join(lines) + "\n", out_path)
        return 0 if (all_ok or not check) else 1
    except (UnknownExperiment, InvalidParams) as exc:
        print(f"rglab: {exc}", file=sys.stderr)
        return 2
    except RglabError as exc:
        print(f"rglab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
