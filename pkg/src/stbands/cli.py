"""Command-line front end: configuration parsing, JSON reports, CSV and SVG output.

Exit codes: 0 verdict holds or is saturated, 2 a hypothesis gate rejected the
input, 3 a proven inequality came out false, 1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .experiments import (FalsifiedError, HypothesisError, SAT_TOL, bonnet_myers, catalog_problems,
                          counterexample_audit, dice, waist_average, width_bound)
from .geometry import (GeometryError, MetricSpec, boundary_mean_curvatures, closes_at,
                       curvature_arrays, make_metric, metric_from_json)
from .identities import (IdentityError, eval_af_identity, eval_lemma23, eval_lemma33,
                         eval_lemma71, eval_llarull)
from .potentials import Potential, PotentialError, make_potential, potential_from_json
from .solver import (SolverError, barrier_check, gradient_estimate_check, make_band_problem,
                     recheck_residual, solve_band_1d, solve_band_grid, solve_green_af)

COMMANDS = ("catalog", "curvature", "solve", "identity", "width", "bonnet-myers", "waist", "dice",
            "counterexample", "af", "llarull", "barrier", "gradest")

EXIT_OK, EXIT_USAGE, EXIT_REJECTED, EXIT_FALSIFIED = 0, 1, 2, 3

_Q = math.pi / 4
METRIC_SHORTHANDS = {
    "flat": ("FlatProduct", {}),
    "round": ("RoundBand", {"theta1": _Q, "theta2": _Q}),
    "torus": ("TorusExtremal", {"w": math.pi / 3}),
    "gupsilon": ("GUpsilon", {"upsilon": 0.5, "rho0": math.pi / 8}),
    "counterexample": ("Counterexample", {"delta": 0.5}),
    "s3": ("RicciWarped", {}),
    "capsule": ("RicciWarped", {"plateau": 20.0}),
    "schwarzschild": ("AFSymmetric", {"mass": 1.0}),
    "euclidean": ("AFSymmetric", {"mass": 0.0}),
}

DEFAULT_METRIC = {
    "catalog": None, "curvature": "round", "solve": "round", "identity": "flat", "width": "torus",
    "bonnet-myers": "s3", "waist": "s3", "dice": "capsule", "counterexample": None,
    "af": "schwarzschild", "llarull": "s3", "barrier": "s3", "gradest": "round",
}


class UsageError(ValueError):
    """Malformed flags or configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    metric: dict | None
    potential: dict | None
    grid: int | None
    tol: float
    options: dict = field(default_factory=dict)
    out: str | None = None
    csv: str | None = None
    svg: str | None = None

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "metric": self.metric,
            "potential": self.potential,
            "grid": self.grid,
            "tol": self.tol,
            "options": self.options,
        }


# ---------------------------------------------------------------- serialization


def _plain(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _dump(x: Any, indent: int = 0) -> str:
    """Deterministic JSON: insertion-ordered keys, floats with 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_dump(v, indent + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, list):
        if not x:
            return "[]"
        return "[" + ", ".join(_dump(v, indent + 1) for v in x) + "]"
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return "%.17g" % x
    return json.dumps(str(x))


def dumps(report: dict) -> str:
    return _dump(_plain(report)) + "\n"


def _parse_json(text: str, what: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"malformed {what} JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None


def _load_spec(arg: str, what: str) -> Any:
    s = arg.strip()
    if s.startswith("{") or s.startswith("["):
        return _parse_json(s, what)
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return _parse_json(fh.read(), what)
    return None


def resolve_metric(arg: str) -> MetricSpec:
    obj = _load_spec(arg, "metric")
    if obj is not None:
        if not isinstance(obj, dict):
            raise UsageError("metric JSON must be an object")
        return metric_from_json(obj)
    if arg in METRIC_SHORTHANDS:
        fam, params = METRIC_SHORTHANDS[arg]
        return make_metric(fam, params)
    raise UsageError(f"unknown metric {arg!r}; use JSON, a JSON file, or one of {sorted(METRIC_SHORTHANDS)}")


def equality_potential(metric: MetricSpec) -> Potential:
    """Potential that saturates the width bound for the named extremal families."""
    lo, hi = metric.band()
    if metric.family == "TorusExtremal":
        return make_potential("TorusBand", {"w0": hi - lo})
    if metric.family == "RoundBand":
        h_lo, h_hi = boundary_mean_curvatures(metric, lo, hi)
        return make_potential("RicciBand", {"n": metric.dimension, "H_minus": -h_lo, "H_plus": -h_hi})
    if metric.family == "GUpsilon":
        h_lo, h_hi = boundary_mean_curvatures(metric, lo, hi)
        return make_potential("TwoRicciBand", {"H0": max(-h_lo, -h_hi)})
    return make_potential("Zero")


def resolve_potential(arg: str | None, metric: MetricSpec | None) -> Potential:
    if arg is None or arg == "zero":
        return make_potential("Zero")
    if arg == "auto":
        if metric is None:
            raise UsageError("--potential auto needs a metric")
        return equality_potential(metric)
    obj = _load_spec(arg, "potential")
    if obj is None:
        raise UsageError(f"unknown potential {arg!r}; use zero, auto, or JSON")
    if not isinstance(obj, dict):
        raise UsageError("potential JSON must be an object")
    return potential_from_json(obj)


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers") from None
    if not vals:
        raise UsageError(f"{what} is empty")
    return vals


def _check_writable(path: str | None) -> None:
    if path is None:
        return
    d = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(d) or not os.access(d, os.W_OK):
        raise UsageError(f"output directory {d} is not writable")


# ---------------------------------------------------------------- artifacts


def write_csv(path: str, rho, u, du, residual) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("rho,u,du,residual\n")
        for row in zip(rho, u, du, residual):
            fh.write(",".join("%.17g" % float(v) for v in row) + "\n")


def write_svg(path: str, x, y, title: str = "u") -> None:
    x, y = np.asarray(x, float), np.asarray(y, float)
    W, H, m = 640, 400, 40
    sx = (x.max() - x.min()) or 1.0
    sy = (y.max() - y.min()) or 1.0
    px = m + (x - x.min()) / sx * (W - 2 * m)
    py = H - m - (y - y.min()) / sy * (H - 2 * m)
    pts = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">\n'
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>\n'
        f'<rect x="{m}" y="{m}" width="{W - 2 * m}" height="{H - 2 * m}" fill="none" stroke="#888"/>\n'
        f'<text x="{m}" y="{m - 12}" font-family="monospace" font-size="13">{title}</text>\n'
        f'<text x="{m}" y="{H - 12}" font-family="monospace" font-size="11">'
        f'rho in [{x.min():.6g}, {x.max():.6g}], u in [{y.min():.6g}, {y.max():.6g}]</text>\n'
        f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.5" points="{pts}"/>\n'
        "</svg>\n"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)


def _profile_residuals(profile, problem) -> np.ndarray:
    from .solver import fd_residual
    res = np.zeros_like(profile.u)
    res[1:-1] = np.abs(fd_residual(problem, profile.rho, profile.u, profile.du))
    return res


# ---------------------------------------------------------------- drivers
# Each driver returns (verdict, numbers, slack, h, profile_artifact).


def _band_problem(cfg: RunConfig, metric: MetricSpec, pot: Potential, args):
    interval = tuple(_floats(args.interval, "--interval")) if args.interval else None
    if interval is not None and len(interval) != 2:
        raise UsageError("--interval needs two numbers lo,hi")
    if interval is not None:
        cfg.options["interval"] = list(interval)
    return make_band_problem(metric, pot, interval)


def _run_curvature(cfg, args, metric):
    lo, hi = metric.band()
    if args.interval:
        lo, hi = _floats(args.interval, "--interval")[:2]
        cfg.options["interval"] = [lo, hi]
    n = cfg.grid or 10_000
    closed = not (closes_at(metric, lo) or closes_at(metric, hi))
    if closed:
        t = np.linspace(lo, hi, n)
    else:
        t = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    c = curvature_arrays(metric, t)
    num = {
        "interval": [lo, hi],
        "ric_min": float(np.min(c["eigs"][:, 0])),
        "two_ricci_min": float(np.min(c["two_ricci"])),
        "scalar_min": float(np.min(c["scalar"])),
        "scalar_max": float(np.max(c["scalar"])),
    }
    if metric.kind != "af":
        h_lo, h_hi = boundary_mean_curvatures(metric, lo, hi)
        num["H_out_minus"], num["H_out_plus"] = h_lo, h_hi
    return "holds", num, None, (hi - lo) / n, None


def _run_solve(cfg, args, metric, pot):
    prob = _band_problem(cfg, metric, pot, args)
    n = cfg.grid or 1000
    if args.method == "grid":
        dims = tuple(int(v) for v in _floats(args.dims, "--dims")) if args.dims else (n,)
        cfg.options["dims"] = list(dims)
        prof = solve_band_grid(prob, dims, tol=cfg.tol)
    else:
        prof = solve_band_1d(prob, n)
    sup, bound = recheck_residual(prof, prob)
    num = {
        "method": prof.method,
        "residual_sup": prof.residual_sup,
        "residual_bound": prof.residual_bound,
        "solver_residual": prof.solver_residual,
        "recheck_sup": sup,
        "recheck_bound": bound,
        "iterations": prof.iterations,
        "u_min": float(np.min(prof.u)),
        "u_max": float(np.max(prof.u)),
        "du_min": float(np.min(prof.du)),
        "du_max": float(np.max(prof.du)),
    }
    verdict = "holds" if sup <= bound else "falsified"
    return verdict, num, None, prof.h, (prof, prob)


_LEMMAS = {"lemma23": eval_lemma23, "lemma33": eval_lemma33, "lemma71": eval_lemma71}


def _identity_numbers(rep) -> dict:
    d = rep.to_json()
    d["holds"] = rep.holds
    for k, v in rep.extras.items():
        if np.ndim(v) == 0 or k == "band":
            d[k] = v
    return d


def _run_identity(cfg, args, metric, pot):
    which = args.which or "lemma23"
    cfg.options["which"] = which
    if which not in _LEMMAS:
        raise UsageError(f"--which must be one of {sorted(_LEMMAS)}")
    prob = _band_problem(cfg, metric, pot, args)
    prof = solve_band_1d(prob, cfg.grid or 1000)
    rep = _LEMMAS[which](prof, prob)
    verdict = "holds" if rep.holds else "falsified"
    return verdict, _identity_numbers(rep), rep.slack, rep.h, (prof, prob)


def _run_width(cfg, args, metric):
    theorem = args.theorem or "torus"
    cfg.options["theorem"] = theorem
    interval = None
    if args.interval:
        interval = tuple(_floats(args.interval, "--interval")[:2])
        cfg.options["interval"] = list(interval)
    v = width_bound(metric, theorem, interval, n_grid=cfg.grid or 10_000)
    saturated = abs(v.width - v.bound) <= cfg.tol
    num = v.to_json()
    num["saturated"] = saturated
    if v.width > v.bound + cfg.tol:
        verdict = "falsified"
    else:
        verdict = "saturated" if saturated else "holds"
    return verdict, num, v.bound - v.width, (v.width / (cfg.grid or 10_000)), None


def _run_bonnet_myers(cfg, args, metric):
    eps = args.eps if args.eps is not None else 0.01
    cfg.options["eps"] = eps
    r = bonnet_myers(metric, eps, n_grid=cfg.grid or 10_000)
    slack = r["bound"] - r["sum"]
    if slack < -cfg.tol:
        verdict = "falsified"
    else:
        verdict = "saturated" if abs(slack) <= cfg.tol else "holds"
    return verdict, r, slack, None, None


def _min_scalar(metric: MetricSpec) -> float:
    lo, hi = metric.domain()
    n = 10_000
    t = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    return float(np.min(curvature_arrays(metric, t)["scalar"]))


def _run_waist(cfg, args, metric):
    R0 = args.R0 if args.R0 is not None else _min_scalar(metric)
    eps = args.eps if args.eps is not None else 0.0
    cfg.options.update({"R0": R0, "b2": args.b2, "eps": eps})
    r = waist_average(metric, R0, args.b2, eps, n_cells=cfg.grid or 2000)
    return "holds", r, r["bound"] - r["avg"], r.get("h"), None


def _run_dice(cfg, args, metric):
    R0 = args.R0 if args.R0 is not None else _min_scalar(metric)
    cfg.options["R0"] = R0
    d = dice(metric, R0, n_cells=cfg.grid or 1000)
    num = {
        "count": d.count, "boundaries": d.boundaries, "levels": d.levels, "areas": d.areas,
        "w0": d.w0, "R0": d.R0, "diam": d.diam, "checks": d.checks,
    }
    verdict = "holds" if all(d.checks.values()) else "falsified"
    return verdict, num, None, None, None


def _run_counterexample(cfg, args):
    deltas = _floats(args.delta, "--delta") if args.delta else [0.0, 0.25, 0.5, 0.75, 1.0]
    cfg.options["delta"] = deltas
    out, ok = [], True
    for d in deltas:
        a = counterexample_audit(d, n_grid=cfg.grid or 10_000)
        good = (a["two_ricci_ok"] and a["ric_ge_2_iff_round"] and a["smooth_closure"]
                and abs(a["dist_core_to_core"] - math.pi / 2) <= cfg.tol
                and abs(a["dist_center_to_core"] - math.pi / 4) <= cfg.tol)
        ok = ok and good
        out.append(a)
    return ("holds" if ok else "falsified"), {"audits": out}, None, None, None


def _run_af(cfg, args, metric):
    r_range = (args.rmin, args.rmax)
    n = cfg.grid or 4001
    cfg.options.update({"r_range": list(r_range)})
    af = solve_green_af(metric, r_range, n_nodes=n)
    rep = eval_af_identity(af, metric)
    num = _identity_numbers(rep)
    scale = max(1.0, abs(rep.bulk_hessian_term))
    verdict = "holds" if abs(rep.extras["flux_residual"]) <= 1e-6 * scale else "falsified"
    return verdict, num, rep.slack, rep.h, None


def _run_llarull(cfg, args, metric):
    mode = args.mode
    cfg.options["mode"] = mode
    if mode == "scan":
        r = eval_llarull(metric, "scan")
        verdict = "holds" if r["hypothesis"] else "rejected"
        return verdict, r, None, None, None
    eps = args.eps if args.eps is not None else 0.0
    cfg.options.update({"eps": eps, "delta": args.delta_reg})
    rep, prof, prob = eval_llarull(metric, "quant", eps, args.delta_reg, n_cells=cfg.grid or 2000)
    verdict = "holds" if rep.holds else "falsified"
    return verdict, _identity_numbers(rep), rep.slack, rep.h, (prof, prob)


def _run_barrier(cfg, args, metric, pot_arg):
    r0 = args.r0
    eps_list = _floats(args.eps_list, "--eps-list")
    cfg.options.update({"r0": r0, "eps_list": eps_list})
    if pot_arg is None:
        lo, hi = metric.domain()
        pot = make_potential("Waist", {"w": hi - lo, "length": hi - lo, "r0": r0, "sign": -1})
        cfg.potential = pot.to_json()
    else:
        pot = resolve_potential(pot_arg, metric)
    r = barrier_check(metric, pot, eps_list, r0, n_cells=cfg.grid or 2000)
    return ("holds" if r["verdict"] == "holds" else "falsified"), r, None, None, None


def _run_gradest(cfg, args, metric, pot):
    prob = _band_problem(cfg, metric, pot, args)
    prof = solve_band_1d(prob, cfg.grid or 1000)
    r = gradient_estimate_check(prof, prob)
    verdict = "holds" if (r["poly_ok"] and r["inner_bound_ok"]) else "falsified"
    return verdict, r, None, prof.h, (prof, prob)


def _run_catalog(cfg, args):
    n = cfg.grid or 1000
    out, ok = {}, True
    for name, prob in catalog_problems().items():
        p1 = solve_band_1d(prob, n)
        pg = solve_band_grid(prob, (n,), tol=min(cfg.tol, 1e-10))
        err = float(np.max(np.abs(pg.u - p1.u)))
        sup, bound = recheck_residual(pg, prob)
        reps = {k: fn(p1, prob) for k, fn in _LEMMAS.items()}
        entry = {
            "grid_vs_1d_sup": err,
            "grid_vs_1d_over_h2": err / p1.h**2,
            "recheck_sup": sup,
            "recheck_bound": bound,
            "slack": {k: r.slack for k, r in reps.items()},
            "allowance": {k: r.allowance for k, r in reps.items()},
        }
        good = err <= 10 * p1.h**2 and sup <= bound and all(r.holds for r in reps.values())
        entry["ok"] = good
        ok = ok and good
        out[name] = entry
    return ("holds" if ok else "falsified"), out, None, 1.0 / n, None


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stbands", description="Spacetime-harmonic band estimates on symmetric metrics.")
    p.add_argument("--version", action="version", version=f"stbands {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for c in COMMANDS:
        s = sub.add_parser(c)
        s.add_argument("--metric", help="inline JSON, path to a JSON file, or a shorthand name")
        s.add_argument("--potential", help="zero, auto, inline JSON, or path")
        s.add_argument("--grid", type=int, help="grid size (cells or sample points)")
        s.add_argument("--tol", type=float, default=SAT_TOL)
        s.add_argument("--out", help="write the JSON report here")
        s.add_argument("--csv", help="write the profile as CSV (rho,u,du,residual)")
        s.add_argument("--svg", help="write the profile as an SVG polyline")
        s.add_argument("--json", action="store_true", help="print the JSON report to stdout")
        s.add_argument("--quiet", action="store_true")
        s.add_argument("--timing", action="store_true", help="record wall-clock runtime_ms")
        s.add_argument("--interval", help="band interval lo,hi in the profile coordinate")
        if c == "solve":
            s.add_argument("--method", choices=("1d", "grid"), default="1d")
            s.add_argument("--dims", help="grid dims, e.g. 128 or 64,8,8")
        if c == "identity":
            s.add_argument("--which", choices=sorted(_LEMMAS))
        if c == "width":
            s.add_argument("--theorem", choices=("ricci", "torus", "2ricci"),
                           help="band theorem (default torus)")
        if c in ("bonnet-myers", "waist", "llarull"):
            s.add_argument("--eps", type=float)
        if c in ("waist", "dice"):
            s.add_argument("--R0", type=float, help="scalar curvature lower bound")
        if c == "waist":
            s.add_argument("--b2", type=int, default=0, help="second Betti number")
        if c == "counterexample":
            s.add_argument("--delta", help="comma-separated deformation parameters")
        if c == "af":
            s.add_argument("--rmin", type=float, default=1e-3)
            s.add_argument("--rmax", type=float, default=1e3)
        if c == "llarull":
            s.add_argument("--mode", choices=("scan", "quant"), default="scan")
            s.add_argument("--delta-reg", type=float, default=0.0)
        if c == "barrier":
            s.add_argument("--r0", type=float, default=0.45)
            s.add_argument("--eps-list", default="0.1,0.05,0.01")
    return p


def _validate(args) -> None:
    if args.grid is not None and args.grid <= 0:
        raise UsageError("--grid must be positive")
    if not (args.tol > 0):
        raise UsageError("--tol must be positive")
    for name in ("R0", "r0", "rmin", "rmax"):
        v = getattr(args, name, None)
        if v is not None and not v > 0:
            raise UsageError(f"--{name} must be positive")
    if getattr(args, "eps", None) is not None and args.eps < 0:
        raise UsageError("--eps must be nonnegative")
    for path in (args.out, args.csv, args.svg):
        _check_writable(path)


def _dispatch(cfg: RunConfig, args):
    c = cfg.command
    if c == "catalog":
        return _run_catalog(cfg, args)
    if c == "counterexample":
        return _run_counterexample(cfg, args)
    metric = resolve_metric(args.metric or DEFAULT_METRIC[c])
    cfg.metric = metric.to_json()
    if c == "barrier":
        return _run_barrier(cfg, args, metric, args.potential)
    if c in ("solve", "identity", "gradest"):
        pot = resolve_potential(args.potential, metric)
        cfg.potential = pot.to_json()
        return {"solve": _run_solve, "identity": _run_identity, "gradest": _run_gradest}[c](
            cfg, args, metric, pot)
    return {
        "curvature": _run_curvature, "width": _run_width, "bonnet-myers": _run_bonnet_myers,
        "waist": _run_waist, "dice": _run_dice, "af": _run_af, "llarull": _run_llarull,
    }[c](cfg, args, metric)


def run(argv: list[str] | None = None) -> tuple[int, dict | None]:
    """Execute one command; returns (exit code, report or None on usage error)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(f"a subcommand is required: {', '.join(COMMANDS)}")
        _validate(args)
    except UsageError as e:
        print(f"stbands: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE, None
    cfg = RunConfig(args.command, None, None, args.grid, args.tol, {}, args.out, args.csv, args.svg)
    t0 = time.perf_counter()
    artifact = None
    try:
        verdict, numbers, slack, h, artifact = _dispatch(cfg, args)
        code = EXIT_OK if verdict in ("holds", "saturated") else (
            EXIT_REJECTED if verdict == "rejected" else EXIT_FALSIFIED)
    except UsageError as e:
        print(f"stbands: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE, None
    except (HypothesisError, IdentityError) as e:
        verdict, numbers, slack, h, code = "rejected", {"reason": str(e)}, None, None, EXIT_REJECTED
    except FalsifiedError as e:
        verdict, numbers, slack, h, code = "falsified", {"reason": str(e)}, None, None, EXIT_FALSIFIED
    except (GeometryError, PotentialError, SolverError, ValueError) as e:
        print(f"stbands: error: {e}", file=sys.stderr)
        return EXIT_USAGE, None
    runtime = (time.perf_counter() - t0) * 1e3 if args.timing else 0.0
    report = {
        "command": cfg.command,
        "config": cfg.to_json(),
        "verdict": verdict,
        "numbers": numbers,
        "slack": slack,
        "h": h,
        "runtime_ms": runtime,
        "version": __version__,
    }
    text = dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if artifact is not None:
        prof, prob = artifact
        if args.csv:
            write_csv(args.csv, prof.rho, prof.u, prof.du, _profile_residuals(prof, prob))
        if args.svg:
            write_svg(args.svg, prof.rho, prof.u, f"{cfg.command}: u on [{prob.lo:.6g}, {prob.hi:.6g}]")
    elif args.csv or args.svg:
        print(f"stbands: note: {cfg.command} produces no profile; --csv/--svg ignored", file=sys.stderr)
    if args.json:
        sys.stdout.write(text)
    elif not args.quiet:
        extra = "" if slack is None else f" slack={slack:.6g}"
        print(f"{cfg.command}: {verdict}{extra}")
    return code, report


def main(argv: list[str] | None = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
