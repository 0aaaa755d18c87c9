"""Theorem-level drivers on symmetric metrics.

Width bounds, Bonnet-Myers distances, waist averages, the slicing
construction for positive scalar curvature and the 2-Ricci counterexample
audit. Every driver checks its curvature hypothesis on a dense grid first and
raises HypothesisError instead of returning a verdict on inadmissible input.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad, simpson

from .geometry import (MetricSpec, boundary_mean_curvatures, closes_at, curvature_arrays,
                       make_metric, min_over_grid)
from .potentials import make_potential
from .solver import BandProblem, SolverError, make_band_problem, solve_band_1d

GATE_TOL = 1e-9
SAT_TOL = 1e-8
THEOREMS = ("ricci", "torus", "2ricci")


class HypothesisError(ValueError):
    """A curvature or diameter hypothesis fails; carries the violating sample."""

    def __init__(self, msg: str, value: float | None = None, at: float | None = None):
        super().__init__(msg)
        self.value = value
        self.at = at


class FalsifiedError(RuntimeError):
    """A proven inequality failed numerically: solver bug or counterexample."""


def _gate(metric: MetricSpec, lo: float, hi: float, quantity: str, bound: float,
          n: int = 10_000) -> tuple[float, float]:
    closed = not (closes_at(metric, lo) or closes_at(metric, hi))
    val, at = min_over_grid(metric, lo, hi, quantity, n=n, closed=closed)
    if val < bound - GATE_TOL:
        raise HypothesisError(f"{quantity} = {val:.12g} < {bound:.12g} at rho = {at:.12g}", val, at)
    return val, at


# ---------------------------------------------------------------- width


@dataclass
class WidthVerdict:
    width: float
    bound: float
    saturated: bool
    theorem: str
    H_minus: float = 0.0
    H_plus: float = 0.0
    gate_min: float = 0.0
    gate_at: float = 0.0

    @property
    def holds(self) -> bool:
        return self.width <= self.bound + SAT_TOL

    def to_json(self) -> dict:
        return asdict(self)


def width_bound_value(theorem: str, H_minus: float, H_plus: float, n: int = 3) -> float:
    """Upper bound on band width from the boundary mean curvature lower bounds -H_pm."""
    if theorem == "ricci":
        return math.atan(H_minus / (n - 1)) + math.atan(H_plus / (n - 1))
    H0 = max(H_minus, H_plus)
    if theorem == "torus":
        return (4.0 / 3.0) * math.atan(H0 / 2)
    if theorem == "2ricci":
        return math.atan(H0 / 2)
    raise ValueError(f"unknown theorem {theorem!r}")


def width_bound(metric: MetricSpec, theorem: str, interval: tuple | None = None,
                n_grid: int = 10_000) -> WidthVerdict:
    """Width of the band against the theorem's bound, after the curvature gate."""
    if theorem not in THEOREMS:
        raise ValueError(f"theorem must be one of {THEOREMS}")
    lo, hi = interval if interval is not None else metric.band()
    n = metric.dimension
    if theorem == "ricci":
        gmin, gat = _gate(metric, lo, hi, "ric", n - 1.0, n_grid)
    elif theorem == "torus":
        if n != 3:
            raise HypothesisError("torus band bound is stated for n = 3")
        gmin, gat = _gate(metric, lo, hi, "scalar", 6.0, n_grid)
    else:
        if n != 3:
            raise HypothesisError("2-Ricci band bound is stated for n = 3")
        gmin, gat = _gate(metric, lo, hi, "two_ricci", 4.0, n_grid)
    h_out_lo, h_out_hi = boundary_mean_curvatures(metric, lo, hi)
    Hm, Hp = -h_out_lo, -h_out_hi
    if not (math.isfinite(Hm) and math.isfinite(Hp)):
        raise HypothesisError("boundary mean curvature is not finite (band closes up)")
    bound = width_bound_value(theorem, Hm, Hp, n)
    # the profile coordinate is arclength, so width is the coordinate length
    width = float(hi - lo)
    v = WidthVerdict(width, bound, abs(width - bound) <= SAT_TOL, theorem, Hm, Hp, gmin, gat)
    return v


# ---------------------------------------------------------------- Bonnet-Myers


def bonnet_myers(metric: MetricSpec, eps: float = 0.01, n_grid: int = 10_000) -> dict:
    """Distances from the eps-sphere about p to the two poles of a closed symmetric metric."""
    a, b = metric.domain()
    if not (closes_at(metric, a) and closes_at(metric, b)):
        raise HypothesisError("needs a closed metric with poles at both profile ends")
    if not 0 < eps < (b - a) / 2:
        raise ValueError("need 0 < eps < half the pole distance")
    n = metric.dimension
    gmin, gat = _gate(metric, a, b, "ric", n - 1.0, n_grid)
    d_minus = quad(lambda t: 1.0, a, a + eps)[0]
    d_plus = quad(lambda t: 1.0, a + eps, b, limit=200)[0]
    total = d_minus + d_plus
    return {
        "d_minus": d_minus,
        "d_plus": d_plus,
        "sum": total,
        "bound": math.pi,
        "holds": total <= math.pi + SAT_TOL,
        "saturated": abs(total - math.pi) <= SAT_TOL,
        "gate_min": gmin,
        "gate_at": gat,
    }


# ---------------------------------------------------------------- waist


def waist_bound(R0: float, b2: int = 0) -> float:
    return 16 * math.pi * (b2 + 1) / R0


def waist_average(metric: MetricSpec, R0: float, b2: int = 0, eps: float = 0.0,
                  n_cells: int = 2000) -> dict:
    """Average level-set area of the spacetime harmonic function between the poles.

    The potential is the cot profile of width diam about each pole; for a
    symmetric metric the middle constant piece is empty.
    """
    if R0 <= 0:
        raise ValueError("need R0 > 0")
    a, b = metric.domain()
    if metric.dimension != 3 or not (closes_at(metric, a) and closes_at(metric, b)):
        raise HypothesisError("needs a closed 3-dimensional metric with poles at both ends")
    gmin, gat = _gate(metric, a, b, "scalar", R0)
    diam = b - a
    need = 4 * math.pi / math.sqrt(3 * R0)
    if diam < need:
        raise HypothesisError(f"diam = {diam:.12g} < 4 pi / sqrt(3 R0) = {need:.12g}", diam)
    pot = make_potential("Waist", {"w": diam, "offset": eps})
    prob = make_band_problem(metric, pot, (a + eps, b - eps), -1.0, 1.0)
    prof = solve_band_1d(prob, n_cells=n_cells)
    vol = float(simpson(prof.du * prob.area(prof.rho), x=prof.rho))
    avg = vol / (prob.c_plus - prob.c_minus)
    bound = waist_bound(R0, b2)
    rep = {
        "avg": avg,
        "bound": bound,
        "holds": avg <= bound + 1e-9,
        "diam": diam,
        "diam_required": need,
        "grad_integral": vol,
        "gate_min": gmin,
        "gate_at": gat,
        "h": prof.h,
    }
    if not rep["holds"]:
        raise FalsifiedError(f"average area {avg:.12g} exceeds {bound:.12g}")
    return rep


# ---------------------------------------------------------------- slicing


@dataclass
class DiceDecomposition:
    boundaries: list
    levels: list
    areas: list
    count: int
    w0: float
    R0: float
    diam: float
    checks: dict = field(default_factory=dict)

    @property
    def regions(self) -> list:
        pts = self.boundaries
        return [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]

    def to_json(self) -> dict:
        d = asdict(self)
        d["regions"] = [list(r) for r in self.regions]
        return d


def _nudge(x: float, h: float, origin: float) -> float:
    k = (x - origin) / h
    if abs(k - round(k)) < 1e-9:
        return x + h / 2
    return x


def dice(metric: MetricSpec, R0: float, delta_frac: float = 0.01, eps_frac: float = 0.02,
         n_cells: int = 1000, ref_cells: int = 10_000) -> DiceDecomposition:
    """Cut a closed symmetric metric into slabs with small interfaces.

    From the previous interface (or the pole p) go out 2 w0, thicken that
    sphere to a band of half-width w0/2 + delta, solve there with the clipped
    tan potential, and cut at the node level of least area among those with
    area <= 16 pi / R0.
    """
    a, L = metric.domain()
    if metric.dimension != 3 or not (closes_at(metric, a) and closes_at(metric, L)):
        raise HypothesisError("needs a closed 3-dimensional metric with poles at both ends")
    _gate(metric, a, L, "scalar", R0)
    w0 = 4 * math.pi / math.sqrt(3 * R0)
    delta = delta_frac * w0
    eps = eps_frac * w0
    cap = 16 * math.pi / R0
    h_ref = (L - a) / ref_cells
    cuts, levels, areas, grads = [a], [], [], []
    prev = a
    for _ in range(100_000):
        S = _nudge(prev + 2 * w0, h_ref, a)
        top = S + w0 / 2 + delta
        if S >= L or top >= L:
            break
        lo = S - w0 / 2 - delta
        center = w0 / 2 + delta
        pot = make_potential("Dice", {"w0": w0, "eps": eps, "center": center})
        prob = make_band_problem(metric, pot, (lo, top), -1.0, 1.0)
        prof = solve_band_1d(prob, n_cells=n_cells)
        A = prob.area(prof.rho)
        inner = np.arange(1, len(A) - 1)
        ok = inner[A[inner] <= cap]
        if ok.size == 0:
            raise FalsifiedError(f"no level of area <= {cap:.12g} in band [{lo:.6g}, {top:.6g}]")
        k = int(ok[np.argmin(A[ok])])
        cut = float(prof.rho[k])
        cuts.append(cut)
        levels.append(float(prof.u[k]))
        areas.append(float(A[k]))
        grads.append(float(prof.du[k]))
        prev = cut
    else:
        raise SolverError("slicing did not terminate")
    cuts.append(L)
    I = len(cuts) - 1
    diam = L - a
    iface = cuts[1:-1]
    gaps = [iface[i + 1] - iface[i] for i in range(len(iface) - 1)]
    checks = {
        "count": I - 1 <= diam / w0 + 1e-12,
        "regular_interfaces": all(g > 0 for g in grads),
        "cover": cuts[0] == a and cuts[-1] == L and all(cuts[i] < cuts[i + 1] for i in range(I)),
        "areas": all(x <= cap + 1e-6 for x in areas),
        "interface_distance": all(g <= 4 * w0 + 1e-12 for g in gaps),
    }
    if I >= 2:
        d1 = cuts[1] - cuts[0]
        dI = cuts[-1] - cuts[-2]
        checks["first_region"] = d1 <= 5 * w0 + 1e-12
        checks["last_region"] = dI <= 3 * w0 + 1e-12
        checks["end_regions_sum"] = d1 + dI <= 8 * w0 + 1e-12
    else:
        checks["first_region"] = checks["last_region"] = checks["end_regions_sum"] = True
    dec = DiceDecomposition(cuts, levels, areas, I, w0, R0, diam, checks)
    if not all(checks.values()):
        bad = [k for k, v in checks.items() if not v]
        raise FalsifiedError(f"slicing properties fail: {bad}")
    return dec


# ---------------------------------------------------------------- counterexample


def counterexample_audit(delta: float, n_grid: int = 10_000) -> dict:
    """2-Ricci lower bound, Ricci failure, distances and closure for the delta family."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    m = make_metric("Counterexample", {"delta": delta})
    a, b = m.domain()
    two_min, two_at = min_over_grid(m, a, b, "two_ricci", n=n_grid, closed=False)
    ric_min, ric_at = min_over_grid(m, a, b, "ric", n=n_grid, closed=False)
    t = a + (np.arange(n_grid) + 0.5) * (b - a) / n_grid
    c = curvature_arrays(m, t)
    pair = c["diag"][:, 0] + c["diag"][:, 1] - 4.0
    d_core = quad(lambda s: 1.0, 0.0, b)[0]
    d_core2 = quad(lambda s: 1.0, a, 0.0)[0]
    d_cores = quad(lambda s: 1.0, a, b)[0]
    w_hi = m.warps(np.array([b]))
    w_lo = m.warps(np.array([a]))
    closure = {
        "phi_zero": float(w_hi["phi"][0]),
        "phi_slope": float(w_hi["dphi"][0]),
        "phi_curv": float(w_hi["ddphi"][0]),
        "psi_slope_at_phi_core": float(w_hi["dpsi"][0]),
        "psi_zero": float(w_lo["psi"][0]),
        "psi_slope": float(w_lo["dpsi"][0]),
        "psi_curv": float(w_lo["ddpsi"][0]),
        "phi_slope_at_psi_core": float(w_lo["dphi"][0]),
    }
    smooth = (abs(closure["phi_zero"]) < 1e-12 and abs(abs(closure["phi_slope"]) - 1) < 1e-12
              and abs(closure["phi_curv"]) < 1e-12 and abs(closure["psi_slope_at_phi_core"]) < 1e-12
              and abs(closure["psi_zero"]) < 1e-12 and abs(abs(closure["psi_slope"]) - 1) < 1e-12
              and abs(closure["psi_curv"]) < 1e-12 and abs(closure["phi_slope_at_psi_core"]) < 1e-12)
    ric_ok = ric_min >= 2.0 - GATE_TOL
    return {
        "delta": delta,
        "two_ricci_min": two_min,
        "two_ricci_at": two_at,
        "two_ricci_ok": two_min >= 4.0 - GATE_TOL,
        "ric_min": ric_min,
        "ric_at": ric_at,
        "ric_ge_2": ric_ok,
        "ric_ge_2_iff_round": ric_ok == (delta == 0.0),
        "tt_xx_pair_min": float(np.min(pair)),
        "dist_center_to_core": d_core,
        "dist_center_to_other_core": d_core2,
        "dist_core_to_core": d_cores,
        "closure": closure,
        "smooth_closure": bool(smooth),
    }


# ---------------------------------------------------------------- catalog


def catalog_problems() -> dict:
    """Named symmetric band problems used by the property suites and the CLI."""
    q = math.pi / 4
    return {
        "flat": make_band_problem(make_metric("FlatProduct"), make_potential("Zero")),
        "torus_equality": make_band_problem(make_metric("TorusExtremal", {"w": math.pi / 3}),
                                            make_potential("TorusBand", {"w0": math.pi / 3})),
        "round_ricci": make_band_problem(make_metric("RoundBand", {"theta1": q, "theta2": q}, 3),
                                         make_potential("RicciBand", {"n": 3, "H_minus": 2.0})),
        "round_zero": make_band_problem(make_metric("RoundBand", {"theta1": q, "theta2": q}, 3),
                                        make_potential("Zero")),
        "gupsilon": make_band_problem(make_metric("GUpsilon", {"upsilon": 0.5, "rho0": math.pi / 8}),
                                      make_potential("TwoRicciBand", {"H0": 2.0}),
                                      (-math.pi / 8, math.pi / 8)),
        "lipschitz_flat": make_band_problem(
            make_metric("FlatProduct"),
            make_potential("LipschitzFamily", {"a": 1.0, "b": 1.1 / math.pi, "eps": 0.1, "C": 10.0, "w": 1.0})),
        "warped_zero": make_band_problem(make_metric("RicciWarped", {"amp": 1.2}, 3),
                                         make_potential("Zero"), (0.5, 2.5)),
        "counterexample": make_band_problem(make_metric("Counterexample", {"delta": 0.5}),
                                            make_potential("Zero"), (-math.pi / 8, math.pi / 8)),
    }


__all__ = [
    "DiceDecomposition", "FalsifiedError", "HypothesisError", "WidthVerdict", "bonnet_myers",
    "catalog_problems", "counterexample_audit", "dice", "waist_average", "waist_bound",
    "width_bound", "width_bound_value", "BandProblem",
]
