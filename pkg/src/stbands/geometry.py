"""Closed-form warped-product metric families and their curvature.

Profiles are parametrized by an arclength coordinate rho. Doubly warped
families have the form d rho^2 + phi(rho)^2 dx^2 + psi(rho)^2 dy^2 on a
band times a flat torus; singly warped families have the form
d rho^2 + w(rho)^2 g_F with an Einstein fiber F of dimension n-1.
AFSymmetric uses a radial coordinate r with metric alpha^2 dr^2 + beta^2 g_S.

Every family hand-codes its warping derivatives together with numerically
stable logarithmic-derivative ratios, which are what curvature needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma

FAMILIES = (
    "RoundBand",
    "GUpsilon",
    "TorusExtremal",
    "Counterexample",
    "RicciWarped",
    "AFSymmetric",
    "FlatProduct",
    "CustomDoublyWarped",
)

DOUBLY = {"GUpsilon", "TorusExtremal", "Counterexample", "FlatProduct", "CustomDoublyWarped"}
SINGLY = {"RoundBand", "RicciWarped"}

TORUS_AREA = 4.0 * math.pi**2


class GeometryError(ValueError):
    """Inadmissible metric parameters or evaluation outside the domain."""


def sphere_area(m: int) -> float:
    """Area of the unit round sphere S^m."""
    return 2.0 * math.pi ** ((m + 1) / 2.0) / gamma((m + 1) / 2.0)


@dataclass(frozen=True)
class Grid1D:
    lo: float
    hi: float
    n_cells: int

    def __post_init__(self):
        if not (self.hi > self.lo) or self.n_cells < 1:
            raise GeometryError(f"bad grid [{self.lo}, {self.hi}] with {self.n_cells} cells")

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        x = self.lo + self.h * np.arange(self.n_cells + 1)
        x[-1] = self.hi
        return x


@dataclass(frozen=True)
class CurvatureSample:
    rho: float
    ricci_eigs: tuple
    scalar: float
    two_ricci: float
    mean_curv: float


@dataclass(frozen=True)
class MetricSpec:
    family: str
    params: Mapping[str, Any] = field(default_factory=dict)
    dimension: int = 3

    @property
    def kind(self) -> str:
        if self.family in DOUBLY:
            return "doubly"
        if self.family in SINGLY:
            return "singly"
        return "af"

    @property
    def _impl(self):
        return _IMPL[self.family]

    def domain(self) -> tuple[float, float]:
        """Open profile interval on which the warping functions are positive."""
        return self._impl.domain(self.params)

    def band(self) -> tuple[float, float]:
        """Default band [lo, hi] inside the closure of the domain."""
        p = self.params
        if "lo" in p and "hi" in p:
            return float(p["lo"]), float(p["hi"])
        return self._impl.band(p)

    def warps(self, rho) -> dict:
        """Warping functions with exact first and second derivatives."""
        return self._impl.warps(self.params, np.asarray(rho, dtype=float), self.dimension)

    def ratios(self, rho) -> dict:
        """Stable logarithmic-derivative ratios used by the curvature formulas."""
        return self._impl.ratios(self.params, np.asarray(rho, dtype=float), self.dimension)

    @property
    def fiber_dim(self) -> int:
        return self.dimension - 1

    @property
    def kappa(self) -> float:
        """Einstein constant of the fiber (Ric_F = kappa g_F)."""
        if self.kind == "doubly":
            return 0.0
        return float(self.params.get("kappa", self.dimension - 2))

    def fiber_area(self) -> float:
        """Volume of the unit fiber (torus or Einstein fiber)."""
        if "fiber_area" in self.params:
            return float(self.params["fiber_area"])
        if self.kind == "doubly":
            return TORUS_AREA
        m = self.dimension - 1
        if m == 2 and self.kappa != 1.0 and self.kappa > 0:
            # a 2-sphere of constant curvature kappa
            return 4.0 * math.pi / self.kappa
        return sphere_area(m)

    def fiber_euler_char(self) -> int:
        if "euler_char" in self.params:
            return int(self.params["euler_char"])
        if self.kind == "doubly":
            return 0
        if self.dimension == 3:
            # Gauss-Bonnet on the fiber surface
            return int(round(self.kappa * self.fiber_area() / (2.0 * math.pi)))
        return 2

    def area(self, rho) -> np.ndarray:
        """Area of the rho-level fiber."""
        rho = np.asarray(rho, dtype=float)
        w = self.warps(rho)
        if self.kind == "doubly":
            return self.fiber_area() * w["phi"] * w["psi"]
        if self.kind == "singly":
            return self.fiber_area() * w["w"] ** (self.dimension - 1)
        return sphere_area(self.dimension - 1) * w["beta"] ** (self.dimension - 1)

    def to_json(self) -> dict:
        params = {}
        for k, v in self.params.items():
            params[k] = list(v) if isinstance(v, (list, tuple, np.ndarray)) else v
        return {"family": self.family, "params": params, "dimension": self.dimension}


def make_metric(family: str, params: Mapping[str, Any] | None = None,
                dimension: int | None = None) -> MetricSpec:
    if family not in _IMPL:
        raise GeometryError(f"unknown metric family {family!r}")
    params = dict(params or {})
    if "dimension" in params and dimension is None:
        dimension = int(params.pop("dimension"))
    if "n" in params and dimension is None:
        dimension = int(params["n"])
    params.pop("n", None)
    if family in DOUBLY:
        if dimension not in (None, 3):
            raise GeometryError(f"{family} is three-dimensional")
        dimension = 3
    elif dimension is None:
        dimension = 3
    if dimension < 2:
        raise GeometryError("dimension must be at least 2")
    impl = _IMPL[family]
    impl.validate(params, dimension)
    spec = MetricSpec(family, MappingProxyType(params), int(dimension))
    _check_positive(spec)
    return spec


def metric_from_json(obj: Mapping[str, Any]) -> MetricSpec:
    if "family" not in obj:
        raise GeometryError("metric JSON needs a 'family' key")
    return make_metric(obj["family"], obj.get("params", {}), obj.get("dimension"))


def _check_positive(spec: MetricSpec) -> None:
    a, b = spec.domain()
    a = max(a, -1e6)
    b = min(b, 1e6)
    t = np.linspace(a, b, 2003)[1:-1]
    w = spec.warps(t)
    for key in ("phi", "psi", "w", "alpha", "beta"):
        if key in w and not np.all(np.asarray(w[key]) > 0):
            raise GeometryError(f"{spec.family}: warping function {key} is not positive on the interior")


# ---------------------------------------------------------------- curvature


def curvature_arrays(metric: MetricSpec, rho) -> dict:
    """Vectorized curvature along the profile.

    Returns the unsorted diagonal Ricci entries (radial first), sorted
    eigenvalues, scalar curvature, 2-Ricci and H_rho. No domain checks;
    values at vanishing warping are inf or nan.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    n = metric.dimension
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = metric.ratios(rho)
        if metric.kind == "doubly":
            ric_rr = -r["A1"] - r["A2"]
            ric_x = -r["A1"] - r["k12"]
            ric_y = -r["A2"] - r["k12"]
            diag = np.stack([ric_rr, ric_x, ric_y], axis=-1)
            H = r["k1"] + r["k2"]
        else:
            m = n - 1
            k, A, inv_w2 = r["k"], r["A"], r["inv_w2"]
            ric_rr = -m * A
            if "fiber_sec" in r and m >= 2:
                fib = (m - 1) * r["fiber_sec"] - A
            else:
                fib = metric.kappa * inv_w2 - A - (m - 1) * k * k
            diag = np.concatenate([ric_rr[:, None], np.repeat(fib[:, None], m, axis=1)], axis=1)
            H = m * k
    eigs = np.sort(diag, axis=-1)
    return {
        "rho": rho,
        "diag": diag,
        "eigs": eigs,
        "scalar": diag.sum(axis=-1),
        "two_ricci": eigs[:, 0] + eigs[:, 1],
        "H": H,
        "ric_rr": diag[:, 0],
    }


def curvature_at(metric: MetricSpec, rho: float) -> CurvatureSample:
    rho = float(rho)
    a, b = metric.domain()
    if not (a < rho < b):
        raise GeometryError(f"rho={rho} is not strictly inside the profile interval ({a}, {b})")
    w = metric.warps(np.array([rho]))
    for key in ("phi", "psi", "w", "beta"):
        if key in w and not float(np.asarray(w[key])[0]) > 0:
            raise GeometryError(f"warping function {key} vanishes at rho={rho}")
    c = curvature_arrays(metric, rho)
    eigs = tuple(float(e) for e in c["eigs"][0])
    return CurvatureSample(
        rho=rho,
        ricci_eigs=eigs,
        scalar=float(c["scalar"][0]),
        two_ricci=eigs[0] + eigs[1],
        mean_curv=float(c["H"][0]),
    )


def mean_curv_profile(metric: MetricSpec, rho) -> np.ndarray:
    """H_rho of the rho-level set with respect to d/d rho (no checks)."""
    return curvature_arrays(metric, rho)["H"]


def boundary_mean_curvatures(metric: MetricSpec, lo: float, hi: float) -> tuple[float, float]:
    """Outward mean curvatures (H at lo, H at hi) of a band [lo, hi]."""
    h = curvature_arrays(metric, np.array([lo, hi]))["H"]
    return float(-h[0]), float(h[1])


def closes_at(metric: MetricSpec, rho: float) -> bool:
    """True if some warping function vanishes at rho (the band caps off)."""
    w = metric.warps(np.array([float(rho)]))
    for key in ("phi", "psi", "w", "beta"):
        if key in w and abs(float(np.asarray(w[key])[0])) < 1e-12:
            return True
    return False


def mean_curvature_boundary(metric: MetricSpec, side: str) -> float:
    if metric.kind == "af":
        raise GeometryError("AFSymmetric has a single asymptotic end and no band boundary")
    lo, hi = metric.band()
    if side in ("+", "plus", "hi"):
        rho = hi
    elif side in ("-", "minus", "lo"):
        rho = lo
    else:
        raise GeometryError(f"side must be '+' or '-', got {side!r}")
    if closes_at(metric, rho):
        raise GeometryError(f"{metric.family} closes up at rho={rho}; no boundary there")
    h_lo, h_hi = boundary_mean_curvatures(metric, lo, hi)
    return h_hi if rho == hi else h_lo


# ---------------------------------------------------------------- families


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise GeometryError(msg)


def _num(p, key, default=None) -> float:
    if key not in p:
        if default is None:
            raise GeometryError(f"missing parameter {key!r}")
        return float(default)
    try:
        v = float(p[key])
    except (TypeError, ValueError):
        raise GeometryError(f"parameter {key!r} must be a number") from None
    if not math.isfinite(v):
        raise GeometryError(f"parameter {key!r} must be finite")
    return v


def _from_ratios(val, k, A):
    return val, val * k, val * A


class _RoundBand:
    @staticmethod
    def validate(p, n):
        _require(n >= 3, "RoundBand needs n >= 3")
        t1, t2 = _num(p, "theta1", math.pi / 4), _num(p, "theta2", math.pi / 4)
        _require(-t1 < t2, "RoundBand needs -theta1 < theta2")
        _require(-math.pi / 2 < -t1 and t2 < math.pi / 2, "RoundBand needs theta1, theta2 < pi/2")

    @staticmethod
    def domain(p):
        return -math.pi / 2, math.pi / 2

    @staticmethod
    def band(p):
        return -_num(p, "theta1", math.pi / 4), _num(p, "theta2", math.pi / 4)

    @staticmethod
    def warps(p, t, n):
        c, s = np.cos(t), np.sin(t)
        return {"w": c, "dw": -s, "ddw": -c}

    @staticmethod
    def ratios(p, t, n):
        c = np.cos(t)
        return {"k": -np.tan(t), "A": -np.ones_like(t), "inv_w2": 1.0 / (c * c)}


class _RicciWarped:
    """w(theta) = (amp/freq)(sin s + cubic sin^3 s), s = freq*theta, with an
    optional flat plateau of length `plateau` inserted at s = pi/2."""

    @staticmethod
    def validate(p, n):
        _require(n >= 3, "RicciWarped needs n >= 3")
        amp, freq = _num(p, "amp", 1.0), _num(p, "freq", 1.0)
        cubic, plat = _num(p, "cubic", 0.0), _num(p, "plateau", 0.0)
        _require(amp > 0 and freq > 0, "RicciWarped needs amp > 0 and freq > 0")
        _require(cubic > -1.0, "RicciWarped needs cubic > -1")
        _require(plat >= 0, "RicciWarped needs plateau >= 0")
        if "kappa" in p:
            _num(p, "kappa")

    @staticmethod
    def domain(p):
        freq, plat = _num(p, "freq", 1.0), _num(p, "plateau", 0.0)
        return 0.0, math.pi / freq + plat

    band = domain

    @staticmethod
    def _sincos(p, t):
        """sin and cos of the profile angle; the far half uses the distance to
        the end so that cancellations against end-relative potentials are exact."""
        freq, plat = _num(p, "freq", 1.0), _num(p, "plateau", 0.0)
        t = np.asarray(t, dtype=float)
        tp = math.pi / (2 * freq)
        hi = math.pi / freq + plat
        flat = (t > tp) & (t < tp + plat)
        near = freq * t
        far = freq * (hi - t)
        first = t <= tp
        sn = np.where(first, np.sin(near), np.where(flat, 1.0, np.sin(far)))
        cs = np.where(first, np.cos(near), np.where(flat, 0.0, -np.cos(far)))
        return sn, cs, flat

    @staticmethod
    def warps(p, t, n):
        amp, freq, c = _num(p, "amp", 1.0), _num(p, "freq", 1.0), _num(p, "cubic", 0.0)
        sn, cs, flat = _RicciWarped._sincos(p, t)
        w = (amp / freq) * (sn + c * sn**3)
        dw = amp * cs * (1 + 3 * c * sn**2)
        ddw = amp * freq * (-sn + c * (6 * sn * cs**2 - 3 * sn**3))
        dw = np.where(flat, 0.0, dw)
        ddw = np.where(flat, 0.0, ddw)
        return {"w": w, "dw": dw, "ddw": ddw}

    @staticmethod
    def ratios(p, t, n):
        amp, freq, c = _num(p, "amp", 1.0), _num(p, "freq", 1.0), _num(p, "cubic", 0.0)
        sn, cs, flat = _RicciWarped._sincos(p, t)
        q = 1 + c * sn**2
        k = freq * cs * (1 + 3 * c * sn**2) / (sn * q)
        A = freq**2 * (-1 + c * (6 * cs**2 - 3 * sn**2)) / q
        w = (amp / freq) * sn * q
        out = {
            "k": np.where(flat, 0.0, k),
            "A": np.where(flat, 0.0, A),
            "inv_w2": 1.0 / (w * w),
        }
        if n >= 3:
            # (kappa_s - w'^2)/w^2 with the sin^2 factor cancelled by hand
            ks = _num(p, "kappa", n - 2) / (n - 2)
            tail = freq**2 * (1 - 3 * c * cs**2 * (2 + 3 * c * sn**2)) / q**2
            out["fiber_sec"] = (ks - amp**2) / (w * w) + tail
        return out


class _GUpsilon:
    @staticmethod
    def validate(p, n):
        ups = _num(p, "upsilon", 0.0)
        _require(0.0 <= ups <= 1.0, "GUpsilon needs upsilon in [0, 1]")
        r0 = _num(p, "rho0", math.pi / 8)
        _require(0 < r0 <= math.pi / 4, "GUpsilon needs 0 < rho0 <= pi/4")

    @staticmethod
    def domain(p):
        return -math.pi / 4, math.pi / 4

    @staticmethod
    def band(p):
        r0 = _num(p, "rho0", math.pi / 8)
        return -r0, r0

    @staticmethod
    def warps(p, t, n):
        ups = _num(p, "upsilon", 0.0)
        u = 1.0 - ups
        pre = 2.0 ** (u / 2)
        c2 = np.cos(2 * t)
        with np.errstate(invalid="ignore", divide="ignore"):
            phi = pre * np.cos(t + math.pi / 4) ** u * np.abs(c2) ** (ups / 2)
            psi = pre * np.sin(t + math.pi / 4) ** u * np.abs(c2) ** (ups / 2)
            r = _GUpsilon.ratios(p, t, n)
        return {
            "phi": phi, "dphi": phi * r["k1"], "ddphi": phi * r["A1"],
            "psi": psi, "dpsi": psi * r["k2"], "ddpsi": psi * r["A2"],
        }

    @staticmethod
    def ratios(p, t, n):
        ups = _num(p, "upsilon", 0.0)
        u = 1.0 - ups
        T = np.tan(t + math.pi / 4)
        iT = 1.0 / T
        S = np.tan(2 * t)
        k1 = -u * T - ups * S
        k2 = u * iT - ups * S
        A1 = -u - 2 * ups - u * ups * T**2 - 2 * ups * S**2 + 2 * u * ups * T * S + ups**2 * S**2
        A2 = -u - 2 * ups - u * ups * iT**2 - 2 * ups * S**2 - 2 * u * ups * iT * S + ups**2 * S**2
        k12 = -(u**2) + 2 * u * ups * S**2 + ups**2 * S**2
        return {"k1": k1, "k2": k2, "A1": A1, "A2": A2, "k12": k12}


class _TorusExtremal:
    @staticmethod
    def validate(p, n):
        w = _num(p, "w", math.pi / 3)
        _require(0 < w < 2 * math.pi / 3, "TorusExtremal needs w in (0, 2pi/3)")

    @staticmethod
    def domain(p):
        return -math.pi / 3, math.pi / 3

    @staticmethod
    def band(p):
        w = _num(p, "w", math.pi / 3)
        return -w / 2, w / 2

    @staticmethod
    def warps(p, t, n):
        c = np.cos(1.5 * t)
        with np.errstate(invalid="ignore", divide="ignore"):
            v = np.abs(c) ** (2.0 / 3.0)
            r = _TorusExtremal.ratios(p, t, n)
        return {
            "phi": v, "dphi": v * r["k1"], "ddphi": v * r["A1"],
            "psi": v, "dpsi": v * r["k2"], "ddpsi": v * r["A2"],
        }

    @staticmethod
    def ratios(p, t, n):
        tn = np.tan(1.5 * t)
        k = -tn
        A = -1.5 - 0.5 * tn**2
        return {"k1": k, "k2": k, "A1": A, "A2": A, "k12": tn**2}


class _Counterexample:
    @staticmethod
    def validate(p, n):
        d = _num(p, "delta", 0.0)
        _require(0.0 <= d <= 1.0, "Counterexample needs delta in [0, 1]")

    @staticmethod
    def domain(p):
        return -math.pi / 4, math.pi / 4

    band = domain

    @staticmethod
    def warps(p, t, n):
        d = _num(p, "delta", 0.0)
        s2, c2 = np.sin(2 * t), np.cos(2 * t)
        x = t + math.pi / 4
        cx, sx = np.cos(x), np.sin(x)
        e1, d1, dd1 = 0.5 * d * (s2 - 1), d * c2, -2 * d * s2
        e2, d2, dd2 = -0.5 * d * (s2 + 1), -d * c2, 2 * d * s2
        E1, E2 = np.exp(e1), np.exp(e2)
        return {
            "phi": E1 * cx,
            "dphi": E1 * (d1 * cx - sx),
            "ddphi": E1 * ((dd1 + d1**2) * cx - 2 * d1 * sx - cx),
            "psi": E2 * sx,
            "dpsi": E2 * (d2 * sx + cx),
            "ddpsi": E2 * ((dd2 + d2**2) * sx + 2 * d2 * cx - sx),
        }

    @staticmethod
    def ratios(p, t, n):
        d = _num(p, "delta", 0.0)
        s2, c2 = np.sin(2 * t), np.cos(2 * t)
        x = t + math.pi / 4
        k1 = d * c2 - np.tan(x)
        k2 = -d * c2 + 1.0 / np.tan(x)
        # simplified ratios stay finite at the closing ends t = +-pi/4
        A1 = -1 - 2 * d - 4 * d * s2 + d**2 * c2**2
        A2 = -1 - 2 * d + 4 * d * s2 + d**2 * c2**2
        k12 = -(d**2) * c2**2 + 2 * d - 1
        return {"k1": k1, "k2": k2, "A1": A1, "A2": A2, "k12": k12}


class _FlatProduct:
    @staticmethod
    def validate(p, n):
        lo, hi = _num(p, "lo", 0.0), _num(p, "hi", 1.0)
        _require(hi > lo, "FlatProduct needs lo < hi")

    @staticmethod
    def domain(p):
        return -math.inf, math.inf

    @staticmethod
    def band(p):
        return _num(p, "lo", 0.0), _num(p, "hi", 1.0)

    @staticmethod
    def warps(p, t, n):
        one, zero = np.ones_like(t), np.zeros_like(t)
        return {"phi": one, "dphi": zero, "ddphi": zero, "psi": one, "dpsi": zero, "ddpsi": zero}

    @staticmethod
    def ratios(p, t, n):
        z = np.zeros_like(t)
        return {"k1": z, "k2": z, "A1": z, "A2": z, "k12": z}


class _CustomDoublyWarped:
    @staticmethod
    def _splines(p):
        try:
            x = np.asarray(p["knots"], dtype=float)
            a = np.asarray(p["phi"], dtype=float)
            b = np.asarray(p["psi"], dtype=float)
        except KeyError as e:
            raise GeometryError(f"CustomDoublyWarped needs {e.args[0]!r}") from None
        return CubicSpline(x, a), CubicSpline(x, b)

    @staticmethod
    def validate(p, n):
        try:
            x = np.asarray(p["knots"], dtype=float)
            a = np.asarray(p["phi"], dtype=float)
            b = np.asarray(p["psi"], dtype=float)
        except KeyError as e:
            raise GeometryError(f"CustomDoublyWarped needs {e.args[0]!r}") from None
        _require(x.ndim == 1 and x.size >= 4, "CustomDoublyWarped needs at least 4 knots")
        _require(a.shape == x.shape and b.shape == x.shape, "knot and value arrays differ in length")
        _require(bool(np.all(np.diff(x) > 0)), "knots must be strictly increasing")

    @staticmethod
    def domain(p):
        x = p["knots"]
        return float(x[0]), float(x[-1])

    band = domain

    @staticmethod
    def warps(p, t, n):
        sa, sb = _CustomDoublyWarped._splines(p)
        return {
            "phi": sa(t), "dphi": sa(t, 1), "ddphi": sa(t, 2),
            "psi": sb(t), "dpsi": sb(t, 1), "ddpsi": sb(t, 2),
        }

    @staticmethod
    def ratios(p, t, n):
        w = _CustomDoublyWarped.warps(p, t, n)
        return {
            "k1": w["dphi"] / w["phi"], "k2": w["dpsi"] / w["psi"],
            "A1": w["ddphi"] / w["phi"], "A2": w["ddpsi"] / w["psi"],
            "k12": w["dphi"] * w["dpsi"] / (w["phi"] * w["psi"]),
        }


class _AFSymmetric:
    """alpha^2 dr^2 + beta^2 g_S with alpha = phi^(2/(n-2)), beta = cone*r*alpha and
    phi = 1 + m/(2 r^(n-2)); mass 0 is Euclidean, n = 3 gives isotropic Schwarzschild."""

    @staticmethod
    def validate(p, n):
        _require(_num(p, "mass", 0.0) >= 0, "AFSymmetric needs mass >= 0")
        _require(_num(p, "cone", 1.0) > 0, "AFSymmetric needs cone > 0")

    @staticmethod
    def domain(p):
        return 0.0, math.inf

    band = domain

    @staticmethod
    def radial(p, r, n):
        m, cone = _num(p, "mass", 0.0), _num(p, "cone", 1.0)
        if n == 2:
            one, zero = np.ones_like(r), np.zeros_like(r)
            a, da, dda = one, zero, zero
        else:
            q = 2.0 / (n - 2)
            ph = 1 + m / (2 * r ** (n - 2))
            dph = -(n - 2) * m / (2 * r ** (n - 1))
            ddph = (n - 2) * (n - 1) * m / (2 * r**n)
            a = ph**q
            da = q * ph ** (q - 1) * dph
            dda = q * (q - 1) * ph ** (q - 2) * dph**2 + q * ph ** (q - 1) * ddph
        b = cone * r * a
        db = cone * (a + r * da)
        ddb = cone * (2 * da + r * dda)
        return {"alpha": a, "dalpha": da, "ddalpha": dda, "beta": b, "dbeta": db, "ddbeta": ddb}

    warps = radial

    @staticmethod
    def ratios(p, r, n):
        w = _AFSymmetric.radial(p, r, n)
        a, da, b, db, ddb = w["alpha"], w["dalpha"], w["beta"], w["dbeta"], w["ddbeta"]
        # derivatives with respect to arclength d rho = alpha dr
        b_s = db / a
        b_ss = (ddb * a - db * da) / a**3
        return {"k": b_s / b, "A": b_ss / b, "inv_w2": 1.0 / (b * b)}


_IMPL = {
    "RoundBand": _RoundBand,
    "RicciWarped": _RicciWarped,
    "GUpsilon": _GUpsilon,
    "TorusExtremal": _TorusExtremal,
    "Counterexample": _Counterexample,
    "FlatProduct": _FlatProduct,
    "CustomDoublyWarped": _CustomDoublyWarped,
    "AFSymmetric": _AFSymmetric,
}


def min_over_grid(metric: MetricSpec, lo: float, hi: float, quantity: str, n: int = 10_000,
                  closed: bool = True) -> tuple[float, float]:
    """Minimum of a curvature quantity on an n-point grid; returns (value, rho).

    quantity is one of 'ric', 'two_ricci', 'scalar'. With closed=False the
    grid is offset half a cell so that closing endpoints are not sampled.
    """
    if closed:
        t = np.linspace(lo, hi, n)
    else:
        t = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    c = curvature_arrays(metric, t)
    vals = {"ric": c["eigs"][:, 0], "two_ricci": c["two_ricci"], "scalar": c["scalar"]}[quantity]
    if not np.all(np.isfinite(vals)):
        bad = int(np.argmin(np.isfinite(vals)))
        raise GeometryError(f"curvature not finite at rho={t[bad]}")
    i = int(np.argmin(vals))
    return float(vals[i]), float(t[i])
