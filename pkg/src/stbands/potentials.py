"""Piecewise-analytic potentials f(tau) and certification of their ODE inequalities.

tau is the distance to the lower boundary of a band. Every kind accepts two
generic params: `offset`, so that f(tau) is the base formula evaluated at
tau + offset, and `sign` (+1 or -1), which flips the potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Mapping

import numpy as np

KINDS = ("Zero", "RicciBand", "TorusBand", "TwoRicciBand", "Waist", "Llarull",
         "LipschitzFamily", "Dice")

# kinds claimed to be nondecreasing in tau
MONOTONE_KINDS = {"RicciBand", "TorusBand", "TwoRicciBand", "LipschitzFamily", "Waist", "Dice",
                  "Llarull", "Zero"}


class PotentialError(ValueError):
    """Inadmissible potential parameters or incompatible ODE kind."""


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    dsup: float
    label: str = ""


@dataclass(frozen=True)
class Potential:
    kind: str
    params: Mapping[str, Any]
    pieces: tuple
    lipschitz_const: float
    poles: tuple = ()
    increasing: bool = True

    @property
    def offset(self) -> float:
        return float(self.params.get("offset", 0.0))

    @property
    def sign(self) -> float:
        return float(self.params.get("sign", 1.0))

    @property
    def breaks(self) -> np.ndarray:
        """Interior piece boundaries in base coordinates."""
        return np.array([p.lo for p in self.pieces[1:]], dtype=float)

    def splices(self) -> list[float]:
        """Piece boundaries in tau coordinates."""
        return [float(b - self.offset) for b in self.breaks]

    def pole_taus(self) -> list[float]:
        return [float(p - self.offset) for p in self.poles]

    def _index(self, x: np.ndarray, left: bool = False) -> np.ndarray:
        side = "left" if left else "right"
        return np.clip(np.searchsorted(self.breaks, x, side=side), 0, len(self.pieces) - 1)

    def _eval(self, tau, which: str, left: bool = False) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        x = np.atleast_1d(tau + self.offset)
        idx = self._index(x, left)
        out = np.empty_like(x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for j, piece in enumerate(self.pieces):
                m = idx == j
                if np.any(m):
                    fn = piece.value if which == "value" else piece.deriv
                    out[m] = fn(x[m])
        out = self.sign * out
        return out.reshape(tau.shape) if tau.ndim else out[0]

    def __call__(self, tau):
        return self._eval(tau, "value")

    def deriv(self, tau):
        """Derivative in tau; right-sided at splice points."""
        return self._eval(tau, "deriv")

    def deriv_left(self, tau):
        return self._eval(tau, "deriv", left=True)

    def piece_index(self, tau) -> np.ndarray:
        return self._index(np.atleast_1d(np.asarray(tau, dtype=float) + self.offset))

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


def _num(p, key, default=None) -> float:
    if key not in p:
        if default is None:
            raise PotentialError(f"missing parameter {key!r}")
        return float(default)
    try:
        v = float(p[key])
    except (TypeError, ValueError):
        raise PotentialError(f"parameter {key!r} must be a number") from None
    if not math.isfinite(v):
        raise PotentialError(f"parameter {key!r} must be finite")
    return v


def _tan_piece(lo, hi, amp, slope, shift, label):
    """amp * tan(slope * (x - shift)) on [lo, hi]."""

    def val(x):
        return amp * np.tan(slope * (x - shift))

    def der(x):
        return amp * slope / np.cos(slope * (x - shift)) ** 2

    ends = [e for e in (lo, hi) if math.isfinite(e)]
    dsup = max(abs(float(der(np.array(e)))) for e in ends) if ends else math.inf
    if not (math.isfinite(lo) and math.isfinite(hi)):
        dsup = math.inf
    return Piece(lo, hi, val, der, dsup, label)


def _linear_piece(lo, hi, x0, y0, slope, label="linear"):
    def val(x):
        return y0 + slope * (x - x0)

    def der(x):
        return np.full_like(x, slope)

    return Piece(lo, hi, val, der, abs(slope), label)


def _const_piece(lo, hi, y0, label="const"):
    return Piece(lo, hi, lambda x: np.full_like(x, y0), lambda x: np.zeros_like(x), 0.0, label)


def _finish(kind, params, pieces, poles=(), increasing=True) -> Potential:
    lip = max(p.dsup for p in pieces)
    pot = Potential(kind, MappingProxyType(dict(params)), tuple(pieces), lip, tuple(poles), increasing)
    _check_continuity(pot)
    return pot


def _check_continuity(pot: Potential) -> None:
    for left, right in zip(pot.pieces[:-1], pot.pieces[1:]):
        b = np.array([right.lo])
        a, c = float(left.value(b)[0]), float(right.value(b)[0])
        if math.isfinite(a) and math.isfinite(c) and abs(a - c) > 1e-12 * max(1.0, abs(a)):
            raise PotentialError(f"{pot.kind}: jump {a - c:.3e} at splice {b[0]}")


# ---------------------------------------------------------------- kinds


def _zero(p):
    return [_const_piece(-math.inf, math.inf, 0.0, "zero")], ()


def _ricci_band(p):
    n = _num(p, "n", 3)
    if n < 3 or n != int(n):
        raise PotentialError("RicciBand needs an integer n >= 3")
    hm, hp = _num(p, "H_minus"), _num(p, "H_plus", p.get("H_minus"))
    am, ap = math.atan(hm / (n - 1)), math.atan(hp / (n - 1))
    K = (n - 1) / (n * (n - 2))
    tt = max(ap + am, math.pi / 4 + am / 2)
    if "tau_splice" in p:
        tt = _num(p, "tau_splice")
    if not (tt - am < math.pi / 2 and tt > 0):
        raise PotentialError("RicciBand splice point outside the domain of the tangent piece")
    tanp = _tan_piece(-math.inf, tt, K, 1.0, am, "tan")
    tanp = Piece(-math.inf, tt, tanp.value, tanp.deriv,
                 max(float(tanp.deriv(np.array(tt))), float(tanp.deriv(np.array(0.0)))), "tan")
    y0 = float(tanp.value(np.array(tt)))
    s0 = float(tanp.deriv(np.array(tt)))
    return [tanp, _linear_piece(tt, math.inf, tt, y0, s0)], ()


def _torus_band(p):
    w0 = _num(p, "w0", math.pi / 3)
    if not (0 < w0 < 2 * math.pi / 3):
        raise PotentialError("TorusBand needs w0 in (0, 2pi/3)")
    tanp = _tan_piece(-math.inf, w0, 1.0, 1.5, w0 / 2, "tan")
    y0 = math.tan(0.75 * w0)
    s0 = 1.5 / math.cos(0.75 * w0) ** 2
    tanp = Piece(-math.inf, w0, tanp.value, tanp.deriv, s0, "tan")
    return [tanp, _linear_piece(w0, math.inf, w0, y0, s0)], ()


def _two_ricci_band(p):
    h0 = _num(p, "H0")
    if h0 <= 0:
        raise PotentialError("TwoRicciBand needs H0 > 0")
    a = math.atan(h0 / 2)
    tt = _num(p, "tau_splice", a)
    if not (0 < tt and 2 * tt - a < math.pi / 2):
        raise PotentialError("TwoRicciBand splice point outside the domain of the tangent piece")
    tanp = _tan_piece(-math.inf, tt, 4.0 / 3.0, 2.0, a / 2, "tan")
    y0 = float(tanp.value(np.array(tt)))
    s0 = float(tanp.deriv(np.array(tt)))
    tanp = Piece(-math.inf, tt, tanp.value, tanp.deriv, max(s0, float(tanp.deriv(np.array(0.0)))), "tan")
    return [tanp, _linear_piece(tt, math.inf, tt, y0, s0)], ()


def _waist(p):
    w = _num(p, "w")
    if w <= 0:
        raise PotentialError("Waist needs w > 0")
    length = _num(p, "length", w)
    r0 = _num(p, "r0", w / 2)
    if length < w - 1e-12:
        raise PotentialError("Waist needs length >= w")
    if not (0 < r0 < w):
        raise PotentialError("Waist needs r0 in (0, w)")
    c = 2 * math.pi / (3 * w)
    k = math.pi / w
    near_p = Piece(-math.inf, r0, lambda x: -c / np.tan(k * x),
                   lambda x: c * k / np.sin(k * x) ** 2, math.inf, "cot-p")
    q_start = length - w + r0
    near_q = Piece(q_start, math.inf, lambda x: c / np.tan(k * (length - x)),
                   lambda x: c * k / np.sin(k * (length - x)) ** 2, math.inf, "cot-q")
    if q_start > r0 + 1e-14:
        mid = _const_piece(r0, q_start, -c / math.tan(k * r0), "const")
        pieces = [near_p, mid, near_q]
    else:
        near_q = Piece(r0, math.inf, near_q.value, near_q.deriv, math.inf, "cot-q")
        pieces = [near_p, near_q]
    return pieces, (0.0, length)


def _dice(p):
    w0 = _num(p, "w0")
    eps = _num(p, "eps")
    center = _num(p, "center", 0.0)
    if w0 <= 0 or not (0 < eps < w0 / 2):
        raise PotentialError("Dice needs w0 > 0 and 0 < eps < w0/2")
    c = 2 * math.pi / (3 * w0)
    k = math.pi / w0
    cap = c / math.tan(eps * k)
    half = w0 / 2 - eps
    lo_c = _const_piece(-math.inf, center - half, -cap, "clip-")
    mid = _tan_piece(center - half, center + half, c, k, center, "tan")
    hi_c = _const_piece(center + half, math.inf, cap, "clip+")
    return [lo_c, mid, hi_c], ()


def smoothstep(x):
    """Cutoff on [0, 1] with zero end slopes and slope at most 1.5."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3 - 2 * x)


def smoothstep_deriv(x):
    x = np.clip(x, 0.0, 1.0)
    return 6 * x * (1 - x)


def psi_eps0(theta, eps: float, r0: float, r1: float):
    """Reparametrization that shifts the poles of cot inward by eps; returns (value, derivative)."""
    th = np.asarray(theta, dtype=float)
    d = r1 - r0
    v = np.where(th <= r0, th - eps, th)
    dv = np.ones_like(th)
    m = (th > r0) & (th < r1)
    v = np.where(m, th - eps + eps * smoothstep((th - r0) / d), v)
    dv = np.where(m, 1 + eps * smoothstep_deriv((th - r0) / d) / d, dv)
    m = (th > math.pi - r1) & (th < math.pi - r0)
    v = np.where(m, th + eps * smoothstep((th - math.pi + r1) / d), v)
    dv = np.where(m, 1 + eps * smoothstep_deriv((th - math.pi + r1) / d) / d, dv)
    v = np.where(th >= math.pi - r0, th + eps, v)
    return v, dv


def psi_delta(theta, delta: float):
    """Quadratic cap that keeps cot bounded near theta = 0 and pi; returns (value, derivative)."""
    th = np.asarray(theta, dtype=float)
    v = np.where(th <= delta, th * th / (2 * delta) + delta / 2, th)
    dv = np.where(th <= delta, th / delta, 1.0)
    far = th >= math.pi - delta
    q = math.pi - th
    v = np.where(far, math.pi - (q * q / (2 * delta) + delta / 2), v)
    dv = np.where(far, q / delta, dv)
    return v, dv


def _llarull(p):
    eps = _num(p, "eps", 0.0)
    r0, r1 = _num(p, "r0", 0.5), _num(p, "r1", 1.0)
    delta = _num(p, "delta", 0.0)
    if eps < 0:
        raise PotentialError("Llarull needs eps >= 0")
    if eps > 0 and not (eps < r0 < r1 < math.pi / 2):
        raise PotentialError("Llarull needs eps < r0 < r1 < pi/2")
    if delta > 0 and not (delta < eps or eps == 0):
        raise PotentialError("Llarull needs delta < eps")
    if delta > 0 and eps == 0:
        # rho-coordinate form of -cot(psi_delta)
        def val(x):
            return -1.0 / np.tan(psi_delta(x, delta)[0])

        def der(x):
            v, dv = psi_delta(x, delta)
            return dv / np.sin(v) ** 2

        lip = 1.0 / math.sin(delta / 2) ** 2
        return [Piece(0.0, math.pi, val, der, lip, "cot-psi-delta")], ()
    if eps == 0:
        return [Piece(-math.inf, math.inf, lambda x: -1.0 / np.tan(x),
                      lambda x: 1.0 / np.sin(x) ** 2, math.inf, "cot")], (0.0, math.pi)

    def val(x):
        return -1.0 / np.tan(psi_eps0(x, eps, r0, r1)[0])

    def der(x):
        v, dv = psi_eps0(x, eps, r0, r1)
        return dv / np.sin(v) ** 2

    bps = [r0, r1, math.pi - r1, math.pi - r0]
    edges = [-math.inf] + bps + [math.inf]
    labels = ["shift-", "ramp-", "cot", "ramp+", "shift+"]
    pieces = [Piece(a, b, val, der, math.inf, lab) for a, b, lab in zip(edges[:-1], edges[1:], labels)]
    return pieces, (eps, math.pi - eps)


_BUILDERS = {
    "Zero": _zero,
    "RicciBand": _ricci_band,
    "TorusBand": _torus_band,
    "TwoRicciBand": _two_ricci_band,
    "Waist": _waist,
    "Dice": _dice,
    "Llarull": _llarull,
}


def make_potential(kind: str, params: Mapping[str, Any] | None = None) -> Potential:
    params = dict(params or {})
    if kind == "LipschitzFamily":
        keys = ("a", "b", "eps", "C", "w")
        return make_lemma24_potential(*(_num(params, k) for k in keys),
                                      offset=_num(params, "offset", 0.0),
                                      sign=_num(params, "sign", 1.0))
    if kind not in _BUILDERS:
        raise PotentialError(f"unknown potential kind {kind!r}")
    sign = _num(params, "sign", 1.0)
    if sign not in (1.0, -1.0):
        raise PotentialError("sign must be +1 or -1")
    _num(params, "offset", 0.0)
    pieces, poles = _BUILDERS[kind](params)
    return _finish(kind, params, pieces, poles, increasing=sign > 0)


def potential_from_json(obj: Mapping[str, Any]) -> Potential:
    if "kind" not in obj:
        raise PotentialError("potential JSON needs a 'kind' key")
    return make_potential(obj["kind"], obj.get("params", {}))


def make_lemma24_potential(a: float, b: float, eps: float, C: float, w: float,
                           offset: float = 0.0, sign: float = 1.0) -> Potential:
    """Reparametrized tangent with linear continuation past tau = w."""
    if not (a > 0 and b > 0 and eps > 0):
        raise PotentialError("need a, b, eps > 0")
    cmin = math.tan(math.pi / (2 * (1 + eps))) / a
    if not C > cmin:
        raise PotentialError(f"C={C} is below its lower bound {cmin}")
    wexp = b * math.pi / (a * (1 + eps))
    if abs(w - wexp) > 1e-12 * max(1.0, wexp):
        raise PotentialError(f"w={w} is inconsistent with b*pi/(a(1+eps))={wexp}")
    c = b / (10 * eps * a) * (math.atan(a * C) - w * a / (2 * b))
    if not (0 < c < w / 20):
        raise PotentialError(f"splice half-width c={c} outside (0, w/20)")
    k = a / b
    m = w / 2

    def outer(shift):
        return (lambda x: np.tan(k * (x - m + shift)) / a,
                lambda x: (1 / b) / np.cos(k * (x - m + shift)) ** 2)

    lv, ld = outer(-10 * eps * c)
    rv, rd = outer(10 * eps * c)
    g = 1 + 10 * eps

    def mv(x):
        return np.tan(k * g * (x - m)) / a

    def md(x):
        return (g / b) / np.cos(k * g * (x - m)) ** 2

    sup_l = max(float(ld(np.array(0.0))), float(ld(np.array(m - c))))
    sup_m = float(md(np.array(m - c)))
    sup_r = max(float(rd(np.array(m + c))), float(rd(np.array(w))))
    slope = (1 + (a * C) ** 2) / b
    pieces = [
        Piece(-math.inf, m - c, lv, ld, sup_l, "outer-"),
        Piece(m - c, m + c, mv, md, sup_m, "middle"),
        Piece(m + c, w, rv, rd, sup_r, "outer+"),
        _linear_piece(w, math.inf, w, C, slope),
    ]
    params = {"a": a, "b": b, "eps": eps, "C": C, "w": w, "c": c}
    if offset:
        params["offset"] = offset
    if sign != 1.0:
        params["sign"] = sign
    return _finish("LipschitzFamily", params, pieces, (), increasing=sign > 0)


# ---------------------------------------------------------------- ODE checks


@dataclass(frozen=True)
class SlackReport:
    min_slack: float
    argmin: float
    per_piece: tuple = field(default_factory=tuple)
    ode_kind: str = ""

    def to_json(self) -> dict:
        return {"min_slack": self.min_slack, "argmin": self.argmin}


ODE_COMPAT = {
    "ricci": {"RicciBand", "Zero", "LipschitzFamily"},
    "torus": {"TorusBand", "Zero"},
    "two_ricci": {"TwoRicciBand", "Zero"},
    "waist": {"Waist", "Dice", "Zero"},
    "lemma24": {"LipschitzFamily"},
    "llarull": {"Llarull"},
}


def ode_slack(pot: Potential, ode_kind: str, tau: np.ndarray, n: int | None = None,
              R0: float | None = None) -> np.ndarray:
    """Left side minus right side of the selected inequality at tau."""
    f = pot(tau)
    df = pot.deriv(tau)
    if ode_kind == "ricci":
        n = n or int(pot.params.get("n", 3))
        return n**2 * (n - 2) ** 2 / (n - 1) * f**2 - n * (n - 2) * df + (n - 1)
    if ode_kind == "torus":
        return 6 + 6 * f**2 - 4 * df
    if ode_kind == "two_ricci":
        return 4 + 2.25 * f**2 - 1.5 * np.abs(df)
    if ode_kind == "waist":
        w = float(pot.params.get("w", pot.params.get("w0", 0.0)))
        if w <= 0:
            return 6 * f**2 - 4 * np.abs(df) + (R0 or 0.0)
        return 6 * f**2 - 4 * np.abs(df) + 8 * math.pi**2 / (3 * w * w)
    if ode_kind == "lemma24":
        a, b = float(pot.params["a"]), float(pot.params["b"])
        return a * a * f**2 - b * np.abs(df) + 1
    if ode_kind == "llarull":
        theta = math.pi - (np.asarray(tau) + pot.offset)
        return 3 + 3 * f**2 - 2 * np.abs(df) - 1.0 / np.sin(theta) ** 2
    raise PotentialError(f"unknown ODE kind {ode_kind!r}")


def check_ode(pot: Potential, ode_kind: str, interval: tuple[float, float],
              n_samples: int = 1000, n: int | None = None) -> SlackReport:
    if ode_kind not in ODE_COMPAT:
        raise PotentialError(f"unknown ODE kind {ode_kind!r}")
    if pot.kind not in ODE_COMPAT[ode_kind]:
        raise PotentialError(f"ODE kind {ode_kind!r} does not apply to a {pot.kind} potential")
    if n_samples < 100:
        raise PotentialError("n_samples must be at least 100")
    lo, hi = map(float, interval)
    if not hi > lo:
        raise PotentialError("empty interval")
    # half-cell offset keeps the nodes off the splice points
    tau = lo + (np.arange(n_samples) + 0.5) * (hi - lo) / n_samples
    sp = np.array(pot.splices())
    if sp.size:
        hit = np.min(np.abs(tau[:, None] - sp[None, :]), axis=1) < 1e-13
        tau = np.where(hit, tau + 0.25 * (hi - lo) / n_samples, tau)
    s = ode_slack(pot, ode_kind, tau, n=n)
    idx = pot.piece_index(tau)
    per = []
    for j in np.unique(idx):
        m = idx == j
        k = int(np.argmin(s[m]))
        piece = pot.pieces[int(j)]
        per.append({"piece": int(j), "label": piece.label, "min_slack": float(s[m][k]),
                    "argmin": float(tau[m][k])})
    best = min(per, key=lambda d: d["min_slack"])
    return SlackReport(best["min_slack"], best["argmin"], tuple(per), ode_kind)
