import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from stbands.potentials import (PotentialError, check_ode, make_lemma24_potential, make_potential,
                                ode_slack, potential_from_json, psi_delta, psi_eps0)

from .oracles import fd1


def ricci_band(hm=2.0, hp=None):
    p = {"n": 3, "H_minus": hm}
    if hp is not None:
        p["H_plus"] = hp
    return make_potential("RicciBand", p)


LIP = {"a": 1.0, "b": 1.0, "eps": 0.1, "C": 10.0, "w": math.pi / 1.1}

MONOTONE = [
    ("RicciBand", {"n": 3, "H_minus": 2.0}),
    ("RicciBand", {"n": 4, "H_minus": 1.0, "H_plus": 3.0}),
    ("TorusBand", {"w0": math.pi / 3}),
    ("TorusBand", {"w0": 1.5}),
    ("TwoRicciBand", {"H0": 2.0}),
    ("TwoRicciBand", {"H0": 0.7}),
    ("LipschitzFamily", LIP),
    ("LipschitzFamily", {"a": 2.0, "b": 0.5, "eps": 0.05, "C": 20.0, "w": 0.5 * math.pi / (2 * 1.05)}),
]


# ---------------------------------------------------------------- spec examples


def test_ricci_band_boundary_value():
    f = ricci_band()
    assert f(0.0) == pytest.approx(-2.0 / 3.0, abs=1e-15)
    assert 3 * 1 * f(0.0) == pytest.approx(-2.0, abs=1e-14)


def test_torus_band_boundary_value():
    f = make_potential("TorusBand", {"w0": math.pi / 3})
    assert f(0.0) == pytest.approx(-1.0, abs=1e-15)
    # equality 2 f(0) + H0 = 0 at the minus boundary
    assert 2 * f(0.0) + 2.0 == pytest.approx(0.0, abs=1e-14)


def test_two_ricci_band_boundary_value():
    f = make_potential("TwoRicciBand", {"H0": 2.0})
    assert f(0.0) == pytest.approx(-4.0 / 3.0, abs=1e-15)
    assert 1.5 * f(0.0) == pytest.approx(-2.0, abs=1e-14)


def test_waist_vanishes_at_middle():
    f = make_potential("Waist", {"w": math.pi})
    assert f(math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    assert f(math.pi / 3) == pytest.approx(-(2 / 3) / math.tan(math.pi / 3), abs=1e-15)


def test_lemma24_midpoint_and_boundary_values():
    f = make_lemma24_potential(**LIP)
    w = LIP["w"]
    assert f(w / 2) == pytest.approx(0.0, abs=1e-14)
    assert f(0.0) <= -LIP["C"] + 1e-9
    assert f(w) >= LIP["C"] - 1e-9


def test_lemma24_measured_constant():
    """a^2 f^2 - b|f'| + 1 >= -C1 eps; C1 measured on dense grids for shrinking eps."""
    ratios = []
    for eps in (0.1, 0.05, 0.02, 0.01):
        a, b, C = 1.0, 1.0, 100.0
        w = b * math.pi / (a * (1 + eps))
        f = make_lemma24_potential(a, b, eps, C, w)
        rep = check_ode(f, "lemma24", (0.0, w), n_samples=20_001)
        ratios.append(-rep.min_slack / eps)
        outer = [d for d in rep.per_piece if d["label"].startswith("outer")]
        # the outer tangent pieces solve the equation exactly
        assert all(abs(d["min_slack"]) < 1e-9 for d in outer)
    # the measured constant stays bounded as eps shrinks
    assert max(ratios) < 2 * min(ratios) + 1e-12
    assert all(r > 0 for r in ratios)


def test_lemma24_parameter_errors():
    with pytest.raises(PotentialError):
        make_lemma24_potential(1.0, 1.0, 0.1, 0.5, math.pi / 1.1)
    with pytest.raises(PotentialError):
        make_lemma24_potential(1.0, 1.0, 0.1, 10.0, 2.0)


def test_check_ode_examples():
    rep = check_ode(ricci_band(), "ricci", (0.0, 1.5), n_samples=1000)
    per = {d["label"]: d["min_slack"] for d in rep.per_piece}
    assert abs(per["tan"]) <= 1e-10
    assert check_ode(make_potential("Zero"), "torus", (0, 1)).min_slack == pytest.approx(6.0)
    rep = check_ode(make_potential("TorusBand", {"w0": math.pi / 3}), "torus", (0, math.pi / 3))
    assert abs(rep.min_slack) <= 1e-10


def test_two_ricci_tangent_saturates():
    rep = check_ode(make_potential("TwoRicciBand", {"H0": 2.0}), "two_ricci", (0, math.atan(1.0)))
    assert abs(rep.min_slack) <= 1e-10


def test_check_ode_errors():
    with pytest.raises(PotentialError):
        check_ode(make_potential("TorusBand", {}), "ricci", (0, 1))
    with pytest.raises(PotentialError):
        check_ode(make_potential("Zero"), "torus", (0, 1), n_samples=10)
    with pytest.raises(PotentialError):
        check_ode(make_potential("Zero"), "nope", (0, 1))


def test_slack_report_minimum_is_min_of_pieces():
    rep = check_ode(make_lemma24_potential(**LIP), "lemma24", (0.0, 3.5), n_samples=3000)
    assert rep.min_slack == min(d["min_slack"] for d in rep.per_piece)
    assert set(rep.to_json()) == {"min_slack", "argmin"}


@pytest.mark.parametrize("kind,params", [
    ("TorusBand", {"w0": 2.5}), ("TwoRicciBand", {"H0": -1}), ("Waist", {"w": -1}),
    ("Llarull", {"eps": 0.6, "r0": 0.5, "r1": 1.0}), ("Nope", {}), ("RicciBand", {"n": 2, "H_minus": 1}),
    ("Zero", {"sign": 2}),
])
def test_inadmissible_potentials(kind, params):
    with pytest.raises(PotentialError):
        make_potential(kind, params)


def test_json_round_trip():
    f = make_potential("TwoRicciBand", {"H0": 1.3, "offset": 0.2})
    g = potential_from_json(f.to_json())
    x = np.linspace(-0.5, 1.5, 17)
    np.testing.assert_array_equal(f(x), g(x))


# ---------------------------------------------------------------- invariants


@pytest.mark.parametrize("kind,params", MONOTONE)
def test_continuity_lipschitz_and_monotone(kind, params):
    f = make_potential(kind, params)
    splices = f.splices()
    for left, right in zip(f.pieces[:-1], f.pieces[1:]):
        b = np.array([right.lo])
        a, c = left.value(b)[0], right.value(b)[0]
        assert abs(a - c) <= 1e-12 * max(1.0, abs(a))
    # the linear continuation joins C1; the family's rescaled middle piece is only Lipschitz
    c1 = splices[-1:] if kind == "LipschitzFamily" else splices
    for tau in c1:
        assert abs(f.deriv(tau) - f.deriv_left(tau)) <= 1e-9 * max(1.0, abs(f.deriv(tau)))
    x = np.linspace(0.0, 2.0, 1000)
    finite = np.isfinite(f(x))
    assert np.all(np.diff(f(x)[finite]) >= 0)
    for piece in f.pieces:
        lo = max(piece.lo, 0.0)
        hi = min(piece.hi, 2.0)
        if hi <= lo:
            continue
        t = np.linspace(lo, hi, 200)[1:-1] - f.offset
        d = np.abs(f.deriv(t))
        d = d[np.isfinite(d)]
        assert np.all(d <= piece.dsup * (1 + 1e-12) + 1e-12)


@pytest.mark.parametrize("kind,params", MONOTONE[:6])
def test_analytic_derivative_matches_finite_differences(kind, params):
    f = make_potential(kind, params)
    x = np.linspace(0.05, 0.9, 37)
    sp = np.array(f.splices())
    if sp.size:
        x = x[np.min(np.abs(x[:, None] - sp[None, :]), axis=1) > 1e-3]
    np.testing.assert_allclose(f.deriv(x), fd1(f, x, 1e-5), rtol=1e-7, atol=1e-7)


def test_waist_is_clipped_constant_in_the_middle():
    f = make_potential("Waist", {"w": 2.0, "length": 5.0, "r0": 0.7})
    x = np.linspace(0.7, 5.0 - 2.0 + 0.7, 50)
    np.testing.assert_allclose(f(x), f(0.7), rtol=0, atol=1e-15)
    np.testing.assert_array_equal(f.deriv(x[1:-1]), 0.0)
    assert [p.label for p in f.pieces] == ["cot-p", "const", "cot-q"]


@settings(max_examples=50, deadline=None)
@given(eps=st.floats(0.01, 0.4), r0=st.floats(0.45, 0.7), span=st.floats(0.1, 0.8))
def test_llarull_regularizer_slope_bounds(eps, r0, span):
    r1 = r0 + span
    assume(eps < r0 and r1 < math.pi / 2)
    th = np.linspace(0, math.pi, 4001)
    _, dv = psi_eps0(th, eps, r0, r1)
    assert np.all(dv >= 1.0)
    assert np.all(dv <= 1 + 2 * eps / (r1 - r0) + 1e-12)


@settings(max_examples=30, deadline=None)
@given(delta=st.floats(0.01, 0.5))
def test_psi_delta_is_c1(delta):
    v, dv = psi_delta(np.array([delta - 1e-12, delta + 1e-12]), delta)
    assert abs(v[0] - v[1]) < 1e-10 and abs(dv[0] - dv[1]) < 1e-12 / delta + 1e-14


@settings(max_examples=40, deadline=None)
@given(hm=st.floats(0.1, 5), hp=st.floats(0.1, 5))
def test_ricci_band_tangent_solves_ode(hm, hp):
    f = ricci_band(hm, hp)
    rep = check_ode(f, "ricci", (0.0, f.splices()[0]), n_samples=500)
    assert abs(rep.min_slack) <= 1e-8 * max(1.0, f.lipschitz_const)


@settings(max_examples=40, deadline=None)
@given(w0=st.floats(0.1, 2.0))
def test_torus_band_tangent_solves_ode(w0):
    f = make_potential("TorusBand", {"w0": w0})
    s = ode_slack(f, "torus", np.linspace(0, w0, 301)[1:-1])
    assert np.max(np.abs(s)) <= 1e-9 * max(1.0, f.lipschitz_const)


@settings(max_examples=40, deadline=None)
@given(w=st.floats(0.5, 4.0))
def test_waist_inequality(w):
    f = make_potential("Waist", {"w": w})
    tau = np.linspace(0, w, 1001)[1:-1]
    s = ode_slack(f, "waist", tau)
    # 6 f^2 - 4|f'| + 8 pi^2 / (3 w^2) vanishes on the cot pieces
    assert np.max(np.abs(s)) <= 1e-8 * np.max(np.abs(f.deriv(tau)))
