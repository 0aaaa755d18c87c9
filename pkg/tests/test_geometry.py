import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stbands.geometry import (GeometryError, Grid1D, curvature_arrays, curvature_at, make_metric,
                              mean_curvature_boundary, metric_from_json, min_over_grid)

from .oracles import doubly_warped_oracle, fd1, fd2, radial_oracle, sphere_warped_oracle

Q = math.pi / 4


def gups_src(u: float) -> tuple[str, str]:
    a = f"2**({(1 - u) / 2!r})*cos(t+pi/4)**({1 - u!r})*cos(2*t)**({u / 2!r})"
    b = f"2**({(1 - u) / 2!r})*sin(t+pi/4)**({1 - u!r})*cos(2*t)**({u / 2!r})"
    return a, b


def counter_src(d: float) -> tuple[str, str]:
    return (f"exp({d / 2!r}*(sin(2*t)-1))*cos(t+pi/4)", f"exp({-d / 2!r}*(sin(2*t)+1))*sin(t+pi/4)")


DOUBLY_CASES = [
    ("GUpsilon", {"upsilon": 0.0}, gups_src(0.0)),
    ("GUpsilon", {"upsilon": 0.5}, gups_src(0.5)),
    ("GUpsilon", {"upsilon": 1.0}, gups_src(1.0)),
    ("TorusExtremal", {"w": math.pi / 3}, ("cos(3*t/2)**(2/3)", "cos(3*t/2)**(2/3)")),
    ("Counterexample", {"delta": 0.0}, counter_src(0.0)),
    ("Counterexample", {"delta": 0.5}, counter_src(0.5)),
    ("Counterexample", {"delta": 1.0}, counter_src(1.0)),
]


# ---------------------------------------------------------------- symbolic oracle


@pytest.mark.parametrize("family,params,src", DOUBLY_CASES)
def test_doubly_warped_ricci_matches_symbolic_oracle(family, params, src):
    m = make_metric(family, params)
    oracle = doubly_warped_oracle(*src)
    lo, hi = m.domain()
    t = np.linspace(lo, hi, 41)[1:-1]
    ref = np.array(oracle(t), dtype=float)
    c = curvature_arrays(m, t)
    np.testing.assert_allclose(c["diag"].T, ref[:3], rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(c["H"], ref[3], rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("params,src", [
    ({}, "sin(theta)"),
    ({"amp": 1.2}, "1.2*sin(theta)"),
    ({"amp": 1.1, "freq": 1.1, "cubic": 0.1},
     "(1.1/1.1)*(sin(1.1*theta) + 0.1*sin(1.1*theta)**3)"),
])
def test_sphere_warped_ricci_matches_symbolic_oracle(params, src):
    m = make_metric("RicciWarped", params)
    oracle = sphere_warped_oracle(src)
    lo, hi = m.domain()
    t = np.linspace(lo, hi, 31)[1:-1]
    ref = np.array(oracle(t), dtype=float)
    c = curvature_arrays(m, t)
    np.testing.assert_allclose(c["diag"].T, ref, rtol=1e-9, atol=1e-8)


def test_schwarzschild_ricci_matches_symbolic_oracle():
    m = make_metric("AFSymmetric", {"mass": 1.0})
    oracle = radial_oracle("(1+1/(2*r))**2", "r*(1+1/(2*r))**2")
    r = np.geomspace(0.05, 50, 25)
    ref = np.array(oracle(r), dtype=float)
    c = curvature_arrays(m, r)
    np.testing.assert_allclose(c["diag"].T, ref, rtol=1e-9, atol=1e-12)
    # scalar flat, as for any time-symmetric vacuum slice
    np.testing.assert_allclose(c["scalar"], 0.0, atol=1e-10)


def test_euclidean_af_is_flat():
    c = curvature_arrays(make_metric("AFSymmetric", {"mass": 0.0}), np.geomspace(1e-2, 1e2, 9))
    np.testing.assert_allclose(c["diag"], 0.0, atol=1e-13)


# ---------------------------------------------------------------- derivative cross-check


FD_FAMILIES = [
    ("GUpsilon", {"upsilon": 0.3}),
    ("TorusExtremal", {"w": 1.0}),
    ("Counterexample", {"delta": 0.7}),
    ("RicciWarped", {"amp": 1.3, "freq": 0.9, "cubic": 0.2}),
    ("RoundBand", {}),
    ("CustomDoublyWarped", {"knots": [0.0, 0.3, 0.6, 1.0, 1.4], "phi": [1.0, 1.1, 1.3, 1.2, 1.0],
                            "psi": [0.8, 0.9, 1.0, 1.2, 1.5]}),
]


@pytest.mark.parametrize("family,params", FD_FAMILIES)
def test_analytic_derivatives_match_finite_differences(family, params):
    m = make_metric(family, params)
    lo, hi = m.domain()
    rng = np.random.default_rng(7)
    pad = 0.05 * (hi - lo)
    t = rng.uniform(lo + pad, hi - pad, 1000)
    if "knots" in params:
        # spline second derivatives kink at knots; keep stencils off them
        t = t[np.min(np.abs(t[:, None] - np.array(params["knots"])[None, :]), axis=1) > 3e-3]
    w = m.warps(t)
    pairs = [("phi", "dphi", "ddphi"), ("psi", "dpsi", "ddpsi")] if m.kind == "doubly" else [("w", "dw", "ddw")]
    for f, d1, d2 in pairs:
        fn = lambda x, key=f: m.warps(x)[key]  # noqa: E731
        np.testing.assert_allclose(w[d1], fd1(fn, t), rtol=1e-6, atol=1e-7)
        np.testing.assert_allclose(w[d2], fd2(fn, t), rtol=1e-6, atol=1e-5)


def test_mean_curvature_is_log_derivative_of_area():
    for family, params in FD_FAMILIES[:5]:
        m = make_metric(family, params)
        lo, hi = m.domain()
        t = np.linspace(lo, hi, 23)[2:-2]
        H = curvature_arrays(m, t)["H"]
        np.testing.assert_allclose(H, fd1(lambda x: np.log(m.area(x)), t, 1e-5), rtol=1e-6, atol=1e-6)


# ---------------------------------------------------------------- spec examples


def test_counterexample_delta0_is_round():
    m = make_metric("Counterexample", {"delta": 0.0})
    t = np.linspace(-0.7, 0.7, 9)
    w = m.warps(t)
    np.testing.assert_allclose(w["phi"], np.cos(t + Q), atol=1e-15)
    np.testing.assert_allclose(w["psi"], np.sin(t + Q), atol=1e-15)
    s = curvature_at(m, 0.0)
    np.testing.assert_allclose(s.ricci_eigs, (2, 2, 2), atol=1e-12)
    assert s.scalar == pytest.approx(6.0, abs=1e-12)


def test_gupsilon_zero_at_origin():
    w = make_metric("GUpsilon", {"upsilon": 0.0}).warps(np.array([0.0]))
    assert w["phi"][0] == pytest.approx(1.0, abs=1e-15)
    assert w["psi"][0] == pytest.approx(1.0, abs=1e-15)


def test_torus_extremal_closed_form():
    m = make_metric("TorusExtremal", {"w": math.pi / 3})
    t = np.linspace(-math.pi / 6, math.pi / 6, 11)
    np.testing.assert_allclose(m.warps(t)["phi"], np.cos(1.5 * t) ** (2 / 3), rtol=1e-15)
    assert np.all(m.warps(t)["psi"] > 0)
    s = curvature_at(m, 0.0)
    np.testing.assert_allclose(s.ricci_eigs, (1.5, 1.5, 3.0), atol=1e-12)
    assert s.scalar == pytest.approx(6.0, abs=1e-12)
    assert s.mean_curv == pytest.approx(0.0, abs=1e-15)


def test_counterexample_delta1_near_core():
    s = curvature_at(make_metric("Counterexample", {"delta": 1.0}), Q - 1e-9)
    np.testing.assert_allclose(s.ricci_eigs, (-2, 6, 6), atol=1e-6)
    assert s.two_ricci == pytest.approx(4.0, abs=1e-6)


def test_gupsilon_half_at_origin():
    s = curvature_at(make_metric("GUpsilon", {"upsilon": 0.5}), 0.0)
    assert s.scalar == pytest.approx(7.5, abs=1e-12)
    c = curvature_arrays(make_metric("GUpsilon", {"upsilon": 0.5}), 0.0)
    assert c["ric_rr"][0] == pytest.approx(3.5, abs=1e-12)


def test_boundary_mean_curvatures():
    assert mean_curvature_boundary(make_metric("RoundBand", {"theta1": Q, "theta2": Q}), "+") == pytest.approx(-2, abs=1e-12)
    assert mean_curvature_boundary(make_metric("RoundBand", {"theta1": Q, "theta2": Q}), "-") == pytest.approx(-2, abs=1e-12)
    tor = make_metric("TorusExtremal", {"w": math.pi / 3})
    assert mean_curvature_boundary(tor, "+") == pytest.approx(-2, abs=1e-12)
    assert mean_curvature_boundary(tor, "-") == pytest.approx(-2, abs=1e-12)
    assert mean_curvature_boundary(make_metric("FlatProduct"), "+") == 0.0
    assert mean_curvature_boundary(make_metric("FlatProduct"), "-") == 0.0
    with pytest.raises(GeometryError):
        mean_curvature_boundary(make_metric("Counterexample", {"delta": 0.5}), "+")
    with pytest.raises(GeometryError):
        mean_curvature_boundary(make_metric("AFSymmetric", {"mass": 1.0}), "+")


@pytest.mark.parametrize("family,params", [
    ("GUpsilon", {"upsilon": 1.5}), ("GUpsilon", {"upsilon": -0.1}), ("Counterexample", {"delta": 2}),
    ("TorusExtremal", {"w": 2.2}), ("RicciWarped", {"amp": -1}), ("Nope", {}),
])
def test_inadmissible_parameters_are_rejected(family, params):
    with pytest.raises(GeometryError):
        make_metric(family, params)


def test_ricci_warped_needs_dimension_three():
    with pytest.raises(GeometryError):
        make_metric("RicciWarped", {}, dimension=2)


def test_curvature_at_rejects_boundary_and_closing_points():
    with pytest.raises(GeometryError):
        curvature_at(make_metric("Counterexample", {"delta": 0.5}), Q)
    with pytest.raises(GeometryError):
        curvature_at(make_metric("TorusExtremal"), math.pi / 3)


def test_json_round_trip():
    m = make_metric("GUpsilon", {"upsilon": 0.25, "rho0": 0.3})
    m2 = metric_from_json(m.to_json())
    assert m2 == m


def test_grid_nodes():
    g = Grid1D(0.0, 1.0, 10)
    assert g.h == 0.1
    assert np.all(np.diff(g.nodes) > 0)
    assert g.nodes[-1] == 1.0
    with pytest.raises(GeometryError):
        Grid1D(1.0, 0.0, 3)


# ---------------------------------------------------------------- properties


@settings(max_examples=40, deadline=None)
@given(u=st.floats(0, 1), t=st.floats(-0.75, 0.75))
def test_gupsilon_mean_curvature_and_normal_curvature(u, t):
    c = curvature_arrays(make_metric("GUpsilon", {"upsilon": u}), t)
    assert c["H"][0] == pytest.approx(-2 * math.tan(2 * t), rel=1e-10, abs=1e-10)
    assert c["scalar"][0] - c["ric_rr"][0] == pytest.approx(4.0, rel=1e-9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(family=st.sampled_from(DOUBLY_CASES), x=st.floats(0.01, 0.99))
def test_trace_and_two_ricci_consistency(family, x):
    m = make_metric(family[0], family[1])
    lo, hi = m.domain()
    s = curvature_at(m, lo + x * (hi - lo))
    assert s.scalar == pytest.approx(sum(s.ricci_eigs), rel=1e-10, abs=1e-10)
    assert s.two_ricci == s.ricci_eigs[0] + s.ricci_eigs[1]
    assert list(s.ricci_eigs) == sorted(s.ricci_eigs)


@settings(max_examples=40, deadline=None)
@given(d=st.floats(0, 1), t=st.floats(-0.78, 0.78))
def test_counterexample_symmetry(d, t):
    m = make_metric("Counterexample", {"delta": d})
    a, b = m.warps(np.array([t])), m.warps(np.array([-t]))
    assert a["phi"][0] == pytest.approx(b["psi"][0], abs=1e-12)
    ea = curvature_arrays(m, t)["eigs"][0]
    eb = curvature_arrays(m, -t)["eigs"][0]
    np.testing.assert_allclose(ea, eb, rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("d", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_counterexample_two_ricci_grid_minimum(d):
    m = make_metric("Counterexample", {"delta": d})
    val, _ = min_over_grid(m, -Q, Q, "two_ricci", n=10_000, closed=False)
    assert val >= 4 - 1e-9


@pytest.mark.parametrize("d", [0.0, 0.5, 1.0])
def test_counterexample_smooth_closure(d):
    m = make_metric("Counterexample", {"delta": d})
    w = m.warps(np.array([-Q, Q]))
    assert abs(w["phi"][1]) < 1e-12 and abs(abs(w["dphi"][1]) - 1) < 1e-9
    assert abs(w["psi"][0]) < 1e-12 and abs(abs(w["dpsi"][0]) - 1) < 1e-9


@settings(max_examples=30, deadline=None)
@given(family=st.sampled_from(FD_FAMILIES), x=st.floats(0.02, 0.98))
def test_warps_positive_inside(family, x):
    m = make_metric(*family)
    lo, hi = m.domain()
    w = m.warps(np.array([lo + x * (hi - lo)]))
    for k in ("phi", "psi", "w"):
        if k in w:
            assert w[k][0] > 0
