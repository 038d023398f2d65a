import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sglab import geometry as geo
from sglab import sg_field as sg
from sglab.errors import DomainError


def _diag_patch(x0, x1, g00, g11):
    return geo.MetricPatch("soliton", x0, x1, g00, g11, np.zeros_like(g00), np.zeros(g00.shape, bool))


def test_soliton_metric_at_rho_one():
    spec = sg.SolitonSpec(0.5)
    xi = np.array([1.0 / spec.gamma])
    patch = geo.soliton_metric_closed_form(spec, np.array([0.0]), xi)
    assert patch.g00[0, 0] == pytest.approx(-0.4199743, abs=1e-7)
    assert patch.g11[0, 0] == pytest.approx(0.5800257, abs=1e-7)
    assert patch.g00[0, 0] + patch.g11[0, 0] == pytest.approx(1 - 2 / math.cosh(1) ** 2)


def test_field_metric_matches_closed_form():
    spec = sg.SolitonSpec(0.4, center_offset=0.3)
    tau = np.linspace(-1, 1, 21)
    xi = np.linspace(-4, 4, 81)
    a = geo.metric_from_field(sg.soliton_patch(spec, tau, xi), tau, xi)
    b = geo.soliton_metric_closed_form(spec, tau, xi)
    ok = ~(a.mask | b.mask)
    np.testing.assert_allclose(a.g00[ok], b.g00[ok], rtol=0, atol=1e-14)
    np.testing.assert_allclose(a.g11[ok], b.g11[ok], rtol=0, atol=1e-14)


def test_mask_marks_soliton_core():
    spec = sg.SolitonSpec(0.5)
    tau = np.array([0.0])
    xi = np.array([-1.0, 0.0, 1.0])
    patch = geo.soliton_metric_closed_form(spec, tau, xi)
    assert patch.mask.tolist() == [[False, True, False]]


def test_flat_metric_has_zero_curvature():
    x = np.linspace(0, 1, 21)
    ones = np.ones((21, 21))
    r = geo.ricci_scalar(_diag_patch(x, x, -ones, ones))
    assert np.nanmax(np.abs(r)) == 0.0
    assert np.isnan(r[0, 0]) and np.isfinite(r[10, 10])


def test_round_sphere_curvature_is_two():
    theta = np.linspace(0.5, 2.5, 201)
    phi = np.linspace(0, 1, 41)
    g11 = np.repeat(np.sin(theta)[:, None] ** 2, 41, axis=1)
    r = geo.ricci_scalar(_diag_patch(theta, phi, np.ones_like(g11), g11))
    assert np.nanmax(np.abs(r - 2.0)) < 1e-5


def test_ads2_curvature_is_minus_two():
    t = np.linspace(0, 1, 41)
    x = np.linspace(-1, 1, 201)
    g00 = np.repeat(-np.cosh(x)[None, :] ** 2, 41, axis=0)
    r = geo.ricci_scalar(_diag_patch(t, x, g00, np.ones_like(g00)))
    assert np.nanmax(np.abs(r + 2.0)) < 1e-6


def test_ricci_rejects_off_diagonal():
    x = np.linspace(0, 1, 11)
    g = np.ones((11, 11))
    patch = geo.MetricPatch("soliton", x, x, -g, g, 0.1 * g, np.zeros((11, 11), bool))
    with pytest.raises(ValueError):
        geo.ricci_scalar(patch)


def test_soliton_curvature_fourth_order():
    spec = sg.SolitonSpec(0.5)
    errs = []
    for h in (0.04, 0.02, 0.01):
        _, resid, band = geo.soliton_curvature_residual(spec, h)
        errs.append(np.max(np.abs(resid[band])))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 4) < 0.3)
    assert errs[-1] < 1e-4


def test_curvature_is_nan_near_mask():
    spec = sg.SolitonSpec(0.5)
    tau = np.linspace(-0.1, 0.1, 21)
    xi = np.linspace(-1, 1, 201)  # xi = 0 sits on the core where tanh vanishes
    r = geo.ricci_scalar(geo.soliton_metric_closed_form(spec, tau, xi))
    assert np.all(np.isnan(r[10, 96:105]))
    assert np.all(np.isfinite(r[10, 20:90]))


# ---- Schwarzschild chart --------------------------------------------------

def test_schwarzschild_core_and_far_field():
    spec = sg.SolitonSpec(0.6)
    r, f, _ = geo.to_schwarzschild(spec, 0.0)
    assert r == pytest.approx(math.sqrt(1.36))
    assert f == pytest.approx(-1.0)
    r, f, _ = geo.to_schwarzschild(spec, 40.0)
    assert r < 1e-16 and f == pytest.approx(0.36)


def test_horizon_location():
    spec = sg.SolitonSpec(0.6)
    rh = geo.horizon_rho(spec)
    assert 1.0 / math.cosh(rh) == pytest.approx(0.6 / math.sqrt(1.36), rel=1e-14)
    assert rh == pytest.approx(1.283796, abs=1e-6)
    r, f, flag = geo.to_schwarzschild(spec, np.array([rh, -rh, rh + 0.1]))
    assert flag.tolist() == [True, True, False]
    np.testing.assert_allclose(r[:2], 0.6, rtol=1e-14)


def test_horizon_report():
    info = geo.horizon(sg.SolitonSpec(0.3))
    assert info.r_horizon == 0.3
    assert info.kruskal_factor_at_horizon == pytest.approx(4 * 0.09)
    assert abs(geo.kruskal_conformal_factor(0.3, 0.3)) == pytest.approx(0.36)


def test_schwarzschild_pullback_matches_soliton_metric():
    spec = sg.SolitonSpec(0.5)
    rho = np.array([-3.0, -2.2, 2.0, 2.5, 4.0, 0.3, 0.7])
    pulled = np.array(geo.schwarzschild_pullback(spec, rho))
    direct = np.array(geo.soliton_metric_tau_rho(spec, rho))
    np.testing.assert_allclose(pulled, direct, rtol=1e-12, atol=1e-14)


def test_schwarzschild_time_quadrature_matches_rate():
    spec = sg.SolitonSpec(0.5)
    rho, step = 2.5, 1e-3
    tp = geo.schwarzschild_time(spec, 0.0, rho + step, 3.0)
    tm = geo.schwarzschild_time(spec, 0.0, rho - step, 3.0)
    assert (tp - tm) / (2 * step) == pytest.approx(-0.5 * geo.schwarzschild_time_rate(spec, rho), rel=1e-6)


def test_schwarzschild_time_rejects_crossing_horizon():
    spec = sg.SolitonSpec(0.5)
    with pytest.raises(DomainError):
        geo.schwarzschild_time(spec, 0.0, 0.2, 3.0)


# ---- tortoise / Kruskal -------------------------------------------------------

def test_tortoise_values():
    b = 0.4
    assert geo.tortoise(0.0, b) == 0.0
    assert geo.tortoise(b / 2, b) == pytest.approx(math.log(3) / (2 * b), rel=1e-14)
    assert geo.tortoise(b * (1 - 1e-12), b) > 30
    with pytest.raises(DomainError):
        geo.tortoise(b, b)


def test_tortoise_derivative_and_inverse():
    b = 0.7
    r = np.linspace(0.01, 0.65, 50)
    h = 1e-5
    num = (geo.tortoise(r + h, b) - geo.tortoise(r - h, b)) / (2 * h)
    np.testing.assert_allclose(num, 1 / (b * b - r * r), rtol=1e-7)
    np.testing.assert_allclose(geo.radius_from_tortoise(geo.tortoise(r, b), b), r, rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.0, 0.999), st.floats(0.0, 0.999))
def test_tortoise_monotone(b, x, y):
    lo, hi = sorted((x, y))
    if hi - lo < 1e-6:
        return
    assert geo.tortoise(lo * b, b) < geo.tortoise(hi * b, b)


def test_kruskal_origin():
    p = geo.kruskal(0.0, 0.0, 0.5)
    assert p.u == pytest.approx(2.0) and p.v == pytest.approx(2.0)
    assert not p.saturated


def test_kruskal_jacobian():
    b = 0.5
    for ut in (-1.0, 0.0, 2.0):
        h = 1e-4
        up = geo.kruskal(ut + h, 0.0, b).u
        um = geo.kruskal(ut - h, 0.0, b).u
        assert (up - um) / (2 * h) == pytest.approx(math.exp(b * ut), rel=1e-8)


def test_kruskal_overflow_guard():
    p = geo.kruskal(2000.0, 0.0, 0.5)
    assert p.saturated and math.isinf(p.u)
    with np.errstate(over="raise"):
        geo.kruskal(np.array([2000.0, -2000.0]), 0.0, 0.5)


def test_kruskal_injective_and_radius_round_trip():
    rng = np.random.default_rng(11)
    b = 0.6
    T = rng.uniform(-5, 5, 500)
    rs = rng.uniform(0, 5, 500)
    p = geo.kruskal(T, rs, b)
    pts = np.round(np.column_stack([np.log(p.u), np.log(p.v)]), 12)
    assert len(np.unique(pts, axis=0)) == 500
    np.testing.assert_allclose(geo.kruskal_radius(p.u, p.v, b), geo.radius_from_tortoise(rs, b), rtol=1e-12)


def test_kruskal_pullback_random_points():
    rng = np.random.default_rng(5)
    b = 0.5
    T = rng.uniform(-3, 3, 100)
    rs = rng.uniform(0.1, 4, 100)
    rep = geo.kruskal_pullback(T, rs, b)
    assert rep.max_rel_error < 1e-8
    assert rep.printed_convention_sign == pytest.approx(geo.KRUSKAL_SIGN)
