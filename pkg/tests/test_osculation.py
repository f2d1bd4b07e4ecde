import math
import warnings

import numpy as np
import pytest

from centroaffine import curves, osculation as osc
from centroaffine.checks import random_generic_curve, random_gl_plus, random_ellipse_frame
from centroaffine.curves import BuiltinCurve, SampledCurve
from centroaffine.ellipses import ellipse_contains, CenteredEllipse
from centroaffine.linalg import rot90, spd_sqrt, wedge
from centroaffine.paths import FunctionPath, ReparametrizedPath
from conftest import ReparamCurve, sine_warp


def ellipse_curvature_direct(A, z):
    """Curvature of A^(1/2) S^1 at z from the parametrization R (cos, sin)."""
    R = spd_sqrt(A)
    u = np.linalg.solve(R, z)
    d1 = R @ rot90(u)
    return wedge(d1, -z) / np.linalg.norm(d1) ** 3


def test_osculating_matrix_spiral_closed_form():
    c = 0.3
    curve = BuiltinCurve("spiral", {"c": c})
    d = curve.derivatives(0.7, 1)
    want = np.outer(d[0], d[0]) + np.outer(d[1], d[1]) / (1 + c * c)
    np.testing.assert_allclose(osc.osculating_matrix(curve, 0.7), want, rtol=1e-14)


def test_osculating_ellipse_osculates(rng):
    curve, (lo, hi) = random_generic_curve(rng)
    for t in np.linspace(lo, hi, 7):
        A = osc.osculating_matrix(curve, t)
        z = curve(t)
        assert ellipse_contains(CenteredEllipse(A), z) == pytest.approx(0, abs=1e-12)
        defects = osc.osculation_defects(curve, t)
        assert defects.contains < 1e-12 and defects.tangent < 1e-12 and defects.curvature < 1e-9
        assert ellipse_curvature_direct(A, z) == pytest.approx(curves.euclidean_curvature(curve, t), rel=1e-9)


def test_non_osculating_ellipse_has_defects():
    curve = BuiltinCurve("spiral")
    A = osc.osculating_matrix(curve, 0.0)
    d = osc.osculation_defects(curve, 0.0, 1.5 * A)
    assert d.contains == pytest.approx(1 / 3)
    # Scaling about the origin keeps the tangent direction but changes the curvature.
    circle = BuiltinCurve("ellipse")
    d = osc.osculation_defects(circle, 0.0, np.diag([1.0, 4.0]))
    assert d.contains < 1e-15 and d.tangent < 1e-15
    assert d.curvature == pytest.approx(0.75)


def test_closed_form_derivatives_match_differences():
    curve = BuiltinCurve("generic", {"q": 0.07, "s": 0.09, "k": 3.0})
    path = osc.OsculatingPath(curve)
    fd = FunctionPath(path.value, -3, 3, h=1e-3)
    ts = np.linspace(-2.5, 2.5, 11)
    np.testing.assert_allclose(path.derivative(ts, 1), fd.derivative(ts, 1), atol=1e-8)
    np.testing.assert_allclose(path.derivative(ts, 2), fd.derivative(ts, 2), atol=1e-6)


def test_nullity_closed_form():
    for c in (0.1, 1.0, -0.4):
        curve = BuiltinCurve("spiral", {"c": c}).transformed([[1.0, 0.7], [0.2, 1.5]])
        rep = osc.nullity_report(osc.OsculatingPath(curve), np.linspace(-2, 2, 41))
        assert rep.max_residual < 1e-12
        assert all(lab == ("null/future" if c > 0 else "null/past") for lab in rep.labels)


def test_ellipse_path_is_constant_and_degenerate():
    curve = BuiltinCurve("ellipse", {"a": 2.0, "b": 0.7, "angle": 0.3})
    path = osc.OsculatingPath(curve)
    ts = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(path.value(ts), path.value(ts[:1]).repeat(13, 0), atol=1e-14)
    rep = osc.nullity_report(path, ts)
    assert rep.labels == ["degenerate-null"] * 13
    assert rep.vertex_flags.all()
    np.testing.assert_allclose(osc.accel_norm(path, ts), 0, atol=1e-14)
    assert osc.centro_affine_length(curve, (-1, 1)) < 1e-10


def test_sampled_nullity():
    base = BuiltinCurve("spiral", {"c": 0.5})
    ts = np.linspace(-1, 1, 2001)
    path = osc.OsculatingPath(SampledCurve(base(ts), -1, 1))
    grid = ts[10:-10:20]
    assert osc.nullity_report(path, grid).max_residual < 1e-6
    np.testing.assert_allclose(path.value(grid), osc.osculating_matrix(base, grid), rtol=1e-6)


@pytest.mark.parametrize("c", [0.2, -0.6])
def test_native_accel_norm_spiral(c):
    # accel = kappa^2 a^2 in the native parameter; a = -(1 + c^2).
    want = 16 * c * c * (1 + c * c)
    got = osc.accel_norm(osc.OsculatingPath(BuiltinCurve("spiral", {"c": c})), np.linspace(-1, 1, 5))
    np.testing.assert_allclose(got, want, rtol=1e-11)


def test_accel_norm_weight_four_under_reparametrization(rng):
    curve, (lo, hi) = random_generic_curve(rng)
    mid = 0.5 * (lo + hi)
    phis = sine_warp(0.4)
    shifted = lambda u: tuple(np.asarray(x) + (mid if i == 0 else 0) for i, x in enumerate(phis(u)))
    warped = ReparamCurve(curve, shifted, -0.3, 0.3)
    us = np.linspace(-0.3, 0.3, 13)
    phi, dphi, d2phi = shifted(us)[:3]
    base_path = osc.OsculatingPath(curve)
    got = osc.accel_norm(osc.OsculatingPath(warped), us)
    np.testing.assert_allclose(got, dphi**4 * osc.accel_norm(base_path, phi), rtol=1e-9)
    chained = ReparametrizedPath(
        base_path, lambda u: shifted(u)[0], lambda u: shifted(u)[1], lambda u: shifted(u)[2], -0.3, 0.3
    )
    np.testing.assert_allclose(osc.accel_norm(chained, us), got, rtol=1e-9)
    np.testing.assert_allclose(osc.OsculatingPath(warped).value(us), base_path.value(phi), rtol=1e-12)


def test_accel_norm_rejects_non_null_path():
    path = FunctionPath(lambda t: np.eye(2) + np.multiply.outer(t, np.diag([1.0, -1.0])), -0.5, 0.5)
    with pytest.raises(osc.NullityError, match="nullity violated"):
        osc.accel_norm(path, 0.0)


def test_density_and_length_spiral_anchor():
    c = 0.2
    curve = BuiltinCurve("spiral", {"c": c})
    assert osc.arc_element_density(curve, 0.0) == pytest.approx(math.sqrt(0.784465) * (1 + c * c) ** 0.5, rel=1e-6)
    window = (0.0, 1 / math.sqrt(1 + c * c))
    assert osc.centro_affine_length(curve, window) == pytest.approx(0.8857000285, abs=1e-9)
    assert osc.centro_affine_length(curve.transformed([[1, 1], [0, 1]]), window) == pytest.approx(0.8857000285, abs=1e-9)


def test_length_additive():
    curve = BuiltinCurve("spiral", {"c": 0.7})
    whole = osc.centro_affine_length(curve, (-1, 1))
    parts = osc.centro_affine_length(curve, (-1, 0.3)) + osc.centro_affine_length(curve, (0.3, 1))
    assert whole == pytest.approx(parts, rel=1e-9)


def test_sampled_length():
    c = 0.2
    base = BuiltinCurve("spiral", {"c": c})
    ts = np.linspace(-1, 2, 3001)
    res = osc.length_details(SampledCurve(base(ts), -1, 2), (0.0, 1.0))
    assert res.converged and not res.warnings
    assert res.length == pytest.approx(osc.centro_affine_length(base, (0.0, 1.0)), rel=1e-7)


def test_length_warns_on_vertex():
    curve = BuiltinCurve("generic")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = osc.length_details(curve, (-math.pi, math.pi))
    assert any("vertex-crossing" in str(w.message) for w in caught)
    assert res.vertex_flags.any() and "vertex-crossing" in res.warnings
    with pytest.raises(ValueError, match="empty"):
        osc.length_details(curve, (1.0, 1.0))


def test_ellipse_frame_anchor():
    eps, k0 = osc.lemma5_parametrize(np.diag([4.0, 1.0]), [0.5, 0.0], [0.0, 1.0])
    assert k0 == pytest.approx(2.0, abs=1e-12)
    np.testing.assert_allclose(eps(0.0), [2.0, 0.0])
    np.testing.assert_allclose(eps(math.pi / 2), [0.0, 1.0], atol=1e-15)


def test_ellipse_frame_against_exact_derivatives(rng):
    for _ in range(100):
        A, v, w = random_ellipse_frame(rng)
        eps, k0 = osc.lemma5_parametrize(A, v, w)
        L = math.sqrt(w @ A @ w)
        d1, d2 = A @ w / L, -(A @ v)
        assert k0 == pytest.approx(wedge(d1, d2) / np.linalg.norm(d1) ** 3, rel=1e-10)
        Ainv = np.linalg.inv(A)
        pts = eps(np.linspace(0, 2 * math.pi, 9))
        np.testing.assert_allclose(np.einsum("ki,ij,kj->k", pts, Ainv, pts), 1, atol=1e-12)
        assert k0 == pytest.approx(ellipse_curvature_direct(A, A @ v), rel=1e-10)


def test_ellipse_frame_hypotheses():
    A = np.diag([4.0, 1.0])
    with pytest.raises(osc.EllipseFrameError, match="v \\^ w > 0"):
        osc.lemma5_parametrize(A, [0.5, 0], [0, -1])
    with pytest.raises(osc.EllipseFrameError, match="<Av, v> = 1"):
        osc.lemma5_parametrize(A, [1.0, 0], [0, 1])
    with pytest.raises(osc.EllipseFrameError, match="<Av, w> = 0"):
        osc.lemma5_parametrize(A, [0.5, 0], [1, 1])


def test_negative_accel_is_rejected():
    with pytest.raises(osc.AccelerationSignError):
        osc._fourth_root(np.array([1.0, -0.5]), 1e-9)
    np.testing.assert_allclose(osc._fourth_root(np.array([16.0, -1e-12]), 1e-9), [2.0, 0.0])


def test_report_serializes():
    rep = osc.nullity_report(osc.OsculatingPath(BuiltinCurve("spiral")), [0.0, 0.5])
    doc = rep.to_dict()
    assert doc["max_nullity_residual"] == rep.max_residual
    assert [p["orientation"] for p in doc["points"]] == ["null/future"] * 2
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        osc.osculating_path(BuiltinCurve("spiral"), [0.0])
