import numpy as np
import pytest

from raydamp.errors import ClassViolation, DegenerateCurvature, NonSymmetric, OutOfRange
from raydamp.profiles import build_profile, critical_value, sqrt_coordinate


def test_poiseuille_values(poiseuille):
    assert poiseuille.u(np.array([0.5]))[0] == pytest.approx(0.25)
    assert poiseuille.du(np.array([0.5]))[0] == pytest.approx(1.0)
    ys = np.linspace(-1, 1, 11)
    assert np.allclose(poiseuille.d2u(ys), 2.0)


def test_poiseuille_class_S_c0(poiseuille):
    # u'(y) = 2y >= y, so the fitted constant is at least 1 (here exactly 2)
    assert poiseuille.c0 >= 1.0


def test_couette_rejected_as_class_S():
    with pytest.raises(ClassViolation):
        build_profile({"name": "couette", "type": "poly",
                       "coeffs": [0.0, 1.0], "class_tag": "S"})


def test_couette_accepted_as_class_K():
    p = build_profile("couette")
    assert p.class_tag == "K"
    assert np.allclose(p.d2u(np.linspace(-1, 1, 7)), 0.0)


def test_nonsymmetric_reported():
    with pytest.raises(NonSymmetric):
        build_profile({"name": "skew", "type": "poly",
                       "coeffs": [0.0, 0.1, 1.0], "class_tag": "S"})


def test_unknown_builtin():
    with pytest.raises(ClassViolation):
        build_profile("no_such_flow")


# --- square-root coordinate -------------------------------------------------


def test_sqrt_coordinate_poiseuille(coord):
    ys = np.linspace(0, 1, 101)
    assert np.allclose(coord.v(ys), ys, atol=1e-14)
    assert np.allclose(coord.dv(ys), 1.0, atol=1e-13)
    assert coord.v1 == pytest.approx(1.0)
    zs = np.linspace(-0.99, 0.99, 41)
    assert np.allclose(coord.dinverse(zs), 1.0, atol=1e-12)


def test_sqrt_coordinate_scaling():
    p = build_profile({"name": "u2y2", "type": "poly_even", "coeffs": [0.0, 2.0]})
    co = sqrt_coordinate(p)
    ys = np.linspace(0, 1, 51)
    assert np.allclose(co.v(ys), np.sqrt(2.0) * ys, atol=1e-13)
    assert co.c1 == pytest.approx(np.sqrt(2.0), rel=1e-12)


def test_sqrt_coordinate_requires_class_S():
    with pytest.raises(ClassViolation):
        sqrt_coordinate(build_profile("couette"))


def test_degenerate_curvature():
    # u = y^4 has m(y) = y^2 -> 0 at the center: the regularized square root
    # degenerates even though u is formally increasing on (0,1]
    from raydamp.profiles import ShearProfile

    poly = np.polynomial.Polynomial([0.0, 0.0, 0.0, 0.0, 1.0])
    fns = [poly.deriv(k) if k else poly for k in range(5)]
    p = ShearProfile(
        name="quartic_flat",
        u=lambda y: fns[0](np.asarray(y, dtype=float)),
        du=lambda y: fns[1](np.asarray(y, dtype=float)),
        d2u=lambda y: fns[2](np.asarray(y, dtype=float)),
        d3u=lambda y: fns[3](np.asarray(y, dtype=float)),
        d4u=lambda y: fns[4](np.asarray(y, dtype=float)),
        class_tag="S", u0=0.0, u1=1.0, validation={"c0": 0.0, "tol": 1e-8},
    )
    with pytest.raises(DegenerateCurvature):
        sqrt_coordinate(p)


def test_v_squared_matches_u(quartic, quartic_coord):
    ys = np.linspace(0, 1, 513)
    scale = np.maximum(1.0, np.abs(quartic.u(ys)))
    res = np.abs(quartic_coord.v(ys) ** 2 - (quartic.u(ys) - quartic.u0))
    assert np.max(res / scale) < 1e-12


def test_monotone_inversion(quartic, quartic_coord):
    ys = np.linspace(0, 1, 997)
    zs = quartic_coord.v(ys)
    assert np.max(np.abs(quartic_coord.inverse(zs) - ys)) < 1e-10


def test_lemma_ratio_bounded(quartic):
    # (u'(y)+u'(y'))(y-y')/(u(y)-u(y')) in [1/C, C] for 1 >= y > y' >= 0
    ys = np.linspace(0, 1, 201)
    yy, yp = np.meshgrid(ys, ys)
    mask = yy > yp + 1e-6
    num = (quartic.du(yy) + quartic.du(yp)) * (yy - yp)
    den = quartic.u(yy) - quartic.u(yp)
    ratio = num[mask] / den[mask]
    C = max(ratio.max(), 1.0 / ratio.min())
    assert np.isfinite(C) and ratio.min() > 0
    assert C < 10.0


def test_dv_derivatives_consistent(quartic, quartic_coord):
    # dv, d2v, d3v against finite differences of v
    co = quartic_coord
    ys = np.linspace(0.05, 0.95, 19)
    h = 1e-5
    dv_fd = (co.v(ys + h) - co.v(ys - h)) / (2 * h)
    assert np.max(np.abs(dv_fd - co.dv(ys))) < 1e-8
    d2v_fd = (co.dv(ys + h) - co.dv(ys - h)) / (2 * h)
    assert np.max(np.abs(d2v_fd - co.d2v(ys))) < 1e-7
    d3v_fd = (co.d2v(ys + h) - co.d2v(ys - h)) / (2 * h)
    assert np.max(np.abs(d3v_fd - co.d3v(ys))) < 1e-6


# --- critical values ---------------------------------------------------------


def test_critical_value_poiseuille(poiseuille):
    cv = critical_value(poiseuille, 0.25)
    assert cv.y_c == pytest.approx(0.5, abs=1e-12)
    assert cv.c_tilde == pytest.approx(0.5, abs=1e-12)
    assert cv.rho == pytest.approx(0.1875, abs=1e-14)
    assert cv.rho0 == pytest.approx(0.1875, abs=1e-12)  # rho/u'(y_c) = 0.1875/1
    assert cv.rho1 == pytest.approx(0.25)


def test_critical_value_endpoint(poiseuille):
    cv = critical_value(poiseuille, 0.0)
    assert cv.y_c == 0.0
    assert cv.rho == 0.0


def test_critical_value_sqrt(poiseuille):
    cv = critical_value(poiseuille, 0.64)
    assert cv.y_c == pytest.approx(0.8, abs=1e-12)
    assert cv.rho == pytest.approx(0.64 * 0.36, abs=1e-14)


def test_critical_value_out_of_range(poiseuille):
    with pytest.raises(OutOfRange):
        critical_value(poiseuille, 1.5)
    with pytest.raises(OutOfRange):
        critical_value(poiseuille, -0.2)


def test_yc_root_quartic(quartic):
    for c in (0.1, 0.37, 0.9):
        cv = critical_value(quartic, c)
        assert abs(quartic.u(np.array([cv.y_c]))[0] - c) < 1e-11
