import json

import numpy as np
import pytest

from wpcurves.grid import GridFunction, make_grid
from wpcurves.io import dumps
from wpcurves.operators import exp_integral, log_derivative
from wpcurves.welding import (
    CurveSamples,
    WeldingError,
    arc_length_decompose,
    conformal_weld,
    curve_from_schlicht,
    derivative_data,
    riemann_map_exterior,
    theodorsen,
)


def ellipse(grid, a=1.0, b=0.2):
    return CurveSamples(grid, lambda t: a * np.exp(1j * t) + b * np.exp(-1j * t),
                        lambda t: 1j * (a * np.exp(1j * t) - b * np.exp(-1j * t)))


def test_exterior_map_of_ellipse():
    # F(w) = w + 0.2/w maps |w| > 1 onto the exterior and fixes the parameterization
    g = make_grid(256)
    s = g.theta
    corr = riemann_map_exterior(ellipse(g))
    # limited by the Theodorsen stopping tolerance 1e-11
    assert np.abs(corr.theta - s).max() < 1e-10
    assert np.abs(corr.G - np.log(1 + 0.2 * np.exp(-2j * s))).max() < 1e-10
    w = np.array([1.5, 2j, -3.0])
    assert np.abs(corr.evaluate(w) - (w + 0.2 / w)).max() < 1e-10


def test_interior_map_of_schlicht_curve():
    g = make_grid(256)
    _, samples = curve_from_schlicht([0.2], g)
    corr = theodorsen(samples, "interior")
    assert np.abs(corr.theta - g.theta).max() < 1e-10
    assert np.abs(corr.values - samples.gamma).max() < 1e-10
    with pytest.raises(ValueError):
        theodorsen(samples, "sideways")


@pytest.mark.parametrize("radius, centre", [(1.0, 0.0), (2.5, 0.3 - 0.2j)])
def test_circles_weld_to_identity(radius, centre):
    g = make_grid(256)
    curve = CurveSamples(g, lambda t: centre + radius * np.exp(1j * t), lambda t: 1j * radius * np.exp(1j * t), centre)
    weld = conformal_weld(curve)
    assert weld.residual < 1e-13
    assert np.abs(weld.h.values - g.theta).max() < 1e-13


def test_welding_residual_converges():
    residuals = [conformal_weld(curve_from_schlicht([0.2], make_grid(n))[1]).residual for n in (256, 512, 1024)]
    assert residuals[0] / residuals[1] >= 4 and residuals[1] / residuals[2] >= 4
    assert residuals[2] < 1e-7


def test_grid_aligned_rotation_leaves_residual_unchanged():
    g = make_grid(512)
    _, samples = curve_from_schlicht([0.2], g)
    base = conformal_weld(samples).residual
    rotated = conformal_weld(samples.rotate(2 * np.pi * 37 / 512)).residual
    assert abs(rotated - base) < 1e-12


def test_welding_of_sampled_curve_matches_callable():
    g = make_grid(512)
    _, samples = curve_from_schlicht([0.15, 0.05j], g)
    sampled = CurveSamples.from_samples(g, samples.gamma, 0.0)
    a, b = conformal_weld(samples), conformal_weld(sampled)
    assert np.abs(a.h.values - b.h.values).max() < 1e-10


def test_rejected_curves():
    g = make_grid(256)
    with pytest.raises(ValueError):
        curve_from_schlicht([0.6], g)
    with pytest.raises(ValueError):
        curve_from_schlicht([0.0, 0.4], g)
    _, samples = curve_from_schlicht([0.45], g)
    with pytest.raises(WeldingError):
        conformal_weld(samples)
    assert issubclass(WeldingError, ArithmeticError)


def test_sufficient_flag_and_certificate():
    curve, _ = curve_from_schlicht([0.2], make_grid(64))
    assert curve.sufficient and curve.certificate > 0.5
    loose, _ = curve_from_schlicht([0.25, 0.2], make_grid(64))
    assert not loose.sufficient


def test_result_serializes():
    weld = conformal_weld(curve_from_schlicht([0.1], make_grid(64))[1])
    data = json.loads(dumps(weld.to_dict()))
    assert data["n"] == 64 and data["residual"] == weld.residual
    assert len(data["h"]["values"]) == 64


def test_schwarzian_routes_agree():
    g = make_grid(256)
    w = np.exp(1j * g.theta)
    curve, samples = curve_from_schlicht([0.2], g)
    L1, S1 = derivative_data(curve, g)
    L2, S2 = derivative_data(GridFunction(g, samples.gamma))
    exact = -1.5 * (0.4 / (1 + 0.4 * w)) ** 2
    assert np.abs(S1.values - exact).max() < 1e-14
    assert np.abs(S2.values - exact).max() < 1e-12
    assert np.abs(L1.values - L2.values).max() < 1e-13


def test_schwarzian_of_moebius_and_exterior_map():
    g = make_grid(256)
    w = np.exp(1j * g.theta)
    _, S = derivative_data(GridFunction(g, w / (1 - 0.3 * w)))
    assert np.abs(S.values).max() < 1e-9
    corr = riemann_map_exterior(ellipse(g))
    _, S = derivative_data(GridFunction(g, corr.values))
    d1, d2, d3 = 1 - 0.2 / w ** 2, 0.4 / w ** 3, -1.2 / w ** 4
    # third derivatives amplify the Theodorsen tolerance by ~k^3
    assert np.abs(S.values - (d3 / d1 - 1.5 * (d2 / d1) ** 2)).max() < 1e-7


def test_arc_length_decomposition_closed_curve():
    g = make_grid(512)
    _, samples = curve_from_schlicht([0.2], g)
    dec = arc_length_decompose(samples.embedding())
    assert dec.residual < 1e-12
    speed = np.abs(dec.gamma0.derivative())
    assert np.abs(speed / dec.speed - 1).max() < 1e-11
    # the length of the curve is 2 pi * speed
    assert abs(np.mean(np.abs(samples.tangent)) - dec.speed) < 1e-13


def test_arc_length_decomposition_line():
    g = make_grid(512)
    # exp(phi) - 1 = O(1/x^2), so gamma has no logarithmic term
    phi = GridFunction(g, (0.3 + 0.2j) / (1 + g.x ** 2), "line")
    dec = arc_length_decompose(exp_integral(phi))
    assert dec.residual < 1e-8
    assert np.abs(log_derivative(dec.gamma0).values.real).max() < 1e-8
