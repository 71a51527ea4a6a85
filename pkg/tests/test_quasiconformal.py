import json
import warnings

import numpy as np
import pytest

from wpcurves.grid import make_grid
from wpcurves.io import dumps
from wpcurves.operators import QuasisymmetricMap
from wpcurves.quasiconformal import (
    BeltramiField,
    BoundaryMassWarning,
    PlanarMapGrid,
    beurling_ahlfors_extend,
    complex_dilatation,
    geometric_heights,
    hyperbolic_lp_norm,
    twb_local_integral,
)

BOX = (-2.0, 2.0, 0.01, 2.0)


def line_map(grid, f, df):
    return QuasisymmetricMap.from_function(grid, f, df, "line")


def bump_map(grid, a):
    return line_map(grid, lambda x: x + a * x / (1 + x * x), lambda x: 1 + a * (1 - x * x) / (1 + x * x) ** 2)


def test_geometric_heights_are_octave_aligned():
    e = geometric_heights(0.01, 2.0, per_octave=4)
    assert e[-1] == 2.0 and e[0] <= 0.01 < e[1]
    assert np.allclose(e[1:] / e[:-1], 2 ** 0.25)
    assert np.any(np.isclose(e, 1.0))
    with pytest.raises(ValueError):
        geometric_heights(2.0, 1.0)


def test_field_validation_and_round_trip():
    x, y = np.linspace(-1, 1, 5), np.array([0.5, 1.0, 2.0])
    mu = 0.1 * np.ones((3, 5)) + 0.05j
    field = BeltramiField(x, y, mu)
    back = BeltramiField.from_dict(json.loads(dumps(field.to_dict())))
    assert np.array_equal(back.mu, field.mu) and np.array_equal(back.y, field.y)
    with pytest.raises(ValueError):
        BeltramiField(x, y, np.ones((3, 5)))
    with pytest.raises(ValueError):
        BeltramiField(x, y, np.zeros((5, 3)))
    with pytest.raises(ValueError):
        BeltramiField(x, -y[::-1], mu)
    with pytest.raises(ValueError):
        BeltramiField.from_dict({"x": [0.0], "mu": []})


def test_field_evaluate_bilinear_and_outside():
    x, y = np.array([0.0, 1.0]), np.array([1.0, 2.0])
    field = BeltramiField(x, y, np.array([[0.0, 0.2], [0.4, 0.6]]))
    assert abs(field.evaluate(0.5 + 1.5j) - 0.3) < 1e-14
    assert field.evaluate(5 + 1j) == 0


@pytest.mark.parametrize("f, df", [
    (lambda x: x, lambda x: np.ones_like(x)),
    (lambda x: 1.7 * x - 0.4, lambda x: np.full_like(x, 1.7)),
])
def test_extension_of_affine_maps_is_conformal(f, df):
    H = beurling_ahlfors_extend(line_map(make_grid(256), f, df), BOX)
    assert complex_dilatation(H).sup <= 1e-10


def test_extension_of_a_bump_map():
    grid = make_grid(512)
    h = bump_map(grid, 0.2)
    H = beurling_ahlfors_extend(h, BOX)
    assert np.all(H.jacobian() > 0)
    assert np.allclose(H.boundary, H.x + 0.2 * H.x / (1 + H.x ** 2))
    # the extension converges to h as y -> 0
    assert np.abs(H.H[0] - H.boundary).max() < 0.05
    ratios = [complex_dilatation(beurling_ahlfors_extend(bump_map(grid, a), BOX)).sup / a for a in (0.05, 0.1)]
    assert abs(ratios[0] / ratios[1] - 1) < 0.05 and 0 < ratios[0] < 1


def test_extension_from_samples_respects_resolved_range():
    grid = make_grid(128)
    x = grid.x
    h = QuasisymmetricMap.from_samples(grid, x + 0.2 * x / (1 + x * x), "line")
    with pytest.raises(ValueError):
        beurling_ahlfors_extend(h, (-50.0, 50.0, 0.1, 1.0))
    with pytest.raises(ValueError):
        beurling_ahlfors_extend(bump_map(grid, 0.1), (1.0, -1.0, 0.1, 1.0))


def test_dilatation_of_quadratic_map_is_exact():
    # H = z + 0.3 zbar + 0.1 zbar^2: H_z = 1, H_zbar = 0.3 + 0.2 zbar
    x = np.linspace(-1, 1, 21)
    y = geometric_heights(0.1, 1.0)
    z = x[None, :] + 1j * y[:, None]
    mu = complex_dilatation(PlanarMapGrid(x, y, z + 0.3 * np.conj(z) + 0.1 * np.conj(z) ** 2))
    zi = mu.x[None, :] + 1j * mu.y[:, None]
    assert np.abs(mu.mu - (0.3 + 0.2 * np.conj(zi))).max() < 1e-12


def test_degenerate_map_rejected():
    x, y = np.linspace(0, 1, 5), np.linspace(0.1, 1, 5)
    with pytest.raises(ValueError):
        complex_dilatation(PlanarMapGrid(x, y, np.zeros((5, 5), dtype=complex)))


def indicator_field(amplitude=0.5):
    return BeltramiField.from_function(
        lambda z: amplitude * ((z.real > 0) & (z.real < 1) & (z.imag > 1) & (z.imag < 2)),
        np.linspace(-1.0, 2.0, 61), geometric_heights(1.0 / 64, 4.0))


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_hyperbolic_norm_of_indicator(p):
    # int over [0,1]x[1,2] of y^-2 = 1/2
    res = hyperbolic_lp_norm(indicator_field(0.5), p)
    assert abs(res.value - 0.5 * 0.5 ** (1 / p)) < 1e-12
    assert res.boundary_fraction == 0.0 and res.sup == 0.5


def test_boundary_mass_warning_and_validation():
    x = np.linspace(0, 1, 4)
    field = BeltramiField.from_function(lambda z: 0.2 + 0 * z, np.linspace(0, 1, 5), geometric_heights(0.1, 1.0))
    with pytest.warns(BoundaryMassWarning):
        hyperbolic_lp_norm(field)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        hyperbolic_lp_norm(indicator_field())
    with pytest.raises(ValueError):
        hyperbolic_lp_norm(field, 0.5)
    assert hyperbolic_lp_norm(BeltramiField(x, x + 1, np.zeros((4, 4)))).value == 0.0


def test_local_integral_of_annulus():
    x0, r = 0.25, 0.5
    field = BeltramiField.from_function(lambda z: 0.4 * ((np.abs(z - x0) > r / 2) & (np.abs(z - x0) < r)),
                                        np.linspace(-1.0, 1.5, 101), geometric_heights(1e-3, 2.0))
    half = twb_local_integral(field, x0, r, symmetric=False)
    assert abs(half - 0.4 * np.pi * np.log(2)) < 1e-2 * half
    assert twb_local_integral(field, x0, r) == pytest.approx(2 * half)
    with pytest.raises(ValueError):
        twb_local_integral(field, x0, 0.01)
