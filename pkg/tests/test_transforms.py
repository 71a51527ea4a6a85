import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from wpcurves.grid import GridFunction, cayley_pullback, cayley_pushforward, make_grid, sample
from wpcurves.transforms import (
    AnalyticCoefficients,
    harmonic_extend,
    hilbert_circle,
    hilbert_line,
    hilbert_multiplier,
    riesz_project,
)

from conftest import bandlimited


def test_multiplier_values():
    assert np.array_equal(hilbert_multiplier(np.array([-2, 0, 3])), np.array([1j, 0, -1j]))


def test_circle_hilbert_cos_to_sin(grid256):
    th = grid256.theta
    out = hilbert_circle(sample(grid256, lambda t: np.cos(t) + np.cos(3 * t)))
    assert np.abs(out.values - np.sin(th) - np.sin(3 * th)).max() < 1e-14
    with pytest.raises(ValueError):
        hilbert_circle(sample(grid256, np.cos, "line"))


def test_line_hilbert_closed_forms():
    g = make_grid(1024)
    x = g.x
    f = sample(g, lambda t: 1 / (1 + t * t), "line")
    assert np.abs(hilbert_line(f).values - x / (1 + x * x)).max() < 1e-10
    h = hilbert_line(sample(g, lambda t: t / (1 + t * t), "line")).values
    diff = h + 1 / (1 + x * x)
    assert np.std(diff) < 1e-10


def test_line_hilbert_is_conjugated_circle_transform():
    g = make_grid(512)
    f = sample(g, lambda t: np.exp(-t * t) * np.cos(t), "line")
    direct = hilbert_line(f).values
    conj = cayley_pullback(hilbert_circle(cayley_pushforward(f))).values
    assert np.std(direct - conj) < 1e-6


def test_unregularized_line_transform_needs_decay():
    g = make_grid(512)
    f = sample(g, lambda t: 1 / (1 + t * t), "line")
    plain = hilbert_line(f, regularized=False).values
    assert np.abs(plain - g.x / (1 + g.x ** 2)).max() < 1e-8
    with pytest.raises(ValueError):
        hilbert_line(sample(g, lambda t: 1 + 1 / (1 + t * t), "line"), regularized=False)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1), band=st.integers(1, 60))
def test_hilbert_riesz_identities(seed, band):
    g = make_grid(256)
    f = bandlimited(g, band, np.random.default_rng(seed))
    scale = np.abs(f.values).max()
    plus, minus = riesz_project(f, "plus"), riesz_project(f, "minus")
    assert np.abs((hilbert_circle(hilbert_circle(f)) + f).values).max() <= 1e-12 * scale
    assert np.abs((plus + minus - f).values).max() <= 1e-12 * scale
    assert np.abs(riesz_project(minus, "plus").values).max() <= 1e-12 * scale
    # P+ - P- = i H on mean-zero data
    assert np.abs((plus - minus).values - 1j * hilbert_circle(f).values).max() <= 1e-12 * scale


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1), shift=st.integers(0, 255))
def test_hilbert_commutes_with_grid_rotations(seed, shift):
    g = make_grid(256)
    f = bandlimited(g, 20, np.random.default_rng(seed))
    rotated = GridFunction(g, np.roll(f.values, shift))
    assert np.allclose(hilbert_circle(rotated).values, np.roll(hilbert_circle(f).values, shift), atol=1e-12)


def test_line_riesz_projection_is_boundary_of_halfplane_function():
    g = make_grid(1024)
    x = g.x
    # 1/(x+i) extends to the upper half-plane, 1/(x-i) to the lower one
    f = sample(g, lambda t: 1 / (t - 1j) + 1 / (t + 1j), "line")
    plus = riesz_project(f, "plus").values
    minus = riesz_project(f, "minus").values
    # projections are defined modulo constants
    assert np.std(plus - 1 / (x + 1j)) < 1e-9
    assert np.std(minus - 1 / (x - 1j)) < 1e-9
    with pytest.raises(ValueError):
        riesz_project(f, "up")


def test_harmonic_extensions(grid256):
    e = GridFunction(grid256, np.exp(1j * grid256.theta))
    assert abs(harmonic_extend(e, 0.3) - 0.3) < 1e-14
    em = GridFunction(grid256, np.exp(-1j * grid256.theta))
    assert abs(harmonic_extend(em, 2.0) - 0.5) < 1e-14
    assert abs(harmonic_extend(sample(grid256, np.cos), 0.5, "poisson") - 0.5) < 1e-14
    with pytest.raises(ValueError):
        harmonic_extend(e, 0.999)


def test_line_extensions_match_quadrature_oracle():
    g = make_grid(1024)
    f = sample(g, lambda t: 1 / (1 + t * t), "line")
    z = 1 + 1j
    re = quad(lambda t: (1 / ((1 + t * t) * (z - t))).real, -np.inf, np.inf)[0]
    im = quad(lambda t: (1 / ((1 + t * t) * (z - t))).imag, -np.inf, np.inf)[0]
    assert abs(harmonic_extend(f, z) - (re + 1j * im) / np.pi) < 1e-8
    assert abs(harmonic_extend(f, z, "poisson") - 0.4) < 1e-8


def test_analytic_coefficients_round_trip(grid256):
    a = AnalyticCoefficients("plus", [0.5, 1.0, -0.25j])
    back = AnalyticCoefficients.from_trace(a.trace(grid256), "plus", 2)
    assert np.allclose(back.coeffs, a.coeffs, atol=1e-14)
    m = AnalyticCoefficients("minus", [0, 2.0])
    assert np.allclose(m.trace(grid256).values, 2 * np.exp(-1j * grid256.theta))
    assert np.allclose(a.evaluate(0.5, 1), 1.0 - 0.25j)
    with pytest.raises(ValueError):
        AnalyticCoefficients("left", [1])
