import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpcurves.grid import make_grid, sample
from wpcurves.operators import (
    PROBE_VERSION,
    QuasisymmetricMap,
    WPEmbedding,
    affine_translation,
    compose_many,
    compose_operator,
    composition_bounds,
    exp_integral,
    interpolation_bound_check,
    log_derivative,
    probe_family,
)


def circle_map(grid, a, k=1):
    return QuasisymmetricMap.from_function(grid, lambda t: t + a * np.sin(k * t) / k,
                                           lambda t: 1 + a * np.cos(k * t))


def test_monotonicity_enforced(grid256):
    with pytest.raises(ValueError):
        QuasisymmetricMap.from_function(grid256, lambda t: t + 2 * np.sin(t), lambda t: 1 + 2 * np.cos(t))


def test_from_samples_derivative(grid256):
    h = QuasisymmetricMap.from_samples(grid256, grid256.theta + 0.2 * np.sin(grid256.theta))
    assert np.abs(h.deriv - (1 + 0.2 * np.cos(grid256.theta))).max() < 1e-12
    x = grid256.x
    line = QuasisymmetricMap.from_samples(grid256, x + 0.3 * x / (1 + x * x), "line")
    exact = 1 + 0.3 * (1 - x * x) / (1 + x * x) ** 2
    assert np.abs(line.deriv - exact).max() < 1e-9


@pytest.mark.parametrize("method, tol", [("spline", 1e-6), ("newton", 1e-13)])
def test_inverse_circle(grid256, method, tol):
    h = circle_map(grid256, 0.4)
    inv = h.inverse(method)
    back = h.evaluate(inv.values)
    assert np.abs(back - grid256.theta).max() < tol
    chain = inv.deriv * (1 + 0.4 * np.cos(inv.values))
    assert np.abs(chain - 1).max() < 1e3 * tol


def test_inverse_line_newton(grid256):
    h = QuasisymmetricMap.from_function(grid256, lambda x: x + 0.3 * x / (1 + x * x),
                                        lambda x: 1 + 0.3 * (1 - x * x) / (1 + x * x) ** 2, "line")
    inv = h.inverse("newton")
    x = grid256.x
    assert np.abs(h.evaluate(inv.values) - x).max() < 1e-9 * np.abs(x).max()
    with pytest.raises(ValueError):
        h.inverse("bisection")


def test_compose_and_rotation(grid256):
    h, k = circle_map(grid256, 0.3), circle_map(grid256, 0.2, 2)
    hk = h.compose(k)
    th = grid256.theta
    inner = th + 0.1 * np.sin(2 * th)
    assert np.abs(hk.values - (inner + 0.3 * np.sin(inner))).max() < 1e-13
    assert np.abs(hk.deriv - (1 + 0.3 * np.cos(inner)) * (1 + 0.2 * np.cos(2 * th))).max() < 1e-12
    rot = QuasisymmetricMap.rotation(grid256, 0.5)
    assert abs(rot.normalization()["h(0)"] - 0.5) < 1e-15


def test_composition_operator_matches_closed_form(grid256):
    h = circle_map(grid256, 0.3)
    f = sample(grid256, lambda t: np.cos(3 * t))
    out = compose_operator(h, f)
    th = grid256.theta
    assert np.abs(out.values - np.cos(3 * (th + 0.3 * np.sin(th)))).max() < 1e-12
    many = compose_many(h, [f, f * 2])
    assert np.allclose(many[1].values, 2 * out.values, atol=1e-12)
    with pytest.raises(ValueError):
        compose_operator(h, sample(grid256, np.cos, "line"))


def test_affine_translation_cocycle(grid256):
    # Q_{h o k} = Q_k o Q_h
    h, k = circle_map(grid256, 0.3), circle_map(grid256, 0.25, 2)
    f = sample(grid256, lambda t: 0.2 * np.sin(t))
    lhs = affine_translation(h.compose(k), f).values
    rhs = affine_translation(k, affine_translation(h, f)).values
    assert np.abs(lhs - rhs).max() < 1e-10


def test_exp_integral_and_log_derivative_invert(grid256):
    th = grid256.theta
    emb = exp_integral(sample(grid256, lambda t: 0 * t), winding=1)
    assert np.abs(emb.gamma - (-1j) * (np.exp(1j * th) - 1)).max() < 1e-12
    phi = sample(grid256, lambda t: 0.3 * np.cos(t) + 0.1j * np.sin(2 * t))
    back = log_derivative(exp_integral(phi, winding=1))
    assert np.abs(back.values - phi.values).max() < 1e-11
    assert back.meta["winding"] == 1


def test_line_exp_integral(grid256):
    x = grid256.x
    phi = sample(grid256, lambda t: np.log(1 + 0.5 / (1 + t * t)), "line")
    emb = exp_integral(phi)
    assert np.abs(emb.gamma - (x + 0.5 * np.arctan(x))).max() < 1e-9 * np.abs(x).max()
    assert np.abs(log_derivative(emb).values - phi.values).max() < 1e-8
    with pytest.raises(ValueError):
        exp_integral(phi, winding=1)


def test_embedding_compose(grid256):
    emb = exp_integral(sample(grid256, lambda t: 0 * t), winding=1)
    h = circle_map(grid256, 0.2)
    th = grid256.theta
    moved = emb.compose(h)
    assert np.abs(moved.gamma + 1j * (np.exp(1j * (th + 0.2 * np.sin(th))) - 1)).max() < 1e-12
    assert isinstance(moved, WPEmbedding)


def test_probe_family_fixed(grid256):
    probes = probe_family(grid256)
    assert len(probes) == 20 and PROBE_VERSION == "probes-v1"
    again = probe_family(grid256)
    assert all(np.array_equal(a.values, b.values) for a, b in zip(probes, again))
    assert len(probe_family(grid256, "line")) == 20


@pytest.mark.parametrize("a", [0.1, 0.3])
def test_composition_bounds_circle(a):
    grid = make_grid(512)
    rep = composition_bounds(circle_map(grid, a), probe_family(grid))
    assert rep.passed
    assert all(abs(r["w11_ratio"] - 1) < 1e-6 for r in rep.rows)


def test_composition_bounds_line_affine():
    grid = make_grid(512)
    h = QuasisymmetricMap.from_function(grid, lambda x: 2 * x, lambda x: 2 + 0 * x, "line")
    rep = composition_bounds(h, probe_family(grid, "line"))
    # f(2x): L1 halves, W11 unchanged, W21 doubles
    assert rep.passed
    for r in rep.rows:
        assert abs(r["l1_ratio"] - 0.5) < 1e-6
        assert abs(r["w21_ratio"] - 2) < 1e-6


def test_interpolation_bound(grid256):
    rep = interpolation_bound_check(circle_map(grid256, 0.2), probe_family(grid256)[:6])
    assert rep["passed"] and rep["kappa"] > 0


@settings(max_examples=15, deadline=None)
@given(a=st.floats(-0.6, 0.6), k=st.integers(1, 4))
def test_inverse_round_trip_property(a, k):
    # n=256 under-resolves h^{-1} for a=0.5, k=3 (error ~2e-11)
    grid = make_grid(512)
    h = circle_map(grid, a, k)
    inv = h.inverse("newton")
    assert np.abs(inv.compose(h).values - grid.theta).max() < 1e-11
