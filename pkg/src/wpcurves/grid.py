"""Uniform circle grids, the Cayley transfer to the line, and spectral calculus.

Every sampled function lives on a half-offset grid ``theta_j = 2*pi*(j + 1/2)/n``
so that ``w = 1`` (the image of infinity under the Cayley map) is never a node.
Line functions are stored on the pulled-back nodes ``x_j = K^{-1}(e^{i theta_j})``
and share their value array with the circle function they correspond to.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * np.pi
BAND_LIMIT_THRESHOLD = 1e-10


class AliasingWarning(UserWarning):
    """Raised when a sampled function carries energy near the Nyquist band."""


def cayley(x):
    """K(x) = (x - i)/(x + i)."""
    x = np.asarray(x, dtype=complex)
    return (x - 1j) / (x + 1j)


def cayley_inverse(w):
    """K^{-1}(w) = i(1 + w)/(1 - w)."""
    w = np.asarray(w, dtype=complex)
    return 1j * (1 + w) / (1 - w)


def angle_to_line(a):
    """Real point x = K^{-1}(e^{ia}) = -cot(a/2) for a in (0, 2*pi)."""
    a = np.asarray(a, dtype=float)
    return -np.cos(a / 2) / np.sin(a / 2)


def line_to_angle(x):
    """Inverse of ``angle_to_line`` with values in (0, 2*pi)."""
    x = np.asarray(x, dtype=float)
    return np.pi + 2.0 * np.arctan(x)


def line_jacobian(a):
    """dx/da for x = -cot(a/2)."""
    return 0.5 / np.sin(np.asarray(a, dtype=float) / 2) ** 2


@dataclass(frozen=True)
class CircleGrid:
    n: int
    offset: bool = True

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 16 or n & (n - 1):
            raise ValueError(f"n must be power of two and at least 16, got {n!r}")

    @cached_property
    def theta(self) -> np.ndarray:
        j = np.arange(self.n, dtype=float)
        shift = 0.5 if self.offset else 0.0
        return TWO_PI * (j + shift) / self.n

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    @cached_property
    def x(self) -> np.ndarray:
        """Cayley-pullback nodes on the real line (increasing)."""
        if not self.offset:
            raise ValueError("line nodes require the half-offset grid")
        return angle_to_line(self.theta)

    @cached_property
    def freqs(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, 1.0 / self.n)

    @cached_property
    def nyquist(self) -> np.ndarray:
        return np.abs(self.freqs) == self.n // 2

    def coefficients(self, values) -> np.ndarray:
        """Fourier coefficients c_k with f(theta_j) = sum_k c_k e^{ik theta_j}."""
        c = np.fft.fft(np.asarray(values, dtype=complex)) / self.n
        if self.offset:
            c = c * np.exp(-1j * self.freqs * np.pi / self.n)
        return c


def make_grid(n: int, offset: bool = True) -> CircleGrid:
    return CircleGrid(int(n), offset)


@dataclass(frozen=True)
class GridFunction:
    grid: CircleGrid
    values: np.ndarray
    domain: str = "circle"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {values.shape}")
        if self.domain not in ("circle", "line"):
            raise ValueError(f"unknown domain {self.domain!r}")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite sample values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.theta if self.domain == "circle" else self.grid.x

    def with_values(self, values, **meta) -> "GridFunction":
        return GridFunction(self.grid, values, self.domain, {**self.meta, **meta})

    def __add__(self, other):
        if isinstance(other, GridFunction):
            _check_compatible(self, other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            _check_compatible(self, other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _check_compatible(f: GridFunction, g: GridFunction):
    if f.domain != g.domain or f.grid != g.grid:
        raise ValueError("grid functions live on different grids or domains")


def sample(grid: CircleGrid, func: Callable, domain: str = "circle") -> GridFunction:
    nodes = grid.theta if domain == "circle" else grid.x
    return GridFunction(grid, np.broadcast_to(func(nodes), (grid.n,)), domain)


def cayley_pushforward(f: GridFunction) -> GridFunction:
    """f∘K^{-1}: same samples, relabelled as a circle function."""
    if f.domain != "line":
        raise ValueError("cayley_pushforward expects a line function")
    return GridFunction(f.grid, f.values, "circle", dict(f.meta))


def cayley_pullback(f: GridFunction) -> GridFunction:
    if f.domain != "circle":
        raise ValueError("cayley_pullback expects a circle function")
    return GridFunction(f.grid, f.values, "line", dict(f.meta))


def band_limit_ratio(values) -> float:
    """Fraction of spectral energy in the top quarter of frequencies."""
    c = np.fft.fft(np.asarray(values, dtype=complex))
    n = c.size
    k = np.abs(np.fft.fftfreq(n, 1.0 / n))
    total = np.sum(np.abs(c) ** 2)
    if total == 0:
        return 0.0
    return float(np.sum(np.abs(c[k >= n // 4]) ** 2) / total)


def _periodic_derivative(grid: CircleGrid, values: np.ndarray, order: int = 1) -> np.ndarray:
    k = grid.freqs.astype(complex)
    mult = (1j * k) ** order
    if order % 2:
        mult[grid.nyquist] = 0
    return np.fft.ifft(mult * np.fft.fft(values))


def spectral_derivative(f: GridFunction, order: int = 1) -> GridFunction:
    """Derivative by the Fourier multiplier (ik)^order.

    Circle functions are differentiated in theta. Line functions are
    differentiated in x through the chain rule dx/da = 1/(2 sin^2(a/2)).
    """
    ratio = band_limit_ratio(f.values)
    if ratio > BAND_LIMIT_THRESHOLD:
        warnings.warn(f"top-quarter spectral energy {ratio:.2e} exceeds threshold",
                      AliasingWarning, stacklevel=2)
    if f.domain == "circle":
        return f.with_values(_periodic_derivative(f.grid, f.values, order))
    out = f.values
    da_dx = 1.0 / line_jacobian(f.grid.theta)
    for _ in range(order):
        out = da_dx * _periodic_derivative(f.grid, out)
    return f.with_values(out)


def _nyquist_basis(grid: CircleGrid, points):
    """Real mode that equals (-1)^j on the nodes."""
    half = grid.n // 2
    return np.sin(half * points) if grid.offset else np.cos(half * points)


def trig_matrix(grid: CircleGrid, points) -> np.ndarray:
    """Matrix E with (E @ values) = trigonometric interpolant at ``points``."""
    points = np.asarray(points, dtype=float)
    k = grid.freqs
    keep = ~grid.nyquist
    dft = np.exp(-1j * np.outer(k[keep], grid.theta)) / grid.n
    mat = np.exp(1j * np.outer(points, k[keep])) @ dft
    alt = (-1.0) ** np.arange(grid.n) / grid.n
    # interpolation maps real data to real data
    return mat.real + np.outer(_nyquist_basis(grid, points), alt)


def trig_eval(grid: CircleGrid, values, points, tol: float = 0.0) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``values`` at arbitrary angles.

    Coefficients below ``tol`` times the largest are dropped, which keeps the
    direct sum cheap for smooth data.
    """
    values = np.asarray(values, dtype=complex)
    points = np.asarray(points, dtype=float)
    c = grid.coefficients(values)
    keep = ~grid.nyquist
    if tol > 0:
        keep &= np.abs(c) > tol * np.abs(c).max(initial=0.0)
    kk, cc = grid.freqs[keep], c[keep]
    flat = points.ravel()
    res = np.empty(flat.shape, dtype=complex)
    chunk = max(1, 2 ** 21 // max(kk.size, 1))
    for start in range(0, flat.size, chunk):
        p = flat[start:start + chunk]
        res[start:start + chunk] = np.exp(1j * np.outer(p, kk)) @ cc
    b = np.mean(values * (-1.0) ** np.arange(grid.n))
    if b != 0:
        res += b * _nyquist_basis(grid, flat)
    if not np.any(values.imag):
        res = res.real.astype(complex)
    return res.reshape(points.shape)


def _check_monotone(g: np.ndarray, domain: str):
    if not np.all(np.isfinite(g)):
        raise ValueError("node map has non-finite values")
    if np.any(np.diff(g) <= 0):
        raise ValueError("node map must be strictly increasing")
    if domain == "circle" and g[-1] - g[0] >= TWO_PI:
        raise ValueError("circle node map must have degree one")


def resample_compose(f: GridFunction, g: Union[np.ndarray, Callable], method: str = "trig") -> GridFunction:
    """Return f∘g sampled on f's nodes.

    ``g`` is either the array of g(node) values or a callable. Circle maps act
    on angles; line maps act on x. ``method`` is ``"trig"`` (trigonometric
    interpolation, in the Cayley angle for line functions) or ``"spline"``
    (cubic spline in x, line only).
    """
    nodes = f.nodes
    gv = np.asarray(g(nodes) if callable(g) else g, dtype=float)
    if gv.shape != nodes.shape:
        raise ValueError("node map has the wrong length")
    _check_monotone(gv, f.domain)
    if np.array_equal(gv, nodes):
        return f.with_values(f.values.copy(), interpolation="none")
    if f.domain == "circle":
        vals = trig_eval(f.grid, f.values, gv)
        return f.with_values(vals, interpolation="trigonometric")
    if method == "spline":
        spl_re = CubicSpline(nodes, f.values.real)
        spl_im = CubicSpline(nodes, f.values.imag)
        return f.with_values(spl_re(gv) + 1j * spl_im(gv), interpolation="cubic-spline")
    vals = trig_eval(f.grid, f.values, line_to_angle(gv))
    return f.with_values(vals, interpolation="trigonometric-cayley")


def _periodic_antiderivative(grid: CircleGrid, values) -> tuple[complex, np.ndarray, complex]:
    """Split values into mean m and the spectral antiderivative P of the rest.

    Returns (m, P at nodes, P(0)).
    """
    c = grid.coefficients(values)
    k = grid.freqs
    d = np.zeros_like(c)
    nz = (k != 0) & ~grid.nyquist
    d[nz] = c[nz] / (1j * k[nz])
    shift = np.exp(1j * k * np.pi / grid.n) if grid.offset else 1.0
    p_nodes = np.fft.ifft(d * shift) * grid.n
    return c[0], p_nodes, d.sum()


def antiderivative_normalized(f: GridFunction) -> GridFunction:
    """F with F(0) = 0 and F' = f.

    Circle: the mean m is split off as the linear term m*theta; the rest is
    integrated spectrally. Line: f is written as f(inf) plus a part that
    decays at infinity; the decaying part is integrated in the Cayley angle,
    where dx = da/(2 sin^2(a/2)).
    """
    grid = f.grid
    if f.domain == "circle":
        m, p, p0 = _periodic_antiderivative(grid, f.values)
        return f.with_values(m * grid.theta + p - p0, linear_coefficient=complex(m))
    a = grid.theta
    f_inf = complex(trig_eval(grid, f.values, np.array([0.0]))[0])
    g = (f.values - f_inf) * line_jacobian(a)
    m, p, p0 = _periodic_antiderivative(grid, g)
    # the periodic part is anchored at a = pi, which is x = 0
    p_pi = complex(trig_eval(grid, p, np.array([np.pi]))[0])
    vals = f_inf * grid.x + m * (a - np.pi) + p - p_pi
    return f.with_values(vals, linear_coefficient=f_inf, ramp_coefficient=complex(m))


def periodic_spline(t, y, period: float = TWO_PI) -> CubicSpline:
    """Periodic cubic spline through (t_j, y_j) with t increasing within one period."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y)
    tt = np.append(t, t[0] + period)
    yy = np.concatenate([y, y[:1]])
    return CubicSpline(tt, yy, bc_type="periodic")
