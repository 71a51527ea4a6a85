"""Composition operators, affine translations and log-derivative pipelines.

A :class:`QuasisymmetricMap` is an increasing self-map of the circle (acting on
angles, degree one) or of the line, stored through its node values and
derivative. A :class:`WPEmbedding` is a complex curve ``gamma`` stored together
with its log-derivative; on the circle ``gamma = c*theta + P(theta)`` and on the
line ``gamma = c*x + r*(a - pi) + P(a)`` with ``a`` the Cayley angle and ``P``
periodic, which is what lets every operation stay spectral.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import (
    TWO_PI,
    CircleGrid,
    GridFunction,
    _periodic_derivative,
    angle_to_line,
    antiderivative_normalized,
    line_jacobian,
    line_to_angle,
    periodic_spline,
    resample_compose,
    trig_eval,
    trig_matrix,
)
from .norms import lp_integral, boundary_seminorm

PROBE_VERSION = "probes-v1"


@dataclass(frozen=True)
class QuasisymmetricMap:
    grid: CircleGrid
    values: np.ndarray
    deriv: np.ndarray
    model: str = "circle"
    func: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.model not in ("circle", "line"):
            raise ValueError(f"unknown model {self.model!r}")
        values = np.asarray(self.values, dtype=float)
        deriv = np.asarray(self.deriv, dtype=float)
        if values.shape != (self.grid.n,) or deriv.shape != (self.grid.n,):
            raise ValueError("map samples have the wrong length")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(deriv))):
            raise ValueError("map samples must be finite")
        if np.any(np.diff(values) <= 0):
            raise ValueError("map must be strictly increasing")
        if self.model == "circle" and values[-1] - values[0] >= TWO_PI:
            raise ValueError("circle map must have degree one")
        if np.any(deriv <= 0):
            raise ValueError("map derivative must be positive at every node")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "deriv", deriv)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.theta if self.model == "circle" else self.grid.x

    @classmethod
    def from_function(cls, grid: CircleGrid, h: Callable, dh: Optional[Callable] = None,
                      model: str = "circle") -> "QuasisymmetricMap":
        nodes = grid.theta if model == "circle" else grid.x
        values = np.asarray(h(nodes), dtype=float)
        if dh is None:
            return cls.from_samples(grid, values, model, func=h)
        return cls(grid, values, np.asarray(dh(nodes), dtype=float), model, h)

    @classmethod
    def from_samples(cls, grid: CircleGrid, values, model: str = "circle", func=None) -> "QuasisymmetricMap":
        values = np.asarray(values, dtype=float)
        if model == "circle":
            deriv = 1.0 + _periodic_derivative(grid, values - grid.theta).real
        else:
            a = grid.theta
            angles = line_to_angle(values)
            dA = 1.0 + _periodic_derivative(grid, angles - a).real
            deriv = line_jacobian(angles) * dA / line_jacobian(a)
        return cls(grid, values, deriv, model, func)

    @classmethod
    def identity(cls, grid: CircleGrid, model: str = "circle") -> "QuasisymmetricMap":
        nodes = grid.theta if model == "circle" else grid.x
        return cls(grid, nodes.copy(), np.ones(grid.n), model, lambda x: np.asarray(x, dtype=float))

    @classmethod
    def rotation(cls, grid: CircleGrid, c: float) -> "QuasisymmetricMap":
        return cls(grid, grid.theta + c, np.ones(grid.n), "circle", lambda x: np.asarray(x, dtype=float) + c)

    def circle_angles(self) -> np.ndarray:
        """Node values as Cayley angles (line model) or angles (circle model)."""
        return self.values if self.model == "circle" else line_to_angle(self.values)

    def evaluate(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(points), dtype=float)
        if self.model == "circle":
            return points + trig_eval(self.grid, self.values - self.grid.theta, points).real
        a = line_to_angle(points)
        angles = a + trig_eval(self.grid, self.circle_angles() - self.grid.theta, a).real
        return angle_to_line(angles)

    def inverse(self, method: str = "spline") -> "QuasisymmetricMap":
        """h^{-1} on the nodes.

        ``spline``: a periodic cubic spline through the points (h_j, theta_j - h_j)
        interpolates h^{-1}(y) - y. ``newton``: the spline value is polished by
        Newton steps on the trigonometric interpolant of h - id, which is
        spectrally accurate for smooth h. Line maps are inverted through their
        Cayley-angle form.
        """
        if method not in ("spline", "newton"):
            raise ValueError(f"unknown inversion method {method!r}")
        grid = self.grid
        theta = grid.theta
        y = self.circle_angles()
        base = y[0]
        spline = periodic_spline(y - base, theta - y)
        inv_angles = theta + spline(theta - base)
        d_inv = 1.0 + spline(theta - base, 1)
        if method == "newton":
            u = y - theta
            for _ in range(30):
                resid = inv_angles + trig_eval(grid, u, inv_angles).real - theta
                slope = 1.0 + trig_eval(grid, _periodic_derivative(grid, u), inv_angles).real
                inv_angles = inv_angles - resid / slope
                if np.max(np.abs(resid)) < 1e-15:
                    break
            d_inv = 1.0 / (1.0 + trig_eval(grid, _periodic_derivative(grid, u), inv_angles).real)
        if np.any(d_inv <= 0):
            raise ValueError("inverse lost monotonicity; refine the grid")
        if self.model == "circle":
            return QuasisymmetricMap(grid, inv_angles, d_inv, "circle")
        values = angle_to_line(inv_angles)
        deriv = line_jacobian(inv_angles) * d_inv / line_jacobian(theta)
        return QuasisymmetricMap(grid, values, deriv, "line")

    def compose(self, other: "QuasisymmetricMap") -> "QuasisymmetricMap":
        """self∘other."""
        if other.model != self.model or other.grid != self.grid:
            raise ValueError("maps live on different grids or models")
        values = self.evaluate(other.values)
        inner = GridFunction(self.grid, self.deriv, self.model)
        outer_deriv = compose_operator(other, inner).values.real
        func = None
        if self.func is not None and other.func is not None:
            f1, f2 = self.func, other.func
            func = lambda x: f1(f2(x))
        return QuasisymmetricMap(self.grid, values, outer_deriv * other.deriv, self.model, func)

    def normalization(self) -> dict:
        if self.model == "circle":
            return {"h(0)": float(self.evaluate(np.array([0.0]))[0])}
        h = self.evaluate(np.array([0.0, 1.0]))
        return {"h(0)": float(h[0]), "h(1)": float(h[1])}

    def log_derivative(self) -> GridFunction:
        return GridFunction(self.grid, np.log(self.deriv), self.model)


@dataclass(frozen=True)
class WPEmbedding:
    """Complex curve gamma with gamma' = exp(phi + i*winding*theta).

    ``phi`` is periodic in the circle model; ``linear`` and ``ramp`` record the
    non-periodic parts of gamma described in the module docstring.
    """

    grid: CircleGrid
    gamma: np.ndarray
    model: str = "circle"
    winding: int = 0
    linear: complex = 0.0
    ramp: complex = 0.0
    phi: Optional[GridFunction] = None

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=complex)
        if gamma.shape != (self.grid.n,) or not np.all(np.isfinite(gamma)):
            raise ValueError("embedding samples must be finite and match the grid")
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def closed_curve(cls, grid: CircleGrid, gamma, winding: int = 1) -> "WPEmbedding":
        return cls(grid, gamma, "circle", winding)

    def periodic_part(self) -> np.ndarray:
        if self.model == "circle":
            return self.gamma - self.linear * self.grid.theta
        return self.gamma - self.linear * self.grid.x - self.ramp * (self.grid.theta - np.pi)

    def evaluate(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        periodic = self.periodic_part()
        if self.model == "circle":
            return self.linear * points + trig_eval(self.grid, periodic, points)
        a = line_to_angle(points)
        return self.linear * points + self.ramp * (a - np.pi) + trig_eval(self.grid, periodic, a)

    def derivative(self) -> np.ndarray:
        dp = _periodic_derivative(self.grid, self.periodic_part())
        if self.model == "circle":
            return self.linear + dp
        return self.linear + (self.ramp + dp) / line_jacobian(self.grid.theta)

    def compose(self, h: QuasisymmetricMap) -> "WPEmbedding":
        """gamma∘h for a circle homeomorphism h."""
        if self.model != "circle" or h.model != "circle":
            raise NotImplementedError("embedding composition is implemented in the circle model")
        return WPEmbedding(self.grid, self.evaluate(h.values), "circle", self.winding, self.linear)


def _unwrapped_log(d: np.ndarray) -> np.ndarray:
    if np.any(np.abs(d) == 0):
        raise ValueError("vanishing derivative")
    arg = np.unwrap(np.angle(d))
    if np.any(np.abs(np.diff(arg)) > 0.9 * np.pi):
        raise ValueError("branch jump between adjacent nodes: resolution failure")
    return np.log(np.abs(d)) + 1j * arg


def log_derivative(g) -> GridFunction:
    """log g' with a continuous branch anchored at node 0.

    For circle embeddings the winding term i*winding*theta is removed, so the
    result is periodic; it is recorded in the metadata.
    """
    if isinstance(g, QuasisymmetricMap):
        return g.log_derivative()
    if not isinstance(g, WPEmbedding):
        raise TypeError("expected a QuasisymmetricMap or WPEmbedding")
    logd = _unwrapped_log(g.derivative())
    if g.model == "circle" and g.winding:
        logd = logd - 1j * g.winding * g.grid.theta
    return GridFunction(g.grid, logd, g.model, {"winding": g.winding})


def exp_integral(f: GridFunction, winding: int = 0) -> WPEmbedding:
    """gamma with gamma(0) = 0 and gamma' = exp(f + i*winding*theta).

    On the line f must be smooth at infinity in the Cayley angle with
    exp(f) - exp(f(inf)) = O(1/x^2).
    """
    if np.max(f.values.real) > 700:
        raise OverflowError("exp overflows for the given real part")
    if f.domain == "circle":
        integrand = np.exp(f.values + 1j * winding * f.grid.theta)
        prim = antiderivative_normalized(f.with_values(integrand))
        return WPEmbedding(f.grid, prim.values, "circle", winding,
                           prim.meta["linear_coefficient"], 0.0, f)
    if winding:
        raise ValueError("winding applies to circle embeddings only")
    prim = antiderivative_normalized(f.with_values(np.exp(f.values)))
    return WPEmbedding(f.grid, prim.values, "line", 0, prim.meta["linear_coefficient"],
                       prim.meta["ramp_coefficient"], f)


def _require_model(h: QuasisymmetricMap, f: GridFunction):
    if h.model != f.domain or h.grid != f.grid:
        raise ValueError("map and function live on different models or grids")


def compose_operator(h: QuasisymmetricMap, f: GridFunction) -> GridFunction:
    """C_h f = f∘h."""
    _require_model(h, f)
    out = resample_compose(f, h.values)
    c = np.abs(f.grid.coefficients(f.values))
    tail = float(c[np.abs(f.grid.freqs) >= f.n // 4].max() / max(c.max(), 1e-300))
    return out.with_values(out.values, interpolation_error_estimate=tail)


def compose_many(h: QuasisymmetricMap, fs: Sequence[GridFunction]) -> list[GridFunction]:
    """C_h applied to several functions with one shared interpolation matrix."""
    for f in fs:
        _require_model(h, f)
    angles = h.circle_angles()
    mat = trig_matrix(h.grid, angles)
    return [f.with_values(mat @ f.values) for f in fs]


def affine_translation(h: QuasisymmetricMap, f: GridFunction) -> GridFunction:
    """Q_h f = C_h f + log h'."""
    out = compose_operator(h, f)
    return out.with_values(out.values + np.log(h.deriv))


@dataclass
class CompositionBoundReport:
    M: float
    w11_norm: float
    M_bound: float
    linf_log: float
    rows: list = field(default_factory=list)
    passed: bool = True

    def to_dict(self) -> dict:
        return {"M": self.M, "w11_norm": self.w11_norm, "M_bound": self.M_bound,
                "linf_log_derivative": self.linf_log, "rows": self.rows, "passed": self.passed}


def composition_bounds(h: QuasisymmetricMap, probes: Sequence[GridFunction],
                       w11_tol: float = 1e-6, slack_tol: float = -1e-8) -> CompositionBoundReport:
    """Check the L1, W11 and W21 composition inequalities on each probe.

    Derivatives of f∘h are taken spectrally from the composed samples, not by
    the chain rule, so the W11 equality is a genuine quadrature check.
    """
    log_d = h.log_derivative()
    linf = float(np.max(np.abs(log_d.values)))
    w11 = lp_integral(log_d, 1.0, 1)
    # exp(w11) dominates exp(linf) whenever log h' vanishes somewhere (normalized maps);
    # the max keeps the bound valid for unnormalized line maps such as x -> 2x
    bound = float(max(np.exp(w11), np.exp(linf)))
    report = CompositionBoundReport(float(np.exp(linf)), w11, bound, linf)
    composed = compose_many(h, probes)
    for i, (f, g) in enumerate(zip(probes, composed)):
        l1 = lp_integral(f), lp_integral(g)
        w1 = lp_integral(f, 1.0, 1), lp_integral(g, 1.0, 1)
        w2 = lp_integral(f, 1.0, 2), lp_integral(g, 1.0, 2)
        r_l1 = l1[1] / l1[0]
        r_w11 = w1[1] / w1[0]
        r_w21 = w2[1] / w2[0]
        slack_l1 = bound - r_l1
        slack_w21 = bound * (1.0 + w11) - r_w21
        ok = abs(r_w11 - 1.0) <= w11_tol and slack_l1 >= slack_tol and slack_w21 >= slack_tol
        report.rows.append({"probe": i, "l1_ratio": r_l1, "w11_ratio": r_w11, "w21_ratio": r_w21,
                            "l1_slack": slack_l1, "w21_slack": slack_w21, "passed": ok})
        report.passed &= ok
    if h.model == "circle":
        # log h' has zero mean on the circle, so it vanishes somewhere
        report.passed &= linf <= w11 + 1e-8
    return report


def probe_family(grid: CircleGrid, model: str = "circle") -> list[GridFunction]:
    """Fixed probe functions: 10 trigonometric/rational plus 10 bumps."""
    probes = []
    if model == "circle":
        th = grid.theta
        for k in range(1, 11):
            probes.append(GridFunction(grid, np.cos(k * th + 0.3 * k), "circle"))
        for j in range(10):
            width = 0.25 + 0.05 * j
            centre = TWO_PI * j / 10 + 0.1
            probes.append(GridFunction(grid, np.exp((np.cos(th - centre) - 1) / width ** 2), "circle"))
        return probes
    x = grid.x
    for k in range(5):
        z = (k - 2) * 0.7 - 1j * (0.6 + 0.2 * k)
        r = 1.0 / (x - z) ** 2
        probes.append(GridFunction(grid, r.real, "line"))
        probes.append(GridFunction(grid, r.imag, "line"))
    for j in range(10):
        width = 0.5 + 0.15 * j
        centre = -2.0 + 0.45 * j
        probes.append(GridFunction(grid, 1.0 / (1 + ((x - centre) / width) ** 2) ** 2, "line"))
    return probes


def interpolation_bound_check(h: QuasisymmetricMap, probes: Sequence[GridFunction],
                              kappa: Optional[float] = None) -> dict:
    """Compare the measured B1^# operator ratio with kappa*sqrt(M_W21*M_L1).

    M_L1 = exp(||log h'||_W11) and M_W21 = M_L1*(1 + ||log h'||_W11) are the
    proven operator bounds on L1 and W21. When ``kappa`` is None it is
    calibrated as the value making identity-perturbations tight.
    """
    def ratio(hmap):
        composed = compose_many(hmap, probes)
        best = 0.0
        for f, g in zip(probes, composed):
            num = boundary_seminorm(g, "bpsharp", 1.0, t_nodes=48).value
            den = boundary_seminorm(f, "bpsharp", 1.0, t_nodes=48).value
            best = max(best, num / den)
        return best

    def bounds(hmap):
        w11 = lp_integral(hmap.log_derivative(), 1.0, 1)
        m_l1 = np.exp(w11)
        return m_l1 * (1 + w11), m_l1

    if kappa is None:
        grid = h.grid
        eps = 1e-3
        if h.model == "circle":
            near = QuasisymmetricMap.from_function(grid, lambda t: t + eps * np.sin(t),
                                                   lambda t: 1 + eps * np.cos(t))
        else:
            near = QuasisymmetricMap.from_function(grid, lambda x: x + eps / (1 + x * x),
                                                   lambda x: 1 - 2 * eps * x / (1 + x * x) ** 2, "line")
        m_w21, m_l1 = bounds(near)
        kappa = ratio(near) / np.sqrt(m_w21 * m_l1)
    measured = ratio(h)
    m_w21, m_l1 = bounds(h)
    limit = kappa * np.sqrt(m_w21 * m_l1)
    return {"ratio": measured, "kappa": float(kappa), "M_W21": float(m_w21), "M_L1": float(m_l1),
            "bound": float(limit), "passed": bool(measured <= limit * (1 + 1e-9))}
