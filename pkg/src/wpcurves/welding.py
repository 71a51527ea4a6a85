"""Forward conformal welding for starlike analytic curves.

The interior side is parameterized by a schlicht polynomial
F1(w) = w + sum c_k w^k, so f1(theta) = F1(e^{i theta}). Riemann maps onto
either side are written as F(w) = centre + w*exp(G(w)); on the boundary,
Re G = log rho and Im G = (polar angle) - s, so Theodorsen's iteration

    phi <- s -/+ H[log rho(phi)]      (exterior / interior)

produces the boundary correspondence. The welding homeomorphism is
h = f2^{-1} o f1 and satisfies log f2' o h + log h' = log f1' (mod 2 pi i).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import TWO_PI, CircleGrid, GridFunction, _periodic_derivative, trig_eval
from .operators import QuasisymmetricMap, WPEmbedding, _unwrapped_log, exp_integral, compose_operator
from .transforms import hilbert_circle


class WeldingError(ArithmeticError):
    """Numerical failure of the welding pipeline (non-contraction, no convergence)."""


@dataclass(frozen=True)
class CurveSamples:
    """A closed curve gamma(theta) with callables for gamma and gamma'."""

    grid: CircleGrid
    func: Callable
    dfunc: Callable
    centre: complex = 0.0

    @property
    def gamma(self) -> np.ndarray:
        return np.asarray(self.func(self.grid.theta), dtype=complex)

    @property
    def tangent(self) -> np.ndarray:
        return np.asarray(self.dfunc(self.grid.theta), dtype=complex)

    @classmethod
    def from_samples(cls, grid: CircleGrid, gamma, centre: Optional[complex] = None) -> "CurveSamples":
        """Trigonometric interpolation of periodic samples."""
        gamma = np.asarray(gamma, dtype=complex)
        dgamma = _periodic_derivative(grid, gamma)
        if centre is None:
            centre = complex(np.mean(gamma))
        return cls(grid, lambda t: trig_eval(grid, gamma, t), lambda t: trig_eval(grid, dgamma, t), centre)

    def rotate(self, alpha: float) -> "CurveSamples":
        rot = np.exp(1j * alpha)
        f, df = self.func, self.dfunc
        return CurveSamples(self.grid, lambda t: rot * f(t), lambda t: rot * df(t), rot * self.centre)

    def embedding(self) -> WPEmbedding:
        return WPEmbedding.closed_curve(self.grid, self.gamma, 1)

    def tangent_winding(self) -> int:
        d = _unwrapped_log(self.tangent).imag
        step = d[-1] - d[0] + np.angle(self.tangent[0] / self.tangent[-1])
        return int(round(step / TWO_PI))


@dataclass(frozen=True)
class SchlichtCurve:
    coeffs: np.ndarray
    certificate: float
    sufficient: bool

    def polynomial(self) -> np.ndarray:
        """Power-series coefficients of F1: [0, 1, c2, c3, ...]."""
        return np.concatenate([[0.0, 1.0], self.coeffs]).astype(complex)

    def evaluate(self, w, derivative: int = 0) -> np.ndarray:
        c = self.polynomial()
        for _ in range(derivative):
            c = c[1:] * np.arange(1, c.size)
        w = np.asarray(w, dtype=complex)
        if c.size == 0:
            return np.zeros_like(w)
        return np.polynomial.polynomial.polyval(w, c)

    def curve(self, grid: CircleGrid) -> CurveSamples:
        f = lambda t: self.evaluate(np.exp(1j * np.asarray(t)))
        df = lambda t: 1j * np.exp(1j * np.asarray(t)) * self.evaluate(np.exp(1j * np.asarray(t)), 1)
        return CurveSamples(grid, f, df, 0.0)


def _certificate(coeffs: np.ndarray, m: int = 512) -> float:
    w = np.exp(TWO_PI * 1j * (np.arange(m) + 0.5) / m)
    c = np.concatenate([[0.0, 1.0], coeffs])
    F = np.polynomial.polynomial.polyval(w, c)
    dw = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(dw, 1.0)
    ratio = np.abs(F[:, None] - F[None, :]) / dw
    np.fill_diagonal(ratio, np.inf)
    deriv = np.abs(np.polynomial.polynomial.polyval(w, c[1:] * np.arange(1, c.size)))
    return float(min(ratio.min(), deriv.min()))


def curve_from_schlicht(c, grid: CircleGrid) -> tuple[SchlichtCurve, CurveSamples]:
    """Schlicht curve F1(S) for coefficients c = [c2, c3, ...].

    The certificate is the smallest difference quotient |F(w1) - F(w2)|/|w1 - w2|
    over pairs of 512 boundary points, and |F'| on the circle. The curve is
    rejected when it is not positive, or when the tangent turns more than once
    (F' has a zero inside the disk).
    """
    coeffs = np.atleast_1d(np.asarray(c, dtype=complex))
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("coefficients must be finite")
    k = np.arange(2, coeffs.size + 2)
    sufficient = bool(np.sum(k * np.abs(coeffs)) < 1)
    cert = _certificate(coeffs)
    curve = SchlichtCurve(coeffs, cert, sufficient)
    samples = curve.curve(grid)
    if cert <= 1e-8 or samples.tangent_winding() != 1:
        raise ValueError(f"coefficients {coeffs.tolist()} do not give a simple curve "
                         f"(certificate {cert:.3g}, sum k|c_k| < 1: {sufficient})")
    return curve, samples


@dataclass
class Correspondence:
    """Boundary map s -> F(e^{is}) of a Riemann map onto one side of a curve.

    ``theta`` holds the curve parameter reached from each node s, ``G`` the
    boundary values of log((F - centre)/w) projected onto the analytic side.
    """

    grid: CircleGrid
    side: str
    theta: np.ndarray
    G: np.ndarray
    centre: complex
    iterations: int
    eps: float
    leakage: float

    @property
    def values(self) -> np.ndarray:
        s = self.grid.theta
        return self.centre + np.exp(1j * s + self.G)

    def log_derivative_periodic(self) -> np.ndarray:
        """P with log f'(s) = i*pi/2 + i*s + P(s); P = G + log(1 - i G_s)."""
        Gs = _periodic_derivative(self.grid, self.G)
        return self.G + np.log(1.0 - 1j * Gs)

    def evaluate(self, w) -> np.ndarray:
        """The Riemann map F(w) = centre + w*exp(G(w)) off the circle, on its own side."""
        w = np.asarray(w, dtype=complex)
        c = self.grid.coefficients(self.G)
        k = self.grid.freqs
        keep = (k <= 0) if self.side == "exterior" else (k >= 0)
        keep &= ~self.grid.nyquist
        G = np.zeros_like(w)
        for kk, cc in zip(k[keep], c[keep]):
            G = G + cc * w ** kk
        return self.centre + w * np.exp(G)

    def as_map(self) -> QuasisymmetricMap:
        """s -> theta(s) as a circle homeomorphism."""
        dth = 1.0 + _periodic_derivative(self.grid, self.theta - self.grid.theta).real
        return QuasisymmetricMap(self.grid, self.theta, dth, "circle")


class _PolarCurve:
    """Polar angle alpha(theta) and radius of a curve about its centre."""

    def __init__(self, curve: CurveSamples, oversample: int = 4):
        self.curve = curve
        fine = (np.arange(curve.grid.n * oversample) + 0.5) * TWO_PI / (curve.grid.n * oversample)
        z = curve.func(fine) - curve.centre
        dz = curve.dfunc(fine)
        if np.any(np.abs(z) == 0):
            raise WeldingError("curve passes through its centre")
        q = dz / z
        if np.any(q.imag <= 0):
            raise WeldingError("curve is not starlike about its centre")
        self.eps = float(np.max(np.abs(q.real / q.imag)))
        beta = np.unwrap(np.angle(z * np.exp(-1j * fine)))
        if abs(beta[-1] - beta[0]) > np.pi:
            raise WeldingError("curve does not wind once around its centre")
        self.fine = fine
        self.beta = beta

    def beta_at(self, t):
        z = self.curve.func(t) - self.curve.centre
        raw = np.angle(z * np.exp(-1j * t))
        ref = np.interp(np.mod(t, TWO_PI), self.fine, self.beta, period=TWO_PI)
        return raw + TWO_PI * np.round((ref - raw) / TWO_PI)

    def solve(self, phi, start):
        """theta with alpha(theta) = phi, Newton from ``start``."""
        t = np.array(start, dtype=float)
        for _ in range(50):
            q = self.curve.dfunc(t) / (self.curve.func(t) - self.curve.centre)
            step = (t + self.beta_at(t) - phi) / q.imag
            t = t - step
            if np.max(np.abs(step)) < 1e-15:
                break
        return t

    def log_radius(self, t):
        return np.log(np.abs(self.curve.func(t) - self.curve.centre))


def theodorsen(curve: CurveSamples, side: str = "exterior", tol: float = 1e-11,
               maxiter: int = 200) -> Correspondence:
    """Boundary correspondence of the Riemann map onto one side of a starlike curve.

    Exterior: F(inf) = inf with F'(inf) > 0. Interior: F(0) = centre with
    F'(0) > 0. Requires the contraction condition sup|d log rho / d phi| < 1.
    """
    if side not in ("exterior", "interior"):
        raise ValueError(f"side must be exterior or interior, got {side!r}")
    grid = curve.grid
    polar = _PolarCurve(curve)
    if polar.eps >= 1:
        raise WeldingError(f"contraction condition fails: sup|d log rho/d phi| = {polar.eps:.3f}")
    sign = -1.0 if side == "exterior" else 1.0
    s = grid.theta
    theta = polar.solve(s, s)
    for it in range(1, maxiter + 1):
        logr = GridFunction(grid, polar.log_radius(theta))
        phi = s + sign * hilbert_circle(logr).values.real
        new = polar.solve(phi, theta)
        diff = float(np.max(np.abs(new - theta)))
        theta = new
        if diff < tol:
            break
    else:
        raise WeldingError(f"Theodorsen iteration did not converge in {maxiter} steps (last change {diff:.2e})")
    G = polar.log_radius(theta) + 1j * (theta + polar.beta_at(theta) - s)
    coeffs = np.fft.fft(G)
    k = grid.freqs
    wrong = (k > 0) if side == "exterior" else (k < 0)
    wrong |= grid.nyquist
    leakage = float(np.linalg.norm(coeffs[wrong]) / np.linalg.norm(coeffs))
    coeffs[wrong] = 0
    # imaginary mean is pinned by the positive-derivative normalization
    coeffs[0] = coeffs[0].real
    G = np.fft.ifft(coeffs)
    return Correspondence(grid, side, theta, G, curve.centre, it, polar.eps, leakage)


def riemann_map_exterior(curve: CurveSamples, **kw) -> Correspondence:
    return theodorsen(curve, "exterior", **kw)


@dataclass
class BoundaryMap:
    """Boundary parameterization f(theta) = F(e^{i theta}) with its periodic log-derivative part."""

    grid: CircleGrid
    values: np.ndarray
    log_periodic: np.ndarray

    def log_derivative(self, points=None) -> np.ndarray:
        """log f' = i*pi/2 + i*theta + P(theta) at the nodes or at ``points``."""
        if points is None:
            return 0.5j * np.pi + 1j * self.grid.theta + self.log_periodic
        points = np.asarray(points, dtype=float)
        return 0.5j * np.pi + 1j * points + trig_eval(self.grid, self.log_periodic, points)

    def to_dict(self) -> dict:
        return {"values": self.values, "log_derivative": self.log_derivative()}


@dataclass
class WeldingResult:
    f1: BoundaryMap
    f2: BoundaryMap
    h: QuasisymmetricMap
    residual: float
    correspondence: Correspondence
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.h.grid.n,
            "f1": self.f1.to_dict(),
            "f2": self.f2.to_dict(),
            "h": {"values": self.h.values, "derivative": self.h.deriv, **self.h.normalization()},
            "residual": self.residual,
            "iterations": self.correspondence.iterations,
            "contraction": self.correspondence.eps,
            "analytic_leakage": self.correspondence.leakage,
            **self.meta,
        }


def _interior_log_periodic(curve: CurveSamples) -> np.ndarray:
    # log f1' - i*pi/2 - i*theta, continuous and periodic
    th = curve.grid.theta
    logd = _unwrapped_log(curve.tangent * np.exp(-1j * th) / 1j)
    return logd - TWO_PI * 1j * np.round(logd[0].imag / TWO_PI)


def welding_residual(f1: BoundaryMap, f2: BoundaryMap, h: QuasisymmetricMap) -> np.ndarray:
    """log f2' o h + log h' - log f1' at the nodes, reduced mod 2 pi i."""
    r = f2.log_derivative(h.values) + np.log(h.deriv) - f1.log_derivative()
    return r - TWO_PI * 1j * np.round(r.imag / TWO_PI)


def conformal_weld(curve, grid: Optional[CircleGrid] = None, **kw) -> WeldingResult:
    """Welding of a curve given as a SchlichtCurve or as CurveSamples.

    f1 is the curve's own parameterization; f2 comes from the exterior
    Riemann map and h = f2^{-1} o f1 is obtained by spline inversion of the
    correspondence s -> theta(s).
    """
    if isinstance(curve, SchlichtCurve):
        if grid is None:
            raise ValueError("a grid is needed to sample a SchlichtCurve")
        curve = curve.curve(grid)
    corr = riemann_map_exterior(curve, **kw)
    f1 = BoundaryMap(curve.grid, curve.gamma, _interior_log_periodic(curve))
    f2 = BoundaryMap(curve.grid, corr.values, corr.log_derivative_periodic())
    h = corr.as_map().inverse()
    res = welding_residual(f1, f2, h)
    return WeldingResult(f1, f2, h, float(np.max(np.abs(res))), corr)


def derivative_data(F, grid: Optional[CircleGrid] = None,
                    chop: float = 1e-15) -> tuple[GridFunction, GridFunction]:
    """(log F', S_F) on the unit circle, S_F = (log F')'' - ((log F')')^2 / 2.

    A SchlichtCurve is differentiated through its polynomial coefficients. A
    circle GridFunction of boundary values F(e^{i theta}) is expanded by FFT
    into a Laurent series sum c_k w^k (valid for interior and exterior maps),
    which is differentiated termwise after chopping coefficients below
    ``chop`` times the largest.
    """
    if isinstance(F, SchlichtCurve):
        if grid is None:
            raise ValueError("a grid is needed to sample a SchlichtCurve")
        w = np.exp(1j * grid.theta)
        d1, d2, d3 = (F.evaluate(w, k) for k in (1, 2, 3))
        if np.any(np.abs(d1) == 0):
            raise ValueError("vanishing derivative")
        logd = _unwrapped_log(d1)
        schwarz = d3 / d1 - 1.5 * (d2 / d1) ** 2
        return GridFunction(grid, logd), GridFunction(grid, schwarz)
    if not isinstance(F, GridFunction) or F.domain != "circle":
        raise TypeError("expected a SchlichtCurve or circle GridFunction of boundary values")
    grid = F.grid
    w = np.exp(1j * grid.theta)
    c = grid.coefficients(F.values)
    c[grid.nyquist] = 0
    # coefficients at roundoff level would be amplified by k^3 below
    c[np.abs(c) < chop * np.abs(c).max()] = 0
    k = grid.freqs
    powers = np.exp(1j * np.outer(grid.theta, k))
    d1 = powers @ (c * k) / w
    d2 = powers @ (c * k * (k - 1)) / w ** 2
    d3 = powers @ (c * k * (k - 1) * (k - 2)) / w ** 3
    if np.any(np.abs(d1) == 0):
        raise ValueError("vanishing derivative")
    L = _unwrapped_log(d1)
    return GridFunction(grid, L), GridFunction(grid, d3 / d1 - 1.5 * (d2 / d1) ** 2)


@dataclass
class ArcLengthDecomposition:
    gamma0: WPEmbedding
    h: QuasisymmetricMap
    speed: float
    residual: float


def arc_length_decompose(gamma: WPEmbedding) -> ArcLengthDecomposition:
    """gamma = gamma0 o h with |gamma0'| constant.

    h is the normalized arc length: h(x) = int_0^x exp(Re phi) on the line,
    and (2 pi / L) times that on a closed curve of length L, so that h stays a
    circle homeomorphism and |gamma0'| = L / 2 pi (reported as ``speed``).
    gamma0 = exp_integral(i * Im(phi) o h^{-1}).
    """
    from .operators import log_derivative

    grid = gamma.grid
    phi = log_derivative(gamma)
    speed_vals = np.exp(phi.values.real)
    if gamma.model == "circle":
        speed = float(np.mean(speed_vals))
        rel = GridFunction(grid, speed_vals / speed - 1.0)
        u = _antiderivative_zero_at_origin(grid, rel.values.real)
        h = QuasisymmetricMap(grid, grid.theta + u, speed_vals / speed, "circle")
    else:
        speed = 1.0
        emb = exp_integral(GridFunction(grid, phi.values.real, "line"))
        h = QuasisymmetricMap(grid, emb.gamma.real, speed_vals, "line")
    hinv = h.inverse("newton")
    arg = compose_operator(hinv, GridFunction(grid, phi.values.imag, gamma.model)).values.real
    if gamma.model == "circle":
        # the removed winding term i*w*theta, read through h^{-1}
        arg = arg + gamma.winding * (hinv.values - grid.theta)
    gamma0 = exp_integral(GridFunction(grid, 1j * arg, gamma.model), gamma.winding)
    offset = gamma.evaluate(np.array([0.0]))[0]
    if gamma.model == "circle":
        gamma0 = WPEmbedding(grid, speed * gamma0.gamma + offset, "circle", gamma.winding,
                             speed * gamma0.linear, 0.0, gamma0.phi)
    else:
        gamma0 = WPEmbedding(grid, gamma0.gamma + offset, "line", 0, gamma0.linear, gamma0.ramp, gamma0.phi)
    back = gamma0.evaluate(h.values)
    scale = max(np.abs(gamma.gamma).max(), 1.0)
    return ArcLengthDecomposition(gamma0, h, speed, float(np.max(np.abs(back - gamma.gamma)) / scale))


def _antiderivative_zero_at_origin(grid: CircleGrid, values: np.ndarray) -> np.ndarray:
    k = grid.freqs
    c = np.fft.fft(values)
    d = np.zeros_like(c)
    nz = (k != 0) & ~grid.nyquist
    d[nz] = c[nz] / (1j * k[nz])
    u = np.fft.ifft(d).real
    return u - trig_eval(grid, u, np.array([0.0])).real[0]
