"""Boundary and analytic seminorms.

Boundary kinds act on grid functions (circle or line):

* ``Bp``      (int int |f(x+t) - f(x)|^p dx dt / t^2)^(1/p), p > 1
* ``BpSharp`` same with the second difference f(x+2t) - 2f(x+t) + f(x)
* ``BMO``     sup of mean oscillation over a dyadic family of arcs/intervals
* ``W11``     int |f'|
* ``W21``     int |f''|
* ``BhatP``   BpSharp + BMO

On the circle t ranges over (-pi, pi] with the flat weight 1/t^2; the
``kernel="periodic"`` option uses 1/(4 sin^2(t/2)), the periodisation of 1/t^2,
under which the Cayley map carries the line B_p seminorm isometrically.

Analytic kinds act on Taylor coefficients in the disk:

* ``CalBp``      |(1-|w|^2) Phi'|^p dA/(1-|w|^2)^2
* ``CalBpSharp`` |(1-|w|^2)^2 Phi''|^p dA/(1-|w|^2)^2
* ``Ap``         |(1-|w|^2)^2 Psi|^p dA/(1-|w|^2)^2
* ``BMOA``       Carleson-box sup of (1/|I|) int_S(I) |Phi'|^2 (1-|w|^2) dA, square-rooted
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .grid import (
    TWO_PI,
    _periodic_derivative,
    CircleGrid,
    GridFunction,
    band_limit_ratio,
    line_jacobian,
    line_to_angle,
    trig_eval,
)
from .transforms import AnalyticCoefficients


class NormKind(str, enum.Enum):
    Bp = "bp"
    BpSharp = "bpsharp"
    BMO = "bmo"
    W11 = "w11"
    W21 = "w21"
    BhatP = "bhat"


class AnalyticNormKind(str, enum.Enum):
    CalBp = "calbp"
    CalBpSharp = "calbpsharp"
    BMOA = "bmoa"
    Ap = "ap"


@dataclass
class NormReport:
    kind: str
    p: float
    value: float
    n: int
    notes: list = field(default_factory=list)
    resolution: dict = field(default_factory=dict)
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "value": self.value,
            "n": self.n,
            "notes": list(self.notes),
            "resolution": dict(self.resolution),
            "converged": self.converged,
        }


def _as_kind(kind, enum_type):
    if isinstance(kind, enum_type):
        return kind
    try:
        return enum_type(str(kind).lower())
    except ValueError:
        for member in enum_type:
            if member.name.lower() == str(kind).lower():
                return member
        raise ValueError(f"unknown norm kind {kind!r}") from None


def fine_samples(grid: CircleGrid, values, factor: int = 16, derivative: int = 0):
    """Spectrally upsampled values (or theta-derivatives) on the offset grid of size factor*n.

    Returns (angles, samples).
    """
    c = grid.coefficients(values)
    k = grid.freqs
    c = np.where(grid.nyquist, 0, c) * (1j * k) ** derivative
    big = grid.n * factor
    padded = np.zeros(big, dtype=complex)
    padded[k.astype(int) % big] = c
    fine = (np.arange(big) + 0.5) * TWO_PI / big
    kk = np.fft.fftfreq(big, 1.0 / big)
    return fine, np.fft.ifft(padded * np.exp(1j * kk * np.pi / big)) * big


def _trig_series(grid: CircleGrid, c: np.ndarray, points, derivative: int = 0) -> np.ndarray:
    k = grid.freqs
    keep = (~grid.nyquist) & (c != 0)
    kk = k[keep]
    return np.exp(1j * np.outer(points, kk)) @ (c[keep] * (1j * kk) ** derivative)


def _variation(grid: CircleGrid, values: np.ndarray, slope: float = 0.0) -> float:
    """Total variation over one period of U(theta) = slope*theta + P(theta).

    ``values`` samples P (periodic, real). U' = slope + P' changes sign at the
    critical points, which are bracketed on a 16x refined grid and polished by
    Newton steps; the variation is then the sum of |U| increments between them.
    """
    c = grid.coefficients(values)
    c[grid.nyquist] = 0
    c[0] = 0.0
    fine, dp = fine_samples(grid, values, 16, 1)
    du = slope + dp.real
    sign = np.sign(du)
    idx = np.nonzero(sign != np.roll(sign, -1))[0]
    if idx.size == 0:
        return abs(TWO_PI * slope)
    step = fine[1] - fine[0]
    left, right = du[idx], du[(idx + 1) % du.size]
    roots = fine[idx] + step * left / (left - right)
    for _ in range(4):
        f1 = slope + _trig_series(grid, c, roots, 1).real
        f2 = _trig_series(grid, c, roots, 2).real
        safe = np.where(np.abs(f2) > 0, f2, 1.0)
        roots = roots - np.clip(f1 / safe, -step, step)
    u = slope * roots + _trig_series(grid, c, roots).real
    u_next = np.roll(u, -1)
    u_next[-1] = u[0] + TWO_PI * slope
    return float(np.sum(np.abs(u_next - u)))


def lp_integral(f: GridFunction, p: float = 1.0, derivative: int = 0, factor: int = 16) -> float:
    """int |f^(derivative)|^p over the circle (in theta) or the line (in x).

    Real data with p = 1 are integrated exactly between sign changes (as a
    total variation of the next-lower antiderivative). Otherwise the integrand
    is sampled on a 16x spectrally refined grid.
    """
    grid = f.grid
    a = grid.theta
    vals = f.values
    real = not np.any(vals.imag)
    if f.domain == "circle":
        if p == 1.0 and real:
            if derivative == 0:
                c = grid.coefficients(vals.real)
                return _variation(grid, _anti_periodic(grid, vals.real), c[0].real)
            lower = vals.real
            for _ in range(derivative - 1):
                lower = _periodic_derivative(grid, lower).real
            return _variation(grid, lower)
        _, fine_vals = fine_samples(grid, vals, factor, derivative)
        return float(np.sum(np.abs(fine_vals) ** p) * TWO_PI / fine_vals.size)
    stages = [vals]
    for _ in range(derivative):
        # d/dx = 2 sin^2(a/2) d/da, applied on nodes
        stages.append(_periodic_derivative(grid, stages[-1]) / line_jacobian(a))
    if p == 1.0 and real:
        if derivative == 0:
            weighted = vals.real * line_jacobian(a)
            c = grid.coefficients(weighted)
            return _variation(grid, _anti_periodic(grid, weighted), c[0].real)
        return _variation(grid, stages[-2].real)
    if p == 1.0 and derivative > 0:
        # int |F^(d)| dx = int |d/da F^(d-1)(x(a))| da, free of the jacobian
        _, up = fine_samples(grid, stages[-2], factor, 1)
        return float(np.sum(np.abs(up)) * TWO_PI / up.size)
    fine, up = fine_samples(grid, stages[-1], factor, 0)
    return float(np.sum(np.abs(up) ** p * line_jacobian(fine)) * TWO_PI / up.size)


def _anti_periodic(grid: CircleGrid, values) -> np.ndarray:
    """Periodic part of the antiderivative of ``values`` (mean removed)."""
    c = grid.coefficients(values)
    k = grid.freqs
    d = np.zeros_like(c)
    nz = (k != 0) & ~grid.nyquist
    d[nz] = c[nz] / (1j * k[nz])
    return (np.fft.ifft(d * np.exp(1j * k * np.pi / grid.n)) * grid.n).real


def _difference_norms(grid: CircleGrid, values, t, order: int, p: float, factor: int):
    """p-th powers of the circle L_p norms of the order-th difference at each shift t."""
    c = grid.coefficients(values)
    c = np.where(grid.nyquist, 0, c)
    k = grid.freqs
    big = grid.n * factor
    idx = k.astype(int) % big
    kk = np.fft.fftfreq(big, 1.0 / big)
    phase = np.exp(1j * kk * np.pi / big)
    out = np.empty(t.size)
    for i0 in range(0, t.size, 32):
        tt = t[i0:i0 + 32]
        # e^{ikt} - 1 = 2i sin(kt/2) e^{ikt/2}, no cancellation for small t
        mult = (2j * np.sin(np.outer(tt, k) / 2) * np.exp(0.5j * np.outer(tt, k))) ** order
        spec = np.zeros((tt.size, big), dtype=complex)
        spec[:, idx] = mult * c
        diff = np.fft.ifft(spec * phase, axis=1) * big
        out[i0:i0 + 32] = np.sum(np.abs(diff) ** p, axis=1) * TWO_PI / big
    return out


def _graded_nodes(count: int, grading: float, length: float):
    u, w = leggauss(count)
    u = 0.5 * (u + 1)
    w = 0.5 * w
    t = length * u ** grading
    dt = length * grading * u ** (grading - 1) * w
    return t, dt


def _circle_besov(f: GridFunction, order: int, p: float, kernel: str, t_nodes: int):
    t, dt = _graded_nodes(t_nodes, 3.0, np.pi)
    factor = 1 if p == 2 else 4
    norms = _difference_norms(f.grid, f.values, t, order, p, factor)
    weight = 1.0 / t ** 2 if kernel == "flat" else 1.0 / (4 * np.sin(t / 2) ** 2)
    # Δ_{-t} has the same L_p norm as Δ_t, so the symmetric range doubles the half-range
    total = 2.0 * np.sum(norms * weight * dt)
    return total ** (1.0 / p), {"t_nodes": t_nodes, "t_rule": "graded Gauss-Legendre t=pi*u^3",
                               "x_rule": f"trapezoid x{factor}", "kernel": kernel}


def _line_besov(f: GridFunction, order: int, p: float, t_nodes: int):
    """Direct quadrature of int_R int_R |Δ_t f(x)|^p dx dt / t^2 on the line.

    For large t the difference is a sum of bumps centred at 0, -t, -2t, while
    the Cayley nodes are dense only near 0. A Gaussian partition of unity
    splits the x-integral into one piece per bump, and each piece is
    integrated on nodes translated to its centre.
    """
    grid = f.grid
    x = grid.x
    wx = line_jacobian(grid.theta) * grid.spacing
    u, w = leggauss(t_nodes)
    u = 0.5 * (u + 1)
    w = 0.5 * w
    # t = tan(pi u^3 / 2) clusters nodes at t = 0 and reaches t = infinity
    s = np.pi * u ** 3 / 2
    t = np.tan(s)
    dt = (np.pi / 2) * 3 * u ** 2 / np.cos(s) ** 2 * w
    coef = [1.0, -1.0] if order == 1 else [1.0, -2.0, 1.0]
    total = 0.0
    for ti, dti in zip(t, dt):
        sigma = max(ti / 4, 0.25)
        centres = -ti * np.arange(order + 1)
        acc = 0.0
        for c in centres:
            xs = x + c
            logits = -((xs[:, None] - centres[None, :]) / sigma) ** 2
            logits -= logits.max(axis=1, keepdims=True)
            part = np.exp(logits)
            chi = part[:, list(centres).index(c)] / part.sum(axis=1)
            diff = np.zeros(x.size, dtype=complex)
            for m, a in enumerate(coef[::-1]):
                diff += a * trig_eval(grid, f.values, line_to_angle(xs + m * ti), tol=1e-15)
            acc += np.sum(np.abs(diff) ** p * chi * wx)
        total += acc * dti / ti ** 2
    return (2.0 * total) ** (1.0 / p), {"t_nodes": t_nodes, "t_rule": "Gauss-Legendre, t=tan(pi u^3/2)",
                                        "x_rule": "trapezoid in Cayley angle, bump-centred partition"}


def _bmo_circle(values: np.ndarray) -> float:
    n = values.size
    best = 0.0
    levels = int(np.log2(n)) - 1
    wrapped = np.concatenate([values, values])
    for k in range(levels):
        length = n >> k
        starts = 1 if length == n else n
        windows = np.lib.stride_tricks.sliding_window_view(wrapped, length)[:starts]
        for i0 in range(0, starts, max(1, 2 ** 20 // length)):
            blk = windows[i0:i0 + max(1, 2 ** 20 // length)]
            mean = blk.mean(axis=1, keepdims=True)
            best = max(best, float(np.abs(blk - mean).mean(axis=1).max()))
    return best


def _bmo_line(f: GridFunction) -> float:
    grid = f.grid
    n = grid.n
    w = line_jacobian(grid.theta) * grid.spacing
    v = f.values
    best = 0.0
    levels = int(np.log2(n)) - 1
    for k in range(levels):
        length = n >> k
        vw = np.lib.stride_tricks.sliding_window_view(v, length)
        ww = np.lib.stride_tricks.sliding_window_view(w, length)
        step = max(1, 2 ** 20 // length)
        for i0 in range(0, vw.shape[0], step):
            vb, wb = vw[i0:i0 + step], ww[i0:i0 + step]
            total = wb.sum(axis=1, keepdims=True)
            mean = (vb * wb).sum(axis=1, keepdims=True) / total
            osc = (np.abs(vb - mean) * wb).sum(axis=1) / total[:, 0]
            best = max(best, float(osc.max()))
    return best


def boundary_seminorm(f: GridFunction, kind, p: float = 2.0, kernel: str = "flat",
                      t_nodes: int = 96) -> NormReport:
    kind = _as_kind(kind, NormKind)
    p = float(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    if kind is NormKind.Bp and p <= 1:
        raise ValueError("Bp requires p > 1: for p = 1 the space is restricted to constant functions")
    if kernel not in ("flat", "periodic"):
        raise ValueError(f"unknown kernel {kernel!r}")
    values = f.values
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite samples")
    notes = []
    ratio = band_limit_ratio(values)
    converged = ratio <= 1e-10
    if not converged:
        notes.append(f"top-quarter spectral energy {ratio:.2e}")
    report = NormReport(kind.name, p, 0.0, f.n, notes, {}, converged)
    if np.all(values == values[0]):
        report.notes.append("constant input")
        return report
    if kind is NormKind.BhatP:
        sharp = boundary_seminorm(f, NormKind.BpSharp, p, kernel, t_nodes)
        bmo = boundary_seminorm(f, NormKind.BMO, p)
        report.value = sharp.value + bmo.value
        report.resolution = {"bpsharp": sharp.value, "bmo": bmo.value, **sharp.resolution}
        return report
    if kind is NormKind.BMO:
        report.value = _bmo_circle(values) if f.domain == "circle" else _bmo_line(f)
        report.resolution = {"family": "dyadic, grid-aligned", "levels": int(np.log2(f.n)) - 1}
        return report
    if kind in (NormKind.W11, NormKind.W21):
        order = 1 if kind is NormKind.W11 else 2
        if f.domain == "line":
            tail = abs(complex(trig_eval(f.grid, values, np.array([0.0]))[0]))
            report.notes.append(f"value at infinity {tail:.2e}")
        report.value = lp_integral(f, 1.0, order)
        report.resolution = {"rule": "spectral derivative, trapezoid x16"}
        return report
    order = 1 if kind is NormKind.Bp else 2
    if f.domain == "circle":
        value, res = _circle_besov(f, order, p, kernel, t_nodes)
    else:
        value, res = _line_besov(f, order, p, t_nodes)
    report.value = float(value)
    report.resolution = res
    return report


def second_modulus(f: GridFunction, s: float, p: float = 1.0) -> float:
    """sup over the discrete t-grid of ||Δ_t^2 f||_p for 0 < t <= s."""
    grid = f.grid
    v = f.values
    if f.domain == "circle":
        if not 0 < s <= np.pi + 1e-12:
            raise ValueError("s must lie in (0, pi] on the circle")
        steps = int(np.floor(s / grid.spacing + 1e-9))
        best = 0.0
        for k in range(1, steps + 1):
            d = np.roll(v, -2 * k) - 2 * np.roll(v, -k) + v
            best = max(best, float(np.sum(np.abs(d) ** p) * grid.spacing) ** (1 / p))
        return best
    x = grid.x
    span = x[-1] - x[0]
    if not 0 < s <= span / 4:
        raise ValueError("s must lie in (0, span/4] on the line")
    wx = line_jacobian(grid.theta) * grid.spacing
    best = 0.0
    for t in np.linspace(s / 64, s, 64):
        f1 = trig_eval(grid, v, line_to_angle(x + t), tol=1e-15)
        f2 = trig_eval(grid, v, line_to_angle(x + 2 * t), tol=1e-15)
        d = f2 - 2 * f1 + v
        best = max(best, float(np.sum(np.abs(d) ** p * wx)) ** (1 / p))
    return best


def _polar_values(c: AnalyticCoefficients, r: np.ndarray, n_theta: int, derivative: int):
    """Phi^(derivative)(r e^{i theta_j}) on a uniform angular grid, one row per radius."""
    coeffs = c.interior().coeffs
    for _ in range(derivative):
        coeffs = coeffs[1:] * np.arange(1, coeffs.size)
    if coeffs.size == 0:
        return np.zeros((r.size, n_theta), dtype=complex)
    if coeffs.size > n_theta // 2:
        raise ValueError("angular grid too coarse for the coefficient degree")
    powers = r[:, None] ** np.arange(coeffs.size)[None, :]
    spec = np.zeros((r.size, n_theta), dtype=complex)
    spec[:, :coeffs.size] = powers * coeffs
    return np.fft.ifft(spec, axis=1) * n_theta


def analytic_seminorm(c: AnalyticCoefficients, kind, p: float = 2.0, n: int = 256,
                      radial_nodes: int = 64) -> NormReport:
    """Disk-model seminorms by polar tensor quadrature on r in [0, 1 - 1/n]."""
    kind = _as_kind(kind, AnalyticNormKind)
    p = float(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    report = NormReport(kind.name, p, 0.0, n, [], {})
    coeffs = c.interior().coeffs
    n_theta = max(n, 4 * coeffs.size)
    rmax = 1.0 - 1.0 / n
    report.resolution = {"radial_nodes": radial_nodes, "angular_nodes": n_theta, "r_max": rmax}
    if kind is AnalyticNormKind.CalBp and p <= 1:
        report.notes.append("p = 1: value grows with n")
    if kind is AnalyticNormKind.BMOA:
        report.value = _bmoa(c, n_theta, rmax, radial_nodes)
        return report
    u, w = leggauss(radial_nodes)
    r = 0.5 * rmax * (u + 1)
    wr = 0.5 * rmax * w
    derivative = {AnalyticNormKind.CalBp: 1, AnalyticNormKind.CalBpSharp: 2, AnalyticNormKind.Ap: 0}[kind]
    power = 1 if kind is AnalyticNormKind.CalBp else 2
    vals = _polar_values(c, r, n_theta, derivative)
    rho = 1 - r ** 2
    dens = np.abs(rho[:, None] ** power * vals) ** p / rho[:, None] ** 2
    total = np.sum(dens.mean(axis=1) * TWO_PI * r * wr)
    report.value = float(total ** (1 / p))
    return report


def _bmoa(c: AnalyticCoefficients, n_theta: int, rmax: float, radial_nodes: int) -> float:
    u, w = leggauss(radial_nodes)
    best = 0.0
    levels = int(np.log2(n_theta)) - 1
    d_theta = TWO_PI / n_theta
    for k in range(levels):
        length = n_theta >> k
        arc = length * d_theta
        r0 = max(0.0, 1.0 - arc / TWO_PI)
        if r0 >= rmax:
            break
        r = r0 + 0.5 * (rmax - r0) * (u + 1)
        wr = 0.5 * (rmax - r0) * w
        vals = _polar_values(c, r, n_theta, 1)
        dens = np.abs(vals) ** 2 * (1 - r[:, None] ** 2) * (r * wr)[:, None]
        column = dens.sum(axis=0) * d_theta
        wrapped = np.concatenate([column, column])
        csum = np.concatenate([[0.0], np.cumsum(wrapped)])
        starts = 1 if length == n_theta else n_theta
        box = csum[length:length + starts] - csum[:starts]
        best = max(best, float(box.max() / arc))
    return float(np.sqrt(best))
