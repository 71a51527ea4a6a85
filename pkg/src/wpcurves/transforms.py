"""Hilbert transform, Riesz projections and boundary extensions.

Conventions (all transforms act on the mean-zero quotient):

=============  =======================================  ==============================
object          circle model                            line model
=============  =======================================  ==============================
H               multiplier -i sgn(k), k=0 -> 0           (1/pi) PV int f(t) K(x,t) dt,
                                                        K = 1/(x-t) + t/(1+t^2)
P^+ / P^-       keep k > 0 / k < 0                       (f - mean_a f +/- i H f)/2
szego           (1/2 pi i) int (f - mean)/(z - zeta) dz  (1/pi) int f(t)/(z - t) dt
                interior: P^+ f(zeta); exterior: P^- f
poisson         (1 - |zeta|^2)/|z - zeta|^2 kernel       y/((x - t)^2 + y^2) kernel
=============  =======================================  ==============================

``mean_a`` is the average over the Cayley angle, i.e. the constant Fourier mode
of the pushed-forward function. With the regularized kernel, dt K(x,t) equals
cot((a - s)/2) ds / 2 in Cayley angles, so the line transform is the circle
transform read through the Cayley map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    TWO_PI,
    CircleGrid,
    GridFunction,
    line_jacobian,
    periodic_spline,
    trig_eval,
)


@dataclass(frozen=True)
class AnalyticCoefficients:
    """Taylor (plus) or Laurent-at-infinity (minus) coefficients a_0..a_M.

    plus:  Phi(w) = sum a_k w^k,  |w| < 1
    minus: Phi(w) = sum a_k w^-k, |w| > 1
    """

    side: str
    coeffs: np.ndarray
    model: str = "disk"

    def __post_init__(self):
        if self.side not in ("plus", "minus"):
            raise ValueError(f"side must be plus or minus, got {self.side!r}")
        if self.model not in ("disk", "halfplane-via-cayley"):
            raise ValueError(f"unknown model {self.model!r}")
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def interior(self) -> "AnalyticCoefficients":
        """Plus-side copy; minus-side data are reflected through w -> 1/w."""
        return AnalyticCoefficients("plus", self.coeffs, self.model)

    def evaluate(self, w, derivative: int = 0):
        w = np.asarray(w, dtype=complex)
        if self.side == "minus":
            if derivative:
                raise NotImplementedError("derivatives are taken on the reflected function")
            w = 1.0 / w
        c = self.coeffs
        for _ in range(derivative):
            c = c[1:] * np.arange(1, c.size)
        if c.size == 0:
            return np.zeros_like(w)
        return np.polynomial.polynomial.polyval(w, c)

    def trace(self, grid: CircleGrid) -> GridFunction:
        w = np.exp(1j * grid.theta)
        return GridFunction(grid, self.evaluate(w), "circle")

    @classmethod
    def from_trace(cls, f: GridFunction, side: str, m: int | None = None) -> "AnalyticCoefficients":
        c = f.grid.coefficients(f.values)
        m = f.n // 2 - 1 if m is None else m
        k = np.arange(m + 1)
        idx = k if side == "plus" else (-k) % f.n
        return cls(side, c[idx])


def hilbert_multiplier(k):
    """Fourier symbol of the circle Hilbert transform."""
    return -1j * np.sign(k)


def hilbert_circle(f: GridFunction) -> GridFunction:
    if f.domain != "circle":
        raise ValueError("hilbert_circle expects a circle function")
    grid = f.grid
    mult = np.asarray(hilbert_multiplier(grid.freqs), dtype=complex)
    mult[grid.nyquist] = 0
    return f.with_values(np.fft.ifft(mult * np.fft.fft(f.values)))


def _cot_kernel(grid: CircleGrid) -> np.ndarray:
    """cot(m*h/2) for m = 0..n-1 with the m = 0 entry set to zero."""
    m = np.arange(grid.n)
    kern = np.zeros(grid.n)
    kern[1:] = 1.0 / np.tan(m[1:] * grid.spacing / 2)
    return kern


def _spline_derivative(grid: CircleGrid, values) -> np.ndarray:
    re = periodic_spline(grid.theta, values.real)(grid.theta, 1)
    im = periodic_spline(grid.theta, values.imag)(grid.theta, 1)
    return re + 1j * im


def decay_at_infinity(f: GridFunction) -> complex:
    """Interpolated value of a line function at the point at infinity."""
    return complex(trig_eval(f.grid, f.values, np.array([0.0]))[0])


def hilbert_line(f: GridFunction, regularized: bool = True, decay_tol: float = 1e-8) -> GridFunction:
    """PV quadrature of the line Hilbert transform.

    In Cayley angles the regularized transform reads
    (1/2pi) PV int (f(s) - f(a)) cot((a - s)/2) ds, a smooth periodic
    integrand whose value at s = a is -2 f'(a). The trapezoid rule on the
    half-offset nodes is applied with that diagonal term; f' comes from a
    periodic cubic spline. The off-diagonal sum is a circular convolution.
    """
    if f.domain != "line":
        raise ValueError("hilbert_line expects a line function")
    grid = f.grid
    v = f.values
    kern = _cot_kernel(grid)
    conv = np.fft.ifft(np.fft.fft(kern) * np.fft.fft(v))
    subtracted = conv - v * kern.sum()
    diag = -2.0 * _spline_derivative(grid, v)
    out = (grid.spacing / TWO_PI) * (subtracted + diag)
    if not regularized:
        scale = max(np.abs(v).max(), 1e-300)
        if abs(decay_at_infinity(f)) > decay_tol * scale:
            raise ValueError("insufficient decay at infinity for the unregularized transform")
        # (1/pi) int f(t) t/(1+t^2) dt = -(1/2pi) int f cot(s/2) ds
        shift = -(grid.spacing / TWO_PI) * np.sum(v / np.tan(grid.theta / 2))
        out = out - shift
    return f.with_values(out, regularized=regularized)


def riesz_project(f: GridFunction, sign: str) -> GridFunction:
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be plus or minus, got {sign!r}")
    if f.domain == "circle":
        grid = f.grid
        k = grid.freqs
        mask = (k > 0) if sign == "plus" else (k < 0)
        weight = mask.astype(float)
        weight[grid.nyquist] = 0.5
        return f.with_values(np.fft.ifft(weight * np.fft.fft(f.values)))
    s = 1.0 if sign == "plus" else -1.0
    centred = f.values - np.mean(f.values)
    hf = hilbert_line(f).values
    return f.with_values(0.5 * (centred + s * 1j * hf))


def harmonic_extend(f: GridFunction, point: complex, mode: str = "szego") -> complex:
    """Szegő (Cauchy-type) or Poisson extension of boundary data to ``point``."""
    if mode not in ("szego", "poisson"):
        raise ValueError(f"mode must be szego or poisson, got {mode!r}")
    grid = f.grid
    z0 = complex(point)
    v = f.values
    if f.domain == "circle":
        r = abs(z0)
        if abs(1.0 - r) < 2 * grid.spacing:
            raise ValueError("point lies too close to the boundary circle")
        z = np.exp(1j * grid.theta)
        if mode == "szego":
            val = np.mean((v - np.mean(v)) * z / (z - z0))
            return complex(val if r < 1 else -val)
        kern = np.abs(1 - r * r) / np.abs(z - z0) ** 2
        return complex(np.mean(v * kern))
    x, y = z0.real, z0.imag
    t = grid.x
    local = np.interp(x, t, np.gradient(t))
    if abs(y) < 2 * local:
        raise ValueError("point lies too close to the real line")
    w = line_jacobian(grid.theta) * grid.spacing
    if mode == "szego":
        return complex(np.sum(v * w / (z0 - t)) / np.pi)
    kern = abs(y) / ((x - t) ** 2 + y * y)
    return complex(np.sum(v * kern * w) / np.pi)
