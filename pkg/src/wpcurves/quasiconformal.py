"""Beurling-Ahlfors extension, complex dilatation and hyperbolic norms of Beltrami fields.

Fields live on rectilinear grids over a box in the upper half-plane. The
y-direction is geometric (y_k = y_max * rho^k), which resolves the y^-2 weight
with a bounded relative error per cell; cell weights are the exact integrals
of the hyperbolic density over each cell.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .io import complex_pairs, from_pairs
from .operators import QuasisymmetricMap


class BoundaryMassWarning(RuntimeWarning):
    pass


def _edges_from_centres(c: np.ndarray, geometric: bool) -> np.ndarray:
    if c.size == 1:
        return np.array([c[0] / 2, c[0] * 2]) if geometric else np.array([c[0] - 0.5, c[0] + 0.5])
    if geometric:
        inner = np.sqrt(c[1:] * c[:-1])
        return np.concatenate([[c[0] ** 2 / inner[0]], inner, [c[-1] ** 2 / inner[-1]]])
    inner = 0.5 * (c[1:] + c[:-1])
    return np.concatenate([[2 * c[0] - inner[0]], inner, [2 * c[-1] - inner[-1]]])


def geometric_heights(y_min: float, y_max: float, per_octave: int = 8) -> np.ndarray:
    """Edges y_max * 2^(-k/per_octave) down to the first one at or below y_min."""
    if not (0 < y_min < y_max):
        raise ValueError("need 0 < y_min < y_max")
    k = int(np.ceil(np.log2(y_max / y_min) * per_octave))
    return y_max * 2.0 ** (-np.arange(k, -1, -1) / per_octave)


@dataclass(frozen=True)
class BeltramiField:
    """Samples mu[iy, ix] at points (x[ix], y[iy]), with cell edges around them."""

    x: np.ndarray
    y: np.ndarray
    mu: np.ndarray
    x_edges: Optional[np.ndarray] = None
    y_edges: Optional[np.ndarray] = None
    func: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        mu = np.asarray(self.mu, dtype=complex)
        if mu.shape != (y.size, x.size):
            raise ValueError(f"mu has shape {mu.shape}, expected {(y.size, x.size)}")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0) or y[0] <= 0:
            raise ValueError("grid coordinates must be increasing with y > 0")
        if not np.all(np.isfinite(mu)):
            raise ValueError("mu must be finite")
        if mu.size and np.abs(mu).max() >= 1:
            raise ValueError("sup|mu| must be < 1")
        xe = _edges_from_centres(x, False) if self.x_edges is None else np.asarray(self.x_edges, float)
        ye = _edges_from_centres(y, True) if self.y_edges is None else np.asarray(self.y_edges, float)
        if xe.size != x.size + 1 or ye.size != y.size + 1:
            raise ValueError("edges must have one more entry than centres")
        for name, val in (("x", x), ("y", y), ("mu", mu), ("x_edges", xe), ("y_edges", ye)):
            object.__setattr__(self, name, val)

    @classmethod
    def from_function(cls, func: Callable, x_edges, y_edges) -> "BeltramiField":
        """Sample ``func(z)`` at cell centres (geometric centre in y)."""
        xe = np.asarray(x_edges, dtype=float)
        ye = np.asarray(y_edges, dtype=float)
        xc = 0.5 * (xe[1:] + xe[:-1])
        yc = np.sqrt(ye[1:] * ye[:-1])
        z = xc[None, :] + 1j * yc[:, None]
        mu = np.broadcast_to(np.asarray(func(z), dtype=complex), z.shape)
        return cls(xc, yc, mu, xe, ye, func)

    @property
    def sup(self) -> float:
        return float(np.abs(self.mu).max(initial=0.0))

    def evaluate(self, z) -> np.ndarray:
        """mu at arbitrary points: the generating function if known, else bilinear (0 outside)."""
        z = np.asarray(z, dtype=complex)
        if self.func is not None:
            return np.broadcast_to(np.asarray(self.func(z), dtype=complex), z.shape)
        pts = np.stack([z.imag.ravel(), z.real.ravel()], axis=-1)
        opts = dict(bounds_error=False, fill_value=0.0)
        re = RegularGridInterpolator((self.y, self.x), self.mu.real, **opts)(pts)
        im = RegularGridInterpolator((self.y, self.x), self.mu.imag, **opts)(pts)
        return (re + 1j * im).reshape(z.shape)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "mu": complex_pairs(self.mu)}

    @classmethod
    def from_dict(cls, data: dict) -> "BeltramiField":
        try:
            x = np.asarray(data["x"], dtype=float)
            y = np.asarray(data["y"], dtype=float)
            mu = from_pairs(data["mu"]).reshape(y.size, x.size)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed Beltrami field: {exc}") from exc
        return cls(x, y, mu)


@dataclass(frozen=True)
class PlanarMapGrid:
    """Values H[iy, ix] of a planar map at (x[ix], y[iy]); row y=0 is the boundary map."""

    x: np.ndarray
    y: np.ndarray
    H: np.ndarray
    boundary: Optional[np.ndarray] = None

    def jacobian(self) -> np.ndarray:
        hz, hzb = _wirtinger(self)
        return np.abs(hz) ** 2 - np.abs(hzb) ** 2


def _gl_unit(m: int):
    t, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (t + 1), 0.5 * w


def _reliable_range(h: QuasisymmetricMap) -> float:
    # beyond this the Cayley nodes are too sparse to resolve h - x
    return float(abs(h.grid.x[h.grid.n // 32]))


def beurling_ahlfors_extend(h: QuasisymmetricMap, box, nx: int = 81, per_octave: int = 8,
                            t_nodes: int = 32) -> PlanarMapGrid:
    """H(x+iy) = 1/2 int_0^1 [h(x+ty)+h(x-ty)] dt + i int_0^1 [h(x+ty)-h(x-ty)] dt.

    ``box = (x_min, x_max, y_min, y_max)``; x is uniform with ``nx`` points and
    y geometric between y_min and y_max. The t-integrals use Gauss-Legendre.
    """
    if h.model != "line":
        raise ValueError("Beurling-Ahlfors extension needs a line map")
    x_min, x_max, y_min, y_max = map(float, box)
    if not (x_min < x_max and 0 < y_min < y_max):
        raise ValueError("box must satisfy x_min < x_max and 0 < y_min < y_max")
    if h.func is None and max(abs(x_min), abs(x_max)) + y_max > _reliable_range(h):
        raise ValueError("box exceeds the range where h is resolved by its grid")
    x = np.linspace(x_min, x_max, nx)
    y = geometric_heights(y_min, y_max, per_octave)
    t, w = _gl_unit(t_nodes)
    X = x[None, :, None]
    TY = y[:, None, None] * t[None, None, :]
    plus = h.evaluate((X + TY).ravel()).reshape(y.size, nx, t.size)
    minus = h.evaluate((X - TY).ravel()).reshape(y.size, nx, t.size)
    H = 0.5 * ((plus + minus) @ w) + 1j * ((plus - minus) @ w)
    return PlanarMapGrid(x, y, H, h.evaluate(x))


def _wirtinger(H: PlanarMapGrid):
    Hy, Hx = np.gradient(H.H, H.y, H.x, edge_order=2)
    return 0.5 * (Hx - 1j * Hy), 0.5 * (Hx + 1j * Hy)


def complex_dilatation(H: PlanarMapGrid, degenerate_tol: float = 1e-12) -> BeltramiField:
    """mu = H_zbar / H_z from central differences, on interior nodes only."""
    if H.x.size < 3 or H.y.size < 3:
        raise ValueError("need at least three nodes in each direction")
    hz, hzb = _wirtinger(H)
    hz, hzb = hz[1:-1, 1:-1], hzb[1:-1, 1:-1]
    scale = max(np.abs(hz).max(), 1e-300)
    if np.any(np.abs(hz) < degenerate_tol * scale):
        raise ValueError("H_z vanishes on the grid; the map is degenerate")
    return BeltramiField(H.x[1:-1], H.y[1:-1], hzb / hz)


class HyperbolicNorm(NamedTuple):
    value: float
    sup: float
    boundary_fraction: float


def hyperbolic_lp_norm(mu: BeltramiField, p: float = 2.0, boundary_tol: float = 1e-3) -> HyperbolicNorm:
    """(int |mu|^p y^-2 dx dy)^(1/p) with exact per-cell hyperbolic weights.

    Warns (BoundaryMassWarning) when the cells touching the box boundary carry
    more than ``boundary_tol`` of the total.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    dx = np.diff(mu.x_edges)
    ye = mu.y_edges
    wy = 1.0 / ye[:-1] - 1.0 / ye[1:]
    mass = np.abs(mu.mu) ** p * wy[:, None] * dx[None, :]
    total = float(mass.sum())
    if total == 0.0:
        return HyperbolicNorm(0.0, mu.sup, 0.0)
    rim = np.zeros(mass.shape, dtype=bool)
    rim[0, :] = rim[-1, :] = rim[:, 0] = rim[:, -1] = True
    frac = float(mass[rim].sum() / total)
    if frac > boundary_tol:
        warnings.warn(f"{frac:.2e} of the mass sits on the box boundary; enlarge the box",
                      BoundaryMassWarning, stacklevel=2)
    return HyperbolicNorm(total ** (1.0 / p), mu.sup, frac)


def twb_local_integral(mu: BeltramiField, x0: float, r: float, symmetric: bool = True,
                       per_octave: int = 16, n_phi: int = 128) -> float:
    """int over the half-disk |z - x0| < r of |mu(z)| / |z - x0|^2 dx dy.

    Polar quadrature: midpoint rule in log(rho) on octave-aligned cells and in
    the angle. Radii below the lowest sampled height are dropped. With
    ``symmetric`` the reflected lower half-disk (|mu| mirrored) is added.
    """
    floor = float(mu.y_edges[0])
    cell = float(max(np.diff(mu.x_edges).max(), floor))
    if r <= 2 * cell:
        raise ValueError("radius too small for the grid resolution")
    octaves = int(np.ceil(np.log2(r / floor)))
    k = np.arange(octaves * per_octave)
    du = np.log(2.0) / per_octave
    rho = r * np.exp(-(k + 0.5) * du)
    phi = (np.arange(n_phi) + 0.5) * np.pi / n_phi
    z = x0 + rho[:, None] * np.exp(1j * phi[None, :])
    vals = np.abs(mu.evaluate(z))
    # |mu| / rho^2 * rho drho dphi = |mu| dlog(rho) dphi
    total = float(vals.sum() * du * np.pi / n_phi)
    return 2.0 * total if symmetric else total
