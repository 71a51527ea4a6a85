"""Cauchy transforms and projections on closed curves, in the parameter domain.

A :class:`CurveConfiguration` carries a closed curve gamma on the circle grid
together with homeomorphisms h_plus, h_minus and Riemann maps F_plus (inside)
and F_minus (outside) with gamma = F_pm(exp(i h_pm)).

Conventions:

==================  ======================================================
object              definition
==================  ======================================================
Cauchy integral     C psi(zeta) = (1/2 pi i) int_Gamma psi(z)/(z - zeta) dz
P^+ psi (inside)    C psi(zeta), zeta inside; boundary value psi/2 + PV
P^- psi (outside)   -C psi(zeta), zeta outside; boundary value psi/2 - PV
H_Gamma psi         (1/pi) PV int_Gamma psi(z)/(xi - z) dz = -i(P^+ - P^-)
Plemelj             P^pm psi = (psi +/- i H_Gamma psi)/2
standardized        H_Gamma read on the parameter grid, minus its mean
==================  ======================================================

With gamma the identity of the circle, H_Gamma is the Fourier multiplier
-i sgn(k) and P^+ keeps the positive frequencies. The PV quadrature is the
trapezoid rule applied to (psi(z) - psi(xi))/(xi - z) dz, whose diagonal
limit is -psi'(t), plus the exact local term -i psi(xi).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import CircleGrid, GridFunction, _periodic_derivative
from .io import complex_pairs
from .operators import QuasisymmetricMap, compose_operator, exp_integral
from .transforms import hilbert_circle
from .welding import CurveSamples, conformal_weld, curve_from_schlicht, theodorsen


class CurveGeometryError(ValueError):
    pass


@dataclass
class CurveConfiguration:
    grid: CircleGrid
    gamma: np.ndarray
    dgamma: np.ndarray
    h_plus: QuasisymmetricMap
    h_minus: QuasisymmetricMap
    F_plus: Callable
    F_minus: Callable
    kind: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=complex)
        self.dgamma = np.asarray(self.dgamma, dtype=complex)
        cert = self.certificate()
        if cert < 1e-3:
            raise CurveGeometryError(f"curve nearly self-intersects (certificate {cert:.3g})")
        if _polygon_crossings(self.gamma):
            raise CurveGeometryError("the sampled curve crosses itself")

    def certificate(self) -> float:
        """Smallest chord/arc quotient |gamma_i - gamma_j| / |e^{i t_i} - e^{i t_j}|, relative to max|gamma'|."""
        w = np.exp(1j * self.grid.theta)
        num = np.abs(self.gamma[:, None] - self.gamma[None, :])
        den = np.abs(w[:, None] - w[None, :])
        np.fill_diagonal(den, 1.0)
        q = num / den
        np.fill_diagonal(q, np.inf)
        return float(q.min() / np.abs(self.dgamma).max())

    def consistency(self) -> dict:
        out = {}
        for side, h, F in (("plus", self.h_plus, self.F_plus), ("minus", self.h_minus, self.F_minus)):
            out[side] = float(np.max(np.abs(F(np.exp(1j * h.values)) - self.gamma)))
        return out

    @cached_property
    def kernel(self) -> np.ndarray:
        """(dt/pi) gamma'_j / (gamma_i - gamma_j), zero on the diagonal."""
        diff = self.gamma[:, None] - self.gamma[None, :]
        np.fill_diagonal(diff, 1.0)
        K = (self.grid.spacing / np.pi) * self.dgamma[None, :] / diff
        np.fill_diagonal(K, 0.0)
        return K


def _polygon_crossings(z: np.ndarray) -> int:
    """Number of properly crossing pairs of non-adjacent edges of the closed polygon z."""
    a, b = z, np.roll(z, -1)

    def orient(p, q, r):
        return np.sign(((q - p).conj() * (r - p)).imag)

    A, B = a[:, None], b[:, None]
    C, D = a[None, :], b[None, :]
    cross = (orient(A, B, C) * orient(A, B, D) < 0) & (orient(C, D, A) * orient(C, D, B) < 0)
    return int(np.triu(cross, 2).sum())


def _circle_map(w):
    return np.asarray(w, dtype=complex)


def identity_configuration(grid: CircleGrid) -> CurveConfiguration:
    ident = QuasisymmetricMap.identity(grid)
    w = np.exp(1j * grid.theta)
    return CurveConfiguration(grid, w, 1j * w, ident, ident, _circle_map, _circle_map, "identity")


def symmetric_configuration(h: QuasisymmetricMap) -> CurveConfiguration:
    """gamma = exp(i h): the unit circle traversed through a real homeomorphism."""
    if h.model != "circle":
        raise ValueError("symmetric configurations use circle maps")
    g = np.exp(1j * h.values)
    return CurveConfiguration(h.grid, g, 1j * h.deriv * g, h, h, _circle_map, _circle_map, "symmetric")


def welded_configuration(c, grid: CircleGrid, reparam: Optional[QuasisymmetricMap] = None) -> CurveConfiguration:
    """gamma = f1 o k for the schlicht curve F1(w) = w + c2 w^2 + ... (k = identity by default).

    h_plus = k and h_minus = h o k, with h the welding homeomorphism.
    """
    curve, samples = curve_from_schlicht(c, grid)
    weld = conformal_weld(samples)
    k = reparam if reparam is not None else QuasisymmetricMap.identity(grid)
    if reparam is None:
        gamma, dgamma = samples.gamma, samples.tangent
        h_minus = weld.h
    else:
        gamma = samples.func(k.values)
        dgamma = samples.dfunc(k.values) * k.deriv
        h_minus = weld.h.compose(k)
    F_plus = lambda w: curve.evaluate(w)
    cfg = CurveConfiguration(grid, gamma, dgamma, k, h_minus, F_plus, weld.correspondence.evaluate, "welded",
                             {"coefficients": curve.coeffs, "welding_residual": weld.residual})
    return cfg


def curve_cauchy_transform(cfg: CurveConfiguration, psi: GridFunction) -> GridFunction:
    """H_Gamma psi on the parameter grid by subtracted-singularity trapezoid quadrature."""
    if psi.grid != cfg.grid:
        raise ValueError("function and configuration live on different grids")
    v = psi.values
    K = cfg.kernel
    out = K @ v - K.sum(axis=1) * v
    out -= (cfg.grid.spacing / np.pi) * _periodic_derivative(cfg.grid, v)
    out -= 1j * v
    return psi.with_values(out)


@dataclass(frozen=True)
class CauchyValue:
    value: complex
    side: str
    winding: float


def curve_cauchy_integral(cfg: CurveConfiguration, psi: GridFunction, zeta: complex) -> CauchyValue:
    """P^+ psi(zeta) for zeta inside, P^- psi(zeta) = -C psi(zeta) for zeta outside."""
    zeta = complex(zeta)
    dist = np.abs(cfg.gamma - zeta)
    j = int(np.argmin(dist))
    if dist[j] <= 2 * cfg.grid.spacing * abs(cfg.dgamma[j]):
        raise ValueError("point lies too close to the curve")
    weights = cfg.grid.spacing * cfg.dgamma / (cfg.gamma - zeta) / (2j * np.pi)
    winding = float(np.sum(weights).real)
    value = complex(np.sum(psi.values * weights))
    if abs(winding - round(winding)) > 1e-6:
        raise ValueError("winding number is not an integer; refine the grid")
    if round(winding) == 1:
        return CauchyValue(value, "plus", winding)
    return CauchyValue(-value, "minus", winding)


def standardized_cauchy(cfg: CurveConfiguration, phi: GridFunction) -> GridFunction:
    out = curve_cauchy_transform(cfg, phi).values
    return phi.with_values(out - np.mean(out))


def plemelj_projections(cfg: CurveConfiguration, phi: GridFunction) -> tuple[GridFunction, GridFunction]:
    """(psi +/- i H_Gamma psi)/2, mean removed."""
    v = phi.values - np.mean(phi.values)
    hv = curve_cauchy_transform(cfg, phi).values
    plus = 0.5 * (v + 1j * hv)
    minus = 0.5 * (v - 1j * hv)
    return phi.with_values(plus - plus.mean()), phi.with_values(minus - minus.mean())


@dataclass
class ProjectionPair:
    phi_plus: GridFunction
    phi_minus: GridFunction
    constant: complex
    coeffs_plus: np.ndarray
    coeffs_minus: np.ndarray
    residual: float
    condition: float
    rank: int

    def diagnostics(self) -> dict:
        return {"residual": self.residual, "condition": self.condition, "rank": self.rank}

    def evaluate_plus(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        k = np.arange(1, self.coeffs_plus.size + 1)
        return np.sum(self.coeffs_plus * w[..., None] ** k, axis=-1)

    def evaluate_minus(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        k = np.arange(1, self.coeffs_minus.size + 1)
        return np.sum(self.coeffs_minus * w[..., None] ** (-k), axis=-1)


def _direct_sum_basis(cfg: CurveConfiguration, m: int):
    k = np.arange(1, m + 1)
    plus = np.exp(1j * np.outer(cfg.h_plus.values, k))
    minus = np.exp(-1j * np.outer(cfg.h_minus.values, k))
    return plus, minus


def direct_sum_solve(cfg: CurveConfiguration, phi: GridFunction, m: int = 64,
                     ridge: float = 1e-12, cond_limit: float = 1e12) -> ProjectionPair:
    """Least squares phi ~ a0 + sum a_k e^{ik h+} + sum b_k e^{-ik h-}.

    Solved by SVD with Tikhonov weight ``ridge`` * sigma_max^2. The
    conditioning is reported; a solution is always returned.
    """
    n = cfg.grid.n
    if m > n // 4:
        raise ValueError(f"truncation m={m} exceeds n/4={n // 4}")
    plus, minus = _direct_sum_basis(cfg, m)
    A = np.hstack([np.ones((n, 1)), plus, minus])
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    lam = ridge * s[0] ** 2
    filt = s / (s ** 2 + lam)
    x = Vh.conj().T @ (filt * (U.conj().T @ phi.values))
    a0, a, b = x[0], x[1:m + 1], x[m + 1:]
    fit = A @ x
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    rank = int(np.sum(s > s[0] * 1e-14))
    return ProjectionPair(phi.with_values(plus @ a), phi.with_values(minus @ b), complex(a0), a, b,
                          float(np.max(np.abs(fit - phi.values))), cond, rank)


def _mod_constants(v: np.ndarray) -> np.ndarray:
    return v - np.mean(v)


def probe_points(cfg: CurveConfiguration, count: int = 4):
    """Interior points F+(0.5 w_j) and exterior points F-(2 w_j), w_j = exp(i pi (2j+1)/count)."""
    w = np.exp(1j * np.pi * (2 * np.arange(count) + 1) / count)
    return 0.5 * w, cfg.F_plus(0.5 * w), 2.0 * w, cfg.F_minus(2.0 * w)


def theorem_cauchy_crosscheck(cfg: CurveConfiguration, phi: GridFunction, m: int = 64) -> dict:
    """Plemelj projections against the direct-sum solve, on and off the curve."""
    pp, pm = plemelj_projections(cfg, phi)
    ds = direct_sum_solve(cfg, phi, m)
    dp = _mod_constants(ds.phi_plus.values) - pp.values
    dm = _mod_constants(ds.phi_minus.values) - pm.values
    sup = float(max(np.abs(dp).max(), np.abs(dm).max()))
    l2 = float(np.sqrt(np.mean(np.abs(dp) ** 2 + np.abs(dm) ** 2)))
    w_in, z_in, w_out, z_out = probe_points(cfg)
    rows = []
    for w, z in zip(w_in, z_in):
        got = curve_cauchy_integral(cfg, phi, z)
        want = ds.constant + ds.evaluate_plus(w)
        rows.append({"zeta": z, "side": got.side, "cauchy": got.value, "analytic": want,
                     "error": abs(got.value - want)})
    for w, z in zip(w_out, z_out):
        got = curve_cauchy_integral(cfg, phi, z)
        want = ds.evaluate_minus(w)
        rows.append({"zeta": z, "side": got.side, "cauchy": got.value, "analytic": complex(want),
                     "error": abs(got.value - want)})
    sides_ok = all(r["side"] == s for r, s in zip(rows, ["plus"] * len(z_in) + ["minus"] * len(z_out)))
    return {"n": cfg.grid.n, "m": m, "sup_residual": sup, "l2_residual": l2,
            "offcurve_max_error": float(max(r["error"] for r in rows)), "offcurve": rows,
            "sides_ok": sides_ok, "solver": ds.diagnostics()}


def symmetric_reduction_residual(h: QuasisymmetricMap, phi: GridFunction) -> float:
    """sup |standardized_cauchy(exp(i h), phi) - C_h H C_h^{-1} phi| modulo constants."""
    cfg = symmetric_configuration(h)
    direct = standardized_cauchy(cfg, phi).values
    pulled = compose_operator(h.inverse("newton"), phi)
    oracle = compose_operator(h, hilbert_circle(pulled)).values
    return float(np.max(np.abs(_mod_constants(direct) - _mod_constants(oracle))))


@dataclass
class ArcLengthFamily:
    """Forward data for the symmetric-point formula.

    gamma0' = exp(i theta + psi) with psi = i(eps q + a cos + b sin), the two
    first-mode coefficients fixed by closure; gamma0 = f o h with f the
    interior Riemann boundary map.
    """

    eps: float
    psi: GridFunction
    h: QuasisymmetricMap
    phi_real: GridFunction
    closure: float
    theodorsen_iterations: int


def _default_q(theta):
    return np.cos(2 * theta) + 0.5 * np.sin(3 * theta) - 0.25 * np.cos(5 * theta + 0.4)


def arc_length_family(grid: CircleGrid, eps: float, q: Optional[Callable] = None,
                      tol: float = 1e-14) -> ArcLengthFamily:
    th = grid.theta
    base = eps * (q or _default_q)(th)
    ab = np.zeros(2)

    def gap(ab):
        return np.mean(np.exp(1j * th + 1j * (base + ab[0] * np.cos(th) + ab[1] * np.sin(th))))

    for _ in range(30):
        g = gap(ab)
        e = np.exp(1j * th + 1j * (base + ab[0] * np.cos(th) + ab[1] * np.sin(th)))
        da = np.mean(1j * np.cos(th) * e)
        db = np.mean(1j * np.sin(th) * e)
        J = np.array([[da.real, db.real], [da.imag, db.imag]])
        ab = ab - np.linalg.solve(J, np.array([g.real, g.imag]))
        if abs(g) < 1e-15:
            break
    closure = abs(gap(ab))
    psi = GridFunction(grid, 1j * (base + ab[0] * np.cos(th) + ab[1] * np.sin(th)))
    gamma0 = exp_integral(psi, winding=1)
    curve = CurveSamples.from_samples(grid, gamma0.gamma)
    corr = theodorsen(curve, "interior", tol=tol)
    h = corr.as_map().inverse("newton")
    return ArcLengthFamily(eps, psi, h, h.log_derivative(), closure, corr.iterations)


def delta_formula_check(cfg_symmetric: CurveConfiguration, phi_real: GridFunction, psi: GridFunction) -> dict:
    """Compare psi - i(h - theta) with -i * standardized_cauchy(exp(i h), log h') modulo constants.

    For gamma0 = f o h with |gamma0'| constant, log f' o h is the boundary
    value of an interior-analytic function whose real part is -log h', so
    its imaginary part is the symmetric-point transform of -log h'.
    """
    h = cfg_symmetric.h_plus
    lhs = psi.values - 1j * (h.values - cfg_symmetric.grid.theta)
    rhs = -1j * standardized_cauchy(cfg_symmetric, phi_real).values
    diff = _mod_constants(lhs) - _mod_constants(rhs)
    return {"n": cfg_symmetric.grid.n, "residual": float(np.max(np.abs(diff))),
            "scale": float(np.max(np.abs(_mod_constants(lhs))))}


@dataclass
class OperatorMatrix:
    m: int
    entries: np.ndarray
    op_id: str = ""

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1)

    def to_dict(self) -> dict:
        return {"m": self.m, "op": self.op_id, "basis": "exp(ik theta), k=-m..m",
                "entries": complex_pairs(self.entries)}

    def apply(self, coeffs) -> np.ndarray:
        return self.entries @ np.asarray(coeffs, dtype=complex)


OPERATORS = ("standardized_cauchy", "P_plus", "P_minus")


def _apply_op(cfg: CurveConfiguration, op_id: str, phi: GridFunction, method: str, m: int) -> np.ndarray:
    if op_id == "standardized_cauchy":
        return standardized_cauchy(cfg, phi).values
    if method == "plemelj":
        plus, minus = plemelj_projections(cfg, phi)
        return (plus if op_id == "P_plus" else minus).values
    ds = direct_sum_solve(cfg, phi, min(4 * m, cfg.grid.n // 4))
    out = ds.phi_plus if op_id == "P_plus" else ds.phi_minus
    return _mod_constants(out.values)


def operator_matrix(cfg: CurveConfiguration, op_id: str = "standardized_cauchy", m: int = 8,
                    method: str = "plemelj") -> OperatorMatrix:
    """Finite section in the basis e^{ik theta}, |k| <= m.

    P_plus/P_minus come from the Plemelj formula (``method="plemelj"``) or
    from the direct-sum solver (``method="direct_sum"``).
    """
    if op_id not in OPERATORS:
        raise ValueError(f"unknown operator {op_id!r}; expected one of {OPERATORS}")
    if method not in ("plemelj", "direct_sum"):
        raise ValueError(f"unknown method {method!r}")
    grid = cfg.grid
    if m > grid.n // 8:
        raise ValueError(f"m={m} exceeds n/8={grid.n // 8}")
    ks = np.arange(-m, m + 1)
    idx = ks % grid.n
    cols = []
    for k in ks:
        phi = GridFunction(grid, np.exp(1j * k * grid.theta))
        out = _apply_op(cfg, op_id, phi, method, m)
        cols.append(grid.coefficients(out)[idx])
    return OperatorMatrix(m, np.array(cols).T, op_id)


def holomorphy_probe(family: Callable, centres: Sequence[complex], op_id: str = "standardized_cauchy",
                     m: int = 8, steps: Sequence[float] = (1e-2, 5e-3)) -> dict:
    """Central-difference Cauchy-Riemann residual of c -> operator_matrix(family(c)).

    dbar A = ((A(c+d) - A(c-d)) + i (A(c+id) - A(c-id))) / (4 d).
    """
    rows = []
    cache = {}

    def mat(c):
        key = complex(c)
        if key not in cache:
            cache[key] = operator_matrix(family(key), op_id, m).entries
        return cache[key]

    for c in centres:
        c = complex(c)
        A = mat(c)
        norm = float(np.linalg.norm(A, 2))
        res = []
        variation = []
        for d in steps:
            dx = mat(c + d) - mat(c - d)
            dy = mat(c + 1j * d) - mat(c - 1j * d)
            dbar = (dx + 1j * dy) / (4 * d)
            res.append(float(np.abs(dbar).max()))
            variation.append(float(np.abs(dx).max() / (2 * d)))
        rows.append({"c": c, "norm": norm, "residuals": dict(zip(map(str, steps), res)),
                     "ratio": res[0] / res[-1] if res[-1] > 0 else np.inf,
                     "dA_dx": variation[-1]})
    return {"op": op_id, "m": m, "steps": list(steps), "rows": rows}


def welded_family(grid: CircleGrid) -> Callable:
    return lambda c: welded_configuration([c], grid)


def projection_norm_monitor(cfg: CurveConfiguration, probes: Sequence[GridFunction],
                            kappa: Optional[float] = None) -> dict:
    """L2 ratios of the Plemelj projections against kappa * ||C_h+|| * ||C_h-||.

    Norms are maxima of ||T f|| / ||f|| over the probes; ``kappa`` defaults to
    the identity-configuration value on the same probes.
    """
    def l2(v):
        return float(np.sqrt(np.mean(np.abs(_mod_constants(v)) ** 2)))

    def norms(c):
        p_norm, c_plus, c_minus = 0.0, 0.0, 0.0
        for f in probes:
            base = l2(f.values)
            if base == 0:
                continue
            plus, minus = plemelj_projections(c, f)
            p_norm = max(p_norm, l2(plus.values) / base, l2(minus.values) / base)
            c_plus = max(c_plus, l2(compose_operator(c.h_plus, f).values) / base)
            c_minus = max(c_minus, l2(compose_operator(c.h_minus, f).values) / base)
        return p_norm, c_plus, c_minus

    if kappa is None:
        p0, a0, b0 = norms(identity_configuration(cfg.grid))
        kappa = p0 / (a0 * b0)
    p, a, b = norms(cfg)
    bound = kappa * a * b
    return {"projection_norm": p, "C_plus": a, "C_minus": b, "kappa": kappa,
            "bound": bound, "passed": p <= bound}


def random_bandlimited(grid: CircleGrid, band: int = 8, seed: int = 0, real: bool = False) -> GridFunction:
    rng = np.random.default_rng(seed)
    k = np.arange(1, band + 1)
    a = (rng.standard_normal(band) + 1j * rng.standard_normal(band)) / k
    b = (rng.standard_normal(band) + 1j * rng.standard_normal(band)) / k
    th = grid.theta
    v = np.exp(1j * np.outer(th, k)) @ a + np.exp(-1j * np.outer(th, k)) @ b
    if real:
        v = v.real
    return GridFunction(grid, v)
