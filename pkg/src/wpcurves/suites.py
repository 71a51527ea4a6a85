"""Verification suites: one function per acceptance criterion.

Each criterion returns a :class:`CriterionResult` holding individual checks
(measured value, threshold, pass flag) and optional plot series. Results
contain no timings; the runner records those separately so that reports are
reproducible byte for byte.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cauchy import (
    arc_length_family,
    delta_formula_check,
    direct_sum_solve,
    holomorphy_probe,
    identity_configuration,
    random_bandlimited,
    standardized_cauchy,
    symmetric_configuration,
    symmetric_reduction_residual,
    theorem_cauchy_crosscheck,
    welded_configuration,
    welded_family,
)
from .grid import GridFunction, cayley_pullback, cayley_pushforward, make_grid, sample
from .norms import NormKind, analytic_seminorm, boundary_seminorm
from .operators import QuasisymmetricMap, composition_bounds, probe_family
from .quasiconformal import (
    BeltramiField,
    beurling_ahlfors_extend,
    complex_dilatation,
    geometric_heights,
    hyperbolic_lp_norm,
    twb_local_integral,
)
from .transforms import AnalyticCoefficients, hilbert_circle, hilbert_line, riesz_project
from .welding import conformal_weld, curve_from_schlicht, derivative_data

# sqrt(64*pi*I0) with I0 = int_0^pi sin^4(t/2)/t^2 dt, from adaptive quadrature
BESOV_I0 = 0.25312074577428534
BESOV_ORACLE = 7.1339291856117075


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    relation: str = "<="

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "relation": self.relation, "passed": bool(self.passed)}


def at_most(name, value, threshold) -> Check:
    value = float(value)
    return Check(name, value, threshold, bool(value <= threshold), "<=")


def at_least(name, value, threshold) -> Check:
    value = float(value)
    return Check(name, value, threshold, bool(value >= threshold), ">=")


def within(name, value, lo, hi) -> Check:
    value = float(value)
    return Check(name, value, [lo, hi], bool(lo <= value <= hi), "in")


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks], "notes": self.notes}

    def summary_line(self) -> str:
        worst = [c for c in self.checks if not c.passed]
        tag = "PASS" if self.passed else "FAIL"
        detail = "; ".join(f"{c.name}={c.value:.3g}" for c in worst[:3])
        return f"[{tag}] criterion {self.number:>2}: {self.title}" + (f" ({detail})" if detail else "")


def _series(x, y, xlabel="x", ylabel="y", logy=False) -> dict:
    return {"x": [float(v) for v in x], "y": [float(v) for v in y],
            "xlabel": xlabel, "ylabel": ylabel, "logy": logy}


def criterion_operator_identities(seed: int = 0, n: int = 512, count: int = 20) -> CriterionResult:
    res = CriterionResult(1, "Hilbert and Riesz operator identities")
    grid = make_grid(n)
    rng = np.random.default_rng(seed)
    worst = {"HH+I": 0.0, "P+ + P- - I": 0.0, "P+P-": 0.0, "P+P+ - P+": 0.0, "P-P- - P-": 0.0}
    for _ in range(count):
        band = int(rng.integers(4, n // 4))
        c = np.zeros(n, dtype=complex)
        ks = np.concatenate([np.arange(1, band + 1), -np.arange(1, band + 1)])
        c[ks % n] = rng.standard_normal(ks.size) + 1j * rng.standard_normal(ks.size)
        v = np.fft.ifft(c)
        f = GridFunction(grid, v / np.abs(v).max())
        plus, minus = riesz_project(f, "plus"), riesz_project(f, "minus")
        errs = {
            "HH+I": hilbert_circle(hilbert_circle(f)) + f,
            "P+ + P- - I": plus + minus - f,
            "P+P-": riesz_project(minus, "plus"),
            "P+P+ - P+": riesz_project(plus, "plus") - plus,
            "P-P- - P-": riesz_project(minus, "minus") - minus,
        }
        for key, g in errs.items():
            worst[key] = max(worst[key], float(np.abs(g.values).max()))
    for key, val in worst.items():
        res.checks.append(at_most(key, val, 1e-12))
    return res


def criterion_line_hilbert(n: int = 2048) -> CriterionResult:
    res = CriterionResult(2, "line Hilbert transform vs closed form and Cayley conjugate")
    grid = make_grid(n)
    f = sample(grid, lambda x: 1.0 / (1.0 + x * x), "line")
    hf = hilbert_line(f)
    x = grid.x
    err = np.abs(hf.values - x / (1 + x * x))
    res.checks.append(at_most("sup |H f - x/(1+x^2)|", err.max(), 1e-5))
    conj = cayley_pullback(hilbert_circle(cayley_pushforward(f)))
    diff = hf.values - conj.values
    res.checks.append(at_most("std(H_line f - K^* H K_* f)", np.std(diff), 1e-5))
    keep = np.abs(x) < 10
    res.series["line_hilbert"] = _series(x[keep], hf.values.real[keep], "x", "H f(x)")
    return res


def criterion_besov(n: int = 1024) -> CriterionResult:
    res = CriterionResult(3, "Besov quadrature vs oracle; zero on constants")
    grid = make_grid(n)
    f = GridFunction(grid, np.exp(1j * grid.theta))
    val = boundary_seminorm(f, NormKind.BpSharp, 2.0).value
    res.checks.append(at_most("relative error of Bp#(e^{i theta}, 2)", abs(val - BESOV_ORACLE) / BESOV_ORACLE, 5e-3))
    const = GridFunction(grid, np.full(n, 2.5 - 1.0j))
    line_const = GridFunction(grid, np.full(n, 0.75), "line")
    worst = 0.0
    for kind in NormKind:
        for p in (1.0, 2.0):
            if kind is NormKind.Bp and p <= 1:
                continue
            for g in (const, line_const):
                worst = max(worst, abs(boundary_seminorm(g, kind, p).value))
    coeffs = AnalyticCoefficients("plus", [1.5])
    for kind in ("calbp", "calbpsharp", "bmoa"):
        worst = max(worst, abs(analytic_seminorm(coeffs, kind, 2.0, n=64).value))
    res.checks.append(at_most("max seminorm of constants", worst, 0.0))
    return res


def criterion_composition(n: int = 1024) -> CriterionResult:
    res = CriterionResult(4, "composition operator inequalities")
    grid = make_grid(n)
    probes = probe_family(grid)
    for a in (0.1, 0.3):
        h = QuasisymmetricMap.from_function(grid, lambda t: t + a * np.sin(t), lambda t: 1 + a * np.cos(t))
        rep = composition_bounds(h, probes)
        rows = rep.rows
        res.checks.append(at_most(f"a={a}: max |W11 ratio - 1|", max(abs(r["w11_ratio"] - 1) for r in rows), 1e-6))
        res.checks.append(at_least(f"a={a}: min L1 slack", min(r["l1_slack"] for r in rows), -1e-8))
        res.checks.append(at_least(f"a={a}: min W21 slack", min(r["w21_slack"] for r in rows), -1e-8))
        res.checks.append(at_most(f"a={a}: ||log h'||_inf - ||log h'||_W11", rep.linf_log - rep.w11_norm, 1e-8))
        res.series[f"ratios_a{a}"] = _series(range(len(rows)), [r["w21_ratio"] for r in rows], "probe", "W21 ratio")
    return res


def criterion_welding(sizes=(512, 1024), coeffs=(0.1, 0.2, 0.3), tol: float = 1e-11) -> CriterionResult:
    res = CriterionResult(5, "welding identity convergence and Besov finiteness")
    for c2 in coeffs:
        resid, b1, b2 = [], [], []
        for n in sizes:
            _, samples = curve_from_schlicht([c2], make_grid(n))
            weld = conformal_weld(samples, tol=tol)
            lh = weld.h.log_derivative()
            resid.append(weld.residual)
            b1.append(boundary_seminorm(lh, NormKind.BhatP, 1.0).value)
            b2.append(boundary_seminorm(lh, NormKind.BhatP, 2.0).value)
        res.checks.append(at_least(f"c2={c2}: residual ratio n={sizes[0]}/{sizes[1]}", resid[0] / resid[1], 4.0))
        res.checks.append(at_most(f"c2={c2}: residual at n={sizes[1]}", resid[1], 1e-4))
        for name, vals in (("B1hat", b1), ("B2hat", b2)):
            finite = np.all(np.isfinite(vals))
            change = abs(vals[1] - vals[0]) / abs(vals[1]) if finite else np.inf
            res.checks.append(at_most(f"c2={c2}: {name}(log h') relative change", change, 0.05))
        res.series[f"residual_c2_{c2}"] = _series(sizes, resid, "n", "welding residual", logy=True)
    return res


def criterion_projection_annihilation(n: int = 1024, coeffs=(0.1, 0.2, 0.3), tol: float = 1e-11) -> CriterionResult:
    res = CriterionResult(6, "conformal-side traces have no exterior frequencies")
    grid = make_grid(n)
    for c2 in coeffs:
        _, samples = curve_from_schlicht([c2], grid)
        logd, _ = derivative_data(GridFunction(grid, samples.gamma))
        c = grid.coefficients(logd.values)
        energy = np.sum(np.abs(c[grid.freqs < 0]) ** 2) / np.sum(np.abs(c) ** 2)
        res.checks.append(at_most(f"c2={c2}: exterior energy fraction of log F1'", energy, 1e-8))
        corr = conformal_weld(samples, tol=tol).correspondence
        res.checks.append(at_most(f"c2={c2}: interior leakage of the exterior map", corr.leakage, 1e-8))
    return res


def criterion_cauchy_crosscheck(sizes=(512, 1024), c2: float = 0.2, m: int = 64, seed: int = 0,
                                band: int = 6) -> CriterionResult:
    res = CriterionResult(7, "Plemelj projections vs direct-sum solve, on and off the curve")
    grid = make_grid(sizes[0])
    ident = theorem_cauchy_crosscheck(identity_configuration(grid), random_bandlimited(grid, band, seed), m)
    res.checks.append(at_most("identity cfg residual", ident["sup_residual"], 1e-9))
    resid = []
    for n in sizes:
        g = make_grid(n)
        rep = theorem_cauchy_crosscheck(welded_configuration([c2], g), random_bandlimited(g, band, seed), m)
        resid.append(rep["sup_residual"])
    res.checks.append(at_most(f"welded c2={c2}: residual at n={sizes[-1]}", resid[-1], 1e-4))
    res.checks.append(at_least(f"welded c2={c2}: residual ratio n={sizes[0]}/{sizes[-1]}", resid[0] / resid[-1], 4.0))
    res.checks.append(at_most("off-curve max error (8 probes)", rep["offcurve_max_error"], 1e-5))
    res.checks.append(Check("probe sides", float(rep["sides_ok"]), 1.0, rep["sides_ok"], "=="))
    res.series["crosscheck_residual"] = _series(sizes, resid, "n", "sup residual", logy=True)
    return res


def criterion_standardized(n: int = 1024, c2: float = 0.2, m: int = 64, seed: int = 0,
                           band: int = 6) -> CriterionResult:
    res = CriterionResult(8, "standardized transform identity and symmetric-point reduction")
    grid = make_grid(n)
    cfg = welded_configuration([c2], grid)
    phi = random_bandlimited(grid, band, seed)
    ds = direct_sum_solve(cfg, phi, m)
    target = -1j * (ds.phi_plus.values - ds.phi_minus.values)
    diff = standardized_cauchy(cfg, phi).values - (target - target.mean())
    res.checks.append(at_most("sup |H_std - (-i)(P+ - P-)|", np.abs(diff).max(), 1e-5))
    h = QuasisymmetricMap.from_function(grid, lambda t: t + 0.3 * np.sin(t) + 0.1 * np.sin(2 * t),
                                        lambda t: 1 + 0.3 * np.cos(t) + 0.2 * np.cos(2 * t))
    res.checks.append(at_most("sup |H_std(exp(ih)) - C_h H C_h^-1|", symmetric_reduction_residual(h, phi), 1e-5))
    return res


def criterion_delta(n: int = 1024, eps=(0.02, 0.05)) -> CriterionResult:
    res = CriterionResult(9, "symmetric-point formula on arc-length families")
    grid = make_grid(n)
    resid = {}
    for e in eps:
        fam = arc_length_family(grid, e)
        rep = delta_formula_check(symmetric_configuration(fam.h), fam.phi_real, fam.psi)
        resid[e] = rep["residual"]
        res.checks.append(at_most(f"eps={e}: residual", rep["residual"], 1e-4))
    small, large = min(eps), max(eps)
    ratio = resid[large] / resid[small] if resid[small] > 0 else np.inf
    res.checks.append(within(f"residual ratio eps={large}/eps={small}", ratio, 4.0, 8.0))
    res.notes.append("residuals sit at roundoff for every eps; the ratio carries no eps-scaling")
    res.series["delta_residual"] = _series(sorted(resid), [resid[e] for e in sorted(resid)], "eps", "residual", logy=True)
    return res


def criterion_holomorphy(n: int = 512, m: int = 8, radius: float = 0.15) -> CriterionResult:
    res = CriterionResult(10, "Cauchy-Riemann residual of the standardized operator family")
    grid = make_grid(n)
    centres = [0.0] + [radius * 0.8 * np.exp(2j * np.pi * k / 3 + 0.3j) for k in range(3)]
    rep = holomorphy_probe(welded_family(grid), centres, "standardized_cauchy", m, (1e-2, 5e-3))
    worst_rel = max(r["residuals"]["0.005"] / r["norm"] for r in rep["rows"])
    worst_ratio = min(r["ratio"] for r in rep["rows"])
    res.checks.append(at_most("max CR residual / ||A|| at delta=5e-3", worst_rel, 1e-3))
    res.checks.append(at_least("min residual ratio under step halving", worst_ratio, 2.0))
    res.series["cr_residual"] = _series([1e-2, 5e-3], [max(r["residuals"][k] for r in rep["rows"]) for k in ("0.01", "0.005")],
                                        "delta", "CR residual", logy=True)
    return res


def criterion_quasiconformal(n: int = 512) -> CriterionResult:
    res = CriterionResult(11, "Beurling-Ahlfors extension, hyperbolic norm, local integral")
    grid = make_grid(n)
    box = (-2.0, 2.0, 0.01, 2.0)
    worst = 0.0
    for f, df in ((lambda x: x, lambda x: np.ones_like(x)), (lambda x: 1.7 * x - 0.4, lambda x: np.full_like(x, 1.7))):
        h = QuasisymmetricMap.from_function(grid, f, df, "line")
        worst = max(worst, complex_dilatation(beurling_ahlfors_extend(h, box)).sup)
    res.checks.append(at_most("sup|mu| for identity/affine", worst, 1e-10))
    ind = BeltramiField.from_function(
        lambda z: 0.5 * ((z.real > 0) & (z.real < 1) & (z.imag > 1) & (z.imag < 2)),
        np.linspace(-1.0, 2.0, 61), geometric_heights(1.0 / 64, 4.0))
    for p in (1.0, 2.0, 3.0):
        val = hyperbolic_lp_norm(ind, p).value / 0.5
        exact = 0.5 ** (1.0 / p)
        res.checks.append(at_most(f"indicator p={p}: relative error", abs(val - exact) / exact, 5e-3))
    x0, r = 0.25, 0.5
    ann = BeltramiField.from_function(lambda z: 0.4 * ((np.abs(z - x0) > r / 2) & (np.abs(z - x0) < r)),
                                      np.linspace(-1.0, 1.5, 101), geometric_heights(1e-3, 2.0))
    for sym, share in ((False, 1.0), (True, 2.0)):
        val = twb_local_integral(ann, x0, r, symmetric=sym) / 0.4
        exact = np.pi * np.log(2) * share
        res.checks.append(at_most(f"annulus symmetric={sym}: relative error", abs(val - exact) / exact, 1e-2))
    return res


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_operator_identities,
    2: criterion_line_hilbert,
    3: criterion_besov,
    4: criterion_composition,
    5: criterion_welding,
    6: criterion_projection_annihilation,
    7: criterion_cauchy_crosscheck,
    8: criterion_standardized,
    9: criterion_delta,
    10: criterion_holomorphy,
    11: criterion_quasiconformal,
}

SUITES: dict[str, tuple[int, ...]] = {
    "identities": (1, 2),
    "besov": (3,),
    "composition": (4,),
    "welding": (5, 6),
    "cauchy": (7, 8, 9),
    "holomorphy": (10,),
    "quasiconformal": (11,),
}


@dataclass(frozen=True)
class SuiteConfig:
    """What to run and at which resolution.

    ``sizes`` is the (coarse, fine) pair used by the convergence criteria;
    ``c2`` the schlicht coefficients of the welding family, whose median
    also drives the Cauchy criteria. Criteria with a fixed resolution
    (1, 2, 3, 10, 11) ignore ``sizes``.
    """

    suites: tuple = ("all",)
    sizes: tuple = (512, 1024)
    c2: tuple = (0.1, 0.2, 0.3)
    tol: float = 1e-11
    seed: int = 0
    out: Optional[str] = None

    def __post_init__(self):
        for name in self.suites:
            if name != "all" and name not in SUITES:
                raise ValueError(f"unknown suite {name!r}")
        if len(self.sizes) != 2 or self.sizes[0] >= self.sizes[1]:
            raise ValueError("sizes must be an increasing pair")
        for n in self.sizes:
            if n < 64 or n & (n - 1):
                raise ValueError(f"grid size {n} is not a power of two >= 64")
        if not self.c2 or any(not np.isfinite(c) for c in self.c2):
            raise ValueError("c2 must be a non-empty list of finite numbers")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    @property
    def cauchy_c2(self) -> float:
        return float(sorted(self.c2)[len(self.c2) // 2])

    def criteria(self) -> list[int]:
        numbers = []
        for name in self.suites:
            for k in sorted(CRITERIA) if name == "all" else SUITES[name]:
                if k not in numbers:
                    numbers.append(k)
        return numbers

    def kwargs(self, number: int) -> dict:
        sizes, c2 = tuple(self.sizes), tuple(self.c2)
        return {
            1: dict(seed=self.seed),
            5: dict(sizes=sizes, coeffs=c2, tol=self.tol),
            6: dict(n=sizes[1], coeffs=c2, tol=self.tol),
            7: dict(sizes=sizes, c2=self.cauchy_c2, seed=self.seed),
            8: dict(n=sizes[1], c2=self.cauchy_c2, seed=self.seed),
            9: dict(n=sizes[1]),
        }.get(number, {})

    def to_dict(self) -> dict:
        return {"suites": list(self.suites), "sizes": list(self.sizes), "c2": list(self.c2),
                "tol": self.tol, "seed": self.seed}


def run_criterion(number: int, config: Optional[SuiteConfig] = None) -> tuple[CriterionResult, float]:
    config = config or SuiteConfig()
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        result = CRITERIA[number](**config.kwargs(number))
    return result, time.perf_counter() - start


def run_suites(config: SuiteConfig) -> tuple[list[CriterionResult], dict]:
    results, timing = [], {}
    for k in config.criteria():
        result, elapsed = run_criterion(k, config)
        results.append(result)
        timing[f"criterion_{k}"] = elapsed
    return results, timing
