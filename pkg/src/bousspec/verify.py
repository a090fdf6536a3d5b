"""
Residual suites for the eigenvalue and norming-constant asymptotics, the
quadratic small-coefficient scaling check, and a battery of structural
identities.

The asymptotic constants are existential, so the suites report an empirical
fit ``C = max_n |n| residual_n / ||u||_1^2`` and enforce only a generous
ceiling.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .charfn import (SelectionError, delta0_closed, eta_endpoint, monodromy_with_cofactor,
                     multipliers, point_data)
from .coeffs import CoeffPair, predictors, sobolev_norm
from .logscale import LogScaledComplex
from .norming import norming_sine_any
from .propagator import DEFAULT_RTOL, J, liouville_defect, propagate
from .spectrum import eigenvalue, unperturbed_eigenvalue

SQRT3 = math.sqrt(3.0)
REGIME_RADIUS = 0.1
CONSTANT_CEILING = 50.0
SCALING_WINDOW = (2.0, 8.0)
EPS_LADDER = (0.02, 0.04, 0.08)
N_MAX = 12
ZERO_TOL = {"thm11": 1e-7, "thm12": 1e-6}

BATTERY_TOLERANCES = {
    "liouville": 1e-9,
    "symplectic": 1e-8,
    "eta_endpoint": 1e-10,
    "gauge": 1e-12,
    "realness": 1e-9,
    "conjugate": 1e-10,
    "multiplier_product": 1e-9,
    "multiplier_residual": 1e-8,
    "tau3_positive": 0.0,
    "delta0": 1e-8,
}


@dataclass
class ResidualRow:
    n: int
    value: float
    gamma: float
    beta: float
    residual_thm11: float = float("nan")
    residual_thm12: float = float("nan")
    bound_constant_fit: float = float("nan")


@dataclass
class ResidualReport:
    """Per-index residuals of one suite at one coefficient pair.

    ``kind`` is ``"thm11"`` (eigenvalues, ``value = mu_n``) or ``"thm12"``
    (sine norming constants, ``value = h_sn``).
    """

    kind: str
    epsilon: float
    n_max: int
    rows: list[ResidualRow]
    ceiling: float = CONSTANT_CEILING
    zero_tol: float = float("nan")

    @property
    def residuals(self) -> dict[int, float]:
        col = "residual_thm11" if self.kind == "thm11" else "residual_thm12"
        return {r.n: getattr(r, col) for r in self.rows}

    @property
    def bound_constant_fit(self) -> float:
        """``max_n |n| residual_n / eps^2`` (NaN at ``eps = 0``)."""
        if self.epsilon == 0:
            return float("nan")
        return max(r.bound_constant_fit for r in self.rows)

    @property
    def passed(self) -> bool:
        if self.epsilon == 0:
            return bool(max(self.residuals.values()) <= self.zero_tol)
        return bool(self.bound_constant_fit <= self.ceiling)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "epsilon": self.epsilon, "n_max": self.n_max,
                "ceiling": self.ceiling, "zero_tol": self.zero_tol,
                "bound_constant_fit": self.bound_constant_fit, "passed": self.passed,
                "rows": [asdict(r) for r in self.rows]}


def _indices(n_max: int, negative: bool) -> list[int]:
    pos = list(range(1, n_max + 1))
    return pos + [-n for n in pos] if negative else pos


def _check_regime(u: CoeffPair, radius: float) -> float:
    u.require_mean_zero()
    eps = sobolev_norm(u)
    if eps > radius:
        raise ValueError(f"||u||_1 = {eps:.4g} exceeds the regime radius {radius}")
    return eps


def theorem11_suite(u: CoeffPair, n_max: int = N_MAX, *, negative: bool = True,
                    regime_radius: float = REGIME_RADIUS, ceiling: float = CONSTANT_CEILING,
                    check_winding: bool = True, rtol: float = DEFAULT_RTOL) -> ResidualReport:
    """Residuals ``|mu_n - mu_n^o + gamma_n - beta_n / sqrt3|`` for ``n = +-1..+-n_max``."""
    eps = _check_regime(u, regime_radius)
    rows = []
    for n in _indices(n_max, negative):
        mu = eigenvalue(u, n, check_winding=check_winding, rtol=rtol)
        g, b = predictors(u, n)
        res = abs(mu - unperturbed_eigenvalue(n) + g - b / SQRT3)
        fit = abs(n) * res / eps ** 2 if eps > 0 else float("nan")
        rows.append(ResidualRow(n, mu, g, b, residual_thm11=res, bound_constant_fit=fit))
    return ResidualReport("thm11", eps, n_max, rows, ceiling, ZERO_TOL["thm11"])


def theorem12_suite(u: CoeffPair, n_max: int = N_MAX, *, negative: bool = True,
                    regime_radius: float = REGIME_RADIUS, ceiling: float = CONSTANT_CEILING,
                    rtol: float = DEFAULT_RTOL) -> ResidualReport:
    """Residuals ``|h_sn - gamma_n + sqrt3 beta_n|`` for ``n = +-1..+-n_max``."""
    eps = _check_regime(u, regime_radius)
    rows = []
    for n in _indices(n_max, negative):
        h = norming_sine_any(u, n, rtol=rtol)
        g, b = predictors(u, n)
        res = abs(h - g + SQRT3 * b)
        fit = abs(n) * res / eps ** 2 if eps > 0 else float("nan")
        rows.append(ResidualRow(n, h, g, b, residual_thm12=res, bound_constant_fit=fit))
    return ResidualReport("thm12", eps, n_max, rows, ceiling, ZERO_TOL["thm12"])


@dataclass
class ScalingReport:
    """Residual ratios between consecutive rungs of an ``eps`` ladder."""

    kind: str
    epsilons: tuple
    reports: list[ResidualReport]
    window: tuple = SCALING_WINDOW

    @property
    def ratios(self) -> dict[int, list[float]]:
        out: dict[int, list[float]] = {}
        for lo, hi in zip(self.reports, self.reports[1:]):
            rlo, rhi = lo.residuals, hi.residuals
            for n in rlo:
                out.setdefault(n, []).append(rhi[n] / rlo[n] if rlo[n] > 0 else float("inf"))
        return out

    @property
    def passed(self) -> bool:
        a, b = self.window
        in_window = all(a <= r <= b for rs in self.ratios.values() for r in rs)
        return bool(in_window and all(r.passed for r in self.reports))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "epsilons": list(self.epsilons), "window": list(self.window),
                "ratios": {str(n): rs for n, rs in self.ratios.items()},
                "passed": self.passed, "reports": [r.to_dict() for r in self.reports]}


def scaling_ladder(family, kind: str = "thm11", epsilons=EPS_LADDER, n_max: int = N_MAX,
                   **kw) -> ScalingReport:
    """Run one suite along ``family(eps)`` for each ``eps`` and collect ratios.

    ``family`` maps ``eps`` to coefficients with ``||u||_1 = eps``; the ideal
    ratio for a doubling is 4.
    """
    suite = {"thm11": theorem11_suite, "thm12": theorem12_suite}[kind]
    eps = tuple(sorted(epsilons))
    return ScalingReport(kind, eps, [suite(family(e), n_max, **kw) for e in eps])


@dataclass
class IdentityCheck:
    check: str
    lam: complex
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


@dataclass
class BatteryReport:
    checks: list[IdentityCheck] = field(default_factory=list)

    def worst(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for c in self.checks:
            out[c.check] = max(out.get(c.check, 0.0), c.deviation)
        return out

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[IdentityCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "worst": self.worst(),
                "checks": [{"check": c.check, "lam_re": complex(c.lam).real,
                            "lam_im": complex(c.lam).imag, "deviation": c.deviation,
                            "tolerance": c.tolerance, "passed": c.passed}
                           for c in self.checks]}


def _scaled_rel(a: LogScaledComplex, b: LogScaledComplex) -> float:
    return a.rel_diff(b)


def symplectic_defect(u: CoeffPair, lam, x: float = 1.0, rtol: float = DEFAULT_RTOL) -> float:
    """``||Phi~^T J Phi - J|| / (||Phi~|| ||Phi||)`` with ``Phi~`` integrated directly."""
    F = propagate(u, lam, [x], "forward", rtol=rtol).frames[x]
    T = propagate(u, lam, [x], "transpose", rtol=rtol).frames[x]
    prod = T.mantissa.T @ J @ F.mantissa
    g = F.log_gauge + T.log_gauge
    scale = float(np.max(np.abs(T.mantissa))) * float(np.max(np.abs(F.mantissa)))
    return float(np.max(np.abs(prod - J * math.exp(-g)))) / scale


def identity_battery(u: CoeffPair, lambda_samples, tolerances: dict | None = None,
                     rtol: float = DEFAULT_RTOL, gauge_offset: float = 37.25) -> BatteryReport:
    """Evaluate every structural identity at each sample; never raises on failure.

    Checks: Liouville (normalized ``|det Phi - 1| / max(1, ||Phi||)`` at
    ``x = 1, 2``), ``Phi~^T J Phi = J``, ``eta(2) = -Delta`` by independent
    routes, gauge transparency, realness on the real axis (or conjugate
    symmetry off it), the multiplier product and cubic residuals with
    ``tau_3 > 0`` for real ``lam > 1``, and ``Delta = Delta_0`` when ``u = 0``.
    """
    tol = dict(BATTERY_TOLERANCES, **(tolerances or {}))
    rep = BatteryReport()

    def add(name, lam, dev):
        rep.checks.append(IdentityCheck(name, lam, float(dev), tol[name]))

    for lam in lambda_samples:
        lam = complex(lam)
        if lam == 0:
            raise ValueError("lambda = 0 is excluded")
        res = propagate(u, lam, [1.0, 2.0], rtol=rtol)
        add("liouville", lam, max(liouville_defect(res.frames[x]) for x in (1.0, 2.0)))
        add("symplectic", lam, symplectic_defect(u, lam, rtol=rtol))
        d = point_data(u, lam, rtol=rtol).delta()
        add("eta_endpoint", lam, _scaled_rel(eta_endpoint(u, lam, rtol=rtol), -d))
        d_off = point_data(u, lam, rtol=rtol, gauge_offset=gauge_offset).delta()
        add("gauge", lam, _scaled_rel(d, d_off))
        if lam.imag == 0:
            add("realness", lam, abs(d.mantissa.imag) / abs(d.mantissa) if not d.is_zero else 0.0)
        else:
            dc = point_data(u, lam.conjugate(), rtol=rtol).delta()
            add("conjugate", lam, _scaled_rel(dc, d.conjugate()))
        if lam.imag == 0 and lam.real > 1:
            M, C = monodromy_with_cofactor(u, lam, rtol=rtol)
            try:
                mt = multipliers(M, C, lam)
                t3 = mt.tau3.mantissa
                add("tau3_positive", lam, 0.0 if t3.real > 0 else 1.0)
            except SelectionError:
                mt = multipliers(M, C)
                add("tau3_positive", lam, 1.0)
            add("multiplier_product", lam, abs(complex(mt.product()) - 1))
            add("multiplier_residual", lam, max(mt.residual(j) for j in range(3)))
        if u.is_zero:
            add("delta0", lam, _scaled_rel(d, delta0_closed(lam)))
    return rep


def random_lambda_samples(rng: np.random.Generator, count: int, lo: float = 5.0,
                          hi: float = 2000.0) -> np.ndarray:
    """Log-uniform real samples in ``[lo, hi]``."""
    return np.exp(rng.uniform(math.log(lo), math.log(hi), count))


def residual_ratio(report_hi: ResidualReport, report_lo: ResidualReport) -> dict[int, float]:
    lo = report_lo.residuals
    return {n: r / lo[n] for n, r in report_hi.residuals.items()}
