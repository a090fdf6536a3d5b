"""
Norming constants ``h_cn = mu_n - mu_n^o`` and

    h_sn = 8 (pi n)^2 log((-1)^(n+1) phi_3(1) / phi~_3(1) * tau_3^(-1/2)),

all evaluated at the transpose eigenvalue ``mu~_n``.  ``phi~_3(1)`` is the
``(3, 1)`` cofactor of the monodromy matrix, ``tau_3`` the distinguished
positive multiplier with the positive square root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .charfn import PointData, eta_profile, monodromy_with_cofactor, multipliers, point_data
from .coeffs import CoeffPair, transform_reflect, transform_star
from .logscale import LogScaledComplex
from .propagator import DEFAULT_RTOL, propagate
from .spectrum import solve_transpose, unperturbed_eigenvalue


class NormingSignError(RuntimeError):
    """The argument of the logarithm is not a positive real number."""


@dataclass(frozen=True)
class NormingRecord:
    n: int
    h_cn: float
    h_sn: float
    tau3: LogScaledComplex
    ratio_log: float
    mu: float | None = None
    mu_tilde: float | None = None


def sine_log_argument(u: CoeffPair, n: int, mu_tilde: float,
                      rtol: float = DEFAULT_RTOL) -> tuple[LogScaledComplex, LogScaledComplex]:
    """``((-1)^(n+1) phi_3 / phi~_3 * tau_3^(-1/2), tau_3)`` at ``mu_tilde``."""
    M, C = monodromy_with_cofactor(u, mu_tilde, rtol=rtol)
    t3 = multipliers(M, C, mu_tilde).tau3
    phi3 = M.entry(0, 2)
    phi3_t = C.entry(2, 0)
    sign = 1.0 if n % 2 == 1 else -1.0
    arg = (phi3 / phi3_t) * sign / t3.sqrt()
    return arg, t3


def norming_sine(u: CoeffPair, n: int, mu_tilde: float | None = None, *,
                 mu: float | None = None, imag_tol: float = 1e-9,
                 rtol: float = DEFAULT_RTOL) -> NormingRecord:
    """``h_sn`` for ``n >= 1``; solves for ``mu~_n`` when not given."""
    if n < 1:
        raise ValueError("norming_sine needs n >= 1; use norming_sine_negative")
    u.require_mean_zero()
    if mu_tilde is None:
        mu_tilde = solve_transpose(u, n, cross_check=False, check_winding=False, rtol=rtol)
    if mu_tilde <= 1.0:
        raise ValueError(f"mu_tilde={mu_tilde} is outside the positive-multiplier range")
    arg, t3 = sine_log_argument(u, n, mu_tilde, rtol)
    m = arg.mantissa
    if m.real <= 0 or abs(m.imag) > imag_tol * abs(m):
        raise NormingSignError(
            f"log argument for h_s{n} is not positive: {m} * exp({arg.log_scale}) "
            f"at mu_tilde={mu_tilde}")
    ratio_log = math.log(m.real) + arg.log_scale
    h_sn = 8 * (math.pi * n) ** 2 * ratio_log
    h_cn = norming_cosine(u, n, mu) if mu is not None else float("nan")
    return NormingRecord(n, h_cn, h_sn, t3, ratio_log, mu, mu_tilde)


def norming_cosine(u: CoeffPair, n: int, mu: float) -> float:
    """``h_cn = mu_n - mu_n^o``."""
    return float(mu) - (unperturbed_eigenvalue(n) if n > 0 else -unperturbed_eigenvalue(-n))


def norming_sine_negative(u: CoeffPair, n: int, **kw) -> float:
    """``h_sn(u) = -h_{s,-n}(u_*^-)`` for ``n <= -1``."""
    if n > -1:
        raise ValueError("norming_sine_negative needs n <= -1")
    return -norming_sine(transform_reflect(transform_star(u)), -n, **kw).h_sn


def norming_sine_any(u: CoeffPair, n: int, **kw) -> float:
    return norming_sine(u, n, **kw).h_sn if n > 0 else norming_sine_negative(u, n, **kw)


@dataclass(frozen=True)
class TransposeCheck:
    """``phi~_3(1, lam)`` by two routes plus the eigenfunction-derivative ratio."""

    phi3_transpose_cofactor: LogScaledComplex
    phi3_transpose_direct: LogScaledComplex
    ratio_identity: complex
    ratio_finite_difference: complex

    @property
    def route_rel_diff(self) -> float:
        return self.phi3_transpose_cofactor.rel_diff(self.phi3_transpose_direct)

    @property
    def ratio_rel_diff(self) -> float:
        return abs(self.ratio_finite_difference / self.ratio_identity - 1)


def _fd_derivatives(values, h: float) -> tuple[complex, complex]:
    """``eta'(0)`` (one-sided, 5 points) and ``eta'(1)`` (central, 4 points)."""
    f0, f1, f2, f3, f4 = values[:5]
    d0 = (-25 * f0 + 48 * f1 - 36 * f2 + 16 * f3 - 3 * f4) / (12 * h)
    m2, m1, p1, p2 = values[5:]
    d1 = (m2 - 8 * m1 + 8 * p1 - p2) / (12 * h)
    return d0, d1


def transpose_route_check(u: CoeffPair, lam: float, direction: str = "forward",
                          fd_step: float = 2e-4, rtol: float = DEFAULT_RTOL) -> TransposeCheck:
    """Compare ``phi~_3(1)`` from the cofactor frame with direct integration of
    the transpose equation, and ``eta'(1) / eta'(0)`` by finite differences
    with ``-phi~_3(1) / phi_3(1)``.

    Both identities hold at every ``lam``; ``direction="transpose"`` checks
    ``eta~'(1) / eta~'(0) = -phi_3(1) / phi~_3(1)``, typically at ``mu~``.
    """
    other = "transpose" if direction == "forward" else "forward"
    data: PointData = point_data(u, lam, direction, rtol)
    via_cof = data.phi3_transpose()
    direct = propagate(u, lam, [1.0], other, rtol=rtol).frames[1.0].entry(0, 2)
    ratio_id = -complex(via_cof / data.phi3())
    h = fd_step
    ts = [0.0, h, 2 * h, 3 * h, 4 * h, 1 - 2 * h, 1 - h, 1 + h, 1 + 2 * h]
    raw = eta_profile(u, ts, lam, direction, rtol)
    # near 0 and near 1 the values differ in scale; each stencil gets its own
    vals = []
    for group in (raw[:5], raw[5:]):
        ref = max(r.log_abs() for r in group if not r.is_zero)
        vals += [r.scaled(ref) for r in group]
    d0, d1 = _fd_derivatives(vals, h)
    ref0 = max(r.log_abs() for r in raw[:5] if not r.is_zero)
    ref1 = max(r.log_abs() for r in raw[5:] if not r.is_zero)
    ratio = (d1 / d0) * math.exp(ref1 - ref0)
    return TransposeCheck(via_cof, direct, ratio_id, ratio)
