"""
Characteristic function, eigenfunction, monodromy matrix and multipliers.

``Delta(lam) = phi_2(1) phi_3(2) - phi_3(1) phi_2(2)`` (first-row entries
of the fundamental solutions) vanishes exactly on the three-point spectrum
``y(0) = y(1) = y(2) = 0``.  The function

    eta(t) = phi_2(t) phi_3(1) - phi_3(t) phi_2(1)

is the solution with ``eta(0) = eta(1) = 0``; its state at ``t = 1`` is
``(0, -cof_31, cof_21)`` in terms of the cofactor matrix of ``Phi(1)``, and
``Delta = -eta(2)``.  Evaluating ``Delta`` this way never forms the
cancelling products of the defining determinant.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .coeffs import CoeffPair
from .logscale import LogScaledComplex
from .propagator import (DEFAULT_RTOL, GaugedMatrix, adjugate, as_point, propagate)

SQRT3 = math.sqrt(3.0)
REALNESS_TOL = 1e-9


class SelectionError(RuntimeError):
    """The distinguished multiplier could not be identified."""


class RealnessError(RuntimeError):
    """A quantity that must be real on the real axis is not."""


@dataclass(frozen=True)
class PointData:
    """Everything one spectral point needs from two propagations.

    ``monodromy`` is ``Phi(1)``, ``cofactor`` is ``cof Phi(1)`` and
    ``transfer`` is ``Phi(2, 1)``.
    """

    lam: complex
    direction: str
    monodromy: GaugedMatrix
    cofactor: GaugedMatrix
    transfer: GaugedMatrix

    def eta_state(self) -> tuple[np.ndarray, float]:
        """State ``(eta, eta', eta^[2])`` at ``t = 1`` as (mantissa, log gauge)."""
        C = self.cofactor
        return np.array([0.0, -C.mantissa[2, 0], C.mantissa[1, 0]], dtype=complex), C.log_gauge

    def delta(self) -> LogScaledComplex:
        v, g = self.eta_state()
        T = self.transfer
        return LogScaledComplex(-complex(T.mantissa[0] @ v), T.log_gauge + g)

    def phi3(self) -> LogScaledComplex:
        """``phi_3(1)``."""
        return self.monodromy.entry(0, 2)

    def phi3_transpose(self) -> LogScaledComplex:
        """``phi~_3(1) = cof_31 Phi(1)``, the transpose solution."""
        return self.cofactor.entry(2, 0)


def point_data(u: CoeffPair, lam, direction: str = "forward", rtol: float = DEFAULT_RTOL,
               gauge_offset: float = 0.0) -> PointData:
    pt = as_point(lam)
    first = propagate(u, pt, [1.0], direction, rtol=rtol, gauge_offset=gauge_offset)
    second = propagate(u, pt, [2.0], direction, start=1.0, rtol=rtol, gauge_offset=gauge_offset)
    return PointData(pt.lam, direction, first.frames[1.0], first.cofactor_frames[1.0],
                     second.frames[2.0])


def _check_real(lam: complex, value: LogScaledComplex, what: str) -> None:
    if complex(lam).imag == 0 and not value.is_zero:
        m = value.mantissa
        if abs(m.imag) > REALNESS_TOL * abs(m):
            raise RealnessError(f"{what} is not real at real lam={lam}: "
                                f"|Im|/|.| = {abs(m.imag) / abs(m):.3g}")


def delta(u: CoeffPair, lam, direction: str = "forward", rtol: float = DEFAULT_RTOL,
          gauge_offset: float = 0.0) -> LogScaledComplex:
    """Characteristic function ``Delta(lam)`` (``Delta~`` for ``direction="transpose"``)."""
    d = point_data(u, lam, direction, rtol, gauge_offset).delta()
    _check_real(as_point(lam).lam, d, "Delta")
    return d


def delta_real(u: CoeffPair, lam: float, direction: str = "forward",
               rtol: float = DEFAULT_RTOL) -> LogScaledComplex:
    """``Delta`` on the real axis with the (checked, tiny) imaginary part dropped."""
    d = delta(u, float(lam), direction, rtol)
    return LogScaledComplex(d.mantissa.real, d.log_scale)


def _lsc_sin(w: complex) -> LogScaledComplex:
    if abs(w.imag) < 300:
        return LogScaledComplex.from_complex(cmath.sin(w))
    return (LogScaledComplex.from_log(1j * w) - LogScaledComplex.from_log(-1j * w)) / 2j


def _lsc_cos(w: complex) -> LogScaledComplex:
    if abs(w.imag) < 300:
        return LogScaledComplex.from_complex(cmath.cos(w))
    return (LogScaledComplex.from_log(1j * w) + LogScaledComplex.from_log(-1j * w)) * 0.5


def _lsc_cosh(w: complex) -> LogScaledComplex:
    return (LogScaledComplex.from_log(w) + LogScaledComplex.from_log(-w)) * 0.5


def delta0_closed(lam) -> LogScaledComplex:
    """Unperturbed characteristic function

    ``(4 / 3 sqrt3 lam) sin(sqrt3 z / 2) (cosh(3 z / 2) - cos(sqrt3 z / 2))``.
    """
    pt = as_point(lam)
    z = pt.z
    # exact zeros at z = 2 pi n / sqrt3
    s = _lsc_sin(SQRT3 * z / 2)
    bracket = _lsc_cosh(1.5 * z) - _lsc_cos(SQRT3 * z / 2)
    return s * bracket * (4.0 / (3.0 * SQRT3 * pt.lam))


def eta(u: CoeffPair, t: float, lam, direction: str = "forward",
        rtol: float = DEFAULT_RTOL) -> LogScaledComplex:
    """``eta(t, lam) = det[[phi_2(t), phi_3(t)], [phi_2(1), phi_3(1)]]``.

    ``t = 0`` and ``t = 1`` return the structural zeros; other points go
    through :func:`eta_profile`.
    """
    if not 0.0 <= t <= 2.0:
        raise ValueError("t must lie in [0, 2]")
    if t in (0.0, 1.0):
        return LogScaledComplex(0j, 0.0)
    return eta_profile(u, [t], lam, direction, rtol)[0]


def eta_profile(u: CoeffPair, ts, lam, direction: str = "forward", rtol: float = DEFAULT_RTOL,
                derivative: int = 0) -> list[LogScaledComplex]:
    """``eta`` (or its ``derivative``-th state row) at several points.

    Points with ``t |z| <= 1/2`` use the defining determinant, which does not
    cancel there.  Elsewhere the eigenfunction is integrated outward from
    ``t = 1``, where its state is ``(0, -cof_31, cof_21)``.
    """
    pt = as_point(lam)
    ts = [float(t) for t in ts]
    if any(t < 0.0 or t > 2.0 for t in ts):
        raise ValueError("t must lie in [0, 2]")
    near = [t for t in ts if t < 1.0 and t * abs(pt.z) <= 0.5]
    first = propagate(u, pt, [1.0] + near, direction, rtol=rtol)
    M = first.frames[1.0]
    C = first.cofactor_frames[1.0]
    v = np.array([0.0, -C.mantissa[2, 0], C.mantissa[1, 0]], dtype=complex)
    far = [t for t in ts if t not in near]
    res = propagate(u, pt, far, direction, start=1.0, rtol=rtol) if far else None
    out = []
    for t in ts:
        if t in near:
            F = first.frames[t]
            val = (F.mantissa[derivative, 1] * M.mantissa[0, 2]
                   - F.mantissa[derivative, 2] * M.mantissa[0, 1])
            out.append(LogScaledComplex(complex(val), F.log_gauge + M.log_gauge))
        else:
            F = res.frames[t]
            out.append(LogScaledComplex(complex(F.mantissa[derivative] @ v),
                                        F.log_gauge + C.log_gauge))
    return out


def eta_endpoint(u: CoeffPair, lam, direction: str = "forward",
                 rtol: float = DEFAULT_RTOL) -> LogScaledComplex:
    """``eta(2)`` from ``cof Phi(2)`` and the backward transfer ``Phi(1, 2)``.

    With ``r = e_1^T Phi(1, 2)``, ``eta(2) = cof_31 Phi(2) r_2 - cof_21 Phi(2) r_3``.
    Shares no propagation with :func:`delta`, so comparing the two tests
    ``eta(2) = -Delta`` rather than restating it.
    """
    pt = as_point(lam)
    C = propagate(u, pt, [2.0], direction, rtol=rtol).cofactor_frames[2.0]
    R = propagate(u, pt, [1.0], direction, start=2.0, rtol=rtol).frames[1.0]
    val = C.mantissa[2, 0] * R.mantissa[0, 1] - C.mantissa[1, 0] * R.mantissa[0, 2]
    return LogScaledComplex(complex(val), C.log_gauge + R.log_gauge)


def monodromy(u: CoeffPair, lam, direction: str = "forward",
              rtol: float = DEFAULT_RTOL) -> GaugedMatrix:
    """``M(lam) = Phi(1, lam)``."""
    return propagate(u, lam, [1.0], direction, rtol=rtol).frames[1.0]


def monodromy_with_cofactor(u: CoeffPair, lam, direction: str = "forward",
                            rtol: float = DEFAULT_RTOL) -> tuple[GaugedMatrix, GaugedMatrix]:
    res = propagate(u, lam, [1.0], direction, rtol=rtol)
    return res.frames[1.0], res.cofactor_frames[1.0]


@dataclass(frozen=True)
class MultiplierTriple:
    """Roots of ``det(M - tau I)`` with the distinguished index (or ``None``)."""

    tau: tuple
    tau3_index: int | None
    trace: LogScaledComplex
    adj_trace: LogScaledComplex

    @property
    def values(self) -> np.ndarray:
        return np.array([complex(t) for t in self.tau])

    @property
    def tau3(self) -> LogScaledComplex:
        if self.tau3_index is None:
            raise SelectionError("no distinguished multiplier was selected")
        return self.tau[self.tau3_index]

    def product(self) -> LogScaledComplex:
        return self.tau[0] * self.tau[1] * self.tau[2]

    def residual(self, j: int) -> float:
        """``|D(tau_j)|`` relative to the largest term of the cubic."""
        t = self.tau[j]
        terms = [t * t * t, -(self.trace * t * t), self.adj_trace * t,
                 LogScaledComplex(-1.0, 0.0)]
        ref = max(x.log_abs() for x in terms if not x.is_zero)
        return abs(sum(x.scaled(ref) for x in terms))


def _cubic_roots(a2: complex, a1: complex, a0: complex) -> list[complex]:
    """Roots of ``t^3 + a2 t^2 + a1 t + a0`` by Cardano on the depressed cubic."""
    P = a1 - a2 * a2 / 3.0
    Q = 2.0 * a2 ** 3 / 27.0 - a2 * a1 / 3.0 + a0
    disc = (Q / 2.0) ** 2 + (P / 3.0) ** 3
    sq = cmath.sqrt(disc)
    w = -Q / 2.0 + sq
    w_alt = -Q / 2.0 - sq
    if abs(w_alt) > abs(w):
        w = w_alt
    if w == 0:
        return [-a2 / 3.0] * 3
    c = w ** (1.0 / 3.0)
    om = cmath.exp(2j * math.pi / 3)
    out = []
    for k in range(3):
        ck = c * om ** k
        out.append(ck - P / (3.0 * ck) - a2 / 3.0)
    return out


def _newton(t: complex, a2: complex, a1: complex, a0: complex, iters: int = 2) -> complex:
    for _ in range(iters):
        f = ((t + a2) * t + a1) * t + a0
        df = (3.0 * t + 2.0 * a2) * t + a1
        if df == 0:
            break
        step = f / df
        t = t - step
        if abs(step) <= 1e-16 * abs(t):
            break
    return t


def multipliers(M: GaugedMatrix, adj: GaugedMatrix | None = None, lam=None,
                positivity_tol: float = 1e-6) -> MultiplierTriple:
    """Roots of ``tau^3 - tr(M) tau^2 + tr(adj M) tau - 1``.

    Parameters
    ----------
    M : GaugedMatrix
        Monodromy matrix.
    adj : GaugedMatrix, optional
        Its cofactor frame.  ``tr adj M`` formed from ``M`` loses about
        ``exp(-1.5 Re z)`` in relative accuracy, so pass the propagated one.
    lam : complex, optional
        Spectral parameter; enables the ``exp(z)`` proximity tie-break and
        rejects ``lam <= 1`` where no positive multiplier is distinguished.

    The largest root comes from Cardano's formula on the cubic rescaled by
    ``exp(s)``, the other two from ``tau_1 tau_2 = 1 / tau_3`` and
    ``tau_1 + tau_2 = (tr adj M - 1 / tau_3) / tau_3``; each root gets a
    Newton polish.
    """
    tr = M.trace()
    if adj is None:
        adj = GaugedMatrix(adjugate(M.mantissa), 2 * M.log_gauge)
    atr = adj.trace()
    s = max(0.0, tr.log_abs(), 0.5 * atr.log_abs())
    a2 = -tr.scaled(s)
    a1 = atr.scaled(2 * s)
    a0 = -math.exp(-3 * s)
    roots = _cubic_roots(a2, a1, a0)
    big = _newton(max(roots, key=abs), a2, a1, a0)
    prod = -a0 / big
    total = (a1 - prod) / big
    disc = cmath.sqrt(total * total - 4 * prod)
    r1 = (total + disc) / 2 if abs(total + disc) >= abs(total - disc) else (total - disc) / 2
    r2 = prod / r1 if r1 != 0 else 0j
    r1 = _newton(r1, a2, a1, a0)
    r2 = _newton(r2, a2, a1, a0)
    taus = tuple(LogScaledComplex(t, s) for t in (r1, r2, big))
    index = _select_tau3(taus, lam, positivity_tol)
    if index is not None and not _is_simple((r1, r2, big)[index], a2, a1):
        raise SelectionError("distinguished multiplier is not simple; roots: "
                             + ", ".join(f"{complex(t):.6g}" for t in taus))
    return MultiplierTriple(taus, index, tr, atr)


def _select_tau3(taus, lam, tol: float) -> int | None:
    names = ", ".join(f"{complex(t):.6g}" if abs(t.log_abs()) < 700 else
                      f"exp({t.log():.6g})" for t in taus)
    if lam is not None:
        lam = complex(lam)
        if lam.imag != 0:
            return None
        if lam.real <= 1.0:
            raise SelectionError(f"no distinguished multiplier for lam={lam.real} <= 1; "
                                 f"roots: {names}")
    cands = [j for j, t in enumerate(taus)
             if abs(t.mantissa.imag) <= tol * abs(t.mantissa) and t.mantissa.real > 0]
    if len(cands) > 1 and lam is not None:
        z = as_point(lam).z.real
        cands = [j for j in cands if abs(taus[j].log_abs() - z) < 1.0]
    if len(cands) != 1:
        raise SelectionError(f"expected exactly one simple positive multiplier, found "
                             f"{len(cands)}; roots: {names}")
    return cands[0]


def _is_simple(t: complex, a2: complex, a1: complex, tol: float = 1e-6) -> bool:
    """``D'(tau)`` is not negligible against its largest term."""
    terms = (3 * t * t, 2 * a2 * t, a1)
    return abs(sum(terms)) > tol * max(abs(x) for x in terms)


def tau3(u: CoeffPair, lam: float, rtol: float = DEFAULT_RTOL) -> LogScaledComplex:
    """Distinguished real positive multiplier at real ``lam > 1``."""
    M, C = monodromy_with_cofactor(u, lam, rtol=rtol)
    return multipliers(M, C, lam).tau3
