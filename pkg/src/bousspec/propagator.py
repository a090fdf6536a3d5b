"""
Fundamental matrix of ``(y'' + p y)' + p y' + q y = lam y`` on ``[0, 2]``.

The state rows are ``(y, y', y^[2])`` with the quasi-derivative
``y^[2] = y'' + p y``, so ``Phi' = H Phi`` with

    H = [[0, 1, 0], [-p, 0, 1], [lam - q, -p, 0]]

and the transpose equation uses ``[[0, 1, 0], [-p, 0, 1], [q - lam, -p, 0]]``.

Integration is an adaptive Dormand-Prince 8(5,3) pair applied to the step
map ``S_k = Phi(x_{k+1}, x_k)``.  Two frames are accumulated from the same
step maps:

* ``Phi <- S_k Phi`` (the fundamental matrix), and
* ``C <- cof(S_k) C`` (its cofactor matrix, ``cof Phi = Phi^{-T}`` since
  ``det Phi = 1``).

Entries of ``Phi`` grow like ``exp(|z| x)`` while its 2x2 minors grow only
like ``exp(|z| x / 2)``; forming minors from ``Phi`` afterwards cancels
almost all digits.  The cofactor frame carries them directly.  Each frame has
its own scalar gauge ``exp(log_gauge)`` renormalized by a power of two after
every accepted step.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.integrate import DOP853

from .coeffs import CoeffPair, evaluate
from .logscale import LogScaledComplex

OMEGA = cmath.exp(2j * math.pi / 3)
J = np.array([[0, 0, 1], [0, -1, 0], [1, 0, 0]], dtype=float)

DEFAULT_RTOL = 1e-14
MAX_STEPS = 200_000

_A = np.ascontiguousarray(DOP853.A, dtype=float)
_B = np.ascontiguousarray(DOP853.B, dtype=float)
_C = np.ascontiguousarray(DOP853.C, dtype=float)
_E3 = np.ascontiguousarray(DOP853.E3, dtype=float)
_E5 = np.ascontiguousarray(DOP853.E5, dtype=float)

_OK, _UNDERFLOW, _NONFINITE, _MAXSTEPS = 0, 1, 2, 3
_LN2 = math.log(2.0)


class PropagationError(RuntimeError):
    """Integration failed (step-size underflow, overflow or step budget)."""


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral parameter with its principal cube root."""

    lam: complex
    z: complex
    omega: complex = OMEGA


def cube_root(lam: complex) -> SpectralPoint:
    """Cube root with ``arg lam in (-pi, pi]`` and ``arg z in (-pi/3, pi/3]``."""
    lam = complex(lam)
    if lam == 0:
        raise ValueError("lam = 0 has a degenerate cube-root frame")
    phase = math.atan2(lam.imag, lam.real)  # cmath.phase raises on subnormal parts
    if phase <= -math.pi:
        phase = math.pi
    z = abs(lam) ** (1.0 / 3.0) * cmath.exp(1j * phase / 3.0)
    if lam.imag == 0 and lam.real > 0:
        z = complex(lam.real ** (1.0 / 3.0), 0.0)
    return SpectralPoint(lam, z)


def as_point(lam_or_pt) -> SpectralPoint:
    if isinstance(lam_or_pt, SpectralPoint):
        return lam_or_pt
    return cube_root(lam_or_pt)


@dataclass(frozen=True)
class GaugedMatrix:
    """3x3 complex matrix ``exp(log_gauge) * mantissa``."""

    mantissa: np.ndarray
    log_gauge: float = 0.0

    def value(self) -> np.ndarray:
        """Represented matrix (may overflow for large gauges)."""
        return self.mantissa * math.exp(self.log_gauge)

    def entry(self, i: int, j: int) -> LogScaledComplex:
        return LogScaledComplex(complex(self.mantissa[i, j]), self.log_gauge)

    def trace(self) -> LogScaledComplex:
        return LogScaledComplex(complex(np.trace(self.mantissa)), self.log_gauge)

    def det(self) -> LogScaledComplex:
        return LogScaledComplex(complex(np.linalg.det(self.mantissa)), 3 * self.log_gauge)

    def log_norm(self) -> float:
        """log of the max-entry magnitude."""
        return math.log(float(np.max(np.abs(self.mantissa)))) + self.log_gauge

    def renormalized(self) -> GaugedMatrix:
        m = float(np.max(np.abs(self.mantissa)))
        if m == 0:
            return GaugedMatrix(self.mantissa.copy(), 0.0)
        _, e = math.frexp(m)
        return GaugedMatrix(self.mantissa * 2.0 ** (-e), self.log_gauge + e * _LN2)

    def conjugated_by_j(self) -> GaugedMatrix:
        return GaugedMatrix(J @ self.mantissa @ J, self.log_gauge)

    def matmul(self, other: GaugedMatrix) -> GaugedMatrix:
        return GaugedMatrix(self.mantissa @ other.mantissa,
                            self.log_gauge + other.log_gauge).renormalized()


@dataclass
class PropagationResult:
    """Frames of ``Phi(x, start)`` and of its cofactor matrix at each station."""

    frames: dict
    cofactor_frames: dict
    stats: dict = field(default_factory=dict)

    def transpose_frame(self, x: float) -> GaugedMatrix:
        """``J cof(Phi) J``, the transpose-equation fundamental matrix."""
        return self.cofactor_frames[x].conjugated_by_j()


def coefficient_matrix(u: CoeffPair, x: float, pt, direction: str = "forward") -> np.ndarray:
    """``H(x) = H0 - Q(x)`` (or the transpose coefficient matrix)."""
    pt = as_point(pt)
    p = evaluate(u.p, x)
    q = evaluate(u.q, x)
    corner = pt.lam - q if direction == "forward" else q - pt.lam
    if direction not in ("forward", "transpose"):
        raise ValueError(f"unknown direction {direction!r}")
    return np.array([[0, 1, 0], [-p, 0, 1], [corner, -p, 0]], dtype=complex)


@numba.njit(cache=True)
def _trig(x, mean, a, b):
    K = a.size
    if K == 0:
        return mean
    th = 2.0 * np.pi * x
    c1, s1 = math.cos(th), math.sin(th)
    c, s = c1, s1
    out = mean
    for k in range(K):
        out += a[k] * c + b[k] * s
        c, s = c * c1 - s * s1, s * c1 + c * s1
    return out


@numba.njit(cache=True)
def _apply_h(lam, p, q, Y, out):
    # out = H @ Y with H = [[0,1,0],[-p,0,1],[lam-q,-p,0]]
    for j in range(3):
        y0 = Y[0, j]
        y1 = Y[1, j]
        y2 = Y[2, j]
        out[0, j] = y1
        out[1, j] = -p * y0 + y2
        out[2, j] = (lam - q) * y0 - p * y1


@numba.njit(cache=True)
def _cofactor(S, out):
    out[0, 0] = S[1, 1] * S[2, 2] - S[1, 2] * S[2, 1]
    out[0, 1] = -(S[1, 0] * S[2, 2] - S[1, 2] * S[2, 0])
    out[0, 2] = S[1, 0] * S[2, 1] - S[1, 1] * S[2, 0]
    out[1, 0] = -(S[0, 1] * S[2, 2] - S[0, 2] * S[2, 1])
    out[1, 1] = S[0, 0] * S[2, 2] - S[0, 2] * S[2, 0]
    out[1, 2] = -(S[0, 0] * S[2, 1] - S[0, 1] * S[2, 0])
    out[2, 0] = S[0, 1] * S[1, 2] - S[0, 2] * S[1, 1]
    out[2, 1] = -(S[0, 0] * S[1, 2] - S[0, 2] * S[1, 0])
    out[2, 2] = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]


@numba.njit(cache=True)
def _renorm(M):
    m = 0.0
    for i in range(3):
        for j in range(3):
            v = abs(M[i, j])
            if v > m:
                m = v
    if m == 0.0 or not np.isfinite(m):
        return 0
    _, e = math.frexp(m)
    f = 2.0 ** (-e)
    for i in range(3):
        for j in range(3):
            M[i, j] *= f
    return e


@numba.njit(cache=True)
def _integrate(lam, pm, pa, pb, qm, qa, qb, x0, stations, rtol, h_init, max_steps,
               A, B, Cn, E3, E5, record, init_scale):
    ns = stations.size
    phi_out = np.zeros((ns, 3, 3), dtype=np.complex128)
    cof_out = np.zeros((ns, 3, 3), dtype=np.complex128)
    phi_log = np.zeros(ns)
    cof_log = np.zeros(ns)
    ntr = max_steps if record else 1
    trace = np.zeros((ntr, 5))

    Phi = np.eye(3, dtype=np.complex128) * init_scale
    Cof = np.eye(3, dtype=np.complex128) * init_scale
    gphi = -math.log(init_scale)
    gcof = -math.log(init_scale)
    K = np.zeros((13, 3, 3), dtype=np.complex128)
    Y = np.zeros((3, 3), dtype=np.complex128)
    S = np.zeros((3, 3), dtype=np.complex128)
    CS = np.zeros((3, 3), dtype=np.complex128)
    T = np.zeros((3, 3), dtype=np.complex128)
    E5m = np.zeros((3, 3), dtype=np.complex128)
    E3m = np.zeros((3, 3), dtype=np.complex128)

    zr = max(1.0, abs(lam) ** (1.0 / 3.0))
    x = x0
    h = h_init
    accepted = 0
    rejected = 0
    err_sum = 0.0
    status = 0
    fail_x = x0
    idx = 0
    # stations equal to the start
    while idx < ns and stations[idx] == x0:
        phi_out[idx] = Phi
        cof_out[idx] = Cof
        phi_log[idx] = gphi
        cof_log[idx] = gcof
        idx += 1

    while idx < ns:
        target = stations[idx]
        d = target - x
        hit = False
        if abs(h) >= abs(d):
            h_try = d
            hit = True
        else:
            h_try = h
        if abs(h_try) < 1e-14 * max(1.0, abs(x)) and not hit:
            status = 1
            fail_x = x
            break
        # stages of the step map from the identity
        for i in range(12):
            for r in range(3):
                for c in range(3):
                    acc = 1.0 + 0.0j if r == c else 0.0j
                    for j in range(i):
                        acc += h_try * A[i, j] * K[j, r, c]
                    Y[r, c] = acc
            xi = x + Cn[i] * h_try
            p = _trig(xi, pm, pa, pb)
            q = _trig(xi, qm, qa, qb)
            _apply_h(lam, p, q, Y, K[i])
        for r in range(3):
            for c in range(3):
                acc = 1.0 + 0.0j if r == c else 0.0j
                for j in range(12):
                    acc += h_try * B[j] * K[j, r, c]
                S[r, c] = acc
        p = _trig(x + h_try, pm, pa, pb)
        q = _trig(x + h_try, qm, qa, qb)
        _apply_h(lam, p, q, S, K[12])
        # errors are measured on diag(1, zr, zr^2)^-1 S diag(1, zr, zr^2),
        # where all entries of the step map have comparable size
        smax = 1.0
        for r in range(3):
            for c in range(3):
                e5 = 0.0j
                e3 = 0.0j
                for j in range(13):
                    e5 += E5[j] * K[j, r, c]
                    e3 += E3[j] * K[j, r, c]
                wt = zr ** (c - r)
                E5m[r, c] = h_try * e5 * wt
                E3m[r, c] = h_try * e3 * wt
                if abs(S[r, c]) * wt > smax:
                    smax = abs(S[r, c]) * wt
        scale = rtol * smax
        n5 = 0.0
        n3 = 0.0
        for r in range(3):
            for c in range(3):
                n5 += abs(E5m[r, c] / scale) ** 2
                n3 += abs(E3m[r, c] / scale) ** 2
        if n5 == 0.0 and n3 == 0.0:
            err = 0.0
        else:
            err = n5 / math.sqrt((n5 + 0.01 * n3) * 9.0)
        if not np.isfinite(err):
            status = 2
            fail_x = x
            break
        if err <= 1.0:
            # accept: advance both frames
            for r in range(3):
                for c in range(3):
                    acc = 0.0j
                    for j in range(3):
                        acc += S[r, j] * Phi[j, c]
                    T[r, c] = acc
            Phi[:, :] = T
            _cofactor(S, CS)
            for r in range(3):
                for c in range(3):
                    acc = 0.0j
                    for j in range(3):
                        acc += CS[r, j] * Cof[j, c]
                    T[r, c] = acc
            Cof[:, :] = T
            gphi += _renorm(Phi) * 0.6931471805599453
            gcof += _renorm(Cof) * 0.6931471805599453
            x = target if hit else x + h_try
            err_sum += err * rtol
            if record and accepted < ntr:
                trace[accepted, 0] = x
                trace[accepted, 1] = gphi
                trace[accepted, 2] = gcof
                trace[accepted, 3] = err
                trace[accepted, 4] = abs(h_try)
            accepted += 1
            if not (np.isfinite(gphi) and np.isfinite(gcof)):
                status = 2
                fail_x = x
                break
            if hit:
                phi_out[idx] = Phi
                cof_out[idx] = Cof
                phi_log[idx] = gphi
                cof_log[idx] = gcof
                idx += 1
                while idx < ns and stations[idx] == x:
                    phi_out[idx] = Phi
                    cof_out[idx] = Cof
                    phi_log[idx] = gphi
                    cof_log[idx] = gcof
                    idx += 1
            fac = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** (-1.0 / 8.0))
            h_new = h_try * fac
            if hit and abs(h_new) < abs(h):
                h_new = h
            h = h_new
        else:
            rejected += 1
            h = h_try * max(0.2, 0.9 * err ** (-1.0 / 8.0))
        if accepted + rejected >= max_steps:
            status = 3
            fail_x = x
            break
    stats = np.array([accepted, rejected, err_sum, fail_x])
    return status, phi_out, phi_log, cof_out, cof_log, stats, trace[:min(accepted, ntr)]


def _initial_step(lam: complex) -> float:
    return min(0.05, 0.5 / (1.0 + abs(lam) ** (1.0 / 3.0)))


def propagate(u: CoeffPair, pt, stations, direction: str = "forward", start: float = 0.0,
              rtol: float = DEFAULT_RTOL, trace_csv=None,
              gauge_offset: float = 0.0) -> PropagationResult:
    """Integrate ``Phi(x, start)`` and hit each station exactly.

    Parameters
    ----------
    u : CoeffPair
    pt : SpectralPoint or complex
    stations : sequence of float
        Points in ``[0, 2]``; stations on either side of ``start`` are
        reached by integrating outward from ``start``.
    direction : {"forward", "transpose"}
    start : float
        Initial point; the frame is the identity there.
    rtol : float
        Relative local error tolerance of the step map.
    trace_csv : path, optional
        Dump per-step ``(x, gauge, cofactor gauge, error, h)`` rows.
    gauge_offset : float
        Start from ``exp(gauge_offset) * I`` with gauge ``-gauge_offset``
        (same represented frame, different rounding).

    Returns
    -------
    PropagationResult
        ``frames[x]`` holds ``Phi(x, start)``; ``cofactor_frames[x]`` holds
        ``cof Phi(x, start)``.
    """
    pt = as_point(pt)
    if direction not in ("forward", "transpose"):
        raise ValueError(f"unknown direction {direction!r}")
    st = sorted({float(s) for s in stations})
    if any(s < 0.0 or s > 2.0 for s in st) or not 0.0 <= start <= 2.0:
        raise ValueError("stations and start must lie in [0, 2]")
    # the transpose equation is the forward one at (-lam, p, -q)
    lam = pt.lam if direction == "forward" else -pt.lam
    qsign = 1.0 if direction == "forward" else -1.0
    args = (float(u.p.mean), np.asarray(u.p.cos_coeffs, dtype=float),
            np.asarray(u.p.sin_coeffs, dtype=float),
            qsign * float(u.q.mean), qsign * np.asarray(u.q.cos_coeffs, dtype=float),
            qsign * np.asarray(u.q.sin_coeffs, dtype=float))
    h0 = _initial_step(pt.lam)
    frames, cofs = {}, {}
    stats = {"accepted": 0, "rejected": 0, "error_estimate": 0.0}
    traces = []
    for side, sel in ((1.0, [s for s in st if s >= start]),
                      (-1.0, sorted((s for s in st if s < start), reverse=True))):
        if not sel:
            continue
        status, pm, pg, cm, cg, s, tr = _integrate(
            complex(lam), *args, float(start), np.array(sel, dtype=float), float(rtol),
            side * h0, MAX_STEPS, _A, _B, _C, _E3, _E5, trace_csv is not None,
            math.exp(gauge_offset))
        if status != _OK:
            what = {_UNDERFLOW: "step-size underflow (tolerance unreachable)",
                    _NONFINITE: "non-finite values despite gauging",
                    _MAXSTEPS: "step budget exhausted"}[status]
            raise PropagationError(f"{what} at x={s[3]:.6g}, lam={pt.lam}")
        for k, x in enumerate(sel):
            frames[x] = GaugedMatrix(pm[k].copy(), float(pg[k]))
            cofs[x] = GaugedMatrix(cm[k].copy(), float(cg[k]))
        stats["accepted"] += int(s[0])
        stats["rejected"] += int(s[1])
        stats["error_estimate"] += float(s[2])
        traces.append(tr)
    if trace_csv is not None:
        with open(trace_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "log_gauge", "cofactor_log_gauge", "error_norm", "h"])
            for tr in traces:
                w.writerows(tr.tolist())
    return PropagationResult(frames, cofs, stats)


def adjugate(M: np.ndarray) -> np.ndarray:
    """Cofactor matrix ``cof M`` (so ``M^{-T} = cof M / det M``)."""
    out = np.empty((3, 3), dtype=complex)
    _cofactor(np.ascontiguousarray(M, dtype=complex), out)
    return out


def liouville_defect(frame: GaugedMatrix) -> float:
    """``|det Phi - 1| / max(1, ||Phi||)``."""
    d = frame.det()
    log_ref = max(0.0, frame.log_norm())
    return abs(d.scaled(log_ref) - math.exp(-log_ref))


def transpose_from_forward(frame: GaugedMatrix, tol: float = 1e-6) -> GaugedMatrix:
    """``J (Phi^T)^{-1} J`` through the adjugate of ``Phi^T``.

    Exact for ``det Phi = 1``.  Entries of ``Phi`` are dominated by one
    growing mode, so this loses about ``exp(-1.5 Re z)`` in relative
    accuracy; :attr:`PropagationResult.cofactor_frames` applies the same
    identity step by step and does not.
    """
    if liouville_defect(frame) > tol:
        raise ValueError(f"inconsistent frame: det deviates from 1 "
                         f"(normalized defect {liouville_defect(frame):.3g})")
    return GaugedMatrix(J @ adjugate(frame.mantissa) @ J, 2 * frame.log_gauge).renormalized()


def unperturbed_matrix(x: float, pt) -> np.ndarray:
    """Closed form of ``exp(x H0)`` built from the three exponentials.

    Column ``j`` holds ``(phi_j, phi_j', phi_j'')`` with
    ``phi_j = (1 / 3 z^{j-1}) sum_k omega^{k(1-j)} exp(omega^k z x)``.
    """
    pt = as_point(pt)
    z, w = pt.z, pt.omega
    out = np.zeros((3, 3), dtype=complex)
    for j in range(3):
        for r in range(3):
            out[r, j] = sum(w ** (k * (-j)) * (w ** k * z) ** r * cmath.exp(w ** k * z * x)
                            for k in range(3)) / (3 * z ** j)
    return out
