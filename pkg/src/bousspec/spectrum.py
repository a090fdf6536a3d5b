"""
Three-point eigenvalues inside the disks ``|lam^(1/3) - 2 pi n / sqrt3| < 1``.

Roots are bracketed and refined on the real axis in the cube-root variable
``z`` using the normalized function

    g(z) = Delta(z^3) / ((2 / 3 sqrt3 lam) exp(3 z / 2)),

which is ``sin(sqrt3 z / 2)`` up to exponentially small terms when ``u = 0``.
A winding-number count over the disk boundary certifies that no complex
eigenvalue was missed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .charfn import delta, delta_real
from .coeffs import CoeffPair, transform_reflect, transform_shift, transform_star
from .logscale import LogScaledComplex
from .propagator import DEFAULT_RTOL

SQRT3 = math.sqrt(3.0)
DESIGN_LIMIT = 20
SCAN_POINTS = 33
Z_TOL = 1e-10


class SpectrumError(RuntimeError):
    """Base class for localization failures."""


class LocalizationError(SpectrumError):
    pass


class AmbiguityError(SpectrumError):
    pass


class WindingError(SpectrumError):
    pass


class ContourError(SpectrumError):
    pass


class ConsistencyError(SpectrumError):
    pass


class TrackingLossError(SpectrumError):
    pass


def unperturbed_z(n: int) -> float:
    if n == 0:
        raise ValueError("n = 0 has no eigenvalue")
    return 2 * math.pi * n / SQRT3


def unperturbed_eigenvalue(n: int) -> float:
    """``(2 pi n / sqrt3)^3``."""
    return unperturbed_z(n) ** 3


def unperturbed_slope(n: int) -> float:
    """``dDelta_0 / dlam`` at ``mu_n^o`` (``n >= 1``).

    At a zero of the sine factor only its derivative survives:
    ``(2 / 9 z^5) (-1)^n (cosh(3 z / 2) - (-1)^n)``.
    """
    if n < 1:
        raise ValueError("unperturbed_slope needs n >= 1")
    z = unperturbed_z(n)
    sgn = -1.0 if n % 2 else 1.0
    return 2.0 / (9.0 * z ** 5) * sgn * (math.cosh(1.5 * z) - sgn)


def solve_record(u: CoeffPair, n: int, **kw) -> EigenvalueRecord:
    """:func:`solve_in_disk` for ``n >= 1``; for ``n <= -1`` the record of the
    positive-index solve on ``(u_*)^-`` with ``mu`` and ``z`` negated."""
    if n > 0:
        return solve_in_disk(u, n, **kw)
    if n == 0:
        raise ValueError("n = 0 has no eigenvalue")
    rec = solve_in_disk(transform_reflect(transform_star(u)), -n, **kw)
    return EigenvalueRecord(n, -rec.mu, winding_verified=rec.winding_verified,
                            refinement_residual=rec.refinement_residual, z=-rec.z,
                            derivative=rec.derivative, history=rec.history)


@dataclass(frozen=True)
class DiskIndex:
    n: int

    def __post_init__(self):
        if self.n == 0:
            raise ValueError("disks are indexed by nonzero integers")

    @property
    def z_center(self) -> float:
        return unperturbed_z(abs(self.n))

    @property
    def lambda_interval(self) -> tuple[float, float]:
        lo, hi = (self.z_center - 1) ** 3, (self.z_center + 1) ** 3
        return (lo, hi) if self.n > 0 else (-hi, -lo)

    def contains(self, lam: float) -> bool:
        lam = complex(lam) * (1 if self.n > 0 else -1)
        z = lam ** (1.0 / 3.0) if lam.real > 0 else cmath.exp(cmath.log(lam) / 3)
        return abs(z - self.z_center) < 1.0


@dataclass
class EigenvalueRecord:
    n: int
    mu: float
    mu_tilde: float | None = None
    winding_verified: bool = False
    refinement_residual: float = float("nan")
    z: float = float("nan")
    derivative: float = float("nan")
    history: list = field(default_factory=list, repr=False)


def _local_log_scale(z: complex) -> float:
    """log of ``(2 / 3 sqrt3 |lam|) exp(3 Re z / 2)``."""
    return math.log(2 / (3 * SQRT3)) - 3 * math.log(abs(z)) + 1.5 * z.real


def normalized_delta(u: CoeffPair, z: float, direction: str = "forward",
                     rtol: float = DEFAULT_RTOL) -> float:
    """``g(z)``: real ``Delta(z^3)`` divided by its local scale."""
    d = delta_real(u, z ** 3, direction, rtol)
    return d.scaled(_local_log_scale(complex(z))).real


def _refine(g, a: float, fa: float, b: float, fb: float, tol: float):
    history = []
    # bisection down to a bracket where the secant phase is safe
    while b - a > 1e-2:
        c = 0.5 * (a + b)
        fc = g(c)
        history.append((c, fc))
        if fc == 0:
            return c, fc, history
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b, fb = c, fc
    # Illinois false position; stops on |dz| <= tol
    last = a if abs(fa) < abs(fb) else b
    side = 0
    for _ in range(100):
        c = (a * fb - b * fa) / (fb - fa)
        fc = g(c)
        history.append((c, fc))
        if fc == 0:
            return c, fc, history
        if (fc > 0) == (fb > 0):
            b, fb = c, fc
            if side == 1:
                fa *= 0.5
            side = 1
        else:
            a, fa = c, fc
            if side == -1:
                fb *= 0.5
            side = -1
        if abs(c - last) <= tol:
            break
        last = c
    return c, fc, history


def solve_in_disk(u: CoeffPair, n: int, direction: str = "forward", *,
                  scan_points: int = SCAN_POINTS, z_tol: float = Z_TOL,
                  check_winding: bool = True, winding_samples: int = 64,
                  bracket: tuple[float, float] | None = None,
                  allow_beyond_limit: bool = False,
                  rtol: float = DEFAULT_RTOL) -> EigenvalueRecord:
    """The unique real eigenvalue ``mu_n`` in the disk ``D_n`` (``n >= 1``).

    Parameters
    ----------
    u : CoeffPair
        Mean-zero coefficients.
    n : int
        Positive disk index.
    direction : {"forward", "transpose"}
        ``"transpose"`` finds ``mu~_n`` from the transpose characteristic
        function.
    bracket : (float, float), optional
        Warm-start ``z`` bracket; used only if ``g`` changes sign on it.

    Raises
    ------
    LocalizationError
        No sign change of ``g`` on the disk's real interval.
    AmbiguityError
        More than one sign change.
    WindingError
        The boundary winding number is not 1.
    """
    u.require_mean_zero()
    if n < 1:
        raise ValueError("solve_in_disk needs n >= 1; use solve_negative for n < 0")
    if n > DESIGN_LIMIT and not allow_beyond_limit:
        raise ValueError(f"n={n} exceeds the design limit {DESIGN_LIMIT}")
    zc = unperturbed_z(n)
    g = lambda zz: normalized_delta(u, zz, direction, rtol)

    found = None
    if bracket is not None:
        a, b = bracket
        a, b = max(a, zc - 1), min(b, zc + 1)
        if a < b:
            fa, fb = g(a), g(b)
            if fa * fb < 0:
                found = (a, fa, b, fb)
    if found is None:
        grid = zc + np.linspace(-1.0, 1.0, scan_points)
        vals = [g(zz) for zz in grid]
        changes = [i for i in range(scan_points - 1) if vals[i] * vals[i + 1] <= 0
                   and not (vals[i] == 0 and i > 0)]
        if not changes:
            raise LocalizationError(
                f"no sign change of Delta in D_{n} (direction={direction}); "
                "coefficients too large for disk localization")
        if len(changes) > 1:
            raise AmbiguityError(
                f"{len(changes)} sign changes of Delta in D_{n}; "
                "coefficients outside the small-ball regime")
        i = changes[0]
        found = (grid[i], vals[i], grid[i + 1], vals[i + 1])
    a, fa, b, fb = found
    if fa == 0:
        zr, fr, hist = a, 0.0, []
    elif fb == 0:
        zr, fr, hist = b, 0.0, []
    else:
        zr, fr, hist = _refine(g, a, fa, b, fb, z_tol)
    hd = 1e-5
    deriv = (g(zr + hd) - g(zr - hd)) / (2 * hd)
    if abs(deriv) < 1e-6:
        raise AmbiguityError(f"eigenvalue in D_{n} is not simple (dg/dz={deriv:.3g})")
    rec = EigenvalueRecord(n, zr ** 3, z=zr, refinement_residual=abs(fr),
                           derivative=deriv, history=hist)
    if check_winding:
        w = winding_count(u, n, winding_samples, direction=direction, rtol=rtol)
        if w != 1:
            raise WindingError(f"winding number {w} != 1 around D_{n}")
        rec.winding_verified = True
    return rec


def solve_transpose(u: CoeffPair, n: int, cross_check: bool = True, tol: float = 1e-8,
                    **kw) -> float:
    """``mu~_n(u) = mu_n(u^-)``, optionally cross-checked against the root of
    the transpose characteristic function."""
    mu_t = solve_in_disk(transform_reflect(u), n, **kw).mu
    if cross_check:
        kw = dict(kw, check_winding=False)
        direct = solve_in_disk(u, n, direction="transpose", **kw).mu
        if abs(direct - mu_t) > tol * abs(mu_t):
            raise ConsistencyError(f"transpose routes disagree in D_{n}: "
                                   f"{mu_t!r} vs {direct!r}")
    return mu_t


def solve_negative(u: CoeffPair, n: int, **kw) -> float:
    """``mu_n(u) = -mu_{-n}((u_*)^-)`` for ``n <= -1``."""
    if n > -1:
        raise ValueError("solve_negative needs n <= -1")
    return -solve_in_disk(transform_reflect(transform_star(u)), -n, **kw).mu


def eigenvalue(u: CoeffPair, n: int, **kw) -> float:
    """``mu_n`` for any nonzero ``n``."""
    return solve_in_disk(u, n, **kw).mu if n > 0 else solve_negative(u, n, **kw)


def winding_count(u: CoeffPair, n: int, samples: int = 64, *, center: float | None = None,
                  radius: float = 1.0, direction: str = "forward",
                  rtol: float = DEFAULT_RTOL, frac_tol: float = 0.2) -> int:
    """Zeros of ``Delta`` inside the image of ``|z - center| = radius``.

    ``center`` defaults to ``2 pi n / sqrt3``.
    """
    if samples < 64:
        raise ValueError("at least 64 contour samples are required")
    zc = unperturbed_z(n) if center is None else center
    theta = 2 * np.pi * np.arange(samples) / samples
    zs = zc + radius * np.exp(1j * theta)
    vals = [delta(u, complex(zz) ** 3, direction, rtol) for zz in zs]
    logs = np.array([v.log_abs() for v in vals])
    if np.min(logs) < np.median(logs) + math.log(1e-6):
        raise ContourError(f"|Delta| nearly vanishes on the contour around z={zc}")
    phases = np.array([v.arg() for v in vals])
    inc = np.diff(np.append(phases, phases[0]))
    inc = (inc + np.pi) % (2 * np.pi) - np.pi
    total = inc.sum() / (2 * np.pi)
    k = int(round(total))
    if abs(total - k) > frac_tol:
        raise ContourError(f"winding sum {total:.3f} is not close to an integer")
    return k


def flow_track(u: CoeffPair, n: int, t_grid, *, rtol: float = DEFAULT_RTOL,
               **kw) -> list[tuple[float, float]]:
    """``mu_n`` of the shifted coefficients ``u(. + t)`` along ``t_grid``.

    Each solve is warm-started from the previous root; a jump of more than
    half the disk radius in ``z`` is reported as a tracking loss.
    """
    kw.setdefault("check_winding", False)
    out = []
    z_prev = None
    for t in t_grid:
        br = None if z_prev is None else (z_prev - 0.05, z_prev + 0.05)
        rec = solve_in_disk(transform_shift(u, float(t)), n, bracket=br, rtol=rtol, **kw)
        if z_prev is not None and abs(rec.z - z_prev) > 0.5:
            raise TrackingLossError(f"mu_{n} jumped from z={z_prev} to z={rec.z} at t={t}")
        z_prev = rec.z
        out.append((float(t), rec.mu))
    return out


def delta_scale(z: complex) -> LogScaledComplex:
    """Local magnitude ``(2 / 3 sqrt3 lam) exp(3 z / 2)`` used to normalize ``Delta``."""
    return LogScaledComplex.from_log(_local_log_scale(complex(z)))
