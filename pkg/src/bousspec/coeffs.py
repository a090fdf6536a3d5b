"""
Periodic coefficient pairs ``u = (p, q)`` stored as finite trigonometric
polynomials on the unit period.

A :class:`TrigPoly` holds

    f(x) = mean + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x),   k = 1..K

so Fourier data, derivatives and norms are all exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

K_MAX = 64
COEFF_FILE_VERSION = 1

SQRT3 = math.sqrt(3.0)


def _as_coeff_array(values) -> np.ndarray:
    arr = np.array(values if values is not None else [], dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError("trigonometric coefficients must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Real 1-periodic trigonometric polynomial.

    Parameters
    ----------
    cos_coeffs, sin_coeffs : array_like
        ``a_k`` and ``b_k`` for ``k = 1..K``.  The shorter array is zero
        padded.
    mean : float
        The ``k = 0`` term.
    """

    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    mean: float = 0.0

    def __post_init__(self):
        a = _as_coeff_array(self.cos_coeffs)
        b = _as_coeff_array(self.sin_coeffs)
        K = max(a.size, b.size)
        if K > K_MAX:
            raise ValueError(f"at most {K_MAX} harmonics are supported, got {K}")
        a = np.pad(a, (0, K - a.size))
        b = np.pad(b, (0, K - b.size))
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "cos_coeffs", a)
        object.__setattr__(self, "sin_coeffs", b)
        object.__setattr__(self, "mean", float(self.mean))

    @classmethod
    def zero(cls) -> TrigPoly:
        return cls([], [], 0.0)

    @classmethod
    def cos(cls, k: int, amplitude: float) -> TrigPoly:
        """``amplitude * cos(2 pi k x)``."""
        a = np.zeros(k)
        a[k - 1] = amplitude
        return cls(a, [])

    @classmethod
    def sin(cls, k: int, amplitude: float) -> TrigPoly:
        """``amplitude * sin(2 pi k x)``."""
        b = np.zeros(k)
        b[k - 1] = amplitude
        return cls([], b)

    @property
    def order(self) -> int:
        return int(self.cos_coeffs.size)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(1, self.order + 1)

    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other: TrigPoly) -> TrigPoly:
        K = max(self.order, other.order)
        pad = lambda v: np.pad(v, (0, K - v.size))
        return TrigPoly(pad(self.cos_coeffs) + pad(other.cos_coeffs),
                        pad(self.sin_coeffs) + pad(other.sin_coeffs),
                        self.mean + other.mean)

    def __mul__(self, c: float) -> TrigPoly:
        return TrigPoly(c * self.cos_coeffs, c * self.sin_coeffs, c * self.mean)

    __rmul__ = __mul__

    def __neg__(self) -> TrigPoly:
        return self * -1.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        K = max(self.order, other.order)
        pad = lambda v: np.pad(v, (0, K - v.size))
        return (self.mean == other.mean
                and np.array_equal(pad(self.cos_coeffs), pad(other.cos_coeffs))
                and np.array_equal(pad(self.sin_coeffs), pad(other.sin_coeffs)))

    def derivative(self) -> TrigPoly:
        k = 2 * np.pi * self.wavenumbers
        return TrigPoly(k * self.sin_coeffs, -k * self.cos_coeffs, 0.0)

    def l2_norm(self) -> float:
        """L2 norm over one period, by Parseval."""
        return math.sqrt(self.mean ** 2
                         + 0.5 * float(np.sum(self.cos_coeffs ** 2 + self.sin_coeffs ** 2)))

    def reflect(self) -> TrigPoly:
        """``x -> f(1 - x)``."""
        return TrigPoly(self.cos_coeffs, -self.sin_coeffs, self.mean)

    def shift(self, t: float) -> TrigPoly:
        """``x -> f(x + t)``."""
        theta = 2 * np.pi * self.wavenumbers * t
        c, s = np.cos(theta), np.sin(theta)
        a, b = self.cos_coeffs, self.sin_coeffs
        return TrigPoly(a * c + b * s, b * c - a * s, self.mean)

    def to_dict(self) -> dict:
        return {"mean": self.mean,
                "cos": self.cos_coeffs.tolist(),
                "sin": self.sin_coeffs.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> TrigPoly:
        unknown = set(data) - {"mean", "cos", "sin"}
        if unknown:
            raise ValueError(f"unknown trigonometric-polynomial keys: {sorted(unknown)}")
        return cls(data.get("cos", []), data.get("sin", []), data.get("mean", 0.0))


def evaluate(f: TrigPoly, x):
    """Evaluate ``f`` at scalar or array ``x``."""
    x = np.asarray(x, dtype=float)
    if f.order == 0:
        out = np.full(x.shape, f.mean)
    else:
        theta = 2 * np.pi * np.multiply.outer(x, f.wavenumbers)
        out = f.mean + np.cos(theta) @ f.cos_coeffs + np.sin(theta) @ f.sin_coeffs
    return float(out) if out.ndim == 0 else out


def fourier_pair(f: TrigPoly, n: int) -> tuple[float, float]:
    """Return ``(int f cos 2 pi n x, int f sin 2 pi n x)`` over one period.

    Negative ``n`` follows the same integrals, so the sine coefficient flips
    sign.  ``n = 0`` is rejected; use ``f.mean``.
    """
    n = int(n)
    if n == 0:
        raise ValueError("n = 0 has no (cos, sin) pair; use the mean field")
    k = abs(n)
    if k > f.order:
        return 0.0, 0.0
    sign = 1.0 if n > 0 else -1.0
    return 0.5 * float(f.cos_coeffs[k - 1]), sign * 0.5 * float(f.sin_coeffs[k - 1])


@dataclass(frozen=True)
class CoeffPair:
    """The coefficient pair ``u = (p, q)`` of ``(y'' + p y)' + p y' + q y``."""

    p: TrigPoly
    q: TrigPoly

    @classmethod
    def zero(cls) -> CoeffPair:
        return cls(TrigPoly.zero(), TrigPoly.zero())

    @property
    def is_mean_zero(self) -> bool:
        return self.p.mean == 0.0 and self.q.mean == 0.0

    @property
    def is_zero(self) -> bool:
        return self == CoeffPair.zero()

    def require_mean_zero(self) -> None:
        if not self.is_mean_zero:
            raise ValueError(
                f"coefficients must have zero mean (p.mean={self.p.mean}, q.mean={self.q.mean})")

    def __mul__(self, c: float) -> CoeffPair:
        return CoeffPair(self.p * c, self.q * c)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"version": COEFF_FILE_VERSION, "p": self.p.to_dict(), "q": self.q.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> CoeffPair:
        if data.get("version") != COEFF_FILE_VERSION:
            raise ValueError(f"unsupported coefficient file version {data.get('version')!r}")
        unknown = set(data) - {"version", "p", "q"}
        if unknown:
            raise ValueError(f"unknown coefficient-file keys: {sorted(unknown)}")
        return cls(TrigPoly.from_dict(data.get("p", {})), TrigPoly.from_dict(data.get("q", {})))


def sobolev_norm(u: CoeffPair) -> float:
    """``||u||_1 = sqrt(||p'||^2 + ||q||^2)``."""
    return math.hypot(u.p.derivative().l2_norm(), u.q.l2_norm())


def predictors(u: CoeffPair, n: int) -> tuple[float, float]:
    """First-order eigenvalue predictors ``(gamma_n, beta_n)``.

    ``gamma_n = p'_sn / sqrt3 + q_cn`` and ``beta_n = p'_cn / sqrt3 - q_sn``,
    with Fourier integrals taken at the signed index ``n``.
    """
    u.require_mean_zero()
    dpc, dps = fourier_pair(u.p.derivative(), n)
    qc, qs = fourier_pair(u.q, n)
    return dps / SQRT3 + qc, dpc / SQRT3 - qs


def transform_star(u: CoeffPair) -> CoeffPair:
    """``u_* = (p, -q)``."""
    return CoeffPair(u.p, -u.q)


def transform_reflect(u: CoeffPair) -> CoeffPair:
    """``u^-(x) = u(1 - x)``."""
    return CoeffPair(u.p.reflect(), u.q.reflect())


def transform_shift(u: CoeffPair, t: float) -> CoeffPair:
    """``u(. + t)``."""
    return CoeffPair(u.p.shift(t), u.q.shift(t))


def single_harmonic_family(eps: float, weights=(1.0, 0.5, 1.0)) -> CoeffPair:
    """``(w0 cos 2 pi x + w1 sin 4 pi x, w2 sin 2 pi x)`` rescaled to ``||u||_1 = eps``."""
    w0, w1, w2 = weights
    u = CoeffPair(TrigPoly([w0, 0.0], [0.0, w1]), TrigPoly.sin(1, w2))
    norm = sobolev_norm(u)
    return u * (eps / norm) if norm > 0 else u


def random_coeffs(rng: np.random.Generator, norm: float, order: int = 4) -> CoeffPair:
    """Mean-zero random pair with prescribed ``||u||_1`` (for smoke batteries)."""
    u = CoeffPair(TrigPoly(rng.standard_normal(order), rng.standard_normal(order)),
                  TrigPoly(rng.standard_normal(order), rng.standard_normal(order)))
    return u * (norm / sobolev_norm(u))


def load_coeffs(path) -> CoeffPair:
    with open(path, encoding="utf-8") as fh:
        return CoeffPair.from_dict(json.load(fh))


def save_coeffs(u: CoeffPair, path) -> None:
    Path(path).write_text(json.dumps(u.to_dict(), indent=2) + "\n", encoding="utf-8")
