"""Complex scalars with a separated real log-magnitude."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LogScaledComplex:
    """Represents ``mantissa * exp(log_scale)``.

    The mantissa magnitude is kept in ``[1/2, 2)``; zero is stored as
    ``(0, 0)``.
    """

    mantissa: complex
    log_scale: float

    def __post_init__(self):
        m = complex(self.mantissa)
        s = float(self.log_scale)
        if not (cmath.isfinite(m) and math.isfinite(s)):
            raise FloatingPointError(f"non-finite log-scaled value ({m}, {s})")
        if m == 0:
            m, s = 0j, 0.0
        else:
            r = abs(m)
            if not 0.5 <= r < 2.0:
                k = math.floor(math.log2(r))
                m = complex(math.ldexp(m.real, -k), math.ldexp(m.imag, -k))
                s += k * math.log(2.0)
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "log_scale", s)

    @classmethod
    def from_complex(cls, value: complex, log_scale: float = 0.0) -> LogScaledComplex:
        return cls(complex(value), log_scale)

    @classmethod
    def from_log(cls, log_value: complex) -> LogScaledComplex:
        """Build ``exp(log_value)`` without overflow."""
        log_value = complex(log_value)
        return cls(cmath.exp(1j * log_value.imag), log_value.real)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    def __complex__(self) -> complex:
        if self.is_zero:
            return 0j
        return self.mantissa * math.exp(self.log_scale)

    def to_complex(self) -> complex:
        return complex(self)

    @property
    def real(self) -> float:
        return complex(self).real

    def log_abs(self) -> float:
        if self.is_zero:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.log_scale

    def arg(self) -> float:
        return math.atan2(self.mantissa.imag, self.mantissa.real)

    def log(self) -> complex:
        """Principal complex logarithm."""
        return complex(self.log_abs(), self.arg())

    def scaled(self, log_ref: float) -> complex:
        """Value times ``exp(-log_ref)``, as an ordinary complex number."""
        if self.is_zero:
            return 0j
        return self.mantissa * math.exp(self.log_scale - log_ref)

    def __mul__(self, other) -> LogScaledComplex:
        if not isinstance(other, LogScaledComplex):
            other = LogScaledComplex.from_complex(other)
        return LogScaledComplex(self.mantissa * other.mantissa, self.log_scale + other.log_scale)

    __rmul__ = __mul__

    def __truediv__(self, other) -> LogScaledComplex:
        if not isinstance(other, LogScaledComplex):
            other = LogScaledComplex.from_complex(other)
        if other.is_zero:
            raise ZeroDivisionError("log-scaled division by zero")
        return LogScaledComplex(self.mantissa / other.mantissa, self.log_scale - other.log_scale)

    def __add__(self, other) -> LogScaledComplex:
        if not isinstance(other, LogScaledComplex):
            other = LogScaledComplex.from_complex(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        s = max(self.log_scale, other.log_scale)
        return LogScaledComplex(self.scaled(s) + other.scaled(s), s)

    __radd__ = __add__

    def __neg__(self) -> LogScaledComplex:
        return LogScaledComplex(-self.mantissa, self.log_scale)

    def __sub__(self, other) -> LogScaledComplex:
        if not isinstance(other, LogScaledComplex):
            other = LogScaledComplex.from_complex(other)
        return self + (-other)

    def conjugate(self) -> LogScaledComplex:
        return LogScaledComplex(self.mantissa.conjugate(), self.log_scale)

    def sqrt(self) -> LogScaledComplex:
        """Principal square root."""
        if self.is_zero:
            return self
        return LogScaledComplex(cmath.sqrt(self.mantissa), 0.5 * self.log_scale)

    def rel_diff(self, other: LogScaledComplex) -> float:
        """``|self - other| / max(|self|, |other|)``."""
        if self.is_zero and other.is_zero:
            return 0.0
        s = max(self.log_abs(), other.log_abs())
        return abs(self.scaled(s) - other.scaled(s))


def lsc_sum(terms) -> LogScaledComplex:
    out = LogScaledComplex(0j, 0.0)
    for t in terms:
        out = out + t
    return out


def log_abs_array(values: np.ndarray, log_scale: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(values)) + log_scale
