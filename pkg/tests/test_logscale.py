from __future__ import annotations

import cmath
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bousspec.logscale import LogScaledComplex, log_abs_array, lsc_sum

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
nonzero_complex = st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e6, allow_nan=False,
                                     allow_infinity=False)


@given(nonzero_complex, st.floats(-500, 500))
def test_normalized_mantissa(value, s):
    x = LogScaledComplex(value, s)
    assert 0.5 <= abs(x.mantissa) < 2.0
    assert x.log_abs() == pytest.approx(math.log(abs(value)) + s, abs=1e-12)


def test_zero_is_canonical():
    z = LogScaledComplex(0j, 17.0)
    assert z.mantissa == 0 and z.log_scale == 0.0 and z.is_zero
    assert complex(z) == 0


def test_non_finite_rejected():
    with pytest.raises(FloatingPointError):
        LogScaledComplex(complex("nan"), 0.0)


@given(nonzero_complex, nonzero_complex)
def test_arithmetic_matches_complex(a, b):
    x, y = LogScaledComplex.from_complex(a), LogScaledComplex.from_complex(b)
    assert complex(x * y) == pytest.approx(a * b, rel=1e-13)
    assert complex(x / y) == pytest.approx(a / b, rel=1e-13)
    assert complex(x + y) == pytest.approx(a + b, rel=1e-12, abs=1e-12 * max(abs(a), abs(b)))
    assert complex(x - y) == pytest.approx(a - b, rel=1e-12, abs=1e-12 * max(abs(a), abs(b)))


def test_beyond_double_range():
    big = LogScaledComplex.from_log(1000.0 + 0.3j)
    small = LogScaledComplex.from_log(-999.0)
    prod = big * small
    assert complex(prod) == pytest.approx(cmath.exp(1.0 + 0.3j), rel=1e-12)
    assert (big + big).log_abs() == pytest.approx(1000 + math.log(2), abs=1e-12)
    assert big.sqrt().log() == pytest.approx(500.0 + 0.15j, abs=1e-12)


def test_addition_rescales_to_larger():
    a = LogScaledComplex.from_log(50.0)
    b = LogScaledComplex.from_log(10.0)
    assert (a + b).log_abs() == pytest.approx(math.log(math.exp(50) + math.exp(10)), abs=1e-12)


def test_rel_diff_and_helpers():
    a = LogScaledComplex.from_log(700.0)
    b = a * (1 + 1e-10)
    assert a.rel_diff(b) == pytest.approx(1e-10, rel=1e-4)
    assert lsc_sum([a, -a]).is_zero or abs(complex(lsc_sum([a, -a]).scaled(700))) < 1e-15
    assert a.conjugate().arg() == -a.arg()
    out = log_abs_array([1.0, 0.0, math.e], 2.0)
    assert out[0] == 2.0 and out[1] == -math.inf and out[2] == pytest.approx(3.0)
