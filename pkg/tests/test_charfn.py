from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bousspec.charfn import (SelectionError, delta, delta0_closed, delta_real, eta,
                             eta_endpoint, eta_profile, monodromy, monodromy_with_cofactor,
                             multipliers, point_data, tau3)
from bousspec.coeffs import CoeffPair, random_coeffs
from bousspec.propagator import GaugedMatrix, cube_root, propagate
from bousspec.spectrum import delta_scale, unperturbed_eigenvalue, unperturbed_z

OMEGA = cmath.exp(2j * math.pi / 3)


def mp_delta0(lam, dps=60):
    """Naive determinant from a high-precision matrix exponential."""
    with mpmath.workdps(dps):
        H = mpmath.matrix([[0, 1, 0], [0, 0, 1], [mpmath.mpf(lam), 0, 0]])
        E1, E2 = mpmath.expm(H), mpmath.expm(2 * H)
        return E1[0, 1] * E2[0, 2] - E1[0, 2] * E2[0, 1]


class TestDelta0:
    def test_regression_value_at_100(self):
        ref = float(mp_delta0(100))
        assert ref == pytest.approx(-3.13, abs=5e-3)
        assert delta0_closed(100).real == pytest.approx(ref, rel=1e-13)

    @pytest.mark.parametrize("lam", [5.0, 77.0, 900.0, 4000.0])
    def test_closed_form_against_mpmath(self, lam):
        assert complex(delta0_closed(lam)).real == pytest.approx(float(mp_delta0(lam)),
                                                                 rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 7, 20])
    def test_zeros_at_unperturbed(self, n):
        lam = unperturbed_eigenvalue(n)
        ratio = delta0_closed(lam).log_abs() - delta_scale(unperturbed_z(n)).log_abs()
        assert ratio < math.log(1e-12)

    @given(st.complex_numbers(min_magnitude=1.0, max_magnitude=1e4, allow_nan=False,
                              allow_infinity=False))
    def test_conjugate_symmetry(self, lam):
        if lam.imag == 0 or cube_root(lam).lam.real < 0 and abs(lam.imag) < 1e-9:
            return
        a, b = delta0_closed(lam.conjugate()), delta0_closed(lam).conjugate()
        assert a.rel_diff(b) < 1e-11


class TestDelta:
    def test_unperturbed_log_spaced(self):
        lams = np.exp(np.linspace(math.log(5), math.log(5000), 25))
        worst = max(delta(CoeffPair.zero(), lam).rel_diff(delta0_closed(lam)) for lam in lams)
        assert worst <= 1e-8

    @pytest.mark.parametrize("lam", [-300.0, 40 + 25j, -8 - 60j])
    def test_unperturbed_off_axis(self, lam):
        assert delta(CoeffPair.zero(), lam).rel_diff(delta0_closed(lam)) <= 1e-9

    def test_vanishes_at_first_eigenvalue(self):
        lam = unperturbed_eigenvalue(1)
        assert lam == pytest.approx(47.737, abs=1e-3)
        d = delta(CoeffPair.zero(), lam)
        assert d.log_abs() - delta_scale(unperturbed_z(1)).log_abs() < math.log(1e-8)

    def test_small_lambda_matches_naive_determinant(self):
        u = random_coeffs(np.random.default_rng(3), 0.1)
        res = propagate(u, 6.0, [1.0, 2.0])
        F1, F2 = res.frames[1.0].value(), res.frames[2.0].value()
        naive = F1[0, 1] * F2[0, 2] - F1[0, 2] * F2[0, 1]
        assert complex(delta(u, 6.0)) == pytest.approx(naive, rel=1e-11)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10_000), st.floats(5.0, 2000.0))
    def test_real_on_real_axis(self, seed, lam):
        u = random_coeffs(np.random.default_rng(seed), 0.1)
        d = point_data(u, lam).delta()
        assert abs(d.mantissa.imag) <= 1e-9 * abs(d.mantissa)
        assert delta_real(u, lam).mantissa.imag == 0

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10_000), st.complex_numbers(min_magnitude=5, max_magnitude=1500,
                                                       allow_nan=False, allow_infinity=False))
    def test_conjugate_symmetry(self, seed, lam):
        if abs(lam.imag) < 1e-3:
            return
        u = random_coeffs(np.random.default_rng(seed), 0.1)
        assert delta(u, lam.conjugate()).rel_diff(delta(u, lam).conjugate()) <= 1e-10

    def test_gauge_offset_transparent(self):
        u = random_coeffs(np.random.default_rng(4), 0.1)
        for lam in (30.0, 1500.0, -200 + 10j):
            assert delta(u, lam).rel_diff(delta(u, lam, gauge_offset=-23.5)) <= 1e-12


class TestEta:
    def test_structural_zeros(self):
        u = random_coeffs(np.random.default_rng(5), 0.1)
        assert eta(u, 0.0, 100.0).is_zero
        assert eta(u, 1.0, 100.0).is_zero
        with pytest.raises(ValueError):
            eta(u, 2.5, 100.0)

    @pytest.mark.parametrize("lam", [9.0, 300.0, 1900.0, -150.0])
    def test_endpoint_equals_minus_delta(self, lam):
        u = random_coeffs(np.random.default_rng(6), 0.1)
        d = delta(u, lam)
        assert eta(u, 2.0, lam).rel_diff(-d) <= 1e-10
        assert eta_endpoint(u, lam).rel_diff(-d) <= 1e-10

    def test_profile_matches_definition_at_small_lambda(self):
        u = random_coeffs(np.random.default_rng(7), 0.2)
        lam = 8.0
        ts = [0.1, 0.35, 0.8, 1.3, 1.9]
        res = propagate(u, lam, ts + [1.0])
        F1 = res.frames[1.0].value()
        got = eta_profile(u, ts, lam)
        for t, g in zip(ts, got):
            Ft = res.frames[t].value()
            ref = Ft[0, 1] * F1[0, 2] - Ft[0, 2] * F1[0, 1]
            assert complex(g) == pytest.approx(ref, rel=1e-10, abs=1e-12)

    def test_derivative_rows(self):
        lam = 20.0
        ts = [0.0, 1.0]
        d1 = eta_profile(CoeffPair.zero(), ts, lam, derivative=1)
        M = propagate(CoeffPair.zero(), lam, [1.0]).frames[1.0]
        # eta'(0) = phi_3(1)
        assert d1[0].rel_diff(M.entry(0, 2)) < 1e-13


class TestMonodromy:
    @pytest.mark.parametrize("lam", [10.0, 500.0, 2 + 3j])
    def test_unperturbed_trace(self, lam):
        z = cube_root(lam).z
        tr = sum(cmath.exp(OMEGA ** k * z) for k in range(3))
        assert complex(monodromy(CoeffPair.zero(), lam).trace()) == pytest.approx(tr, rel=1e-12)

    def test_real_and_unimodular(self):
        u = random_coeffs(np.random.default_rng(8), 0.1)
        M = monodromy(u, 70.0)
        assert np.abs(M.mantissa.imag).max() == 0.0
        assert complex(M.det()) == pytest.approx(1.0, abs=1e-10)


class TestMultipliers:
    @pytest.mark.parametrize("n", [1, 2, 5, 12, 20])
    def test_unperturbed_roots(self, n):
        lam = unperturbed_eigenvalue(n)
        z = unperturbed_z(n)
        M, C = monodromy_with_cofactor(CoeffPair.zero(), lam)
        mt = multipliers(M, C, lam)
        # exp(w z) and exp(w^2 z) coincide here (phase pi n): a double root,
        # resolvable individually only to ~sqrt(eps); their mean is sharp
        logs = [t.log() for t in mt.tau]
        assert any(abs(cmath.exp(g - z) - 1) < 1e-12 for g in logs)
        small = [g for g in logs if abs(g.real - z) > 1]
        for g in small:
            assert abs(cmath.exp(g - OMEGA * z) - 1) < 1e-5
        mean = sum(cmath.exp(g + z / 2) for g in small) / 2
        assert mean == pytest.approx((-1) ** n, rel=1e-12)
        assert mt.tau3.log_abs() == pytest.approx(z, abs=1e-10)
        assert mt.tau3.mantissa.real > 0
        assert complex(mt.product()) == pytest.approx(1.0, abs=1e-9)
        assert max(mt.residual(j) for j in range(3)) < 1e-12

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10_000), st.floats(2.0, 500.0))
    def test_against_numpy_eigvals(self, seed, lam):
        u = random_coeffs(np.random.default_rng(seed), 0.1)
        M, C = monodromy_with_cofactor(u, lam)
        mt = multipliers(M, C, lam)
        ref = np.linalg.eigvals(M.value())
        big = max(ref, key=abs)
        assert complex(mt.tau3) == pytest.approx(big.real, rel=1e-10)
        assert complex(mt.product()) == pytest.approx(1.0, abs=1e-9)

    def test_identity_is_not_simple(self):
        with pytest.raises(SelectionError, match="not simple|found"):
            multipliers(GaugedMatrix(np.eye(3, dtype=complex), 0.0), lam=5.0)

    def test_below_one_rejected(self):
        M, C = monodromy_with_cofactor(CoeffPair.zero(), 0.7)
        with pytest.raises(SelectionError, match="<= 1"):
            multipliers(M, C, 0.7)

    def test_tau3_positive_random(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            u = random_coeffs(rng, 0.1)
            lam = float(np.exp(rng.uniform(math.log(2), math.log(2000))))
            t = tau3(u, lam)
            assert t.mantissa.real > 0 and t.mantissa.imag == pytest.approx(0, abs=1e-6)


def test_eigenfunction_boundary_values():
    # at an eigenvalue eta vanishes at 0, 1, 2 relative to its interior size
    from bousspec.spectrum import solve_in_disk
    u = random_coeffs(np.random.default_rng(13), 0.05)
    for n in (1, 3, 6):
        mu = solve_in_disk(u, n, check_winding=False).mu
        ts = np.linspace(0, 2, 81)
        vals = eta_profile(u, ts, mu)
        peak = max(v.log_abs() for v in vals)
        for t in (0.0, 1.0, 2.0):
            v = vals[int(round(t * 40))]
            assert v.is_zero or v.log_abs() - peak < math.log(1e-7)
