"""
Acceptance run: one test per criterion, each recording a pass/fail line that
the terminal summary prints (see ``conftest.py``).  Run alone with

    pytest tests/test_acceptance.py -v
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from bousspec.charfn import (delta, delta0_closed, eta_endpoint, monodromy_with_cofactor,
                             multipliers, point_data)
from bousspec.coeffs import (CoeffPair, predictors, random_coeffs, single_harmonic_family,
                             transform_reflect, transform_star)
from bousspec.norming import norming_sine_any, transpose_route_check
from bousspec.propagator import propagate
from bousspec.spectrum import (DiskIndex, eigenvalue, flow_track, solve_in_disk, solve_negative,
                               unperturbed_eigenvalue, unperturbed_z, winding_count)
from bousspec.verify import random_lambda_samples, symplectic_defect

SQRT3 = math.sqrt(3.0)
SEED = 20241015
ELAPSED: dict[int, float] = {}


@pytest.fixture
def record(acceptance_log):
    start = time.perf_counter()

    def _record(k: int, passed: bool, detail: str) -> None:
        ELAPSED[k] = time.perf_counter() - start
        acceptance_log[k] = (bool(passed), detail)
        print(f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}")

    return _record


def _mu_signed(n: int) -> float:
    return unperturbed_eigenvalue(abs(n)) * (1 if n > 0 else -1)


def test_criterion_01_unperturbed_spectrum(record):
    zero = CoeffPair.zero()
    t0 = time.perf_counter()
    errs = {}
    for n in range(1, 11):
        errs[n] = abs(solve_in_disk(zero, n).mu / _mu_signed(n) - 1)
        errs[-n] = abs(solve_negative(zero, -n) / _mu_signed(-n) - 1)
    runtime = time.perf_counter() - t0
    worst = max(errs.values())
    ok = worst <= 1e-8 and runtime < 30
    record(1, ok, f"max rel err {worst:.2e} (<= 1e-8), runtime {runtime:.1f} s (< 30 s)")
    assert ok


def test_criterion_02_closed_form_delta(record):
    zero = CoeffPair.zero()
    lams = np.logspace(math.log10(5), math.log10(5000), 100)
    dev = [abs(complex(delta(zero, float(lam)) / delta0_closed(float(lam))) - 1) for lam in lams]
    worst = max(dev)
    record(2, worst <= 1e-8, f"max |Delta/Delta0 - 1| = {worst:.2e} over 100 lam in [5, 5000]")
    assert worst <= 1e-8


def test_criterion_03_structural_identities(record):
    rng = np.random.default_rng(SEED)
    det1, det2, sym, eta, prod, t3_ok = [], [], [], [], [], True
    for _ in range(50):
        u = random_coeffs(rng, rng.uniform(0.005, 0.1))
        lam = float(random_lambda_samples(rng, 1)[0])
        res = propagate(u, lam, [1.0, 2.0])
        det1.append((abs(complex(res.frames[1.0].det()) - 1), lam))
        det2.append((abs(complex(res.frames[2.0].det()) - 1), lam))
        sym.append(symplectic_defect(u, lam))
        eta.append(eta_endpoint(u, lam).rel_diff(-point_data(u, lam).delta()))
        M, C = monodromy_with_cofactor(u, lam)
        mt = multipliers(M, C, lam)
        prod.append(abs(complex(mt.product()) - 1))
        t3 = mt.tau3.mantissa
        t3_ok &= t3.real > 0 and t3.imag == 0
    det_worst = max(det1 + det2)[0]
    parts = {
        "det": det_worst <= 1e-9,
        "symplectic": max(sym) <= 1e-8,
        "eta(2)": max(eta) <= 1e-10,
        "product": max(prod) <= 1e-9,
        "tau3>0": t3_ok,
    }
    ok = all(parts.values())

    def _det(rows, x):
        d, lam = max(rows)
        n_bad = sum(v > 1e-9 for v, _ in rows)
        return f"|det Phi({x}) - 1| worst {d:.1e} at lam={lam:.0f}, {n_bad}/50 above 1e-9"

    detail = (f"{_det(det1, 1)}; {_det(det2, 2)}; symplectic {max(sym):.1e}; "
              f"eta(2) {max(eta):.1e}; product {max(prod):.1e}; tau3>0 {t3_ok}")
    if not ok:
        detail += "; failing: " + ", ".join(k for k, v in parts.items() if not v)
    record(3, ok, detail)
    assert ok, parts


def test_criterion_04_counting(record):
    rng = np.random.default_rng(SEED + 4)
    shape = random_coeffs(rng, 1.0)
    bad = []
    for eps in (0.0, 0.02, 0.08):
        u = shape * eps if eps else CoeffPair.zero()
        for n in range(1, 13):
            if winding_count(u, n) != 1:
                bad.append(("disk", eps, n))
            mid = 0.5 * (unperturbed_z(n) + unperturbed_z(n + 1))
            if winding_count(u, n, center=mid, radius=0.3) != 0:
                bad.append(("control", eps, n))
    record(4, not bad, f"72 contours (36 disks = 1, 36 controls = 0); "
                       f"mismatches: {bad or 'none'}")
    assert not bad


def _scaling(kind: str, indices) -> tuple[dict, dict]:
    out = {}
    for eps in (0.02, 0.04):
        u = single_harmonic_family(eps)
        res = {}
        for n in indices:
            g, b = predictors(u, n)
            if kind == "thm11":
                res[n] = abs(eigenvalue(u, n) - _mu_signed(n) + g - b / SQRT3)
            else:
                res[n] = abs(norming_sine_any(u, n) - g + SQRT3 * b)
        out[eps] = res
    fit = {eps: max(abs(n) * r / eps ** 2 for n, r in res.items()) for eps, res in out.items()}
    ratio = {n: out[0.04][n] / out[0.02][n] for n in indices}
    return fit, ratio


def test_criterion_05_theorem11_residuals(record):
    fit, ratio = _scaling("thm11", range(1, 13))
    outside = {n: round(r, 2) for n, r in ratio.items() if not 2 <= r <= 8}
    ok = max(fit.values()) <= 50 and not outside
    record(5, ok, f"C fit {fit[0.02]:.4f} / {fit[0.04]:.4f} (<= 50); ratios "
                  f"{min(ratio.values()):.2f}..{max(ratio.values()):.2f} (window [2, 8]); "
                  f"outside: {outside or 'none'}")
    assert ok


def test_criterion_06_theorem12_residuals(record):
    indices = [n for n in range(-12, 13) if n]
    zero = CoeffPair.zero()
    h0 = max(abs(norming_sine_any(zero, n)) for n in indices)
    fit, ratio = _scaling("thm12", indices)
    outside = {n: float(f"{r:.3g}") for n, r in ratio.items() if not 2 <= r <= 8}
    ok = h0 <= 1e-6 and max(fit.values()) <= 50 and not outside
    record(6, ok, f"|h_sn(0)| max {h0:.1e} (<= 1e-6); C fit {fit[0.02]:.4f} / {fit[0.04]:.4f} "
                  f"(<= 50); ratio window [2, 8] violated at {len(outside)} of 24 indices: "
                  f"{outside or 'none'}")
    assert ok


def test_criterion_07_symmetry_closure(record):
    rng = np.random.default_rng(SEED + 7)
    worst_star, worst_reflect = 0.0, 0.0
    for _ in range(10):
        u = random_coeffs(rng, rng.uniform(0.01, 0.1))
        for n in range(1, 9):
            mu = solve_in_disk(u, n, check_winding=False).mu
            # transpose eigenvalue straight from the transpose characteristic function
            mu_t = solve_in_disk(u, n, direction="transpose", check_winding=False).mu
            mu_neg_star = eigenvalue(transform_star(u), -n, check_winding=False)
            mu_reflect = solve_in_disk(transform_reflect(u), n, check_winding=False).mu
            worst_star = max(worst_star, abs(mu_t + mu_neg_star) / abs(mu))
            worst_reflect = max(worst_reflect, abs(mu_t - mu_reflect) / abs(mu))
    ok = worst_star <= 1e-8 and worst_reflect <= 1e-8
    record(7, ok, f"|mu~ + mu_-n(u*)|/|mu| {worst_star:.1e}, |mu~ - mu_n(u-)|/|mu| "
                  f"{worst_reflect:.1e} (<= 1e-8; 10 u, n = 1..8)")
    assert ok


def test_criterion_08_norming_routes(record):
    rng = np.random.default_rng(SEED + 8)
    route, fd = 0.0, 0.0
    for _ in range(3):
        u = random_coeffs(rng, rng.uniform(0.01, 0.1))
        for n in range(1, 9):
            mu_t = solve_in_disk(u, n, direction="transpose", check_winding=False).mu
            chk = transpose_route_check(u, mu_t, direction="transpose")
            route = max(route, chk.route_rel_diff)
            fd = max(fd, chk.ratio_rel_diff)
    ok = route <= 1e-8 and fd <= 1e-6
    record(8, ok, f"phi~_3(1) cofactor vs direct {route:.1e} (<= 1e-8); "
                  f"eta~'(1)/eta~'(0) finite difference {fd:.1e} (<= 1e-6); 3 u, n = 1..8")
    assert ok


def test_criterion_09_flow_periodicity(record):
    u = random_coeffs(np.random.default_rng(SEED + 9), 0.05)
    ts = np.linspace(0.0, 1.0, 64)
    per, confined = 0.0, True
    for n in range(1, 7):
        mus = [mu for _, mu in flow_track(u, n, ts)]
        per = max(per, abs(mus[-1] - mus[0]) / abs(mus[0]))
        confined &= all(DiskIndex(n).contains(mu) for mu in mus)
    ok = per <= 1e-8 and confined
    record(9, ok, f"|mu(1) - mu(0)|/|mu| {per:.1e} (<= 1e-8); confined {confined}; n = 1..6")
    assert ok


def test_criterion_10_runtime(record):
    total = sum(ELAPSED.values())
    ran = sorted(ELAPSED)
    ok = total < 600 and ran == list(range(1, 10))
    record(10, ok, f"criteria 1-9 took {total:.0f} s (< 600 s) on this machine")
    assert ok
