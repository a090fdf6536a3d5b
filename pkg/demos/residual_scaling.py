"""Residuals of the first-order eigenvalue and norming-constant predictors
along a single-harmonic family, for two sizes of the coefficients.

Doubling ||u||_1 should multiply each residual by about 4.  For the norming
constants the residual of modes |n| >= 5 is below the rounding floor
8 (pi n)^2 * 1e-13 of h_sn, so those ratios are noise.

    python3 demos/residual_scaling.py
"""

from __future__ import annotations

import math

from bousspec import single_harmonic_family
from bousspec.verify import theorem11_suite, theorem12_suite


def main(eps_lo: float = 0.02, eps_hi: float = 0.04, n_max: int = 8) -> None:
    for suite in (theorem11_suite, theorem12_suite):
        lo = suite(single_harmonic_family(eps_lo), n_max, negative=False)
        hi = suite(single_harmonic_family(eps_hi), n_max, negative=False)
        print(f"\n{lo.kind}: C fit {lo.bound_constant_fit:.4f} / {hi.bound_constant_fit:.4f}")
        print(f"{'n':>3} {'res(lo)':>10} {'res(hi)':>10} {'ratio':>8} {'floor':>9}")
        for n in range(1, n_max + 1):
            a, b = lo.residuals[n], hi.residuals[n]
            floor = 8 * (math.pi * n) ** 2 * 1e-13 if lo.kind == "thm12" else float("nan")
            print(f"{n:3d} {a:10.2e} {b:10.2e} {b / a:8.2f} {floor:9.1e}")


if __name__ == "__main__":
    main()
