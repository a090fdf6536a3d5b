"""Solve the zero-coefficient problem disk by disk and compare with the closed form.

    python3 demos/unperturbed_spectrum.py
"""

from __future__ import annotations

from bousspec import CoeffPair, solve_in_disk, unperturbed_eigenvalue, winding_count


def main() -> None:
    zero = CoeffPair.zero()
    print(f"{'n':>3} {'mu_n':>22} {'closed form':>22} {'rel err':>9} winding")
    for n in range(1, 21):
        rec = solve_in_disk(zero, n, check_winding=False)
        exact = unperturbed_eigenvalue(n)
        w = winding_count(zero, n)
        print(f"{n:3d} {rec.mu:22.12f} {exact:22.12f} {abs(rec.mu / exact - 1):9.1e} {w:7d}")


if __name__ == "__main__":
    main()
