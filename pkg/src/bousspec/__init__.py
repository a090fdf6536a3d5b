"""Numerical spectral toolkit for the third-order good Boussinesq Lax operator."""

from __future__ import annotations

__version__ = "0.1.0"

from .charfn import (MultiplierTriple, RealnessError, SelectionError, delta, delta0_closed, eta,
                     eta_endpoint, monodromy, multipliers, tau3)
from .coeffs import (CoeffPair, TrigPoly, evaluate, fourier_pair, load_coeffs, predictors,
                     random_coeffs, save_coeffs, single_harmonic_family, sobolev_norm,
                     transform_reflect, transform_shift, transform_star)
from .logscale import LogScaledComplex
from .norming import (NormingRecord, norming_cosine, norming_sine, norming_sine_any,
                      norming_sine_negative, transpose_route_check)
from .propagator import (GaugedMatrix, PropagationResult, SpectralPoint, coefficient_matrix,
                         cube_root, propagate, transpose_from_forward)
from .spectrum import (DiskIndex, EigenvalueRecord, eigenvalue, flow_track, solve_in_disk,
                       solve_negative, solve_transpose, unperturbed_eigenvalue, winding_count)
from .verify import identity_battery, theorem11_suite, theorem12_suite

__all__ = [
    "CoeffPair", "DiskIndex", "EigenvalueRecord", "GaugedMatrix", "LogScaledComplex",
    "MultiplierTriple", "NormingRecord", "PropagationResult", "RealnessError",
    "SelectionError", "SpectralPoint", "TrigPoly", "coefficient_matrix", "cube_root", "delta",
    "delta0_closed", "eigenvalue", "eta", "eta_endpoint", "evaluate", "flow_track",
    "fourier_pair", "identity_battery", "load_coeffs", "monodromy", "multipliers",
    "norming_cosine", "norming_sine", "norming_sine_any", "norming_sine_negative",
    "predictors", "propagate", "random_coeffs", "save_coeffs", "single_harmonic_family",
    "solve_in_disk", "solve_negative", "solve_transpose", "sobolev_norm", "tau3",
    "theorem11_suite", "theorem12_suite", "transform_reflect", "transform_shift",
    "transform_star", "transpose_from_forward", "transpose_route_check",
    "unperturbed_eigenvalue", "winding_count",
]
