"""
Plane-wave content of a Bloch function
======================================

Away from resonance the eigenfunction is one plane wave plus small
admixtures.  The predicted admixture amplitudes are set against the
eigenvector of the solver, with both brought to the same phase.
"""

import numpy as np

from blochasym import asymptotic_constants, bloch_eigen, cosine_potential, l2_error, make_lattice
from blochasym import match_eigenvalue, predict_coefficients, reduce_to_fundamental, tail_mass
from blochasym.blochfn import compare_with_oracle

lat = make_lattice(np.eye(2))
pot = cosine_potential(lat, 0.1)
C = asymptotic_constants(2)

for rho in (20.0, 40.0, 80.0):
    x = rho * np.array([np.cos(0.37), np.sin(0.37)])
    t, g = reduce_to_fundamental(lat, x)
    res = bloch_eigen(pot, t, rho=rho)
    N = match_eigenvalue(res, g.coeffs, 1.0)
    pred = predict_coefficients(x, pot, 2, C, rho)
    print(f"rho = {rho:g}: off-plane-wave mass {tail_mass(res, N, g):.2e}, l2 error {l2_error(pred, res, N, g.coeffs):.2e}")
    for offset, (p, o) in compare_with_oracle(pred, res, N, g.coeffs).items():
        label = "centre" if offset == () else str(offset)
        print(f"   {label:>8}: predicted {complex(p).real: .6f}  solver {o.real: .6f}")
