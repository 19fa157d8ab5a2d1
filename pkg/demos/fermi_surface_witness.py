"""
A point of the isoenergetic curve
=================================

Draw a direction, find where the predicted eigenvalue equals rho^2, check
that the point is non-resonant and its eigenvalue isolated, then bisect the
true eigenvalue along a coordinate axis.  The result shows rho^2 lies in the
spectrum.
"""

import numpy as np

from blochasym import ExhaustedTries, asymptotic_constants, band_coverage_witness, cosine_potential, make_lattice

lat = make_lattice(np.eye(2))
C = asymptotic_constants(2)

w = band_coverage_witness(30.0, cosine_potential(lat, 0.1), C, max_tries=50, seed=0)
print("y =", w.y)
print(f"Lambda(y) - rho^2 = {w.value - 900:.2e} after {w.steps} bisection steps")

# Far outside the asymptotic regime the pipeline can come up empty; the
# report says at which stage the samples were lost.
try:
    band_coverage_witness(3.0, cosine_potential(lat, 5.0), C, max_tries=50, seed=0)
except ExhaustedTries as exc:
    print("strong coupling:", exc.diagnostics["counts"])
