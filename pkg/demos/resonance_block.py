"""
Eigenvalues on a diffraction plane
==================================

Next to the bisector of (2 pi, 0) two plane waves are nearly degenerate and
the perturbation series breaks down.  A small matrix built from the plane
waves along the resonant direction recovers the eigenvalue instead.
"""

import numpy as np

from blochasym import asymptotic_constants, bloch_eigen, build_Bk_points, classify, cosine_potential
from blochasym import make_lattice, resonance_predict

lat = make_lattice(np.eye(2))
C = asymptotic_constants(2)
x = np.array([-np.pi + 0.05, 30.3])
rho = float(np.linalg.norm(x))

cls = classify(x, rho, C, lat)
print("class:", cls.kind.value, "directions:", [d.coeffs for d in cls.directions])

for lam in (0.1, 0.5):
    pot = cosine_potential(lat, lam)
    block = build_Bk_points(x, cls.directions[:1], C, rho, lat)
    res = bloch_eigen(pot, block.t, rho=rho)
    pred = resonance_predict(x, cls.directions[:1], pot, C, rho, res)
    naive = res.remainder(pred.oracle_index, block.gamma)
    print(f"lambda = {lam}: block of {pred.block.size} plane waves")
    print(f"   |Lambda - |x|^2|      = {abs(naive):.3e}")
    print(f"   |Lambda - lambda_j|   = {abs(pred.gap):.3e}")
