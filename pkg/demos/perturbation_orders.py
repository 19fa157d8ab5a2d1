"""
Eigenvalues away from diffraction planes
========================================

Compare the plane-wave solver with the first few orders of the
non-resonance series at points on circles of growing radius.
"""

import numpy as np

from blochasym import asymptotic_constants, bloch_eigen, classify, cosine_potential, make_lattice
from blochasym import predict_eigenvalue, reduce_to_fundamental

lat = make_lattice(np.eye(2))
pot = cosine_potential(lat, 0.1)
C = asymptotic_constants(2)

# A direction that stays clear of the short diffraction planes for every radius below.
theta = 0.37

for rho in (20.0, 40.0, 80.0):
    x = rho * np.array([np.cos(theta), np.sin(theta)])
    print(f"rho = {rho:g}: {classify(x, rho, C, lat).kind.value}")
    t, _ = reduce_to_fundamental(lat, x)
    res = bloch_eigen(pot, t, rho=rho)
    rep = predict_eigenvalue(x, pot, 3, C=C, rho=rho, oracle=res)
    for row in rep.orders:
        print(f"   order {row.k}: F = {row.F_prev: .3e}  |Lambda - prediction| = {abs(row.oracle_gap):.2e}")

# The free prediction |x|^2 is off by the second-order shift; one correction
# removes most of it and the error shrinks as rho grows.  Order three is no
# better than order two here: no three modes of this potential sum to zero,
# so the next term only feeds the energy shift back in, which is as small as
# the four-mode term it still leaves out.
