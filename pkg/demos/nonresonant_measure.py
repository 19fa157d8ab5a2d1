"""
How much of the circle is non-resonant
======================================

The share of points on |x| = rho that avoid every diffraction slab grows
towards one.  Random sampling is checked against a fine angular grid.
"""

import numpy as np

from blochasym import asymptotic_constants, measure_nonresonance_fraction
from blochasym.isoenergetic import grid_nonresonance_fraction

C = asymptotic_constants(2)

for rho in (25.0, 50.0, 100.0, 200.0):
    est = measure_nonresonance_fraction(rho, C, n=100_000, seed=1)
    grid = grid_nonresonance_fraction(rho, C, n_angles=200_000)
    print(f"rho = {rho:5g}: sampled {est.fraction:.4f} +- {est.stderr:.4f}   grid {grid:.4f}")
