"""Bloch eigenvalue and eigenfunction asymptotics for periodic Schroedinger operators.

Asymptotic predictors (perturbation series, resonance blocks, coefficient
formulas) are paired with a plane-wave Galerkin solver that serves as ground
truth for every prediction.
"""
from .blochfn import A_coeff, BlochPrediction, l2_error, predict_coefficients, tail_mass
from .domains import (AsymptoticConstants, DomainClass, DomainKind, asymptotic_constants, classify,
                      in_resonance_slab, nonresonant_mask, slab_value, smoothness_threshold)
from .errors import *  # noqa: F401,F403
from .expansion import ExpansionReport, f_sequence, predict_eigenvalue, series_sum, series_term, series_terms
from .fitting import DecayFit, fit_decay
from .isoenergetic import (MeasureEstimate, SimplicityVerdict, SurfaceWitness, band_coverage_witness,
                           excluded_set_membership, find_isoenergetic_point, known_part,
                           measure_nonresonance_fraction, simplicity_check)
from .lattice import (LatticeBasis, LatticeVector, enumerate_ball, enumerate_shell, make_lattice,
                      reduce_to_fundamental)
from .oracle import SpectralResult, bloch_eigen, eigenvalue_gradient_fd, match_eigenvalue, track
from .potential import FourierPotential, cosine_potential, make_potential, sobolev_norm_sq, truncate
from .resonance import ResonanceBlock, assemble_C, build_Bk_points, resonance_predict

__version__ = "0.1.0"
