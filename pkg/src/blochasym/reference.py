"""Slow, deliberately naive evaluators used to cross-check the fast paths."""
from __future__ import annotations

import itertools

import numpy as np

from .domains import AsymptoticConstants
from .lattice import LatticeBasis


def _sq(v) -> float:
    return float(sum(c * c for c in v))


def _cart(lat: LatticeBasis, key) -> np.ndarray:
    return np.asarray(key, dtype=float) @ lat.dual_basis


def naive_S(a: float, x, pot, k: int) -> complex:
    """k-nested loop over support tuples with partial sums never zero."""
    x = np.asarray(x, dtype=float)
    lat = pot.lattice
    modes = list(pot.coeffs.items())
    total = 0j
    for tup in itertools.product(modes, repeat=k):
        s = np.zeros(lat.dim, dtype=int)
        num = 1 + 0j
        den = 1.0
        ok = True
        for g, q in tup:
            s = s + np.array(g)
            if not s.any():
                ok = False
                break
            num *= q
            den *= a - _sq(x - _cart(lat, s))
        if not ok:
            continue
        total += num * pot.coeffs.get(tuple(int(v) for v in -s), 0) / den
    return total


def naive_A(gamma_prime, x, pot, k: int, P: float) -> complex:
    """A_k(gamma') by explicit enumeration of (gamma_1, ..., gamma_{k-1})."""
    x = np.asarray(x, dtype=float)
    lat = pot.lattice
    gp = np.array(gamma_prime, dtype=int)
    total = 0j
    for tup in itertools.product(list(pot.coeffs.items()), repeat=k - 1):
        s = gp.copy()
        num = 1 + 0j
        den = P - _sq(x + _cart(lat, s))
        ok = True
        for g, q in tup:
            s = s - np.array(g)
            if not s.any():
                ok = False
                break
            num *= q
            den *= P - _sq(x + _cart(lat, s))
        if ok:
            total += num * pot.coeffs.get(tuple(int(v) for v in s), 0) / den
    return total


def rs2_shift(x, pot) -> float:
    """Second-order Rayleigh-Schroedinger shift sum_b |q_b|^2 / (|x|^2 - |x - b|^2)."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for g, q in pot.coeffs.items():
        total += abs(q) ** 2 / (_sq(x) - _sq(x - _cart(pot.lattice, g)))
    return total


def exhaustive_class(x, rho: float, C: AsymptoticConstants, lat: LatticeBasis, ball_multiplier=None) -> int:
    """0 outside every alpha_1 slab, else the largest k such that some k
    independent ball vectors all have x in their alpha_k slab.

    Loops over every lattice vector of a coordinate box and every k-subset
    of slab members.
    """
    x = np.asarray(x, dtype=float)
    m = C.p if ball_multiplier is None else ball_multiplier
    r = m * rho**C.alpha
    n = int(np.ceil(r / np.min(np.linalg.norm(lat.dual_basis, axis=1)))) + 2
    ball = []
    for key in itertools.product(range(-n, n + 1), repeat=lat.dim):
        if not any(key):
            continue
        b = _cart(lat, key)
        if np.sqrt(_sq(b)) < r:
            ball.append((key, b))
    if not any(abs(_sq(x) - _sq(x + b)) < rho**C.alpha_of(1) for _, b in ball):
        return 0
    best = 0
    for k in range(1, C.d + 1):
        radius = rho ** C.alpha_of(k)
        inside = [key for key, b in ball if abs(_sq(x) - _sq(x + b)) < radius]
        if any(np.linalg.matrix_rank(np.array(sub, dtype=float)) == k
               for sub in itertools.combinations(inside, k)):
            best = k
    return best


def sort_and_scan_simple(x, lat: LatticeBasis, eps1: float, window: float) -> bool:
    """Free-particle simplicity: no other |gamma' + t|^2 within 2 eps1 of |x|^2.

    Only gamma' with | |gamma'+t|^2 - |x|^2 | < window are considered.
    """
    x = np.asarray(x, dtype=float)
    c = x @ np.linalg.inv(lat.dual_basis)
    g = np.floor(c)
    t = x - g @ lat.dual_basis
    R = np.sqrt(_sq(x) + window) + 1
    n = int(np.ceil(R / np.min(np.linalg.norm(lat.dual_basis, axis=1)))) + 2
    energies = []
    # competitors sit anywhere on the sphere, so the box is centred at the origin
    for key in itertools.product(range(-n, n + 1), repeat=lat.dim):
        if np.array_equal(np.array(key), g):
            continue
        e = _sq(_cart(lat, key) + t)
        if abs(e - _sq(x)) < window:
            energies.append(e)
    energies.sort()
    return not any(abs(e - _sq(x)) < 2 * eps1 for e in energies)
