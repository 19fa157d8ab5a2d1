"""Finite Fourier potentials q(x) = sum_gamma q_gamma exp(i (gamma, x))."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import SymmetryConflict, ZeroModeSupplied
from .lattice import LatticeBasis, sqnorm


@dataclass(frozen=True, eq=False)
class FourierPotential:
    """Mean-zero trigonometric polynomial with Hermitian-symmetric coefficients.

    ``coeffs`` maps integer dual coordinates to complex amplitudes. The map
    always contains both gamma and -gamma.
    """

    lattice: LatticeBasis
    coeffs: dict

    def __len__(self):
        return len(self.coeffs)

    def get(self, key) -> complex:
        return self.coeffs.get(tuple(key), 0.0)

    @property
    def support(self) -> np.ndarray:
        if not self.coeffs:
            return np.zeros((0, self.lattice.dim), dtype=int)
        return np.array(list(self.coeffs), dtype=int)

    @property
    def values(self) -> np.ndarray:
        return np.array(list(self.coeffs.values()), dtype=complex)

    @property
    def support_cartesian(self) -> np.ndarray:
        return self.lattice.to_cartesian(self.support)

    @property
    def max_support_norm(self) -> float:
        if not self.coeffs:
            return 0.0
        return float(np.sqrt(sqnorm(self.support_cartesian)).max())

    def scaled(self, factor: float) -> "FourierPotential":
        return FourierPotential(self.lattice, {k: factor * v for k, v in self.coeffs.items()})

    def evaluate(self, x) -> np.ndarray:
        """q at points ``x`` of shape (..., d); complex dtype, real up to rounding."""
        x = np.asarray(x, dtype=float)
        if not self.coeffs:
            return np.zeros(x.shape[:-1], dtype=complex)
        phase = x @ self.support_cartesian.T
        return np.exp(1j * phase) @ self.values


@dataclass(frozen=True)
class TruncationReport:
    radius: float
    kept: int
    tail_bound: float


def make_potential(lat: LatticeBasis, entries: Iterable) -> FourierPotential:
    """Build a potential from rows ``(coeffs, re, im)``.

    Missing conjugate partners are filled in so that q(x) is real.
    """
    coeffs: dict = {}
    for row in entries:
        key, re, im = row
        key = tuple(int(v) for v in key)
        if len(key) != lat.dim:
            raise ValueError(f"coefficient key {key} does not have {lat.dim} components")
        val = complex(re, im)
        if not any(key):
            if val != 0:
                raise ZeroModeSupplied("q_0 must vanish (mean-zero potential)")
            continue
        neg = tuple(-v for v in key)
        if key in coeffs and abs(coeffs[key] - val) > 1e-12:
            raise SymmetryConflict(f"conflicting values for {key}")
        coeffs[key] = val
        partner = val.conjugate()
        if neg in coeffs and abs(coeffs[neg] - partner) > 1e-12:
            raise SymmetryConflict(f"q{neg} is not the conjugate of q{key}")
        coeffs[neg] = partner if neg != key else val
    # enforce exact conjugate symmetry on the stored values
    for key in list(coeffs):
        neg = tuple(-v for v in key)
        if key < neg:
            coeffs[neg] = coeffs[key].conjugate()
    return FourierPotential(lat, dict(sorted(coeffs.items())))


def sobolev_norm_sq(pot: FourierPotential, s: float) -> float:
    """sum |q_gamma|^2 (1 + |gamma|^(2 s)) over the support."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if not pot.coeffs:
        return 0.0
    n = np.sqrt(sqnorm(pot.support_cartesian))
    return float(np.sum(np.abs(pot.values) ** 2 * (1 + n ** (2 * s))))


def truncate(pot: FourierPotential, radius: float):
    """Keep the modes with |gamma| < radius; report the l1 mass of the rest."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    kept, tail = {}, 0.0
    for key, val in pot.coeffs.items():
        norm = float(np.sqrt(sqnorm(pot.lattice.to_cartesian(np.array(key)))))
        if norm < radius:
            kept[key] = val
        else:
            tail += abs(val)
    return FourierPotential(pot.lattice, kept), TruncationReport(radius, len(kept), tail)


def cosine_potential(lat: LatticeBasis, strength: float) -> FourierPotential:
    """q(x) = 2 strength * sum_i cos((g_i, x)) over the dual basis vectors g_i."""
    entries = []
    for i in range(lat.dim):
        key = [0] * lat.dim
        key[i] = 1
        entries.append((key, strength, 0.0))
    return make_potential(lat, entries)
