"""Period lattice, dual lattice and lattice-ball enumeration.

Dual-lattice vectors are carried as integer coordinates in the dual basis;
Cartesian coordinates are always recomputed from the integers with
:meth:`LatticeBasis.to_cartesian` so that the same vector built along two
different code paths is bit-identical.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import BallTooLarge, SingularBasis

BALL_CAP = 10**7


@dataclass(frozen=True)
class LatticeVector:
    coeffs: tuple[int, ...]
    cartesian: np.ndarray = field(compare=False, repr=False)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.cartesian**2)))


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Unit-volume period lattice (rows of ``basis``) and its dual (rows of ``dual_basis``)."""

    dim: int
    basis: np.ndarray
    dual_basis: np.ndarray
    cell_volume: float

    def to_cartesian(self, coeffs) -> np.ndarray:
        """Cartesian coordinates of integer dual-basis coordinates (shape (..., d))."""
        c = np.asarray(coeffs)
        out = c[..., 0, None] * self.dual_basis[0]
        for i in range(1, self.dim):
            out = out + c[..., i, None] * self.dual_basis[i]
        return out

    def to_dual_coords(self, x) -> np.ndarray:
        """Real coordinates of ``x`` in the dual basis."""
        return np.asarray(x, dtype=float) @ self._dual_inv

    def vector(self, coeffs) -> LatticeVector:
        c = tuple(int(v) for v in coeffs)
        return LatticeVector(c, self.to_cartesian(np.array(c)))

    @property
    def _dual_inv(self) -> np.ndarray:
        return np.linalg.inv(self.dual_basis)

    @property
    def shortest_dual_norm(self) -> float:
        return float(enumerate_ball_arrays(self, 2 * np.max(np.linalg.norm(self.dual_basis, axis=1)), True)[1][0])


def sqnorm(points) -> np.ndarray:
    """Row-wise squared norms with a fixed summation order."""
    p = np.asarray(points)
    out = p[..., 0] ** 2
    for i in range(1, p.shape[-1]):
        out = out + p[..., i] ** 2
    return out


def make_lattice(basis) -> LatticeBasis:
    """Build a lattice from a d x d matrix whose rows are the periods.

    The basis is rescaled so that the fundamental domain has unit volume;
    the dual basis satisfies ``(g_i, b_j) = 2 pi delta_ij``.
    """
    b = np.array(basis, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 2:
        raise SingularBasis(f"basis must be a square matrix with d >= 2, got shape {b.shape}")
    d = b.shape[0]
    det = np.linalg.det(b)
    if abs(det) <= 1e-10:
        raise SingularBasis(f"|det(basis)| = {abs(det):.3e} is below 1e-10")
    b = b / abs(det) ** (1.0 / d)
    dual = 2 * np.pi * np.linalg.inv(b).T
    return LatticeBasis(dim=d, basis=b, dual_basis=dual, cell_volume=float(abs(np.linalg.det(b))))


def coefficient_box(lat: LatticeBasis, r: float) -> np.ndarray:
    """Per-coordinate bound on |n_i| for dual vectors with |n @ dual| < r."""
    inv = lat._dual_inv
    return np.floor(r * np.linalg.norm(inv, axis=0) + 1e-9).astype(int)


def _box_points(bounds: np.ndarray) -> np.ndarray:
    axes = [np.arange(-m, m + 1) for m in bounds]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def predicted_ball_count(lat: LatticeBasis, r: float) -> float:
    from math import gamma, pi

    d = lat.dim
    ball = pi ** (d / 2) / gamma(d / 2 + 1) * r**d
    return ball / (2 * np.pi) ** d


def _sort_order(coeffs: np.ndarray, norms: np.ndarray) -> np.ndarray:
    keys = [coeffs[:, i] for i in range(coeffs.shape[1] - 1, -1, -1)]
    # rounding makes symmetric vectors tie exactly, so the lexicographic key decides
    keys.append(np.round(norms, 9))
    return np.lexsort(keys)


def enumerate_ball_arrays(lat: LatticeBasis, r: float, exclude_zero: bool = True, cap: int = BALL_CAP):
    """Array form of :func:`enumerate_ball`: ``(coeffs, norms, cartesian)``."""
    if r <= 0:
        raise ValueError("radius must be positive")
    if predicted_ball_count(lat, r) > cap:
        raise BallTooLarge(f"Gamma({r}) holds about {predicted_ball_count(lat, r):.3g} points (cap {cap})")
    box = _box_points(coefficient_box(lat, r))
    cart = lat.to_cartesian(box)
    norms = np.sqrt(sqnorm(cart))
    keep = norms < r
    if exclude_zero:
        keep &= np.any(box != 0, axis=1)
    box, cart, norms = box[keep], cart[keep], norms[keep]
    order = _sort_order(box, norms)
    return box[order], norms[order], cart[order]


class LatticePoints:
    """Ordered collection of dual-lattice vectors backed by numpy arrays."""

    def __init__(self, lat: LatticeBasis, coeffs: np.ndarray, cartesian: np.ndarray):
        self.lattice = lat
        self.coeffs = coeffs
        self.cartesian = cartesian

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, i) -> LatticeVector:
        return LatticeVector(tuple(int(v) for v in self.coeffs[i]), self.cartesian[i])

    def __iter__(self) -> Iterator[LatticeVector]:
        for i in range(len(self)):
            yield self[i]

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(sqnorm(self.cartesian))


def enumerate_ball(lat: LatticeBasis, r: float, exclude_zero: bool = True, cap: int = BALL_CAP) -> LatticePoints:
    """All gamma in the dual lattice with |gamma| < r, sorted by norm then coefficients."""
    coeffs, _, cart = enumerate_ball_arrays(lat, r, exclude_zero, cap)
    return LatticePoints(lat, coeffs, cart)


def enumerate_shell(lat: LatticeBasis, t, r_in: float, r_out: float, cap: int = BALL_CAP):
    """Integer coordinates of gamma with r_in <= |gamma + t| < r_out."""
    t = np.asarray(t, dtype=float)
    center = -lat.to_dual_coords(t)
    bounds = coefficient_box(lat, r_out)
    if predicted_ball_count(lat, r_out) > cap:
        raise BallTooLarge(f"shell of outer radius {r_out} exceeds cap {cap}")
    lo = np.floor(center - bounds - 1).astype(int)
    hi = np.ceil(center + bounds + 1).astype(int)
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    grids = np.meshgrid(*axes, indexing="ij")
    box = np.stack([g.ravel() for g in grids], axis=-1)
    pts = lat.to_cartesian(box) + t
    n = np.sqrt(sqnorm(pts))
    keep = (n >= r_in) & (n < r_out)
    return box[keep], pts[keep]


def reduce_to_fundamental(lat: LatticeBasis, x):
    """Split ``x = gamma + t`` with t in the dual-coordinate cell [0, 1)^d.

    Returns ``(t, gamma)`` where gamma is a :class:`LatticeVector`.
    """
    x = np.asarray(x, dtype=float)
    n = np.floor(lat.to_dual_coords(x)).astype(int)
    gamma = lat.to_cartesian(n)
    t = x - gamma
    frac = lat.to_dual_coords(t)
    # guard against t landing on the upper face after rounding
    bump = frac >= 1.0
    if np.any(bump):
        n = n + bump.astype(int)
        gamma = lat.to_cartesian(n)
        t = x - gamma
    return t, LatticeVector(tuple(int(v) for v in n), gamma)
