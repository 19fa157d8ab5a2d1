"""Resonance blocks: the point sets B_k(x, p1) and the matrix C on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import AsymptoticConstants
from .errors import BlockTooLarge, NoOracleMatch
from .expansion import iterability_floor, oracle_key
from .lattice import LatticeBasis, enumerate_ball_arrays, reduce_to_fundamental, sqnorm
from .oracle import match_eigenvalue
from .potential import FourierPotential

BLOCK_CAP = 4000


@dataclass(eq=False)
class BlockPoints:
    """h_i + t for the block around x = gamma + t.

    ``offsets`` are integer coordinates of h_i - gamma; ``coeffs`` those of h_i.
    """

    x: np.ndarray
    t: np.ndarray
    gamma: tuple
    offsets: np.ndarray
    coeffs: np.ndarray
    points: np.ndarray

    def __len__(self):
        return len(self.offsets)

    @property
    def center_index(self) -> int:
        return int(np.flatnonzero(~np.any(self.offsets != 0, axis=1))[0])


@dataclass(eq=False)
class ResonanceBlock:
    center: np.ndarray
    directions: tuple
    points: BlockPoints
    matrix: np.ndarray

    @property
    def center_index(self) -> int:
        return self.points.center_index

    @property
    def size(self) -> int:
        return len(self.points)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def shifted_eigenvalues(self, pot: FourierPotential) -> np.ndarray:
        """Eigenvalues of C - |x|^2 I (the r_j), assembled without the |x|^2 cancellation."""
        return np.linalg.eigvalsh(relative_matrix(self.center, self.points.offsets, pot))


def _dir_arrays(dirs):
    coeffs = np.array([d.coeffs for d in dirs], dtype=int)
    cart = np.array([d.cartesian for d in dirs], dtype=float)
    return coeffs, cart


def _span_points(dir_coeffs, dir_cart, radius):
    """Integer combinations sum n_i gamma_i with norm < radius (as dual coordinates)."""
    pinv = np.linalg.pinv(dir_cart)
    bounds = np.floor(radius * np.linalg.norm(pinv, axis=0) + 1e-9).astype(int)
    axes = [np.arange(-m, m + 1) for m in bounds]
    grids = np.meshgrid(*axes, indexing="ij")
    n = np.stack([g.ravel() for g in grids], axis=-1)
    cart = n @ dir_cart
    keep = np.sqrt(sqnorm(cart)) < radius
    return n[keep] @ dir_coeffs


def block_radii(C: AsymptoticConstants, rho: float, k: int):
    """(|b| bound for B_k, |a| bound for the p1-fattening)."""
    return 0.5 * rho ** (C.alpha_of(k + 1) / 2), C.p1 * rho**C.alpha


def build_Bk_points(x, dirs, C: AsymptoticConstants, rho: float, lat: LatticeBasis, *,
                    b_radius: float | None = None, a_radius: float | None = None,
                    cap: int = BLOCK_CAP) -> BlockPoints:
    """{x + b + a : b in B_k, a in Gamma, |a| < p1 rho^alpha}, deduplicated.

    Ordered by distance from x, then lexicographically by offset coordinates.
    """
    if len(dirs) == 0:
        raise ValueError("need at least one direction")
    x = np.asarray(x, dtype=float)
    rb, ra = block_radii(C, rho, len(dirs))
    rb = rb if b_radius is None else b_radius
    ra = ra if a_radius is None else a_radius
    dc, dcart = _dir_arrays(dirs)
    if np.linalg.matrix_rank(dc.astype(float)) < len(dirs):
        raise ValueError("directions must be linearly independent")
    bset = _span_points(dc, dcart, rb)
    aset, _, _ = enumerate_ball_arrays(lat, ra, exclude_zero=False)
    if len(bset) * len(aset) > 50 * cap:
        raise BlockTooLarge(f"{len(bset)} x {len(aset)} candidate points")
    offsets = np.unique((bset[:, None, :] + aset[None, :, :]).reshape(-1, lat.dim), axis=0)
    if len(offsets) > cap:
        raise BlockTooLarge(f"block of {len(offsets)} points exceeds cap {cap}")
    dist = np.round(np.sqrt(sqnorm(lat.to_cartesian(offsets))), 9)
    order = np.lexsort([offsets[:, i] for i in range(lat.dim - 1, -1, -1)] + [dist])
    offsets = offsets[order]
    t, gamma = reduce_to_fundamental(lat, x)
    coeffs = offsets + np.array(gamma.coeffs)
    points = lat.to_cartesian(coeffs) + t
    return BlockPoints(x, t, gamma.coeffs, offsets, coeffs, points)


def _coupling(pot: FourierPotential, offsets: np.ndarray) -> np.ndarray:
    n = len(offsets)
    M = np.zeros((n, n), dtype=complex)
    rows = [tuple(r) for r in offsets.tolist()]
    for i, hi in enumerate(rows):
        for j, hj in enumerate(rows):
            if i != j:
                M[i, j] = pot.coeffs.get(tuple(a - b for a, b in zip(hi, hj)), 0)
    return M


def relative_matrix(x, offsets: np.ndarray, pot: FourierPotential) -> np.ndarray:
    """C(x) - |x|^2 I: diagonal 2 (x, a_i) + |a_i|^2, off-diagonal q_{a_i - a_j}."""
    x = np.asarray(x, dtype=float)
    a = pot.lattice.to_cartesian(offsets)
    M = _coupling(pot, offsets)
    M[np.diag_indices(len(offsets))] = np.sum(a * (2 * x + a), axis=1)
    return M


def assemble_C(x, dirs, pot: FourierPotential, C: AsymptoticConstants, rho: float, *,
               block: BlockPoints | None = None, **kw) -> ResonanceBlock:
    """Matrix C with c_ii = |h_i + t|^2 and c_ij = q_{h_i - h_j}."""
    if block is None:
        block = build_Bk_points(x, dirs, C, rho, pot.lattice, **kw)
    M = _coupling(pot, block.offsets)
    M[np.diag_indices(len(block))] = sqnorm(block.points)
    if not np.array_equal(M, M.conj().T):
        raise AssertionError("resonance matrix is not Hermitian")
    return ResonanceBlock(np.asarray(x, dtype=float), tuple(dirs), block, M)


@dataclass
class ResonancePrediction:
    value: float
    j: int
    gap: float | None
    shifted_value: float
    block: ResonanceBlock
    oracle_index: int | None = None


def resonance_predict(x, dirs, pot: FourierPotential, C: AsymptoticConstants, rho: float,
                      oracle=None, *, block: ResonanceBlock | None = None) -> ResonancePrediction:
    """Eigenvalue lambda_j of C nearest the matched oracle eigenvalue.

    Without an oracle the lambda_j nearest |x|^2 is returned and gap is None.
    """
    x = np.asarray(x, dtype=float)
    if block is None:
        block = assemble_C(x, dirs, pot, C, rho)
    r = block.shifted_eigenvalues(pot)
    xx = float(sqnorm(x))
    if oracle is None:
        j = int(np.argmin(np.abs(r)))
        return ResonancePrediction(xx + r[j], j, None, float(r[j]), block)
    key = oracle_key(oracle, x)
    N = match_eigenvalue(oracle, key, iterability_floor(rho, C))
    if N is None:
        raise NoOracleMatch("no oracle eigenvalue matches x")
    rem = oracle.remainder(N, key)
    j = int(np.argmin(np.abs(r - rem)))
    return ResonancePrediction(xx + r[j], j, rem - float(r[j]), float(r[j]), block, N)
