"""Plane-wave Galerkin diagonalization of L_t(q).

The Hamiltonian in the basis exp(i(gamma' + t, x)) has diagonal
|gamma' + t|^2 and off-diagonal entries q_{gamma' - gamma''}.  Everything
else in the package is checked against this solver.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import BasisTooLarge, DiagonalizationFailure, NearDegenerate, TrackingLost
from .lattice import LatticeBasis, enumerate_shell, sqnorm
from .potential import FourierPotential

BASIS_CAP = 20000


def default_basis_radius(pot: FourierPotential, rho: float) -> float:
    return rho + max(8.0, 4.0 * pot.max_support_norm)


def _sorted_basis(lat: LatticeBasis, coeffs: np.ndarray, points: np.ndarray):
    n = np.round(np.sqrt(sqnorm(points)), 9)
    keys = [coeffs[:, i] for i in range(lat.dim - 1, -1, -1)] + [n]
    order = np.lexsort(keys)
    return coeffs[order], points[order]


def assemble_hamiltonian(pot: FourierPotential, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Dense Hermitian matrix on the given plane waves."""
    n = len(coeffs)
    H = np.zeros((n, n), dtype=complex)
    H[np.arange(n), np.arange(n)] = sqnorm(points)
    index = {tuple(c): i for i, c in enumerate(coeffs.tolist())}
    rows = coeffs.tolist()
    for g, q in pot.coeffs.items():
        for i, c in enumerate(rows):
            j = index.get(tuple(a - b for a, b in zip(c, g)))
            if j is not None:
                H[i, j] = q
    return H


@dataclass(eq=False)
class SpectralResult:
    """Full spectrum of the truncated L_t(q).

    ``eigenvectors[:, N]`` holds b(N, gamma') in the order of ``basis``.
    """

    lattice: LatticeBasis
    t: np.ndarray
    basis: np.ndarray
    points: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    hamiltonian: np.ndarray
    _index: dict = field(default_factory=dict, repr=False)
    _off: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self._index = {tuple(c): i for i, c in enumerate(self.basis.tolist())}

    def __len__(self):
        return len(self.eigenvalues)

    def row(self, key) -> int:
        return self._index[tuple(int(v) for v in key)]

    def has(self, key) -> bool:
        return tuple(int(v) for v in key) in self._index

    def coefficient(self, N: int, key) -> complex:
        return complex(self.eigenvectors[self.row(key), N])

    def coefficients(self, N: int) -> dict:
        return dict(zip(map(tuple, self.basis.tolist()), self.eigenvectors[:, N]))

    def gauged_vector(self, N: int, key) -> np.ndarray:
        """Eigenvector N rotated so that b(N, key) is real and nonnegative."""
        v = self.eigenvectors[:, N]
        b = v[self.row(key)]
        if abs(b) == 0:
            return v.copy()
        return v * (abs(b) / b)

    def parseval_errors(self) -> np.ndarray:
        return np.abs(np.sum(np.abs(self.eigenvectors) ** 2, axis=0) - 1.0)

    def residuals(self) -> np.ndarray:
        """||(H - Lambda_N) v_N|| for every N."""
        R = self.hamiltonian @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(R, axis=0)

    def remainder(self, N: int, key) -> float:
        """Lambda_N - |gamma + t|^2 for gamma = ``key``, free of the large cancellation.

        The Rayleigh quotient is evaluated with the diagonal written as
        (p_i - p_c).(p_i + p_c); the eigenvector error enters quadratically.
        """
        c = self.row(key)
        v = self.eigenvectors[:, N]
        diff = self.lattice.to_cartesian(self.basis - self.basis[c])
        diag = np.sum(diff * (self.points + self.points[c]), axis=1)
        return float(np.sum(np.abs(v) ** 2 * diag) + np.vdot(v, self.off_diagonal @ v).real)

    @property
    def off_diagonal(self) -> np.ndarray:
        if self._off is None:
            self._off = self.hamiltonian.copy()
            np.fill_diagonal(self._off, 0)
        return self._off

    def dominant_key(self, N: int) -> tuple:
        return tuple(self.basis[int(np.argmax(np.abs(self.eigenvectors[:, N])))].tolist())


def bloch_eigen(pot: FourierPotential, t, basis_radius: float | None = None, *, rho: float | None = None,
                basis: np.ndarray | None = None, cap: int = BASIS_CAP) -> SpectralResult:
    """Diagonalize L_t(q) on the plane waves with |gamma' + t| < basis_radius.

    Pass ``basis`` (integer dual coordinates) to reuse a fixed plane-wave set,
    e.g. when following one eigenvalue as t moves.
    """
    lat = pot.lattice
    t = np.asarray(t, dtype=float)
    if basis is None:
        if basis_radius is None:
            if rho is None:
                raise ValueError("need basis_radius, rho or basis")
            basis_radius = default_basis_radius(pot, rho)
        if basis_radius <= 0:
            raise ValueError("basis_radius must be positive")
        coeffs, points = enumerate_shell(lat, t, 0.0, basis_radius)
        coeffs, points = _sorted_basis(lat, coeffs, points)
    else:
        coeffs = np.asarray(basis, dtype=int)
        points = lat.to_cartesian(coeffs) + t
    if len(coeffs) > cap:
        raise BasisTooLarge(f"{len(coeffs)} plane waves exceed the cap {cap}")
    if len(coeffs) == 0:
        raise BasisTooLarge("empty plane-wave basis")
    H = assemble_hamiltonian(pot, coeffs, points)
    try:
        w, V = scipy.linalg.eigh(H)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise DiagonalizationFailure(str(exc)) from exc
    return SpectralResult(lat, t, coeffs, points, w, V, H)


def match_eigenvalue(res: SpectralResult, key, window: float, coeff_floor: float = 0.0):
    """Index N with |Lambda_N - |gamma+t|^2| < window maximizing |b(N, gamma)|.

    Returns None when nothing qualifies or the best |b| is below ``coeff_floor``.
    """
    r = res.row(key)
    energy = sqnorm(res.points[r])
    cand = np.flatnonzero(np.abs(res.eigenvalues - energy) < window)
    if len(cand) == 0:
        return None
    weights = np.abs(res.eigenvectors[r, cand])
    best = int(np.argmax(weights))
    if weights[best] < coeff_floor:
        return None
    return int(cand[best])


def track(prev: np.ndarray, res: SpectralResult, min_overlap: float = 0.5) -> int:
    """Eigenvalue index in ``res`` whose eigenvector best overlaps ``prev`` (same basis)."""
    ov = np.abs(prev.conj() @ res.eigenvectors)
    N = int(np.argmax(ov))
    if ov[N] < min_overlap:
        raise TrackingLost(f"best overlap {ov[N]:.3f} below {min_overlap}")
    return N


def default_fd_step(t) -> float:
    return 1e-5 * (1.0 + float(np.linalg.norm(t)))


def _cell_diameter(lat: LatticeBasis) -> float:
    return float(np.sum(np.linalg.norm(lat.dual_basis, axis=1)))


def eigenvalue_gradient_fd(pot: FourierPotential, t, basis_radius: float | None, N: int,
                           h: float | None = None, *, rho: float | None = None,
                           res: SpectralResult | None = None) -> np.ndarray:
    """Central-difference gradient of Lambda_N with respect to t.

    The plane-wave set is frozen at its value for ``t`` and Lambda_N is followed
    to t +- h e_j by eigenvector overlap.  Differences are formed as
    (|p+|^2 - |p-|^2) + (r+ - r-) with r the remainder about the dominant
    plane wave, which keeps the O(rho^2) part out of the cancellation.
    """
    t = np.asarray(t, dtype=float)
    if res is None:
        res = bloch_eigen(pot, t, basis_radius, rho=rho)
    if h is None:
        h = default_fd_step(t)
    key = res.dominant_key(N)
    lam = res.eigenvalues
    gap = np.min(np.abs(np.delete(lam, N) - lam[N])) if len(lam) > 1 else np.inf
    x = res.points[res.row(key)]
    need = 10 * h * (2 * np.linalg.norm(x) + _cell_diameter(pot.lattice))
    if gap <= need:
        raise NearDegenerate(f"gap {gap:.3e} to neighbouring eigenvalues is below {need:.3e}")
    v0 = res.eigenvectors[:, N]
    grad = np.zeros(len(t))
    for j in range(len(t)):
        e = np.zeros(len(t))
        e[j] = h
        sides = []
        for sgn in (1.0, -1.0):
            r = bloch_eigen(pot, t + sgn * e, basis=res.basis)
            M = track(v0, r)
            sides.append((r.points[r.row(key)], r.remainder(M, key)))
        (pp, rp), (pm, rm) = sides
        grad[j] = (np.dot(pp - pm, pp + pm) + (rp - rm)) / (2 * h)
    return grad
