"""Simple-set tests, excluded sets, isoenergetic points and measure estimates near |x| = rho."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn

from .domains import AsymptoticConstants, DomainKind, classify, nonresonant_mask, slab_value
from .errors import BlochAsymError, ExhaustedTries, NoBracket, SmallDenominator, TrackingLost
from .expansion import DEFAULT_ORDER_CAP, f_sequence, iterability_floor
from .lattice import LatticeBasis, LatticeVector, enumerate_ball_arrays, enumerate_shell, make_lattice, \
    reduce_to_fundamental, sqnorm
from .oracle import bloch_eigen, default_basis_radius, match_eigenvalue, track
from .potential import FourierPotential
from .resonance import assemble_C


class KnownPart(NamedTuple):
    value: float
    shift: float
    order: int


def known_part(x, pot: FourierPotential, C: AsymptoticConstants, rho: float,
               cap: int = DEFAULT_ORDER_CAP) -> KnownPart:
    """F(x) = |x|^2 + F_{k-1}(x) with k = min(k1, cap); ``shift`` is F_{k-1}."""
    x = np.asarray(x, dtype=float)
    k = min(C.k1, cap)
    seq = f_sequence(x, pot, k - 1, C=C, rho=rho)
    shift = float(seq.values[-1])
    return KnownPart(float(sqnorm(x)) + shift, shift, k)


class ClashKind(enum.Enum):
    NONRES = "NonResClash"
    RES = "ResClash"


@dataclass
class SimplicityVerdict:
    x: np.ndarray
    passed: bool
    eps1: float
    violations: list = field(default_factory=list)
    K_size: int = 0


def _key_window(x, lat: LatticeBasis, center_energy: float, half_width: float):
    """Gamma-offsets b (integer coords) with | |x+b|^2 - center_energy | < half_width."""
    t, g = reduce_to_fundamental(lat, x)
    lo = math.sqrt(max(center_energy - half_width, 0.0))
    hi = math.sqrt(center_energy + half_width)
    coeffs, _ = enumerate_shell(lat, t, lo, hi + 1e-9)
    return coeffs - np.array(g.coeffs)


def simplicity_check(x, pot: FourierPotential, C: AsymptoticConstants, rho: float, *,
                     eps1: float | None = None, cap: int = DEFAULT_ORDER_CAP,
                     fx: KnownPart | None = None) -> SimplicityVerdict:
    """Test the two 2 eps1-isolation conditions for the known part F(x).

    Competitors come from K = {gamma' : |F(x) - |gamma' + t|^2| < rho^alpha_1 / 3}.
    Non-resonant neighbours are compared through their known parts, resonant ones
    through every block eigenvalue within rho^alpha_1 of rho^2.
    """
    x = np.asarray(x, dtype=float)
    lat = pot.lattice
    e1 = C.eps1(rho) if eps1 is None else eps1
    if fx is None:
        fx = known_part(x, pot, C, rho, cap)
    third = rho**C.alpha1 / 3
    offsets = _key_window(x, lat, fx.value, third + 1.0)
    violations = []
    k_size = 0
    xx_minus = float(sqnorm(x)) - rho**2
    for b in offsets:
        bc = lat.to_cartesian(b)
        # |x+b|^2 - F(x) written without forming |x|^2
        rel = -float(slab_value(x, bc)) - fx.shift
        if abs(rel) >= third:
            continue
        k_size += 1
        if not np.any(b):
            continue
        y = x + bc
        cls = classify(y, rho, C, lat)
        vec = LatticeVector(tuple(int(v) for v in b), bc)
        if cls.is_nonresonant:
            fy = known_part(y, pot, C, rho, cap)
            gap = abs(float(slab_value(x, bc)) + fx.shift - fy.shift)
            if gap < 2 * e1:
                violations.append((vec, ClashKind.NONRES, gap))
        else:
            block = assemble_C(y, cls.directions, pot, C, rho)
            r = block.shifted_eigenvalues(pot)
            # lambda_j - F(x) and lambda_j - rho^2, each relative to |y|^2
            to_f = -float(slab_value(x, bc)) + r - fx.shift
            to_rho = xx_minus - float(slab_value(x, bc)) + r
            for j in np.flatnonzero(np.abs(to_rho) < rho**C.alpha1):
                gap = abs(float(to_f[j]))
                if gap < 2 * e1:
                    violations.append((vec, ClashKind.RES, gap))
    return SimplicityVerdict(x, not violations, e1, violations, k_size)


@dataclass
class ExclusionReport:
    in_Pb: list
    in_A: list
    in_K: bool


def excluded_set_membership(x, pot: FourierPotential, C: AsymptoticConstants, rho: float, *,
                            b_radius: float | None = None, eps1: float | None = None,
                            window_slack: float = 1.0, cap: int = DEFAULT_ORDER_CAP) -> ExclusionReport:
    """Membership of x in the sets P_b, A_{k,i} and K_rho, tested pointwise.

    P_b is scanned over nonzero b with |b| < ``b_radius`` (default 2|x| + 1).
    Only b with | |x|^2 - |x+b|^2 | < 3 eps1 + |F shift| + ``window_slack`` get
    their known part evaluated.
    """
    x = np.asarray(x, dtype=float)
    lat = pot.lattice
    e1 = C.eps1(rho) if eps1 is None else eps1
    in_k = abs(float(sqnorm(x)) - rho**2) < rho**C.alpha1
    pb = []
    cls = classify(x, rho, C, lat)
    if cls.is_nonresonant:
        fx = known_part(x, pot, C, rho, cap)
        r = 2 * float(np.linalg.norm(x)) + 1 if b_radius is None else b_radius
        coeffs, _, cart = enumerate_ball_arrays(lat, r, exclude_zero=True)
        sv = slab_value(x, cart)
        near = np.flatnonzero(np.abs(sv) < 3 * e1 + abs(fx.shift) + window_slack)
        if len(near):
            ok = nonresonant_mask(x + cart[near], rho, C, lat)
            for i in near[ok]:
                fy = known_part(x + cart[i], pot, C, rho, cap)
                if abs(float(sv[i]) + fx.shift - fy.shift) < 3 * e1:
                    pb.append(LatticeVector(tuple(int(v) for v in coeffs[i]), cart[i]))
    in_a = []
    if in_k and cls.kind is DomainKind.RESONANT:
        block = assemble_C(x, cls.directions, pot, C, rho)
        lam = float(sqnorm(x)) - rho**2 + block.shifted_eigenvalues(pot)
        in_a = [(cls.k, int(i)) for i in np.flatnonzero(np.abs(lam) < 3 * e1)]
    return ExclusionReport(pb, in_a, bool(in_k))


@dataclass
class SurfaceWitness:
    y: np.ndarray
    rho: float
    value: float
    residual: float
    bracket: tuple
    eigen_index: int
    steps: int = 0
    eps: float = 0.0


class _Branch:
    """One eigenvalue branch followed along y with gamma and the basis held fixed."""

    def __init__(self, pot, x, rho, basis_radius):
        self.pot = pot
        self.lat = pot.lattice
        t, g = reduce_to_fundamental(self.lat, x)
        self.key = g.coeffs
        self.gcart = g.cartesian
        r = default_basis_radius(pot, rho) if basis_radius is None else basis_radius
        self.basis, _ = enumerate_shell(self.lat, t, 0.0, r)
        self.ref = None
        self.rho = rho

    def solve(self, y, window):
        """(Lambda - rho^2, N) for the tracked branch at y."""
        res = bloch_eigen(self.pot, y - self.gcart, basis=self.basis)
        if self.ref is None:
            N = match_eigenvalue(res, self.key, window)
            if N is None:
                raise NoBracket("no eigenvalue near |y|^2 to follow")
        else:
            N = track(self.ref, res)
        self.ref = res.eigenvectors[:, N]
        return float(sqnorm(y)) - self.rho**2 + res.remainder(N, self.key), N


def find_isoenergetic_point(a, i: int, eps: float, rho: float, pot: FourierPotential, C: AsymptoticConstants, *,
                            tol: float | None = None, max_steps: int = 60,
                            basis_radius: float | None = None) -> SurfaceWitness:
    """Bisect Lambda(y) = rho^2 on the segment [a - eps e_i, a + eps e_i].

    The branch is the eigenvalue matched to the plane wave of ``a`` and is
    followed by eigenvector overlap.  A bracket with Lambda decreasing along
    e_i is accepted as well.
    """
    a = np.asarray(a, dtype=float)
    if tol is None:
        tol = 1e-9 * rho**2
    e = np.zeros(len(a))
    e[i] = eps
    lo, hi = a - e, a + e
    br = _Branch(pot, a, rho, basis_radius)
    window = iterability_floor(rho, C)
    f_lo, _ = br.solve(lo, window)
    f_hi, N = br.solve(hi, window)
    if not (f_lo < 0 < f_hi or f_hi < 0 < f_lo):
        raise NoBracket(f"Lambda - rho^2 = {f_lo:.3e}, {f_hi:.3e} at the bracket ends")
    if f_lo > 0:
        lo, hi, f_lo, f_hi = hi, lo, f_hi, f_lo
    y, f = (hi, f_hi) if abs(f_hi) < abs(f_lo) else (lo, f_lo)
    steps = 0
    while abs(f) > tol:
        if steps >= max_steps:
            raise NoBracket(f"no convergence in {max_steps} bisection steps (|residual| {abs(f):.3e})")
        mid = 0.5 * (lo + hi)
        f, N = br.solve(mid, window)
        y = mid
        steps += 1
        if f < 0:
            lo = mid
        else:
            hi = mid
    return SurfaceWitness(y, rho, rho**2 + f, abs(f), (a - e, a + e), N, steps, eps)


def default_eps(C: AsymptoticConstants, rho: float) -> float:
    return C.eps1(rho) / (7 * rho)


def mean_level_spacing(lat: LatticeBasis, rho: float) -> float:
    """Average gap between consecutive |gamma + t|^2 near rho^2 (Weyl law)."""
    d = lat.dim
    ball = math.pi ** (d / 2) / gamma_fn(d / 2 + 1)
    cell = abs(float(np.linalg.det(lat.dual_basis)))
    density = ball * d / 2 * rho ** (d - 2) / cell
    return 1.0 / density


def practical_eps1(lat: LatticeBasis, rho: float, fraction: float = 0.1) -> float:
    return fraction * mean_level_spacing(lat, rho)


def grad_along(pot, y, i: int, h: float, rho: float, basis_radius: float | None = None) -> float:
    """Central difference of the branch through y along e_i (positive on a valid bracket)."""
    y = np.asarray(y, dtype=float)
    e = np.zeros(len(y))
    e[i] = h
    br = _Branch(pot, y, rho, basis_radius)
    f0, _ = br.solve(y, math.inf)
    fp, _ = br.solve(y + e, math.inf)
    br.ref = None
    br.solve(y, math.inf)
    fm, _ = br.solve(y - e, math.inf)
    return (fp - fm) / (2 * h)


@dataclass
class MeasureEstimate:
    rho: float
    n_samples: int
    fraction: float
    stderr: float
    seed: int


def sphere_points(rho: float, d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, d))
    return rho * g / np.linalg.norm(g, axis=1, keepdims=True)


def _default_lattice(d):
    return make_lattice(np.eye(d))


def measure_nonresonance_fraction(rho: float, C: AsymptoticConstants, c8: float = 1.0, n: int = 100_000,
                                  seed: int = 0, *, lat: LatticeBasis | None = None,
                                  ball_multiplier: float | None = None) -> MeasureEstimate:
    """Share of uniform points on |x| = rho lying in U(c8 rho^alpha_1, p)."""
    if n < 1000:
        raise ValueError("need at least 1000 samples")
    lat = _default_lattice(C.d) if lat is None else lat
    rng = np.random.default_rng(seed)
    pts = sphere_points(rho, C.d, n, rng)
    frac = float(np.mean(nonresonant_mask(pts, rho, C, lat, c8, ball_multiplier)))
    return MeasureEstimate(rho, n, frac, math.sqrt(frac * (1 - frac) / n), seed)


def grid_nonresonance_fraction(rho: float, C: AsymptoticConstants, c8: float = 1.0, n_angles: int = 1_000_000,
                               *, lat: LatticeBasis | None = None, ball_multiplier: float | None = None) -> float:
    """Deterministic midpoint rule over the circle (d = 2 only)."""
    if C.d != 2:
        raise ValueError("the angular grid is two-dimensional")
    lat = _default_lattice(2) if lat is None else lat
    th = 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles
    pts = rho * np.stack([np.cos(th), np.sin(th)], axis=1)
    return float(np.mean(nonresonant_mask(pts, rho, C, lat, c8, ball_multiplier)))


def _surface_point(u, pot, C, rho, cap):
    """a = r u with F(a) = rho^2, by a bracketed root search in r."""
    def g(r):
        return known_part(r * u, pot, C, rho, cap).value - rho**2

    lo, hi = rho - 1.0, rho + 1.0
    with warnings.catch_warnings():
        # the sample is classified afterwards; marginal denominators drop it there
        warnings.simplefilter("ignore", SmallDenominator)
        if g(lo) * g(hi) > 0:
            return None
        r = brentq(g, lo, hi, xtol=1e-14 * rho, rtol=4 * np.finfo(float).eps)
    return r * u


def band_coverage_witness(rho: float, pot: FourierPotential, C: AsymptoticConstants, max_tries: int = 50,
                          seed: int = 0, *, eps: float | None = None, slab_scale: float = 2.0,
                          tol: float | None = None, cap: int = DEFAULT_ORDER_CAP,
                          eps1: float | None = None) -> SurfaceWitness:
    """First y with Lambda(y) = rho^2 found from random points of S_rho.

    Each try draws a direction, solves F(a) = rho^2 along it, requires a to be
    non-resonant (slab radius ``slab_scale`` rho^alpha_1) and simple, then
    bisects along the coordinate axis with the largest |a_i|.
    """
    rng = np.random.default_rng(seed)
    lat = pot.lattice
    d = lat.dim
    e1 = C.eps1(rho) if eps1 is None else eps1
    eps = e1 / (7 * rho) if eps is None else eps
    counts = {"tried": 0, "on_surface": 0, "nonresonant": 0, "simple": 0, "bracketed": 0}
    failures: list = []
    for _ in range(max_tries):
        counts["tried"] += 1
        u = sphere_points(1.0, d, 1, rng)[0]
        try:
            a = _surface_point(u, pot, C, rho, cap)
        except (BlochAsymError, ValueError) as exc:  # expansion breakdown drops the sample
            failures.append(type(exc).__name__)
            continue
        if a is None:
            continue
        counts["on_surface"] += 1
        if classify(a, rho, C, lat, slab_scale=slab_scale).kind is not DomainKind.NON_RESONANT:
            continue
        counts["nonresonant"] += 1
        if not simplicity_check(a, pot, C, rho, eps1=e1, cap=cap).passed:
            continue
        counts["simple"] += 1
        i = int(np.argmax(np.abs(a)))
        try:
            w = find_isoenergetic_point(a, i, eps, rho, pot, C, tol=tol)
        except (NoBracket, TrackingLost) as exc:
            failures.append(type(exc).__name__)
            continue
        counts["bracketed"] += 1
        return w
    raise ExhaustedTries(f"no witness in {max_tries} tries", {"counts": counts, "failures": failures})
