"""Exponent system and non-resonance / resonance classification of quasimomenta."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SmoothnessTooLow
from .lattice import LatticeBasis, LatticeVector, enumerate_ball_arrays, sqnorm


@dataclass(frozen=True)
class AsymptoticConstants:
    d: int
    s: float
    q_exp: int
    alpha: float
    alpha_k: tuple
    p: float
    p1: int
    k1: int
    s0: float
    inequality_report: tuple = field(repr=False)

    def alpha_of(self, k: int) -> float:
        """alpha_k = 3^k alpha for any k >= 1 (alpha_k above covers only k <= d)."""
        return 3**k * self.alpha

    @property
    def alpha1(self) -> float:
        return self.alpha_k[0]

    def eps1(self, rho: float) -> float:
        return rho ** (-self.d - 2 * self.alpha)


def smoothness_threshold(d: int) -> float:
    q = 3**d + d + 2
    return (3 * d - 1) / 2 * q + d * 3**d / 4 + d + 6


def _inequalities(d, q, alpha, p, p1, k1):
    a = lambda k: 3**k * alpha  # noqa: E731
    rows = [
        ("alpha_1 + d alpha < 1 - alpha", (1 - alpha) - (a(1) + d * alpha)),
        ("d alpha < alpha_d / 2", a(d) / 2 - d * alpha),
        ("k_1 <= (p - q (d - 1) / 2) / 3", (p - q * (d - 1) / 2) / 3 - k1),
        ("p_1 alpha_1 >= p alpha", p1 * a(1) - p * alpha),
        ("3 k_1 alpha > d + 2 alpha", 3 * k1 * alpha - d - 2 * alpha),
        ("alpha_k + (k - 1) alpha < 1", min(1 - a(k) - (k - 1) * alpha for k in range(1, d + 1))),
        ("alpha_(k+1) > 2 (alpha_k + (k - 1) alpha)",
         min(a(k + 1) - 2 * (a(k) + (k - 1) * alpha) for k in range(1, d + 1))),
    ]
    strict = {2: False, 3: False}
    out = []
    for i, (name, margin) in enumerate(rows):
        holds = margin >= 0 if not strict.get(i, True) else margin > 0
        out.append((name, bool(holds), float(margin)))
    return tuple(out)


def asymptotic_constants(d: int, s: float | None = None) -> AsymptoticConstants:
    """Derived exponents for dimension d and smoothness s (default s = s0)."""
    if d < 2:
        raise ValueError("d must be at least 2")
    s0 = smoothness_threshold(d)
    if s is None:
        s = s0
    if s <= d:
        raise ValueError("s must exceed d")
    if s < s0:
        warnings.warn(f"s = {s} is below s0 = {s0}", SmoothnessTooLow, stacklevel=2)
    q = 3**d + d + 2
    alpha = 1.0 / q
    p = s - d
    p1 = math.floor(p / 3) + 1
    k1 = (d * q) // 3 + 2
    return AsymptoticConstants(
        d=d, s=float(s), q_exp=q, alpha=alpha,
        alpha_k=tuple(3**k * alpha for k in range(1, d + 1)),
        p=float(p), p1=p1, k1=k1, s0=s0,
        inequality_report=_inequalities(d, q, alpha, p, p1, k1),
    )


def slab_value(x, b) -> np.ndarray:
    """|x|^2 - |x + b|^2 written as -2 (x, b) - |b|^2."""
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    return -2.0 * (x @ b.T) - sqnorm(b)


def in_resonance_slab(x, b, radius: float):
    """(inside, margin) for the slab ||x|^2 - |x + b|^2| < radius."""
    if isinstance(b, LatticeVector):
        b = b.cartesian
    v = abs(float(slab_value(x, b)))
    return v < radius, radius - v


class DomainKind(enum.Enum):
    NON_RESONANT = "nonresonant"
    RESONANT = "resonant"
    FULL_RESONANCE = "full"


@dataclass(frozen=True)
class DomainClass:
    kind: DomainKind
    k: int
    directions: tuple = ()
    margins: dict = field(default_factory=dict)

    @property
    def is_nonresonant(self) -> bool:
        return self.kind is DomainKind.NON_RESONANT


def resonance_ball(lat: LatticeBasis, rho: float, C: AsymptoticConstants, ball_multiplier: float | None = None):
    """Candidate directions Gamma(m rho^alpha), m defaulting to p: (coeffs, cartesian)."""
    m = C.p if ball_multiplier is None else ball_multiplier
    r = m * rho**C.alpha
    coeffs, _, cart = enumerate_ball_arrays(lat, r, exclude_zero=True)
    return coeffs, cart


def nonresonant_mask(points, rho: float, C: AsymptoticConstants, lat: LatticeBasis,
                     slab_scale: float = 1.0, ball_multiplier: float | None = None,
                     chunk: int = 20000) -> np.ndarray:
    """Vectorized membership in U(slab_scale rho^alpha_1, p) for rows of ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    _, cart = resonance_ball(lat, rho, C, ball_multiplier)
    if len(cart) == 0:
        return np.ones(len(pts), dtype=bool)
    radius = slab_scale * rho**C.alpha1
    bb = sqnorm(cart)
    out = np.empty(len(pts), dtype=bool)
    for s in range(0, len(pts), chunk):
        v = -2.0 * (pts[s:s + chunk] @ cart.T) - bb
        out[s:s + chunk] = ~np.any(np.abs(v) < radius, axis=1)
    return out


def classify(x, rho: float, C: AsymptoticConstants, lat: LatticeBasis, *, slab_scale: float = 1.0,
             ball_multiplier: float | None = None) -> DomainClass:
    """Largest k with x in k slabs V_{gamma_i}(rho^alpha_k) of independent gamma_i.

    Points outside every rho^alpha_1 slab are non-resonant even when wider
    rho^alpha_k slabs (k >= 2) happen to intersect there, which can occur at
    small rho.  Directions are picked greedily from the candidates sorted by
    norm, then coefficients.  k = d is reported as FULL_RESONANCE rather than
    raised.
    """
    x = np.asarray(x, dtype=float)
    coeffs, cart = resonance_ball(lat, rho, C, ball_multiplier)
    if len(cart) == 0:
        return DomainClass(DomainKind.NON_RESONANT, 0)
    vals = np.abs(slab_value(x, cart))
    if not np.any(vals < slab_scale * rho**C.alpha1):
        return DomainClass(DomainKind.NON_RESONANT, 0)
    chosen = []
    for k in range(C.d, 0, -1):
        inside = np.flatnonzero(vals < slab_scale * rho ** C.alpha_of(k))
        if len(inside) < k:
            continue
        picks = []
        for i in inside:
            trial = coeffs[picks + [i]]
            if np.linalg.matrix_rank(trial.astype(float)) == len(picks) + 1:
                picks.append(int(i))
                if len(picks) == k:
                    break
        if len(picks) == k:
            chosen = picks
            break
    if not chosen:
        return DomainClass(DomainKind.NON_RESONANT, 0)
    k = len(chosen)
    dirs = tuple(LatticeVector(tuple(int(v) for v in coeffs[i]), cart[i]) for i in chosen)
    margins = {dv.coeffs: float(vals[i]) for dv, i in zip(dirs, chosen)}
    kind = DomainKind.FULL_RESONANCE if k == C.d else DomainKind.RESONANT
    return DomainClass(kind, k, dirs, margins)
