"""Asymptotic Bloch coefficients b(N, gamma + gamma') at non-resonant quasimomenta."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .domains import AsymptoticConstants
from .errors import SmallDenominator
from .expansion import DEFAULT_ORDER_CAP, f_sequence, iterability_floor
from .lattice import LatticeVector, sqnorm
from .potential import FourierPotential


def tail_mass(res, N: int, gamma) -> float:
    """Mass of eigenvector N off the plane wave gamma, summed directly."""
    key = gamma.coeffs if isinstance(gamma, LatticeVector) else tuple(gamma)
    w = np.abs(res.eigenvectors[:, N]) ** 2
    w[res.row(key)] = 0.0
    return float(np.sum(w))


def _key(g):
    if isinstance(g, LatticeVector):
        return g.coeffs
    return tuple(int(v) for v in g)


def coefficient_walk(x, pot: FourierPotential, n_max: int, shift: float = 0.0):
    """[G_1, ..., G_{n_max}] with G_k[gamma'] = A_k(gamma') at P = |x|^2 + shift.

    G_1(s) = q_s / den(s) and G_k(s) = den(s)^-1 sum_g q_g G_{k-1}(s - g), where
    den(s) = P - |x + s|^2 and walks never pass through s = 0.  Returns also
    the smallest |den| met.
    """
    x = np.asarray(x, dtype=float)
    lat = pot.lattice
    cache: dict = {}

    def den(s):
        v = cache.get(s)
        if v is None:
            sc = lat.to_cartesian(np.array(s))
            v = shift - float(np.dot(2 * x + sc, sc))
            cache[s] = v
        return v

    out = []
    cur = {g: q / den(g) for g, q in pot.coeffs.items()}
    if n_max >= 1:
        out.append(cur)
    for _ in range(2, n_max + 1):
        acc: dict = {}
        for s, w in cur.items():
            for g, q in pot.coeffs.items():
                s2 = tuple(u + v for u, v in zip(s, g))
                if any(s2):
                    acc[s2] = acc.get(s2, 0) + q * w
        cur = {s: w / den(s) for s, w in acc.items()}
        out.append(cur)
    mind = min((abs(v) for v in cache.values()), default=math.inf)
    return out, mind


def A_coeff(gamma_prime, x, pot: FourierPotential, k: int, P: float | None = None, *,
            shift: float | None = None, floor: float | None = None) -> complex:
    """A_k(gamma') with energy P (default |x|^2); ``shift`` = P - |x|^2 avoids cancellation."""
    key = _key(gamma_prime)
    if not any(key):
        raise ValueError("gamma' must be nonzero")
    if k < 1:
        raise ValueError("k must be at least 1")
    if shift is None:
        shift = 0.0 if P is None else float(P) - float(sqnorm(np.asarray(x, dtype=float)))
    walks, mind = coefficient_walk(x, pot, k, shift)
    if floor is not None and mind < floor:
        warnings.warn(f"denominator {mind:.3e} below floor {floor:.3e}", SmallDenominator, stacklevel=2)
    return complex(walks[k - 1].get(key, 0))


@dataclass
class BlochPrediction:
    x: np.ndarray
    n: int
    b_center: float
    offsets: dict
    P_value: float
    P_shift: float = 0.0
    p_order: int = 0
    min_denominator: float = math.inf
    valid: bool = True
    amplitudes: dict = field(default_factory=dict, repr=False)

    @property
    def l2_total(self) -> float:
        return self.b_center**2 + sum(abs(v) ** 2 for v in self.offsets.values())


def predict_coefficients(x, pot: FourierPotential, n: int, C: AsymptoticConstants, rho: float, *,
                         p_order: int | None = None, use_shift: bool = True) -> BlochPrediction:
    """Predicted b(N, gamma) and b(N, gamma + gamma') through order n - 1.

    The normalizer sums |A_k|^2 over k and gamma* separately, as in the
    asymptotic formula; offsets carry (sum_k A_k(gamma')) * b_center.
    """
    if n < 2:
        raise ValueError("order n must be at least 2")
    x = np.asarray(x, dtype=float)
    if p_order is None:
        p_order = min(math.floor(C.p / 3), DEFAULT_ORDER_CAP)
    shift = 0.0
    if use_shift and p_order > 0:
        shift = f_sequence(x, pot, p_order, C=C, rho=rho).values[-1]
    walks, mind = coefficient_walk(x, pot, n - 1, shift)
    sq = sum(abs(v) ** 2 for g in walks for v in g.values())
    b0 = 1.0 / math.sqrt(1.0 + sq)
    amp: dict = {}
    for g in walks:
        for s, v in g.items():
            amp[s] = amp.get(s, 0) + v
    amp = dict(sorted(amp.items()))
    offsets = {s: complex(v * b0) for s, v in amp.items()}
    return BlochPrediction(x, n, b0, offsets, float(sqnorm(x)) + shift, shift, p_order, mind,
                           mind >= iterability_floor(rho, C), amp)


def compare_with_oracle(pred: BlochPrediction, res, N: int, key) -> dict:
    """Per-coefficient errors against the oracle eigenvector gauged to arg b(N, gamma) = 0."""
    v = res.gauged_vector(N, key)
    base = np.array(key)
    out = {(): (pred.b_center, complex(v[res.row(key)]))}
    for s, val in pred.offsets.items():
        k2 = tuple((base + np.array(s)).tolist())
        out[s] = (val, complex(v[res.row(k2)]) if res.has(k2) else 0j)
    return out


def l2_error(pred: BlochPrediction, res, N: int, key) -> float:
    """l2 distance between predicted and oracle coefficient maps (off-prediction mass included)."""
    v = res.gauged_vector(N, key)
    c = res.row(key)
    err = abs(pred.b_center - v[c]) ** 2
    seen = {c}
    base = np.array(key)
    for s, val in pred.offsets.items():
        k2 = tuple((base + np.array(s)).tolist())
        if res.has(k2):
            r = res.row(k2)
            seen.add(r)
            err += abs(val - v[r]) ** 2
        else:
            err += abs(val) ** 2
    mask = np.ones(len(v), dtype=bool)
    mask[list(seen)] = False
    err += float(np.sum(np.abs(v[mask]) ** 2))
    return math.sqrt(err)


def phi1_closed_form(x, pot: FourierPotential) -> dict:
    """First-order correction coefficients q_g / (|x|^2 - |x + g|^2), g in the support."""
    x = np.asarray(x, dtype=float)
    out = {}
    for g, q in pot.coeffs.items():
        gc = pot.lattice.to_cartesian(np.array(g))
        out[g] = complex(q / (float(sqnorm(x)) - float(sqnorm(x + gc))))
    return out
