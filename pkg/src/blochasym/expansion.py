"""Non-resonance perturbation series for Bloch eigenvalues.

The k-fold sums over tuples (gamma_1, ..., gamma_k) of potential modes are
evaluated as walks on the support: the tuple weight only depends on the
successive partial sums, so a walk recursion over partial-sum states gives
every S_1 ... S_m at a fixed energy in one pass.

Energies are passed as shifts relative to |x|^2.  Each denominator
a - |x - s|^2 is then formed as shift + (2x - s, s), which stays accurate
when |x|^2 is large and the shift tiny.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .domains import AsymptoticConstants, asymptotic_constants
from .errors import DivergenceDetected, SmallDenominator
from .lattice import sqnorm
from .oracle import match_eigenvalue
from .potential import FourierPotential

DEFAULT_ORDER_CAP = 4


class SeriesTerm(NamedTuple):
    value: complex
    min_denominator: float
    valid: bool


def _modes(pot: FourierPotential, cutoff: float):
    keys = list(pot.coeffs)
    if math.isfinite(cutoff) and keys:
        norms = np.sqrt(sqnorm(pot.lattice.to_cartesian(np.array(keys))))
        keys = [k for k, n in zip(keys, norms) if n < cutoff]
    return [(k, pot.coeffs[k]) for k in keys]


def _shift(a, x, shift):
    if a is None:
        return float(shift)
    return float(a) - float(sqnorm(np.asarray(x, dtype=float)))


def series_terms(a, x, pot: FourierPotential, m: int, cutoff: float = math.inf, floor: float | None = None,
                 *, shift: float = 0.0) -> list[SeriesTerm]:
    """[S_1(a, x), ..., S_m(a, x)] from a single walk recursion.

    ``a=None`` means a = |x|^2 + shift.  A partial sum is never allowed to
    return to 0.  ``min_denominator`` is the smallest |a - |x - s|^2| over the
    partial sums s reached by any admissible tuple up to that order.
    """
    if m < 1:
        raise ValueError("order must be at least 1")
    x = np.asarray(x, dtype=float)
    lat = pot.lattice
    delta = _shift(a, x, shift)
    modes = _modes(pot, cutoff)
    cache: dict = {}

    def den(s):
        v = cache.get(s)
        if v is None:
            sc = lat.to_cartesian(np.array(s))
            v = delta + float(np.dot(2 * x - sc, sc))
            cache[s] = v
        return v

    out = []
    walk: dict = {}
    for g, q in modes:
        walk[g] = walk.get(g, 0) + q / den(g)
    mind = min((abs(den(s)) for s in walk), default=math.inf)
    for k in range(1, m + 1):
        if k > 1:
            nxt: dict = {}
            for s, w in walk.items():
                for g, q in modes:
                    s2 = tuple(u + v for u, v in zip(s, g))
                    if not any(s2):
                        continue
                    nxt[s2] = nxt.get(s2, 0) + w * q
            walk = {s: w / den(s) for s, w in nxt.items()}
            mind = min([mind] + [abs(den(s)) for s in walk])
        total = 0j
        for s, w in walk.items():
            total += w * pot.coeffs.get(tuple(-u for u in s), 0)
        valid = floor is None or mind >= floor
        out.append(SeriesTerm(complex(total), mind, valid))
    if not out[-1].valid:
        warnings.warn(f"denominator {mind:.3e} below floor {floor:.3e}", SmallDenominator, stacklevel=2)
    return out


def series_term(a, x, pot: FourierPotential, k: int, cutoff: float = math.inf, floor: float | None = None,
                *, shift: float = 0.0) -> SeriesTerm:
    """S_k(a, x) with its smallest denominator and validity flag."""
    return series_terms(a, x, pot, k, cutoff, floor, shift=shift)[-1]


def series_sum(a, x, pot: FourierPotential, m: int, cutoff: float = math.inf, floor: float | None = None,
               *, shift: float = 0.0) -> SeriesTerm:
    """A_m(a, x) = S_1 + ... + S_m, returned as a real value."""
    terms = series_terms(a, x, pot, m, cutoff, floor, shift=shift)
    total = sum(t.value for t in terms)
    return SeriesTerm(float(total.real), terms[-1].min_denominator, all(t.valid for t in terms))


def iterability_floor(rho: float, C: AsymptoticConstants) -> float:
    return 0.5 * rho**C.alpha1


@dataclass
class FSequence:
    values: list
    min_denominator: float
    valid: bool


def f_sequence(x, pot: FourierPotential, k_max: int, cutoff: float = math.inf,
               C: AsymptoticConstants | None = None, rho: float | None = None) -> FSequence:
    """F_0 = 0 and F_s = A_s(|x|^2 + F_{s-1}, x) for s = 1 .. k_max."""
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    x = np.asarray(x, dtype=float)
    if C is None:
        C = asymptotic_constants(len(x))
    if rho is None:
        rho = float(np.sqrt(sqnorm(x)))
    floor = iterability_floor(rho, C)
    bound = 1e3 * rho ** (-C.alpha1)
    values = [0.0]
    mind, valid = math.inf, True
    for s in range(1, k_max + 1):
        term = series_sum(None, x, pot, s, cutoff, floor, shift=values[-1])
        if abs(term.value) > bound:
            raise DivergenceDetected(f"|F_{s}| = {abs(term.value):.3e} exceeds {bound:.3e}")
        values.append(term.value)
        mind = min(mind, term.min_denominator)
        valid = valid and term.valid
    return FSequence(values, mind, valid)


@dataclass
class OrderRow:
    k: int
    F_prev: float
    prediction: float
    oracle_gap: float | None = None


@dataclass
class ExpansionReport:
    x: np.ndarray
    orders: list
    iterability_min: float
    epsilon1: float
    valid: bool
    oracle_index: int | None = None
    oracle_remainder: float | None = None
    extra: dict = field(default_factory=dict)


def oracle_key(res, x) -> tuple:
    """Integer coordinates of gamma with x = gamma + res.t."""
    c = res.lattice.to_dual_coords(np.asarray(x, dtype=float) - res.t)
    key = np.rint(c).astype(int)
    if np.max(np.abs(c - key)) > 1e-6:
        raise ValueError("x is not of the form gamma + t for the oracle's t")
    return tuple(int(v) for v in key)


def predict_eigenvalue(x, pot: FourierPotential, k: int, cutoff: float = math.inf,
                       C: AsymptoticConstants | None = None, rho: float | None = None,
                       oracle=None, coeff_floor: float = 0.0) -> ExpansionReport:
    """Predictions |x|^2 + F_{j-1} for j = 1 .. k, optionally scored against an oracle.

    The oracle comparison matches Lambda_N near |x|^2 and reports
    Lambda_N - prediction using the oracle's cancellation-free remainder.
    """
    x = np.asarray(x, dtype=float)
    if C is None:
        C = asymptotic_constants(len(x))
    if rho is None:
        rho = float(np.sqrt(sqnorm(x)))
    seq = f_sequence(x, pot, max(k - 1, 0), cutoff, C, rho)
    xx = float(sqnorm(x))
    report = ExpansionReport(x, [], seq.min_denominator, C.eps1(rho), seq.valid)
    if oracle is not None:
        key = oracle_key(oracle, x)
        N = match_eigenvalue(oracle, key, iterability_floor(rho, C), coeff_floor)
        if N is not None:
            report.oracle_index = N
            report.oracle_remainder = oracle.remainder(N, key)
    for j in range(1, k + 1):
        F = seq.values[j - 1]
        gap = None if report.oracle_remainder is None else report.oracle_remainder - F
        report.orders.append(OrderRow(j, F, xx + F, gap))
    return report
