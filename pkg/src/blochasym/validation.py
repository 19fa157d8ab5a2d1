"""Acceptance criteria on the two-dimensional cosine fixture.

Fixture: unit square period lattice, q(x) = 2 lam (cos 2 pi x_1 + cos 2 pi x_2)
with lam in {0.1, 0.5} and rho in {20, 40, 80} unless a criterion says otherwise.
Every criterion returns a :class:`Criterion` with the numbers it was judged on.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from .blochfn import l2_error, predict_coefficients, tail_mass
from .domains import DomainKind, asymptotic_constants, classify
from .errors import BlochAsymError, SmallDenominator
from .expansion import f_sequence, iterability_floor, series_terms
from .fitting import DEFAULT_SLACK, fit_decay
from .isoenergetic import band_coverage_witness, grid_nonresonance_fraction, measure_nonresonance_fraction, \
    simplicity_check
from .lattice import enumerate_ball_arrays, make_lattice, reduce_to_fundamental, sqnorm
from .oracle import bloch_eigen, eigenvalue_gradient_fd, match_eigenvalue
from .potential import cosine_potential, make_potential
from .reference import exhaustive_class, naive_S, rs2_shift, sort_and_scan_simple
from .resonance import assemble_C, build_Bk_points, relative_matrix, resonance_predict

LAMBDAS = (0.1, 0.5)
RHOS = (20.0, 40.0, 80.0)
PROFILES = ("desk", "quick")


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.detail}"


@dataclass
class AcceptedPoint:
    x: np.ndarray
    res: object
    N: int
    key: tuple
    theta: float


class Fixture:
    """Shared lattice, potentials and oracle runs, cached across criteria."""

    def __init__(self, theta0: float = 0.37, step: float = 0.0137):
        self.lat = make_lattice(np.eye(2))
        self.C = asymptotic_constants(2)
        self.theta0 = theta0
        self.step = step
        self._pots: dict = {}
        self._points: dict = {}
        self.spectra: list = []

    def pot(self, lam: float):
        if lam not in self._pots:
            self._pots[lam] = cosine_potential(self.lat, lam)
        return self._pots[lam]

    def oracle(self, pot, t, rho):
        res = bloch_eigen(pot, t, rho=rho)
        self.spectra.append(res)
        return res

    def point(self, lam: float, rho: float, tries: int = 400) -> AcceptedPoint:
        """First x = rho (cos th, sin th), th = theta0 + j step, that is non-resonant,
        simple, iterable, and has an oracle eigenvalue with |b(N, gamma)|^2 > 1/2."""
        if (lam, rho) in self._points:
            return self._points[lam, rho]
        pot, C = self.pot(lam), self.C
        for j in range(tries):
            th = self.theta0 + j * self.step
            x = rho * np.array([math.cos(th), math.sin(th)])
            if not classify(x, rho, C, self.lat).is_nonresonant:
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SmallDenominator)
                try:
                    if not f_sequence(x, pot, 3, C=C, rho=rho).valid:
                        continue
                    if not simplicity_check(x, pot, C, rho).passed:
                        continue
                except BlochAsymError:
                    continue
            t, g = reduce_to_fundamental(self.lat, x)
            res = self.oracle(pot, t, rho)
            N = match_eigenvalue(res, g.coeffs, iterability_floor(rho, C), math.sqrt(0.5))
            if N is None:
                continue
            pt = AcceptedPoint(x, res, N, g.coeffs, th)
            self._points[lam, rho] = pt
            return pt
        raise RuntimeError(f"no accepted point at lam={lam}, rho={rho}")


def _fmt(v) -> str:
    return f"{v:.3g}"


def criterion_1(fx: Fixture) -> Criterion:
    zero = make_potential(fx.lat, [])
    rng = np.random.default_rng(1)
    worst_val = worst_vec = 0.0
    for _ in range(5):
        t = rng.uniform(0, 2 * np.pi, 2)
        res = bloch_eigen(zero, t, 30.0)
        exact = np.sort(sqnorm(res.points))
        worst_val = max(worst_val, float(np.max(np.abs(res.eigenvalues - exact) / np.maximum(exact, 1e-300))))
        V = np.abs(res.eigenvectors)
        worst_vec = max(worst_vec, float(np.max(np.abs(np.sort(V, axis=0)[-1] - 1))),
                        float(np.max(np.sort(V, axis=0)[-2])))
    ok = worst_val <= 1e-12 and worst_vec <= 1e-12
    return Criterion(1, "oracle exactness at q=0", ok,
                     f"max rel eigenvalue error {_fmt(worst_val)}, eigenvector deviation {_fmt(worst_vec)} (tol 1e-12)",
                     {"eigenvalue_error": worst_val, "eigenvector_error": worst_vec})


def criterion_2(fx: Fixture) -> Criterion:
    for lam in LAMBDAS:
        for rho in RHOS:
            fx.point(lam, rho)
    pars = res_ratio = 0.0
    for res in fx.spectra:
        pars = max(pars, float(res.parseval_errors().max()))
        scale = 1e-8 * np.maximum(1.0, np.abs(res.eigenvalues))
        res_ratio = max(res_ratio, float(np.max(res.residuals() / scale)))
    ok = bool(fx.spectra) and pars <= 1e-10 and res_ratio <= 1.0
    return Criterion(2, "Parseval and residual", ok,
                     f"{len(fx.spectra)} spectra; max |sum|b|^2-1| {_fmt(pars)} (tol 1e-10); "
                     f"max residual / (1e-8 max(1,|Lambda|)) {_fmt(res_ratio)}",
                     {"n_spectra": len(fx.spectra), "parseval": pars, "residual_ratio": res_ratio})


def nonres_residuals(fx: Fixture, lam: float, k_max: int = 2) -> dict:
    """|Lambda_oracle - (|x|^2 + F_{k-1})| for k = 1..k_max over the rho grid."""
    out = {k: [] for k in range(1, k_max + 1)}
    for rho in RHOS:
        pt = fx.point(lam, rho)
        rem = pt.res.remainder(pt.N, pt.key)
        seq = f_sequence(pt.x, fx.pot(lam), k_max - 1, C=fx.C, rho=rho)
        for k in out:
            out[k].append((rho, abs(rem - seq.values[k - 1])))
    return out


def _complex_pot(lat):
    return make_potential(lat, [((1, 0), 0.3, 0.1), ((0, 1), -0.2, 0.25), ((1, 1), 0.15, -0.05)])


def criterion_3(fx: Fixture) -> Criterion:
    C = fx.C
    resid = nonres_residuals(fx, 0.1)
    fits = [fit_decay(resid[k], 3 * k * C.alpha, f"order {k}") for k in (1, 2)]
    worst = 0.0
    pt = fx.point(0.1, 20.0)
    for pot in (fx.pot(0.1), _complex_pot(fx.lat)):
        shift = 0.05
        fast = series_terms(None, pt.x, pot, 3, shift=shift)
        a = float(sqnorm(pt.x)) + shift
        for k in (1, 2, 3):
            ref = naive_S(a, pt.x, pot, k)
            worst = max(worst, abs(fast[k - 1].value - ref) / max(abs(ref), 1e-300))
    ok = all(f.passed for f in fits) and worst <= 1e-12
    detail = "; ".join(f"k={k} slope {_fmt(f.slope)} (need <= {_fmt(f.threshold)})" for k, f in zip((1, 2), fits))
    return Criterion(3, "non-resonance decay", ok, f"{detail}; brute-force S_k rel diff {_fmt(worst)}",
                     {"fits": fits, "residuals": resid, "bruteforce": worst})


def criterion_4(fx: Fixture) -> Criterion:
    lams = (0.05, 0.1, 0.2)
    pt = fx.point(0.1, 20.0)
    t, g = reduce_to_fundamental(fx.lat, pt.x)
    eq, resid = 0.0, []
    for lam in lams:
        pot = fx.pot(lam)
        f1 = f_sequence(pt.x, pot, 1, C=fx.C, rho=20.0).values[1]
        rs2 = rs2_shift(pt.x, pot)
        eq = max(eq, abs(f1 - rs2) / abs(rs2))
        res = fx.oracle(pot, t, 20.0)
        N = match_eigenvalue(res, g.coeffs, iterability_floor(20.0, fx.C))
        resid.append(abs(res.remainder(N, g.coeffs) - rs2))
    slope = float(linregress(np.log(lams), np.log(resid)).slope)
    ok = eq <= 1e-12 and slope >= 2.7
    return Criterion(4, "second-order perturbation equivalence", ok,
                     f"|F_1 - RS2|/|RS2| {_fmt(eq)} (tol 1e-12); |Lambda - RS2| vs lam slope {_fmt(slope)} (need >= 2.7)",
                     {"equivalence": eq, "residuals": resid, "slope": slope})


def bisector_point(rho: float = 30.0, offset: float = 0.01) -> np.ndarray:
    x1 = -math.pi + offset
    return np.array([x1, math.sqrt(rho**2 - x1**2)])


def criterion_5(fx: Fixture) -> Criterion:
    rho = 30.0
    x = bisector_point(rho)
    cls = classify(x, rho, fx.C, fx.lat)
    rows, ok = [], cls.kind is not DomainKind.NON_RESONANT
    t, _ = reduce_to_fundamental(fx.lat, x)
    for lam in LAMBDAS:
        pot = fx.pot(lam)
        block = assemble_C(x, cls.directions, pot, fx.C, rho)
        herm = float(np.max(np.abs(block.matrix - block.matrix.conj().T)))
        res = fx.oracle(pot, t, rho)
        idx = [res.row(c) for c in block.points.coeffs]
        exact = bool(np.array_equal(res.hamiltonian[np.ix_(idx, idx)], block.matrix))
        pred = resonance_predict(x, cls.directions, pot, fx.C, rho, oracle=res, block=block)
        naive = abs(res.remainder(pred.oracle_index, pred.block.points.gamma))
        good = herm <= 1e-14 and exact and abs(pred.gap) < naive
        ok = ok and good
        rows.append((lam, herm, exact, abs(pred.gap), naive))
    detail = "; ".join(f"lam={r[0]}: herm {_fmt(r[1])}, submatrix {'exact' if r[2] else 'MISMATCH'}, "
                       f"|gap| {_fmt(r[3])} vs naive {_fmt(r[4])}" for r in rows)
    return Criterion(5, "resonance block", ok, detail, {"rows": rows, "k": cls.k})


def _slab_point(rng, rho, C, lat):
    short, _, cart = enumerate_ball_arrays(lat, 2 * math.pi * 1.01)
    b = cart[rng.integers(len(cart))]
    nb = float(np.linalg.norm(b))
    s = rng.uniform(-0.9, 0.9) * rho**C.alpha1
    along = (-nb**2 + s) / (2 * nb)
    perp = np.array([-b[1], b[0]]) / nb
    return along * b / nb + rng.choice([-1.0, 1.0]) * math.sqrt(rho**2 - along**2) * perp


def lipschitz_pairs(fx: Fixture, lam: float, rho: float = 40.0, n: int = 20, seed: int = 6):
    """(|r_j(x) - r_j(x')|, bound) for the block eigenvalue branch carried by x itself."""
    rng = np.random.default_rng(seed)
    pot, C = fx.pot(lam), fx.C
    out = []
    while len(out) < n:
        x = _slab_point(rng, rho, C, fx.lat)
        cls = classify(x, rho, C, fx.lat)
        if cls.is_nonresonant:
            continue
        offsets = build_Bk_points(x, cls.directions, C, rho, fx.lat).offsets
        center = int(np.flatnonzero(~offsets.any(axis=1))[0])
        r, V = np.linalg.eigh(relative_matrix(x, offsets, pot))
        j = int(np.argmax(np.abs(V[center])))
        u = rng.standard_normal(2)
        delta = rng.uniform(0, 1e-3) * u / np.linalg.norm(u)
        r2, V2 = np.linalg.eigh(relative_matrix(x + delta, offsets, pot))
        j2 = int(np.argmax(np.abs(V[:, j].conj() @ V2)))
        out.append((abs(r[j] - r2[j2]), 2 * rho ** (C.alpha_of(C.d) / 2) * float(np.linalg.norm(delta))))
    return out


def criterion_6(fx: Fixture) -> Criterion:
    worst, ok = 0.0, True
    for lam in LAMBDAS:
        for diff, bound in lipschitz_pairs(fx, lam):
            ok = ok and diff <= bound
            worst = max(worst, diff / bound if bound > 0 else math.inf)
    return Criterion(6, "Lipschitz bound", ok, f"40 pairs at rho=40; max |dr_j| / bound {_fmt(worst)} (need <= 1)",
                     {"worst_ratio": worst})


def criterion_7(fx: Fixture) -> Criterion:
    C = fx.C
    ok, parts, fits = True, [], {}
    for lam in LAMBDAS:
        tails, errs = [], []
        for rho in RHOS:
            pt = fx.point(lam, rho)
            tails.append((rho, tail_mass(pt.res, pt.N, pt.key)))
            pred = predict_coefficients(pt.x, fx.pot(lam), 2, C, rho)
            errs.append((rho, l2_error(pred, pt.res, pt.N, pt.key)))
        tf = fit_decay(tails, 2 * C.alpha1, f"tail lam={lam}")
        ef = fit_decay(errs, 0.0, f"phi1 lam={lam}")
        monotone = all(b[1] < a[1] for a, b in zip(errs, errs[1:]))
        good = tf.passed and monotone and ef.slope < 0
        ok = ok and good
        fits[lam] = (tf, ef)
        parts.append(f"lam={lam}: tail slope {_fmt(tf.slope)} (need <= {_fmt(tf.threshold)}), "
                     f"l2 error {', '.join(_fmt(e[1]) for e in errs)} slope {_fmt(ef.slope)}")
    return Criterion(7, "Bloch tail and first-order coefficients", ok, "; ".join(parts), {"fits": fits})


def criterion_8(fx: Fixture) -> Criterion:
    C = fx.C
    target = 2 * C.alpha1 - 1
    ok, parts, out = True, [], {}
    for lam in LAMBDAS:
        pot = fx.pot(lam)
        errs, rich = [], []
        for rho in RHOS:
            pt = fx.point(lam, rho)
            g = [eigenvalue_gradient_fd(pot, pt.res.t, None, pt.N, h, res=pt.res)
                 for h in (1e-4, 5e-5)]
            errs.append((rho, float(np.linalg.norm(g[1] - 2 * pt.x))))
            h = 1e-4
            scale = 1.0 + float(np.linalg.norm(pt.x))
            rich.append(float(np.linalg.norm(g[0] - g[1])) / (h**2 * scale + 1e-9 * scale))
        fit = fit_decay(errs, target, f"gradient lam={lam}")
        good = fit.passed and fit.slope < 0 and max(rich) <= 1.0
        ok = ok and good
        out[lam] = (fit, rich)
        parts.append(f"lam={lam}: |grad - 2x| {', '.join(_fmt(e[1]) for e in errs)} slope {_fmt(fit.slope)} "
                     f"(need < 0 and <= {_fmt(fit.threshold)}); Richardson ratio {_fmt(max(rich))} (need <= 1)")
    return Criterion(8, "gradient formula", ok, "; ".join(parts), out)


def criterion_9(fx: Fixture, n: int = 100_000, n_angles: int = 1_000_000) -> Criterion:
    C = fx.C
    ests, grids = [], []
    for i, rho in enumerate((25.0, 50.0, 100.0)):
        ests.append(measure_nonresonance_fraction(rho, C, 1.0, n, seed=9 + i, lat=fx.lat))
        grids.append(grid_nonresonance_fraction(rho, C, 1.0, n_angles, lat=fx.lat))
    agree = all(abs(e.fraction - g) <= 3 * e.stderr for e, g in zip(ests, grids))
    mono = all(b.fraction >= a.fraction - 2 * max(a.stderr, b.stderr) for a, b in zip(ests, ests[1:]))
    ok = agree and mono
    detail = ", ".join(f"rho={e.rho:g}: MC {e.fraction:.4f}+-{e.stderr:.4f} grid {g:.4f}" for e, g in zip(ests, grids))
    return Criterion(9, "measure asymptotics", ok, detail, {"estimates": ests, "grid": grids})


def criterion_10(fx: Fixture) -> Criterion:
    rho = 30.0
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SmallDenominator)
            w = band_coverage_witness(rho, fx.pot(0.1), fx.C, 50, seed=10)
    except BlochAsymError as exc:
        return Criterion(10, "isoenergetic witness", False, f"{type(exc).__name__}: {exc}")
    ok = w.residual <= 1e-9 * rho**2 and w.steps <= 60
    return Criterion(10, "isoenergetic witness", ok,
                     f"y=({w.y[0]:.6f}, {w.y[1]:.6f}) |Lambda-rho^2| {_fmt(w.residual)} (tol {_fmt(1e-9 * rho**2)}), "
                     f"{w.steps} bisection steps", {"witness": w})


def symmetric_points(rho: float, lat) -> list:
    """Points with a mirror partner |x + b| = |x|, b = 2 pi m (1, -1), outside the resonance ball."""
    out = []
    for m in range(1, 20):
        c = 2 * math.pi * m
        disc = 2 * rho**2 - c**2
        if disc <= 0:
            break
        for u in ((-c + math.sqrt(disc)) / 2, (-c - math.sqrt(disc)) / 2):
            for sx, sy in ((1, 1), (-1, -1)):
                out.append(np.array([sx * u, sy * (u + c)]))
                out.append(np.array([sy * (u + c), sx * u]))
    return out


def criterion_11(fx: Fixture, n: int = 1000, n_simple: int = 200) -> Criterion:
    C, lat = fx.C, fx.lat
    rng = np.random.default_rng(11)
    rho = 30.0
    mism = 0
    ball, _, cart = enumerate_ball_arrays(lat, C.p * rho**C.alpha)
    for i in range(n):
        if i % 2 == 0:
            u = rng.standard_normal(2)
            x = rng.uniform(rho - 1, rho + 1) * u / np.linalg.norm(u)
        else:
            b = cart[rng.integers(len(cart))]
            nb = float(np.linalg.norm(b))
            s = rng.uniform(-2, 2) * rho ** C.alpha_of(2)
            along = (-nb**2 + s) / (2 * nb)
            if abs(along) >= rho:
                along = math.copysign(rho * 0.5, along)
            perp = np.array([-b[1], b[0]]) / nb
            x = along * b / nb + rng.choice([-1.0, 1.0]) * math.sqrt(rho**2 - along**2) * perp
        if classify(x, rho, C, lat).k != exhaustive_class(x, rho, C, lat):
            mism += 1
    zero = make_potential(lat, [])
    rho_s = 40.0
    pts = [rho_s * v / np.linalg.norm(v) for v in rng.standard_normal((n_simple, 2))]
    pts += symmetric_points(rho_s, lat)
    checked = fails = disagree = 0
    for x in pts:
        if not classify(x, rho_s, C, lat).is_nonresonant:
            continue
        checked += 1
        v = simplicity_check(x, zero, C, rho_s)
        ref = sort_and_scan_simple(x, lat, C.eps1(rho_s), rho_s**C.alpha1 / 3)
        fails += not v.passed
        disagree += v.passed != ref
    ok = mism == 0 and disagree == 0 and fails > 0
    return Criterion(11, "classification soundness", ok,
                     f"{mism}/{n} classify mismatches; q=0 simplicity {disagree} disagreements on "
                     f"{checked} points ({fails} non-simple)",
                     {"mismatches": mism, "disagreements": disagree, "checked": checked, "nonsimple": fails})


def run_all(profile: str = "desk", only=None) -> list:
    """Evaluate the criteria (all by default) in an order that lets criterion 2 see every oracle run."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    quick = profile == "quick"
    fx = Fixture()
    funcs = {
        1: criterion_1, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
        7: criterion_7, 8: criterion_8,
        9: (lambda f: criterion_9(f, 20_000, 200_000)) if quick else criterion_9,
        10: criterion_10,
        11: (lambda f: criterion_11(f, 200, 50)) if quick else criterion_11,
        2: criterion_2,
    }
    wanted = set(funcs) if only is None else set(only)
    out = {}
    for num, fn in funcs.items():
        if num in wanted:
            try:
                out[num] = fn(fx)
            except Exception as exc:  # a crashing criterion is a failing criterion
                out[num] = Criterion(num, f"criterion {num}", False, f"{type(exc).__name__}: {exc}")
    return [out[k] for k in sorted(out)]


__all__ = ["Criterion", "Fixture", "run_all", "DEFAULT_SLACK"] + [f"criterion_{i}" for i in range(1, 12)]
