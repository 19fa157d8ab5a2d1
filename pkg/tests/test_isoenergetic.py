import math

import numpy as np
import pytest

from blochasym import (ExhaustedTries, NoBracket, band_coverage_witness, classify, excluded_set_membership,
                       f_sequence, find_isoenergetic_point, known_part, measure_nonresonance_fraction,
                       simplicity_check)
from blochasym.isoenergetic import ClashKind, grad_along, mean_level_spacing, practical_eps1, sphere_points
from blochasym.reference import sort_and_scan_simple

TWO_PI = 2 * np.pi


def _on_circle(rho, theta):
    return rho * np.array([np.cos(theta), np.sin(theta)])


def test_known_part(consts, zero_pot, two_mode):
    x = np.array([10 * np.pi + 0.37, 0.59])
    rho = float(np.linalg.norm(x))
    assert known_part(x, zero_pot, consts, rho).value == pytest.approx(x @ x)
    kp = known_part(x, two_mode, consts, rho, cap=2)
    assert kp.order == 2
    assert kp.shift == f_sequence(x, two_mode, 1, C=consts, rho=rho).values[1]
    assert kp.value == x @ x + kp.shift


def test_simple_free_generic(consts, zero_pot):
    x = _on_circle(30.0, 0.4321)
    v = simplicity_check(x, zero_pot, consts, 30.0)
    assert v.passed and v.violations == [] and v.K_size >= 1


def test_free_mirror_partner_clashes(consts, lat, zero_pot):
    x = np.array([11 * np.pi, math.sqrt(40**2 - (11 * np.pi) ** 2)])
    assert classify(x, 40.0, consts, lat).is_nonresonant
    v = simplicity_check(x, zero_pot, consts, 40.0)
    assert not v.passed
    (vec, kind, gap), = [w for w in v.violations if w[0].coeffs == (-11, 0)]
    assert kind is ClashKind.NONRES and gap == pytest.approx(0.0, abs=1e-9)
    assert all(g < 2 * v.eps1 for _, _, g in v.violations)


def test_free_simplicity_matches_sort_and_scan(consts, lat, zero_pot):
    rho = 30.0
    eps1 = practical_eps1(lat, rho)
    rng = np.random.default_rng(9)
    checked = 0
    for th in rng.uniform(0, TWO_PI, 60):
        x = _on_circle(rho, th)
        if not classify(x, rho, consts, lat).is_nonresonant:
            continue
        checked += 1
        v = simplicity_check(x, zero_pot, consts, rho, eps1=eps1)
        assert v.passed == sort_and_scan_simple(x, lat, eps1, rho**consts.alpha1 / 3)
    assert checked > 20


def _failure_rate(pot, consts, lat, rho, eps1=None):
    pts = sphere_points(rho, 2, 100, np.random.default_rng(1))
    nonres = [x for x in pts if classify(x, rho, consts, lat).is_nonresonant]
    return sum(not simplicity_check(x, pot, consts, rho, eps1=eps1).passed for x in nonres) / len(nonres)


def test_simplicity_failures_rare(consts, lat, two_mode):
    pot = two_mode.scaled(0.1)
    rates = [_failure_rate(pot, consts, lat, rho) for rho in (30.0, 60.0)]
    assert rates[0] < 0.2 and rates[1] <= rates[0]
    # a practical eps1 tied to the level spacing keeps the rate roughly constant, but small
    assert _failure_rate(pot, consts, lat, 30.0, practical_eps1(lat, 30.0)) < 0.2


def test_exclusion_sets(consts, lat, zero_pot, cosine):
    x = np.array([-10 * np.pi, math.sqrt(40**2 - (10 * np.pi) ** 2)])
    rep = excluded_set_membership(x, zero_pot, consts, 40.0)
    assert rep.in_K
    assert (10, 0) in [b.coeffs for b in rep.in_Pb]
    y = _on_circle(30.0, 0.37)
    assert classify(y, 30.0, consts, lat).is_nonresonant
    rep = excluded_set_membership(y, cosine(0.1), consts, 30.0)
    assert rep.in_K and rep.in_Pb == [] and rep.in_A == []
    assert not excluded_set_membership(y * 1.2, cosine(0.1), consts, 30.0).in_K


def test_free_witness(consts, zero_pot):
    rho = 30.0
    u = np.array([np.cos(0.4321), np.sin(0.4321)])
    a = math.sqrt(rho**2 - 0.1) * u
    w = find_isoenergetic_point(a, 0, 0.01, rho, zero_pot, consts)
    assert w.residual <= 1e-9 * rho**2
    assert np.linalg.norm(w.y) == pytest.approx(rho, rel=1e-9)
    assert w.y[1] == a[1]
    lo, hi = w.bracket
    assert min(lo[0], hi[0]) <= w.y[0] <= max(lo[0], hi[0])
    assert w.steps <= 60


def test_no_bracket(consts, zero_pot):
    a = _on_circle(25.0, 0.4321)
    with pytest.raises(NoBracket):
        find_isoenergetic_point(a, 0, 1e-3, 30.0, zero_pot, consts)


def test_weak_coupling_witness_and_monotonicity(consts, cosine):
    pot = cosine(0.1)
    rho = 30.0
    w = band_coverage_witness(rho, pot, consts, 50, seed=0)
    assert w.residual <= 1e-9 * rho**2 and w.steps <= 60
    lo, hi = w.bracket
    i = int(np.argmax(np.abs(hi - lo)))
    sign = np.sign(hi[i] - lo[i])
    for s in np.linspace(0.1, 0.9, 5):
        y = lo + s * (hi - lo)
        assert sign * grad_along(pot, y, i, 1e-6, rho) * np.sign(y[i]) > 0


def test_free_coverage_is_immediate(consts, zero_pot):
    w = band_coverage_witness(30.0, zero_pot, consts, 50, seed=3)
    assert w.residual <= 1e-9 * 900
    assert w.value == pytest.approx(900.0, rel=1e-9)


def test_strong_coupling_reports_diagnostics(consts, cosine):
    with pytest.raises(ExhaustedTries) as info:
        band_coverage_witness(3.0, cosine(5.0), consts, 50, seed=0)
    counts = info.value.diagnostics["counts"]
    assert counts["tried"] == 50
    assert counts["tried"] >= counts["on_surface"] >= counts["nonresonant"] >= counts["simple"] >= counts["bracketed"]
    assert info.value.diagnostics["failures"]


def test_measure_reproducible(consts):
    a = measure_nonresonance_fraction(40.0, consts, n=5000, seed=12)
    b = measure_nonresonance_fraction(40.0, consts, n=5000, seed=12)
    assert a == b
    assert a.stderr == pytest.approx(math.sqrt(a.fraction * (1 - a.fraction) / 5000))
    assert 0 <= a.fraction <= 1
    assert measure_nonresonance_fraction(40.0, consts, n=5000, seed=13).fraction != a.fraction


def test_measure_empty_ball(consts):
    est = measure_nonresonance_fraction(1e-12, consts, n=1000)
    assert est.fraction == 1.0 and est.stderr == 0.0


def test_measure_needs_samples(consts):
    with pytest.raises(ValueError):
        measure_nonresonance_fraction(40.0, consts, n=999)


def test_level_spacing(lat):
    assert mean_level_spacing(lat, 30.0) == pytest.approx(4 * np.pi)
    assert practical_eps1(lat, 30.0) == pytest.approx(0.4 * np.pi)


def test_sphere_points():
    pts = sphere_points(7.0, 3, 100, np.random.default_rng(0))
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 7.0)
