import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blochasym import (DivergenceDetected, asymptotic_constants, SmallDenominator, bloch_eigen, classify, f_sequence, make_lattice,
                       make_potential, predict_eigenvalue, series_sum, series_term, series_terms)
from blochasym.expansion import iterability_floor
from blochasym.reference import naive_S

TWO_PI = 2 * np.pi
X0 = np.array([10 * np.pi, 0.3])


def test_zero_potential(zero_pot):
    term = series_term(100.0, X0, zero_pot, 3)
    assert term.value == 0 and term.min_denominator == math.inf
    assert series_sum(None, X0, zero_pot, 2).value == 0
    assert f_sequence(X0, zero_pot, 3).values == [0.0] * 4


def test_first_order_example(two_mode):
    term = series_term(None, X0, two_mode, 1)
    expected = 1 / (36 * np.pi**2) - 1 / (44 * np.pi**2)
    assert term.value == pytest.approx(expected, rel=1e-13)
    assert term.min_denominator == pytest.approx(36 * np.pi**2)
    a = float(X0 @ X0)
    assert series_term(a, X0, two_mode, 1).value == pytest.approx(expected, rel=1e-9)


def test_second_order_against_brute_force(two_mode):
    a = float(X0 @ X0) + 0.01
    for k in (1, 2, 3):
        fast = series_term(a, X0, two_mode, k).value
        assert fast == pytest.approx(naive_S(a, X0, two_mode, k), rel=1e-12)


def test_partial_sum_sum(two_mode):
    a = float(X0 @ X0)
    terms = series_terms(a, X0, two_mode, 2)
    assert series_sum(a, X0, two_mode, 1).value == pytest.approx(terms[0].value.real)
    total = series_sum(a, X0, two_mode, 2).value
    assert total == pytest.approx((naive_S(a, X0, two_mode, 1) + naive_S(a, X0, two_mode, 2)).real, rel=1e-12)


modes = st.lists(st.tuples(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), st.floats(-1, 1), st.floats(-1, 1)),
                 min_size=1, max_size=3)


def _entries(raw):
    seen, out = set(), []
    for key, re, im in raw:
        if any(key) and key not in seen and tuple(-v for v in key) not in seen:
            seen.add(key)
            out.append((key, re, im))
    return out


@given(modes, st.floats(0, 2 * np.pi), st.floats(-0.5, 0.5))
def test_brute_force_equivalence(raw, theta, shift):
    lat = make_lattice(np.eye(2))
    pot = make_potential(lat, _entries(raw))
    x = 30 * np.array([np.cos(theta), np.sin(theta)]) + 0.123
    a = float(x @ x) + shift
    for k in (1, 2, 3):
        fast = series_term(a, x, pot, k).value
        slow = naive_S(a, x, pot, k)
        assert abs(fast - slow) <= 1e-12 * abs(slow) + 1e-300


def test_reality(lat, consts):
    pot = make_potential(lat, [((1, 0), 0.5, 0.0), ((0, 1), 0.2, 0.3), ((1, 1), 0.0, -0.4)])
    rng = np.random.default_rng(11)
    rho, hits = 30.0, 0
    while hits < 50:
        th = rng.uniform(0, TWO_PI)
        x = rho * np.array([np.cos(th), np.sin(th)])
        if not classify(x, rho, consts, lat).is_nonresonant:
            continue
        hits += 1
        for term in series_terms(None, x, pot, 4):
            assert abs(term.value.imag) < 1e-10 * (1 + abs(term.value))


def test_iterability_guard(lat, consts, cosine):
    pot = cosine(0.5)
    rng = np.random.default_rng(2)
    for rho in (20.0, 40.0):
        for th in rng.uniform(0, TWO_PI, 200):
            x = rho * np.array([np.cos(th), np.sin(th)])
            if classify(x, rho, consts, lat).is_nonresonant:
                assert series_term(None, x, pot, 1).min_denominator > rho**consts.alpha1 / 2


def test_f_sequence_recursion(two_mode):
    seq = f_sequence(X0, two_mode, 2)
    assert seq.values[0] == 0
    assert seq.values[1] == pytest.approx(series_term(None, X0, two_mode, 1).value.real, rel=1e-14)
    a = float(X0 @ X0) + seq.values[1]
    direct = (naive_S(a, X0, two_mode, 1) + naive_S(a, X0, two_mode, 2)).real
    assert seq.values[2] == pytest.approx(direct, rel=1e-10)
    assert abs(seq.values[2] - seq.values[1]) < abs(seq.values[1])


def test_small_denominator_warning(two_mode):
    with pytest.warns(SmallDenominator):
        terms = series_terms(None, X0, two_mode, 2, floor=1e9)
    assert not terms[-1].valid
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert series_terms(None, X0, two_mode, 2, floor=1.0)[-1].valid


def test_divergence(lat):
    pot = make_potential(lat, [((1, 0), 1e4, 0.0)])
    with pytest.raises(DivergenceDetected):
        f_sequence(X0 + [0.0, 0.5], pot, 2)


def test_cutoff_removes_modes(two_mode):
    assert series_term(None, X0, two_mode, 1, cutoff=1.0).value == 0


def test_predict_zero_potential(zero_pot):
    x = np.array([20.37, 3.59])
    t = x - np.floor(x / TWO_PI) * TWO_PI
    res = bloch_eigen(zero_pot, t, 30.0)
    rep = predict_eigenvalue(x, zero_pot, 3, oracle=res)
    for row in rep.orders:
        assert row.prediction == pytest.approx(x @ x)
        assert abs(row.oracle_gap) < 1e-9


def test_predict_second_order_improves(lat):
    pot = make_potential(lat, [((1, 0), 0.1, 0.0)])
    x = np.array([10 * np.pi + 0.37, 0.59])
    t = x - np.floor(x / TWO_PI) * TWO_PI
    res = bloch_eigen(pot, t, rho=np.linalg.norm(x))
    rep = predict_eigenvalue(x, pot, 2, oracle=res)
    assert rep.oracle_index is not None and rep.valid
    assert rep.orders[0].F_prev == 0
    assert abs(rep.orders[1].oracle_gap) < abs(rep.orders[0].oracle_gap)
    for row in rep.orders:
        assert row.prediction == x @ x + row.F_prev
    assert rep.epsilon1 == pytest.approx(np.linalg.norm(x) ** (-2 - 2 / 13))
    assert rep.iterability_min > iterability_floor(np.linalg.norm(x), asymptotic_constants(2))
