import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blochasym import (SymmetryConflict, ZeroModeSupplied, cosine_potential, make_lattice, make_potential,
                       sobolev_norm_sq, truncate)

TWO_PI = 2 * np.pi


def test_conjugate_completion(lat):
    pot = make_potential(lat, [((1, 0), 1.0, 0.0)])
    assert pot.coeffs == {(-1, 0): 1, (1, 0): 1}
    x = np.array([0.13, 0.7])
    assert pot.evaluate(x) == pytest.approx(2 * np.cos(TWO_PI * x[0]))


def test_imaginary_completion(lat):
    pot = make_potential(lat, [((0, 1), 0.0, 0.5)])
    assert pot.get((0, 1)) == 0.5j
    assert pot.get((0, -1)) == -0.5j


def test_empty_is_free(lat):
    pot = make_potential(lat, [])
    assert len(pot) == 0
    assert pot.evaluate([0.3, 0.4]) == 0


def test_errors(lat):
    with pytest.raises(SymmetryConflict):
        make_potential(lat, [((1, 0), 1.0, 0.0), ((-1, 0), 2.0, 0.0)])
    with pytest.raises(ZeroModeSupplied):
        make_potential(lat, [((0, 0), 1.0, 0.0)])
    pot = make_potential(lat, [((0, 0), 0.0, 0.0), ((1, 1), 0.5, 0.0)])
    assert (0, 0) not in pot.coeffs


def test_consistent_pair_accepted(lat):
    pot = make_potential(lat, [((1, 2), 0.3, 0.4), ((-1, -2), 0.3, -0.4)])
    assert pot.get((-1, -2)) == complex(0.3, -0.4)


def test_sobolev_examples(lat, two_mode, zero_pot):
    assert sobolev_norm_sq(zero_pot, 3.0) == 0
    assert sobolev_norm_sq(two_mode, 0) == pytest.approx(4.0)
    assert sobolev_norm_sq(two_mode, 1) == pytest.approx(2 * (1 + 4 * np.pi**2))


def test_truncate_examples(two_mode):
    same, rep = truncate(two_mode, 100.0)
    assert same.coeffs == two_mode.coeffs and rep.tail_bound == 0
    empty, rep = truncate(two_mode, 1.0)
    assert len(empty) == 0 and rep.tail_bound == pytest.approx(2.0)
    kept, rep = truncate(two_mode, TWO_PI + 1e-9)
    assert len(kept) == 2 and rep.tail_bound == 0
    kept, rep = truncate(two_mode, TWO_PI)
    assert len(kept) == 0


entry = st.tuples(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), st.floats(-2, 2), st.floats(-2, 2))


def _unique(entries):
    seen, out = set(), []
    for key, re, im in entries:
        if not any(key) or key in seen or tuple(-v for v in key) in seen:
            continue
        seen.add(key)
        out.append((key, re, im))
    return out


@given(st.lists(entry, max_size=8), st.integers(0, 2**31))
def test_real_valued(entries, seed):
    lat = make_lattice(np.eye(2))
    pot = make_potential(lat, _unique(entries))
    for k, v in pot.coeffs.items():
        assert pot.get(tuple(-c for c in k)) == v.conjugate()
    xs = np.random.default_rng(seed).uniform(-3, 3, (64, 2))
    vals = np.array([pot.evaluate(x) for x in xs])
    assert np.all(np.abs(np.imag(vals)) < 1e-10)


@given(st.lists(entry, max_size=8), st.floats(0.5, 30))
def test_truncate_idempotent(entries, r):
    lat = make_lattice(np.eye(2))
    pot = make_potential(lat, _unique(entries))
    once, _ = truncate(pot, r)
    twice, rep = truncate(once, r)
    assert once.coeffs == twice.coeffs and rep.tail_bound == 0


@given(st.lists(entry, max_size=8), st.floats(0, 5), st.floats(0, 5))
def test_sobolev_monotone(entries, s1, s2):
    lat = make_lattice(np.eye(2))
    pot = make_potential(lat, _unique(entries))
    lo, hi = sorted((s1, s2))
    assert sobolev_norm_sq(pot, lo) <= sobolev_norm_sq(pot, hi) * (1 + 1e-12)


def test_cosine_potential(lat):
    pot = cosine_potential(lat, 0.5)
    assert pot.coeffs == {(-1, 0): 0.5, (0, -1): 0.5, (0, 1): 0.5, (1, 0): 0.5}
