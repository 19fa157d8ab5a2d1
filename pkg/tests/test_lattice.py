import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blochasym import BallTooLarge, SingularBasis, enumerate_ball, make_lattice, reduce_to_fundamental

TWO_PI = 2 * np.pi
HEX = [[1.0, 0.0], [0.5, np.sqrt(3) / 2]]
SKEW3 = [[1.0, 0.2, 0.0], [0.1, 1.3, 0.4], [0.0, -0.3, 0.9]]


def test_identity_lattice(lat):
    assert lat.dim == 2
    np.testing.assert_allclose(lat.basis, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(lat.dual_basis, TWO_PI * np.eye(2), atol=1e-14)
    assert lat.cell_volume == pytest.approx(1.0, abs=1e-14)


def test_scaled_identity_is_normalized():
    lat = make_lattice(2 * np.eye(2))
    np.testing.assert_allclose(lat.basis, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(lat.dual_basis, TWO_PI * np.eye(2), atol=1e-14)


@pytest.mark.parametrize("basis", [HEX, SKEW3])
def test_dual_pairing(basis):
    lat = make_lattice(basis)
    np.testing.assert_allclose(lat.dual_basis @ lat.basis.T, TWO_PI * np.eye(lat.dim), atol=1e-12)
    assert lat.cell_volume == pytest.approx(1.0, rel=1e-12)
    assert abs(np.linalg.det(lat.basis)) == pytest.approx(lat.cell_volume)


@pytest.mark.parametrize("basis", [HEX, SKEW3])
def test_dual_of_dual(basis):
    lat = make_lattice(basis)
    back = 2 * np.pi * np.linalg.inv(lat.dual_basis).T
    np.testing.assert_allclose(back, lat.basis, atol=1e-10)


def test_singular_basis():
    with pytest.raises(SingularBasis):
        make_lattice([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularBasis):
        make_lattice([[1.0]])


def test_ball_examples(lat):
    pts = enumerate_ball(lat, 7.0, exclude_zero=True)
    assert sorted(v.coeffs for v in pts) == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    assert len(enumerate_ball(lat, 1e-9, exclude_zero=True)) == 0
    with_zero = enumerate_ball(lat, 7.0, exclude_zero=False)
    assert len(with_zero) == 5
    assert with_zero[0].coeffs == (0, 0)


def test_ball_is_strict(lat):
    assert len(enumerate_ball(lat, TWO_PI)) == 0
    assert len(enumerate_ball(lat, TWO_PI * (1 + 1e-12))) == 4


def test_ball_order_is_deterministic(lat):
    pts = enumerate_ball(lat, 30.0)
    norms = pts.norms
    assert np.all(np.diff(np.round(norms, 9)) >= 0)
    coeffs = [v.coeffs for v in pts]
    for a, b, na, nb in zip(coeffs, coeffs[1:], norms, norms[1:]):
        if round(na, 9) == round(nb, 9):
            assert a < b


def test_ball_cap(lat):
    with pytest.raises(BallTooLarge):
        enumerate_ball(lat, 1e4, cap=1000)


def _brute_force_count(lat, r):
    n = int(r / np.min(np.linalg.norm(lat.dual_basis, axis=1))) + 3
    count = 0
    for key in itertools.product(range(-n, n + 1), repeat=lat.dim):
        if any(key) and np.linalg.norm(np.array(key) @ lat.dual_basis) < r:
            count += 1
    return count


@pytest.mark.parametrize("basis,r", [(np.eye(2), 50.0), (HEX, 37.0), (SKEW3, 21.0), (np.eye(3), 19.0)])
def test_ball_count_matches_box_search(basis, r):
    lat = make_lattice(basis)
    assert len(enumerate_ball(lat, r)) == _brute_force_count(lat, r)


@given(st.floats(0.1, 40), st.floats(0.1, 40))
def test_ball_monotone(r1, r2):
    lat = make_lattice(HEX)
    lo, hi = sorted((r1, r2))
    small = {v.coeffs for v in enumerate_ball(lat, lo)}
    big = {v.coeffs for v in enumerate_ball(lat, hi)}
    assert small <= big


def test_reduce_examples(lat):
    t, g = reduce_to_fundamental(lat, [0.0, 0.0])
    assert g.coeffs == (0, 0) and np.allclose(t, 0)
    t, g = reduce_to_fundamental(lat, [TWO_PI + 0.3, -0.1])
    assert g.coeffs == (1, -1)
    np.testing.assert_allclose(t, [0.3, TWO_PI - 0.1], atol=1e-12)
    t, g = reduce_to_fundamental(lat, [1.0, 2.0])
    assert g.coeffs == (0, 0)
    np.testing.assert_allclose(t, [1.0, 2.0])


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=2), st.sampled_from([np.eye(2), HEX]))
def test_reduce_reconstructs(x, basis):
    lat = make_lattice(basis)
    t, g = reduce_to_fundamental(lat, x)
    np.testing.assert_allclose(g.cartesian + t, x, atol=1e-12 * (1 + np.max(np.abs(x))))
    frac = lat.to_dual_coords(t)
    assert np.all(frac >= -1e-12) and np.all(frac < 1.0)


def test_lattice_vector_cartesian(lat):
    v = lat.vector((2, -3))
    np.testing.assert_allclose(v.cartesian, [2 * TWO_PI, -3 * TWO_PI], atol=1e-12)
    assert v.norm == pytest.approx(np.sqrt(13) * TWO_PI)
