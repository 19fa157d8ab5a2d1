import math

import numpy as np
import pytest

from blochasym import A_coeff, bloch_eigen, make_potential, match_eigenvalue, predict_coefficients, tail_mass
from blochasym.blochfn import compare_with_oracle, l2_error, phi1_closed_form
from blochasym.lattice import reduce_to_fundamental
from blochasym.reference import naive_A

TWO_PI = 2 * np.pi
X0 = np.array([10 * np.pi, 0.3])


def _oracle(pot, x, rho=None):
    t, g = reduce_to_fundamental(pot.lattice, x)
    res = bloch_eigen(pot, t, rho=rho or float(np.linalg.norm(x)))
    return res, g.coeffs


def test_tail_mass_free(zero_pot):
    res, key = _oracle(zero_pot, np.array([20.37, 3.59]))
    N = match_eigenvalue(res, key, 1.0)
    assert tail_mass(res, N, key) == 0.0


def test_tail_mass_wrong_plane_wave(zero_pot):
    t = np.array([np.pi, 0.3])
    res = bloch_eigen(zero_pot, t, 30.0)
    N = match_eigenvalue(res, (1, 0), 1.0)
    b = abs(res.coefficient(N, (-2, 0)))
    assert tail_mass(res, N, (-2, 0)) == pytest.approx(1 - b**2, abs=1e-12)


def test_tail_mass_decreases(lat):
    pot = make_potential(lat, [((1, 0), 0.1, 0.0), ((0, 1), 0.1, 0.0)])
    masses = []
    for rho in (30.0, 60.0):
        th = 0.37
        x = rho * np.array([np.cos(th), np.sin(th)])
        res, key = _oracle(pot, x)
        N = match_eigenvalue(res, key, 1.0)
        masses.append(tail_mass(res, N, key))
    assert masses[0] < 0.01 and masses[1] < masses[0]


def test_A1_example(two_mode, zero_pot):
    assert A_coeff((1, 0), X0, zero_pot, 1) == 0
    assert A_coeff((1, 0), X0, two_mode, 1) == pytest.approx(-1 / (44 * np.pi**2), rel=1e-13)
    P = float(X0 @ X0)
    assert A_coeff((1, 0), X0, two_mode, 1, P) == pytest.approx(-1 / (44 * np.pi**2), rel=1e-9)


@pytest.mark.parametrize("k", [2, 3])
def test_A_against_brute_force(cosine, k):
    pot = cosine(0.7)
    x = np.array([25.3, 11.9])
    P = float(x @ x) + 0.05
    for gp in [(1, 0), (0, 1), (1, 1), (2, 0), (-1, 1), (0, -2)]:
        fast = A_coeff(gp, x, pot, k, shift=0.05)
        slow = naive_A(gp, x, pot, k, P)
        assert abs(fast - slow) <= 1e-9 * abs(slow) + 1e-15


def test_A_argument_checks(two_mode):
    with pytest.raises(ValueError):
        A_coeff((0, 0), X0, two_mode, 1)
    with pytest.raises(ValueError):
        A_coeff((1, 0), X0, two_mode, 0)


def test_prediction_free(consts, zero_pot):
    pred = predict_coefficients(X0, zero_pot, 3, consts, 31.4)
    assert pred.b_center == 1.0
    assert all(v == 0 for v in pred.offsets.values())


def test_prediction_first_order(consts, two_mode):
    pred = predict_coefficients(X0, two_mode, 2, consts, 31.4)
    assert set(pred.offsets) == {(1, 0), (-1, 0)}
    a1 = {g: A_coeff(g, X0, two_mode, 1, shift=pred.P_shift) for g in pred.offsets}
    b0 = 1 / math.sqrt(1 + sum(abs(v) ** 2 for v in a1.values()))
    assert pred.b_center == pytest.approx(b0, rel=1e-14)
    for g, v in pred.offsets.items():
        assert v == pytest.approx(a1[g] * b0, rel=1e-13)
    assert 0 < pred.b_center <= 1
    assert (0, 0) not in pred.offsets
    assert pred.l2_total <= 1 + 1e-8


def test_phi1_reproduction(consts, cosine):
    pot = cosine(0.3)
    x = np.array([25.3, 11.9])
    pred = predict_coefficients(x, pot, 2, consts, float(np.linalg.norm(x)), use_shift=False)
    closed = phi1_closed_form(x, pot)
    assert set(pred.amplitudes) == set(closed)
    for g, v in closed.items():
        assert abs(pred.amplitudes[g] - v) < 1e-10


def test_order_argument(consts, two_mode):
    with pytest.raises(ValueError):
        predict_coefficients(X0, two_mode, 1, consts, 31.4)


def test_oracle_comparison_improves_with_rho(lat, consts):
    pot = make_potential(lat, [((1, 0), 0.1, 0.0), ((0, 1), 0.1, 0.0)])
    worst, l2 = [], []
    for rho in (30.0, 60.0):
        x = rho * np.array([np.cos(0.37), np.sin(0.37)])
        res, key = _oracle(pot, x)
        N = match_eigenvalue(res, key, 1.0)
        pred = predict_coefficients(x, pot, 2, consts, rho)
        cmp = compare_with_oracle(pred, res, N, key)
        center_pred, center_oracle = cmp[()]
        assert center_oracle.imag == 0 and center_oracle.real > 0 and center_pred > 0
        worst.append(max(abs(p - o) for p, o in cmp.values()))
        l2.append(l2_error(pred, res, N, key))
    assert worst[1] < worst[0] and l2[1] < l2[0]
