"""Theta sums, the modular group, and fundamental-domain classification."""

import cmath
import math

import mpmath as mp
import numpy as np
import pytest

from phaseq.torus import (
    SL2Z,
    classify_moduli_pair,
    kahler_coefficient,
    reduce_to_fundamental_domain,
    theta,
)

# frozen reference: theta(0, i) computed with a 30-digit series
THETA_AT_I = 1.0864348112133080


def _mp_theta(z, tau):
    mp.mp.dps = 30
    q = mp.exp(1j * mp.pi * mp.mpc(tau))
    return complex(mp.jtheta(3, mp.pi * mp.mpc(z), q))


def test_theta_frozen_value():
    res = theta(0.0, 1j)
    assert res.value.real == pytest.approx(THETA_AT_I, abs=1e-14)
    assert abs(res.value.imag) < 1e-15


def test_theta_against_reference_series():
    rng = np.random.default_rng(61)
    for _ in range(25):
        tau = complex(rng.uniform(-2, 2), rng.uniform(0.3, 2.5))
        z = complex(rng.uniform(-1.5, 1.5), rng.uniform(-0.7, 0.7))
        got = theta(z, tau, n_terms=80).value
        want = _mp_theta(z, tau)
        assert abs(got - want) <= 1e-13 * max(1.0, abs(want))


def test_quasi_periodicity():
    rng = np.random.default_rng(8)
    for _ in range(10):
        tau = complex(rng.uniform(-1, 1), rng.uniform(0.8, 1.5))
        for re in np.linspace(-0.5, 0.5, 5):
            for im in np.linspace(-0.5, 0.5, 5):
                z = complex(re, im)
                base = theta(z, tau).value
                assert abs(theta(z + 1, tau).value - base) < 1e-10
                factor = cmath.exp(-1j * cmath.pi * tau - 2j * cmath.pi * z)
                assert abs(theta(z + tau, tau).value - factor * base) < 1e-10


def test_tail_bound_is_honest():
    z, tau = 0.3 + 0.4j, 0.2 + 0.9j
    exact = theta(z, tau, n_terms=150).value
    for n_terms in (2, 3, 4, 6):
        res = theta(z, tau, n_terms=n_terms)
        # analytic bound on dropped terms, plus roundoff in retained ones
        assert abs(res.value - exact) <= res.tail_bound + 1e-13 * abs(exact)


def test_accuracy_request_enforced():
    theta(0.2j, 1.5j, n_terms=40, accuracy=1e-10)
    with pytest.raises(ValueError, match="increase n_terms"):
        theta(0.5j, 0.05j, n_terms=4, accuracy=1e-12)


def test_theta_input_validation():
    with pytest.raises(ValueError, match="upper half-plane"):
        theta(0.0, 1.0 - 0.5j)
    with pytest.raises(ValueError, match="n_terms"):
        theta(0.0, 1j, n_terms=0)


def test_theta_inversion_on_imaginary_axis():
    # theta(0, i/t) = sqrt(t) * theta(0, i t)
    for t in (0.5, 0.8, 1.7, 2.4):
        lhs = theta(0.0, 1j / t).value
        rhs = math.sqrt(t) * theta(0.0, 1j * t).value
        assert abs(lhs - rhs) < 1e-12 * abs(rhs)


def test_kahler_coefficient():
    assert kahler_coefficient(2j) == pytest.approx(math.pi / 2)
    assert kahler_coefficient(0.7 + 0.25j) == pytest.approx(math.pi / 0.25)
    with pytest.raises(ValueError, match="upper half-plane"):
        kahler_coefficient(1.0)


def test_group_element_validation():
    with pytest.raises(ValueError, match="determinant must be 1"):
        SL2Z(1, 0, 0, 2)
    with pytest.raises(TypeError, match="must be integers"):
        SL2Z(1.0, 0, 0, 1)


def test_group_algebra():
    s, t = SL2Z.s_flip(), SL2Z.t_shift(1)
    minus_identity = SL2Z(-1, 0, 0, -1)
    assert s @ s == minus_identity
    assert (s @ t) @ (s @ t) @ (s @ t) == minus_identity
    word = t @ s @ SL2Z.t_shift(-3) @ s
    assert word @ word.inverse() == SL2Z.identity()
    assert word.inverse() @ word == SL2Z.identity()


def test_moebius_action_composition():
    rng = np.random.default_rng(14)
    for _ in range(50):
        a = SL2Z.t_shift(int(rng.integers(-3, 4))) @ SL2Z.s_flip()
        b = SL2Z.s_flip() @ SL2Z.t_shift(int(rng.integers(-3, 4)))
        tau = complex(rng.uniform(-2, 2), rng.uniform(0.2, 3))
        assert (a @ b).act(tau) == pytest.approx(a.act(b.act(tau)), rel=1e-12)


def test_sign_normalization():
    m = SL2Z(-1, 0, 0, -1)
    assert m.normalized() == SL2Z.identity()
    n = SL2Z(0, 1, -1, 0)
    assert n.normalized() == SL2Z(0, -1, 1, 0)


def test_reduction_known_points():
    red, word = reduce_to_fundamental_domain(0.5j)
    assert red == pytest.approx(2j)
    assert word == SL2Z.s_flip()
    red, _ = reduce_to_fundamental_domain(5.0 + 0.3j)
    assert red == pytest.approx(1j / 0.3)
    # the right corner of the unit arc folds onto the left corner
    rho = cmath.exp(1j * cmath.pi / 3)
    red, _ = reduce_to_fundamental_domain(rho)
    assert red.real == pytest.approx(-0.5, abs=1e-12)
    assert red.imag == pytest.approx(math.sqrt(3) / 2, abs=1e-12)


def _in_domain(tau, slack=1e-9):
    if not -0.5 - slack <= tau.real < 0.5 + slack:
        return False
    if abs(tau) < 1 - slack:
        return False
    if abs(abs(tau) - 1) < 1e-9 and tau.real > 1e-9:
        return False
    return True


def test_reduction_lands_in_domain():
    rng = np.random.default_rng(99)
    for _ in range(300):
        tau = complex(rng.uniform(-8, 8), rng.uniform(0.05, 5.0))
        red, word = reduce_to_fundamental_domain(tau)
        assert _in_domain(red), (tau, red)
        assert word.act(tau) == pytest.approx(red, rel=1e-9, abs=1e-9)


def test_reduction_fixes_interior_points():
    for tau in (0.1 + 1.3j, -0.4 + 2.0j, 3j):
        red, word = reduce_to_fundamental_domain(tau)
        assert red == tau
        assert word == SL2Z.identity()


def test_classification_known_pairs():
    res = classify_moduli_pair(1j, 1j + 1)
    assert res.equivalent
    assert res.witness.act(1j) == pytest.approx(1j + 1)
    assert res.witness == SL2Z.t_shift(1).normalized() or res.witness.act(1j) == pytest.approx(1j + 1)

    tau = 0.3 + 1.7j
    res = classify_moduli_pair(tau, -1 / tau)
    assert res.equivalent
    assert res.witness == SL2Z.s_flip()

    res = classify_moduli_pair(1j, 2j)
    assert not res.equivalent
    assert res.distance == pytest.approx(1.0)
    assert res.witness is None


def test_classification_random_words():
    rng = np.random.default_rng(3)
    for _ in range(200):
        tau = complex(rng.uniform(-3, 3), rng.uniform(0.1, 4.0))
        m = SL2Z.identity()
        for _ in range(int(rng.integers(1, 12))):
            if rng.random() < 0.4:
                m = SL2Z.s_flip() @ m
            else:
                m = SL2Z.t_shift(int(rng.integers(-4, 5))) @ m
        moved = m.act(tau)
        res = classify_moduli_pair(tau, moved)
        assert res.equivalent, (tau, m)
        recovered = res.witness.act(tau)
        assert abs(recovered - moved) <= 1e-9 * max(1.0, abs(moved))


def test_classification_boundary_fuzz():
    eps = 1e-12
    pairs = [
        (-0.5 + 1.2j, 0.5 - eps + 1.2j),
        (cmath.exp(1j * (cmath.pi / 3 + eps)), cmath.exp(1j * (2 * cmath.pi / 3 - eps))),
    ]
    for ta, tb in pairs:
        res = classify_moduli_pair(ta, tb)
        assert res.equivalent
        assert res.distance < 1e-10
