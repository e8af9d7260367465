import numpy as np
import pytest

from splitflow._zeta import hurwitz_zeta
from splitflow.errors import InvalidExponent

# Reference values computed with mpmath.zeta(s, q) and its s-derivative at
# 30 significant digits, frozen here so the test has no runtime dependency.
CASES = [
    # (s, q, zeta, dzeta/ds)
    (1.3, 1.0, 3.9319492118095442, -11.041284605032115),
    (2.5, 1.0, 1.3414872572509172, -0.38734195032620997),
    (2.5, 10.0, 0.022728699194534541, -0.066363134232532081),
    (4.0, 7.5, 0.00096207277609644895, -0.0021984206683931757),
    (1.05, 3.0, 19.09787613757458, -399.59290317023365),
    (8.0, 2.0, 0.0040773561979443394, -0.0029019525537106731),
]


@pytest.mark.parametrize("s, q, want, _d", CASES)
def test_values(s, q, want, _d):
    got = hurwitz_zeta(s, q)
    assert got == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("s, q, _v, want", CASES)
def test_derivatives(s, q, _v, want):
    _, got = hurwitz_zeta(s, q, with_derivative=True)
    assert got == pytest.approx(want, rel=1e-10)


def test_vectorized_q():
    qs = np.array([1.0, 10.0])
    vals = hurwitz_zeta(2.5, qs)
    assert vals.shape == (2,)
    assert vals[0] == pytest.approx(1.3414872572509172, rel=1e-12)
    assert vals[1] == pytest.approx(0.022728699194534541, rel=1e-12)


def test_derivative_vectorized():
    qs = np.array([1.0, 2.0])
    vals, ders = hurwitz_zeta(8.0, qs, with_derivative=True)
    assert vals[1] == pytest.approx(0.0040773561979443394, rel=1e-12)
    assert ders[1] == pytest.approx(-0.0029019525537106731, rel=1e-10)


def test_riemann_special_case():
    # q=1 reduces to the Riemann zeta function.
    assert hurwitz_zeta(1.5, 1.0) == pytest.approx(2.61237534868548834, rel=1e-12)


def test_rejects_s_at_pole():
    with pytest.raises(InvalidExponent):
        hurwitz_zeta(1.0, 1.0)
    with pytest.raises(InvalidExponent):
        hurwitz_zeta(0.7, 1.0)


def test_rejects_bad_q():
    with pytest.raises(InvalidExponent):
        hurwitz_zeta(2.5, 0.0)
