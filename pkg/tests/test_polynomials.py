from fractions import Fraction

from hypothesis import given, strategies as st

from loopdens.cyclotomic import ONE, Q, CycNum
from loopdens.phi import LatticeParams, phi_coefficients
from loopdens.polynomials import Polynomial, poly_arg_scale, poly_derivative, poly_eval

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=10)
cycnums = st.builds(CycNum, rationals, rationals)
polys = st.lists(cycnums, max_size=6).map(Polynomial)


def test_eval_examples():
    assert poly_eval(Polynomial([1, -1, 1]), Q) == 0
    assert poly_eval(Polynomial(), Q) == 0
    assert poly_eval(phi_coefficients(LatticeParams(1, 1, 2)), ONE) == 0


def test_zero_polynomial_canonical():
    assert Polynomial([0, 0]) == Polynomial()
    assert Polynomial([CycNum(), CycNum()]).coeffs == ()
    assert Polynomial().degree == -1


def test_derivative_examples():
    assert poly_derivative(Polynomial([0, 0, 1])) == Polynomial([0, 2])
    assert poly_derivative(Polynomial([5])) == Polynomial()
    phi = phi_coefficients(LatticeParams(0, 1, 2))
    qinv = ONE - Q
    assert poly_derivative(phi) == Polynomial([-2 * qinv, 2])


def test_arg_scale_examples():
    p = Polynomial([ONE, ONE])
    assert poly_arg_scale(p, Q * Q) == Polynomial([ONE, Q * Q])
    assert poly_arg_scale(p, 1) == p
    q2 = Q * Q
    r = Polynomial([CycNum(3), CycNum(1, 2), CycNum(Fraction(1, 3)), ONE])
    assert r.arg_scale(q2).arg_scale(q2).arg_scale(q2) == r


@given(polys, cycnums, cycnums)
def test_arg_scale_commutes_with_eval(p, c, x):
    assert poly_eval(poly_arg_scale(p, c), x) == poly_eval(p, c * x)


@given(polys, polys)
def test_degree_additive(p, r):
    if p.degree >= 0 and r.degree >= 0:
        assert (p * r).degree == p.degree + r.degree
    else:
        assert (p * r).degree == -1


@given(polys, polys, cycnums)
def test_product_evaluates_pointwise(p, r, x):
    assert (p * r)(x) == p(x) * r(x)
    assert (p + r)(x) == p(x) + r(x)


@given(polys, polys)
def test_leibniz(p, r):
    assert (p * r).derivative() == p.derivative() * r + p * r.derivative()
