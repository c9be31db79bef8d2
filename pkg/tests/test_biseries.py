from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qserre.biseries import (
    BiSeries, ConvergenceRegion, UndefinedProduct, convergence_region, delta, geometric,
    regions_intersect, series_mul,
)
from qserre.scalarq import QScalar

Q = QScalar.q
ratios = st.builds(QScalar.monomial, st.sampled_from([1, -1, 2, Fraction(1, 3)]), st.integers(-2, 2))
finite = st.dictionaries(st.integers(-3, 3), st.builds(QScalar.monomial, st.integers(-3, 3), st.integers(-1, 1)),
                         max_size=3).map(BiSeries.laurent)


@st.composite
def up_series(draw):
    f = draw(finite)
    for _ in range(draw(st.integers(0, 2))):
        f = f + BiSeries.ray(draw(ratios), draw(st.integers(-2, 2)), draw(st.integers(1, 3)))
    return f


def direct_coefficient(f, g, n, lo):
    # supports bounded below by lo, so the diagonal sum is finite
    return sum((f.coefficient(k) * g.coefficient(n - k) for k in range(lo, n - lo + 1)), QScalar(0))


@given(up_series(), up_series())
def test_product_matches_direct_sums(f, g):
    h = f * g
    for n in range(-6, 9):
        assert h.coefficient(n) == direct_coefficient(f, g, n, -6)


@given(up_series(), up_series(), up_series())
def test_product_ring_laws(f, g, h):
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h


@given(up_series())
def test_reflect_and_shift(f):
    r = f.reflect()
    s = f.shift(3)
    for n in range(-5, 6):
        assert r.coefficient(n) == f.coefficient(-n)
        assert s.coefficient(n) == f.coefficient(n - 3)


def test_geometric_inverts_linear_factor():
    a = Q(2)
    one_minus = BiSeries.laurent({0: 1, 1: -a})
    assert geometric(a) * one_minus == BiSeries.monomial(0)
    assert geometric(a, inverse=True) * BiSeries.laurent({0: 1, -1: -a}) == BiSeries.monomial(0)


def test_delta_is_annihilated():
    a = Q(1)
    d = delta(a)
    assert all(d.coefficient(n) == a ** n for n in range(-4, 5))
    assert BiSeries.laurent({0: 1, 1: -a}) * d == BiSeries.zero()


def test_opposite_rays_need_closed_form_mode():
    up = BiSeries.ray(Q(1), 0)
    down = BiSeries.ray(Q(-1), 0, up=False)
    with pytest.raises(UndefinedProduct) as info:
        series_mul(up, down)
    assert info.value.degree == 0
    h = series_mul(up, down, mode="closed-form", rho=Fraction(1, 2))
    # numeric diagonal sum at q = 1/2: sum_{k>=max(0,n)} q^k (q^-1)^(n-k)
    qv = Fraction(1, 2)
    for n in range(-3, 4):
        approx = sum(float(qv) ** k * float(1 / qv) ** (n - k) for k in range(max(0, n), 200))
        assert abs(float(h.coefficient(n).evaluate(qv)) - approx) < 1e-9


def test_closed_form_refuses_divergent_products():
    up = BiSeries.ray(Q(-1), 0)
    down = BiSeries.ray(Q(1), 0, up=False)
    with pytest.raises(UndefinedProduct):
        series_mul(up, down, mode="closed-form", rho=Fraction(1, 2))


def test_delta_times_delta_undefined():
    with pytest.raises(UndefinedProduct):
        delta(Q(1)) * delta(Q(2))


def test_window_and_truncate():
    f = geometric(Q(1))
    assert f.window(-2, 2) == {0: QScalar(1), 1: Q(1), 2: Q(2)}
    assert f.truncate(-1, 1) == [QScalar(0), QScalar(1), Q(1)]
    assert not f.is_polynomial()
    with pytest.raises(ValueError):
        f.to_laurent()


def test_convergence_regions():
    rho = Fraction(1, 2)
    g = convergence_region(geometric(Q(1)), rho)   # |q z| < 1
    h = convergence_region(geometric(Q(-1), inverse=True), rho)
    assert not g.empty and not h.empty
    assert convergence_region(delta(Q(1)), rho).empty
    assert convergence_region(BiSeries.laurent({-2: 1, 3: 1}), rho) == ConvergenceRegion.everywhere()
    assert regions_intersect([g, ConvergenceRegion.everywhere()])
    assert not regions_intersect([ConvergenceRegion.from_moduli(upper=Fraction(1, 4)),
                                  ConvergenceRegion.from_moduli(lower=4)])


def test_str_rendering():
    assert str(geometric(Q(1))) == "(q)^n*z^n for n >= 0"
    assert str(delta(Q(1))) == "(q)^n*z^n for all n"
    assert str(BiSeries.zero()) == "0"
