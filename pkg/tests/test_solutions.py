import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qserre.biseries import BiSeries
from qserre.scalarq import QScalar
from qserre.solutions import (
    FamilyError, basis_P, basis_Q, check_equation_c, check_pair, check_system1,
    constant_ones_family, epsilon_constraint, family_from_descriptor, general_offdiag,
    p_basis_family, phi, phi_psi_family, psi, taylor_family, taylor_solution,
)

Q = QScalar.q
betas = st.sampled_from([-3, -2, -1, 1, 2, 3])


def eq_pointwise(F, c, z, qv):
    # (z - c) F(1/z) - (c z - 1) F(z) at a rational point, from the Laurent coefficients
    cv = c.evaluate(qv)
    f = lambda x: sum(a.evaluate(qv) * x ** n for n, a in F.to_laurent().items())
    return (z - cv) * f(1 / z) - (cv * z - 1) * f(z)


@given(st.integers(1, 6), betas)
def test_basis_P_pointwise(n, beta):
    c = Q(beta)
    for z, qv in [(Fraction(3), Fraction(2)), (Fraction(-2, 5), Fraction(1, 3))]:
        assert eq_pointwise(basis_P(n, c), c, z, qv) == 0


@given(st.integers(1, 6), betas)
def test_inversion_symmetry(n, beta):
    # F(z, c) solves the equation  =>  F(1/z, 1/c) solves it with c -> 1/c
    c = Q(beta)
    assert check_equation_c(basis_P(n, c).reflect(), c.inverse()).ok
    assert check_equation_c(phi(n, c).reflect(), c.inverse(), 12).ok
    assert basis_Q(n, c) == basis_P(n, c.inverse()).reflect()


def test_random_linear_combinations_of_bases():
    rng = random.Random(5)
    c = Q(2)
    for _ in range(10):
        F = BiSeries.zero()
        for n in range(1, 5):
            F = F + basis_P(n, c).scale(QScalar.monomial(rng.randint(-3, 3), rng.randint(-2, 2)))
            F = F + basis_Q(n, c).scale(QScalar(rng.randint(-3, 3)))
        assert check_equation_c(F, c).ok


def test_non_solutions_rejected():
    c = Q(1)
    res = check_equation_c(BiSeries.laurent({1: 1}), c)
    assert not res.ok and res.exact and res.witness is not None
    assert not check_equation_c(phi(2, c) + BiSeries.monomial(5), c, 10).ok


@pytest.mark.parametrize("n", range(0, 6))
def test_phi_psi_on_window(n):
    for beta in (-2, 1, 3):
        c = Q(beta)
        res = check_equation_c(phi(n, c), c, 30)
        assert res.ok and not res.exact and res.window == (-30, 30)
        assert check_equation_c(psi(n, c), c, 30).ok


@given(st.integers(-4, 4), st.integers(-4, 4), st.sampled_from([(1, 1, -1), (2, 1, -2), (3, 1, -3)]))
def test_taylor_pair_exchange_identity(n_ij, n_ji, data):
    d_i, d_j, b_ij = data
    f_ij, f_ji = taylor_solution(d_i, d_j, b_ij, n_ij, n_ji)
    c = Q(b_ij)
    assert check_pair(f_ij, f_ji, c, 20).ok
    # (1 - c z) F_ij(z) = (c - z) F_ji(1/z), both sides exact products
    lhs = BiSeries.laurent({0: 1, 1: -c}) * f_ij
    rhs = BiSeries.laurent({0: c, 1: -1}) * f_ji.reflect()
    assert lhs.window(-15, 15) == rhs.window(-15, 15)


def test_epsilon_makes_one_side_constant():
    for n_ij in range(-3, 4):
        for n_ji in range(-3, 4):
            eps = epsilon_constraint(1, 1, -1, n_ij, n_ji)
            f_ij, f_ji = taylor_solution(1, 1, -1, n_ij, n_ji)
            consts = [f.is_polynomial() and set(f.to_laurent()) <= {0} for f in (f_ij, f_ji)]
            if eps is None:
                assert not any(consts)
            else:
                assert sum(consts) == 1


def test_general_offdiag_pairs():
    c_exp = -1
    f_ij, f_ji = general_offdiag({-2: 1, -1: "q + 1", 0: 3}, 0, c_exp)
    assert f_ij.is_polynomial()
    assert check_pair(f_ij, f_ji, Q(c_exp), 30).ok
    f_ij, f_ji = general_offdiag({-1: 1}, "q", c_exp)
    assert check_pair(f_ij, f_ji, Q(c_exp), 30).ok


def test_families_solve_the_system(a2, b2, g2):
    for cart in (a2, b2, g2):
        for fam in (p_basis_family(cart, 2), p_basis_family(cart, 1, "Q"), taylor_family(cart),
                    taylor_family(cart, eps=-1), phi_psi_family(cart, "psi", 2)):
            assert all(r.ok for r in fam.check(20).values())
    assert not check_system1(constant_ones_family(a2), 0, 1).ok


def test_descriptors(a2):
    fam = family_from_descriptor(a2, {"kind": "general-offdiag",
                                      "params": {"coeffs": {"-1": "q"}, "C": 0, "n": 1}})
    assert fam.kind == "general-offdiag" and not fam.is_polynomial
    assert family_from_descriptor(a2, {"kind": "p-basis", "params": {"n": 3}}).tag() == "exact-polynomial"
    with pytest.raises(FamilyError):
        family_from_descriptor(a2, {"kind": "nope"})
    with pytest.raises(FamilyError):
        family_from_descriptor(a2, {"kind": "taylor", "params": {"n": [[0]]}})
