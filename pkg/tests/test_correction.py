"""Polynomial correction solver, local series, and the shift ladder."""

from __future__ import annotations

import random
import warnings
from fractions import Fraction

import pytest

from fuchslin.correction import (
    local_taylor,
    pull_back_correction,
    shift_up,
    solution_uniqueness_check,
    solve_polynomial,
)
from fuchslin.exact import ExactComplex
from fuchslin.matrices import CMatrix
from fuchslin.model import FuchsianSystem
from fuchslin.poly import VecPoly


def scalar_system(b0, b1):
    return FuchsianSystem(
        (ExactComplex(-1), ExactComplex(1)),
        (
            CMatrix.from_rows([[ExactComplex.parse(b0)]], True),
            CMatrix.from_rows([[ExactComplex.parse(b1)]], True),
        ),
    )


def random_positive_system(rng, d_max=2, s_max=2):
    """Exact system with triangular residues and spectra in [1/2, 3]."""
    d = rng.randint(1, d_max)
    s = rng.randint(0, s_max)
    poles = []
    while len(poles) < s + 2:
        c = ExactComplex(Fraction(rng.randint(-6, 6), rng.choice([1, 2])))
        if all(c != p for p in poles):
            poles.append(c)
    mats = []
    for _ in range(s + 2):
        rows = [[ExactComplex(0)] * d for _ in range(d)]
        for i in range(d):
            rows[i][i] = ExactComplex(
                Fraction(rng.randint(1, 6), 2)
            )
            for j in range(i + 1, d):
                rows[i][j] = ExactComplex(Fraction(rng.randint(-2, 2), 3))
        mats.append(CMatrix.from_rows(rows, True))
    return FuchsianSystem(tuple(poles), tuple(mats))


def random_vecpoly(rng, d, degree):
    coeffs = [
        tuple(
            ExactComplex(Fraction(rng.randint(-5, 5), rng.choice([1, 2])))
            for _ in range(d)
        )
        for _ in range(degree + 1)
    ]
    # make sure the stated degree is attained
    top = list(coeffs[-1])
    if all(not v for v in top):
        top[0] = ExactComplex(1)
        coeffs[-1] = tuple(top)
    return VecPoly.from_coeffs(coeffs, exact=True, dim=d)


def cleared_residual(system, g, phi, y):
    """Q y' + (QB) y - (g - phi), identically zero for a true solution."""
    q = system.q_poly()
    lhs = y.derivative().mul_sp(q) + system.qb_poly().mul_vec(y)
    return lhs - (g - phi)


def float_system(system):
    poles = [complex(p) for p in system.poles]
    mats = [
        CMatrix.from_rows([[complex(v) for v in row] for row in m.rows], False)
        for m in system.residues
    ]
    return FuchsianSystem(poles, mats)


def float_vecpoly(p):
    return VecPoly.from_coeffs(
        [[complex(c) for c in v] for v in p.coeffs], exact=False, dim=p.dim
    )


# ----------------------------------------------------------------------
# solve_polynomial
# ----------------------------------------------------------------------


def test_low_degree_is_its_own_correction():
    rng = random.Random(7)
    for _ in range(8):
        system = random_positive_system(rng)
        for deg in range(system.s + 1):
            g = random_vecpoly(rng, system.size, deg)
            result = solve_polynomial(system, g)
            assert (result.phi - g).is_zero()
            assert result.y.is_zero()


def test_scalar_quadratic_frozen_values():
    system = scalar_system(1, 1)
    g = VecPoly.from_coeffs(
        [(ExactComplex(0),), (ExactComplex(0),), (ExactComplex(1),)],
        exact=True,
    )
    result = solve_polynomial(system, g)
    third = ExactComplex(Fraction(1, 3))
    assert result.phi.degree == 0
    assert result.phi.coefficient(0)[0] == third
    assert result.y.degree == 1
    assert result.y.coefficient(0)[0] == ExactComplex(0)
    assert result.y.coefficient(1)[0] == third
    assert cleared_residual(system, g, result.phi, result.y).is_zero()


def test_degree_law_and_exact_residual():
    rng = random.Random(11)
    for _ in range(10):
        system = random_positive_system(rng)
        deg = rng.randint(system.s + 1, 8)
        g = random_vecpoly(rng, system.size, deg)
        result = solve_polynomial(system, g)
        assert result.phi.degree <= system.s
        assert result.y.degree == deg - system.s - 1
        assert cleared_residual(system, g, result.phi, result.y).is_zero()


def test_float_route_matches_exact():
    rng = random.Random(13)
    for _ in range(6):
        system = random_positive_system(rng)
        deg = rng.randint(system.s + 1, 6)
        g = random_vecpoly(rng, system.size, deg)
        exact_result = solve_polynomial(system, g)
        float_result = solve_polynomial(float_system(system), float_vecpoly(g))
        resid = cleared_residual(
            float_system(system), float_vecpoly(g),
            float_result.phi, float_result.y,
        )
        scale = max(1.0, float_vecpoly(g).max_abs())
        assert resid.max_abs() <= 1e-8 * scale
        diff = float_result.phi - float_vecpoly(exact_result.phi)
        assert diff.max_abs() <= 1e-8 * scale


def test_dimension_mismatch_rejected():
    system = scalar_system(1, 1)
    g = VecPoly.from_coeffs([(ExactComplex(1), ExactComplex(0))], exact=True)
    with pytest.raises(ValueError):
        solve_polynomial(system, g)


# ----------------------------------------------------------------------
# local_taylor
# ----------------------------------------------------------------------


def test_local_taylor_scalar_oracle():
    # corrected right-hand side x^2 - 1/3 has the solution y = x/3;
    # its series at -1 is -1/3 + t/3.
    system = scalar_system(1, 1)
    third = ExactComplex(Fraction(1, 3))
    rhs = VecPoly.from_coeffs(
        [(ExactComplex(0) - third,), (ExactComplex(0),), (ExactComplex(1),)],
        exact=True,
    )
    sol = local_taylor(system, 0, rhs, order=5)
    assert sol.center == ExactComplex(-1)
    assert sol.coefficients[0][0] == ExactComplex(0) - third
    assert sol.coefficients[1][0] == third
    for k in range(2, 6):
        assert sol.coefficients[k][0] == ExactComplex(0)


def test_local_taylor_matches_polynomial_solution():
    rng = random.Random(17)
    for _ in range(5):
        system = random_positive_system(rng)
        deg = rng.randint(system.s + 1, 6)
        g = random_vecpoly(rng, system.size, deg)
        result = solve_polynomial(system, g)
        corrected = g - result.phi
        order = result.y.degree + 3
        for j in range(system.n_poles):
            sol = local_taylor(system, j, corrected, order)
            expected = result.y.taylor_at(system.poles[j])
            for k in range(order + 1):
                want = (
                    expected[k]
                    if k < len(expected)
                    else tuple(ExactComplex(0) for _ in range(system.size))
                )
                assert tuple(sol.coefficients[k]) == tuple(want), (j, k)


def test_local_taylor_eval_consistency():
    system = scalar_system(1, 1)
    third = ExactComplex(Fraction(1, 3))
    rhs = VecPoly.from_coeffs(
        [(ExactComplex(0) - third,), (ExactComplex(0),), (ExactComplex(1),)],
        exact=True,
    )
    sol = local_taylor(system, 1, rhs, order=4)
    x = ExactComplex(Fraction(3, 4))
    assert sol.eval(x)[0] == x * third


# ----------------------------------------------------------------------
# the shift ladder
# ----------------------------------------------------------------------


def test_shift_up_frozen_values():
    system = scalar_system(Fraction(-1, 4), Fraction(-1, 4))
    g = VecPoly.from_coeffs([(ExactComplex(1),)], exact=True)
    step = shift_up(system, g)
    for j in range(2):
        assert step.system.residues[j].entry(0, 0) == \
            ExactComplex(Fraction(3, 4))
    assert step.particular.degree == 1
    assert step.particular.coefficient(0)[0] == ExactComplex(0)
    assert step.particular.coefficient(1)[0] == ExactComplex(-2)
    # lifted right-hand side carries the substitution exactly:
    # Q * rhs == g - (QB) y0 - Q y0'
    q = system.q_poly()
    lhs = step.rhs.mul_sp(q)
    rhs = g - system.qb_poly().mul_vec(step.particular) \
        - step.particular.derivative().mul_sp(q)
    assert (lhs - rhs).is_zero()


def test_shift_substitution_identity_random():
    rng = random.Random(19)
    for _ in range(6):
        system = random_positive_system(rng)
        g = random_vecpoly(rng, system.size, rng.randint(0, 5))
        step = shift_up(system, g)
        q = system.q_poly()
        lhs = step.rhs.mul_sp(q)
        rhs = g - system.qb_poly().mul_vec(step.particular) \
            - step.particular.derivative().mul_sp(q)
        assert (lhs - rhs).is_zero()
        for j in range(system.n_poles):
            got = step.system.residues[j]
            want = system.residues[j].add_scaled_identity(1)
            assert (got - want).max_abs() == 0


def test_pull_back_recombines_to_direct_answer():
    # ladder rung on b = (-1/4, -1/4), g = 1: the direct answer is
    # phi = 1, y = 0; the lifted problem solves with phi_top = 1 and
    # ytilde = 0, so the pulled-back pieces must recombine to zero.
    system = scalar_system(Fraction(-1, 4), Fraction(-1, 4))
    g = VecPoly.from_coeffs([(ExactComplex(1),)], exact=True)
    step = shift_up(system, g)
    top = solve_polynomial(step.system, step.rhs)
    assert top.phi.coefficient(0)[0] == ExactComplex(1)
    assert top.y.is_zero()
    phi, y1 = pull_back_correction(system, top.phi)
    assert phi.degree == 0
    assert phi.coefficient(0)[0] == ExactComplex(1)
    assert y1.degree == 1
    assert y1.coefficient(1)[0] == ExactComplex(2)
    total = step.particular + y1  # + Q * ytilde, which is zero
    assert total.is_zero()


def test_pull_back_solves_short_problem():
    rng = random.Random(23)
    for _ in range(5):
        system = random_positive_system(rng)
        phi_lifted = random_vecpoly(rng, system.size, system.s)
        phi, y1 = pull_back_correction(system, phi_lifted)
        rhs = phi_lifted.mul_sp(system.q_poly())
        assert cleared_residual(system, rhs, phi, y1).is_zero()
        assert phi.degree <= system.s


# ----------------------------------------------------------------------
# uniqueness check
# ----------------------------------------------------------------------


def test_uniqueness_check_passes_for_positive_spectra():
    rng = random.Random(29)
    system = random_positive_system(rng)
    assert solution_uniqueness_check(system, degree=8) is True


def test_uniqueness_check_warns_when_assumptions_fail():
    # b = (-1/2, -1/2) puts an eigenvalue of B_inf at -1, so the
    # invertibility sweep that the check relies on fails at k = 1.
    system = scalar_system(Fraction(-1, 2), Fraction(-1, 2))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        verdict = solution_uniqueness_check(system, degree=4)
    assert verdict is None
    assert any("uniqueness check skipped" in str(w.message) for w in caught)
