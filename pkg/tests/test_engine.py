"""Order-by-order linearization engine, both modes, and its verifier."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from fuchslin.engine import (
    SeriesTable,
    compare_modes,
    compose_series,
    linearize,
    normal_form,
    verify_conjugacy,
)
from fuchslin.exact import ExactComplex
from fuchslin.matrices import CMatrix, ShapeError
from fuchslin.model import AssumptionError, FuchsianSystem, NonlinearSystem
from fuchslin.pnspace import PnBasis
from fuchslin.poly import VecPoly


def ec(v):
    return ExactComplex.parse(v)


def scalar_linear(a0, a1):
    return FuchsianSystem(
        (ExactComplex(-1), ExactComplex(1)),
        (
            CMatrix.from_rows([[ec(a0)]], True),
            CMatrix.from_rows([[ec(a1)]], True),
        ),
    )


def vp(rows, d=1):
    """VecPoly from ascending rows of entries (ints / fractions / strings)."""
    return VecPoly.from_coeffs(
        [tuple(ec(v) for v in row) for row in rows], exact=True, dim=d
    )


def random_nonresonant(rng, d_max=2, s_max=1, u_order=3, x_deg=2):
    """Triangular residues, per-matrix spectra inside [1, 1.9]: then every
    lambda . m - lambda_i is positive, so no k >= 0 can hit a resonance."""
    d = rng.randint(1, d_max)
    s = rng.randint(0, s_max)
    poles = []
    while len(poles) < s + 2:
        c = ExactComplex(Fraction(rng.randint(-4, 4), 2))
        if all(c != p for p in poles):
            poles.append(c)
    mats = []
    for _ in range(s + 2):
        rows = [[ExactComplex(0)] * d for _ in range(d)]
        for i in range(d):
            rows[i][i] = ExactComplex(Fraction(rng.randint(10, 19), 10))
            for j in range(i + 1, d):
                rows[i][j] = ExactComplex(Fraction(rng.randint(-1, 1), 3))
        mats.append(CMatrix.from_rows(rows, True))
    linear = FuchsianSystem(tuple(poles), tuple(mats))

    terms = {}
    # d = 1 only has u^2 and u^3 available, so cap the request there
    n_terms = rng.randint(1, 2 if d == 1 else 3)
    while len(terms) < n_terms:
        m = tuple(rng.randint(0, u_order) for _ in range(d))
        if not 2 <= sum(m) <= u_order:
            continue
        coeffs = [
            tuple(
                ExactComplex(Fraction(rng.randint(-2, 2), 2)) for _ in range(d)
            )
            for _ in range(rng.randint(1, x_deg + 1))
        ]
        p = VecPoly.from_coeffs(coeffs, exact=True, dim=d)
        if not p.is_zero():
            terms[m] = p
    return NonlinearSystem(linear, terms)


# ----------------------------------------------------------------------
# SeriesTable
# ----------------------------------------------------------------------


def test_series_table_basics():
    t = SeriesTable(2, True)
    t.set((2, 0), vp([[1, 0]], d=2))
    t.set((0, 2), vp([[0, 1]], d=2))
    t.set((1, 1), VecPoly.zero(2, True))      # zero entries are dropped
    assert len(t) == 2
    assert t.get((1, 1)) is None
    assert [m for m, _ in t.items_sorted()] == [(0, 2), (2, 0)]
    assert t.max_order() == 2
    assert set(t.order_slice(2)) == {(0, 2), (2, 0)}
    with pytest.raises(ShapeError):
        t.set((1, 0, 0), vp([[1, 0]], d=2))


# ----------------------------------------------------------------------
# compose_series
# ----------------------------------------------------------------------


def test_compose_with_trivial_h_returns_f_slice():
    f = {
        (2, 0): vp([[1, 0]], d=2),
        (1, 1): vp([[0, 0], [2, 0]], d=2),
        (0, 3): vp([[0, 5]], d=2),
    }
    h = SeriesTable(2, True)
    got2 = compose_series(f, h, None, 2)
    assert set(got2) == {(2, 0), (1, 1)}
    assert (got2[(2, 0)] - f[(2, 0)]).is_zero()
    assert (got2[(1, 1)] - f[(1, 1)]).is_zero()
    got3 = compose_series(f, h, None, 3)
    assert set(got3) == {(0, 3)}
    got4 = compose_series(f, h, None, 4)
    assert got4 == {}


def test_compose_quadratic_through_substitution():
    # f = x u^2, h_2 = w^2/2: [x (w + w^2/2 + ...)^2]_3 = x w^3
    f = {(2,): vp([[0], [1]])}
    h = SeriesTable(1, True)
    h.set((2,), vp([[Fraction(1, 2)]]))
    got = compose_series(f, h, None, 3)
    assert set(got) == {(3,)}
    assert (got[(3,)] - vp([[0], [1]])).is_zero()
    # and the order-4 part picks up the square of h_2: x w^4 / 4
    got4 = compose_series(f, h, None, 4)
    assert (got4[(4,)] - vp([[0], [Fraction(1, 4)]])).is_zero()


def test_compose_mode_difference_is_real():
    # at order 3 a single h-insertion feeds both modes, so they coincide:
    # [c w^2 at w+h]_3 = 2c w h_2 equals (d_w h_2) c w^2
    f = {(2,): vp([[0], [1]])}
    h = SeriesTable(1, True)
    h.set((2,), vp([[1]]))
    extra = SeriesTable(1, True)
    extra.set((2,), vp([[0], [3]]))   # psi_2 = 3 x w^2
    obstruction = compose_series(f, h, extra, 3, mode="obstruction")
    normal = compose_series(f, h, extra, 3, mode="normal-form")
    assert (obstruction[(3,)] - normal[(3,)]).is_zero()
    # at order 4 the double insertion enters only through the composition:
    # [c_2 (w+h)^2]_4 contains c_2 h_2^2, with no Jacobian counterpart, so
    # obstruction - normal = -psi_2 h_2^2 / w^2 = -3 x w^4
    obstruction = compose_series(f, h, extra, 4, mode="obstruction")
    normal = compose_series(f, h, extra, 4, mode="normal-form")
    diff = obstruction[(4,)] - normal[(4,)]
    assert (diff - vp([[0], [-3]])).is_zero()


def test_compose_rejects_unknown_mode():
    with pytest.raises(ValueError):
        compose_series({}, SeriesTable(1, True), None, 2, mode="direct")


# ----------------------------------------------------------------------
# scalar pipeline oracles
# ----------------------------------------------------------------------


def test_pure_square_is_its_own_obstruction():
    linear = scalar_linear(1, 1)
    nl = NonlinearSystem(linear, {(2,): vp([[1]])})
    phi, h = linearize(nl, 6)
    assert len(h) == 0
    assert [m for m, _ in phi.items_sorted()] == [(2,)]
    assert (phi.get((2,)) - vp([[1]])).is_zero()
    report = verify_conjugacy(nl, phi, h, 6)
    assert report.passed and report.max_residual == 0.0
    # with h = 0 the two recursions coincide, psi == phi here
    psi, h2 = normal_form(nl, 6)
    assert len(h2) == 0
    assert (psi.get((2,)) - vp([[1]])).is_zero()


def test_x_square_transfers_to_substitution():
    linear = scalar_linear(1, 1)
    nl = NonlinearSystem(linear, {(2,): vp([[0], [1]])})
    phi, h = linearize(nl, 6)
    assert len(phi) == 0
    for m in range(2, 7):
        hm = h.get((m,))
        assert hm is not None and hm.degree == 0
        assert hm.coefficient(0)[0] == ExactComplex(Fraction(1, 2 ** (m - 1)))
    report = verify_conjugacy(nl, phi, h, 6)
    assert report.passed and report.max_residual == 0.0


def test_corrupted_substitution_fails_verification():
    linear = scalar_linear(1, 1)
    nl = NonlinearSystem(linear, {(2,): vp([[0], [1]])})
    phi, h = linearize(nl, 4)
    bad = h.copy()
    bad.set((2,), h.get((2,)) + vp([[1]]))
    report = verify_conjugacy(nl, phi, bad, 4)
    assert not report.passed
    assert report.max_residual > 1.0e-9


# ----------------------------------------------------------------------
# the two modes
# ----------------------------------------------------------------------


def test_modes_agree_at_order_two():
    rng = random.Random(37)
    for _ in range(6):
        nl = random_nonresonant(rng)
        comp = compare_modes(nl, 2)
        assert comp.agree, comp.differences


def test_mode_divergence_frozen_example():
    # 2-d system where the two canonical corrections provably separate at
    # order 3; the constants below are frozen from an independent symbolic
    # solve of both defining identities.
    linear = FuchsianSystem(
        (ExactComplex(-1), ExactComplex(1)),
        (
            CMatrix.from_rows(
                [[ec(1), ec("1/3")], [ec(0), ec("3/2")]], True
            ),
            CMatrix.from_rows(
                [[ec("5/4"), ec(0)], [ec("1/5"), ec(2)]], True
            ),
        ),
    )
    nl = NonlinearSystem(
        linear,
        {
            (2, 0): vp([[1, 0], [0, 1]], d=2),
            (1, 1): vp([[0, 1]], d=2),
            (0, 3): vp([[Fraction(1, 2), 1]], d=2),
        },
    )
    comp = compare_modes(nl, 3)
    assert not comp.agree
    assert comp.first_divergence == 3
    assert (0, 3) in comp.differences
    phi_val = comp.phi.get((0, 3)).coefficient(0)[0]
    psi_val = comp.psi.get((0, 3)).coefficient(0)[0]
    assert phi_val.re == Fraction(7754649167878373, 15472265274892746)
    assert psi_val.re == Fraction(2577582410924791, 5157421758297582)
    # each mode satisfies its own identity exactly ...
    rep_obs = verify_conjugacy(nl, comp.phi, comp.h_obstruction, 3)
    rep_nf = verify_conjugacy(
        nl, comp.psi, comp.h_normal_form, 3, mode="normal-form"
    )
    assert rep_obs.max_residual == 0.0
    assert rep_nf.max_residual == 0.0
    # ... and the obstruction pair does not satisfy the other identity
    crossed = verify_conjugacy(
        nl, comp.phi, comp.h_obstruction, 3, mode="normal-form"
    )
    assert crossed.max_residual > 0.0


def test_degree_bound_and_exact_residuals_random():
    rng = random.Random(41)
    for _ in range(4):
        nl = random_nonresonant(rng)
        s = nl.linear.s
        phi, h = linearize(nl, 4)
        for m, p in phi:
            assert p.degree <= s, (m, p.degree, s)
        report = verify_conjugacy(nl, phi, h, 4)
        assert report.max_residual == 0.0
        psi, h2 = normal_form(nl, 4)
        for m, p in psi:
            assert p.degree <= s
        report2 = verify_conjugacy(nl, psi, h2, 4, mode="normal-form")
        assert report2.max_residual == 0.0


# ----------------------------------------------------------------------
# determinism
# ----------------------------------------------------------------------


def test_insertion_order_does_not_change_floats():
    linear = FuchsianSystem(
        (-1.0 + 0j, 1.0 + 0j),
        (
            CMatrix.from_rows([[1.3 + 0j, 0.1 + 0j], [0j, 1.7 + 0j]], False),
            CMatrix.from_rows([[1.1 + 0j, 0j], [0.2 + 0j, 1.9 + 0j]], False),
        ),
    )
    entries = [
        ((2, 0), VecPoly.from_coeffs([(0.3 + 0j, 0.7 + 0j)], False, dim=2)),
        ((1, 1), VecPoly.from_coeffs(
            [(0.2 + 0j, 0j), (0j, 1.1 + 0j)], False, dim=2)),
        ((0, 2), VecPoly.from_coeffs([(0.9 + 0j, 0.4 + 0j)], False, dim=2)),
        ((3, 0), VecPoly.from_coeffs([(0j, 0.5 + 0j)], False, dim=2)),
    ]
    nl_fwd = NonlinearSystem(linear, dict(entries))
    nl_rev = NonlinearSystem(linear, dict(reversed(entries)))
    phi_a, h_a = linearize(nl_fwd, 4)
    phi_b, h_b = linearize(nl_rev, 4)
    for (m1, p1), (m2, p2) in zip(phi_a.items_sorted(), phi_b.items_sorted()):
        assert m1 == m2
        assert p1.coeffs == p2.coeffs
    for (m1, p1), (m2, p2) in zip(h_a.items_sorted(), h_b.items_sorted()):
        assert m1 == m2
        assert p1.coeffs == p2.coeffs


def test_block_enumeration_is_immaterial():
    rng = random.Random(43)
    nl = random_nonresonant(rng, d_max=2, s_max=1)

    def shuffled(d, n):
        canonical = PnBasis(d, n)
        items = list(canonical.items)
        random.Random(10_000 + n).shuffle(items)
        return PnBasis(d, n, order=items)

    phi_a, h_a = linearize(nl, 4)
    phi_b, h_b = linearize(nl, 4, basis_factory=shuffled)
    assert [m for m, _ in phi_a] == [m for m, _ in phi_b]
    for (m1, p1), (m2, p2) in zip(phi_a.items_sorted(), phi_b.items_sorted()):
        assert (p1 - p2).is_zero(), m1
    for (m1, p1), (m2, p2) in zip(h_a.items_sorted(), h_b.items_sorted()):
        assert m1 == m2 and (p1 - p2).is_zero()


# ----------------------------------------------------------------------
# guard rails
# ----------------------------------------------------------------------


def test_resonant_spectrum_rejected():
    linear = FuchsianSystem(
        (ExactComplex(-1), ExactComplex(1)),
        (
            CMatrix.from_rows([[ec(1), ec(0)], [ec(0), ec(2)]], True),
            CMatrix.from_rows([[ec(1), ec(0)], [ec(0), ec(1)]], True),
        ),
    )
    nl = NonlinearSystem(linear, {(2, 0): vp([[1, 0]], d=2)})
    with pytest.raises(AssumptionError):
        linearize(nl, 3)
