"""Constructive correction of a Fuchsian right-hand side.

The prototype problem: given the equation

    y' + B(x) y = (1/Q) g(x)

with polynomial g, find the unique polynomial correction phi of degree at
most S and polynomial solution y such that

    y' + B(x) y = (1/Q) (g(x) - phi(x)).

``solve_polynomial`` does this by expanding g in the lowered-residue
polynomial family: members of index <= S are plain monomials and make up
phi; every higher member of the lowered family is Q times a derivative of a
weighted product, which after peeling one derivative becomes the original
family applied one block lower -- so the remaining part is reachable and y
comes out degree deg g - S - 1.

``local_taylor`` independently solves the same equation as a Taylor series
at one pole (the cross-check used by tests and certificates).

``shift_up`` / ``pull_back_correction`` implement one rung of the shift
ladder: when residue spectra have nonpositive real parts, the substitution
y = y_0 + Q ytilde moves the problem to residues B_j + I; the pull-back
solves a short polynomial problem to carry a correction of the lifted
system down to the original one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .exact import from_int
from .matrices import (
    SingularMatrixError,
    is_invertible,
    solve_linear,
    vec_add,
    vec_is_zero,
    vec_scale,
    vec_sub,
    vec_zero,
)
from .model import AssumptionError, check_linear_assumption
from .poly import VecPoly, sp_eval, sp_taylor
from .rodrigues import RodriguesFamily, shifted_system


@dataclass
class CorrectionResult:
    """The degree <= S obstruction and the solution it unlocks.

    ``y`` is a VecPoly on the polynomial path and an analytic solution
    handle on the analytic path.
    """

    phi: VecPoly
    y: object


@dataclass
class TaylorSolution:
    """Series solution at one pole, in powers of (x - center)."""

    pole_index: int
    center: object
    coefficients: list

    def eval(self, x):
        t = x - self.center
        acc = None
        for v in reversed(self.coefficients):
            if acc is None:
                acc = v
            else:
                acc = vec_add(vec_scale(t, acc), v)
        return acc

    @property
    def order(self):
        return len(self.coefficients) - 1


@dataclass
class ShiftStep:
    """One rung of the shift ladder.

    The original problem (B, g) becomes (B + I, rhs) for ytilde after
    substituting y = particular + Q * ytilde.
    """

    system: object
    rhs: VecPoly
    particular: VecPoly


def solve_polynomial(system, g, tol=1e-12):
    """Unique polynomial correction and solution for a polynomial rhs.

    Needs every integer shift k + B_j and k + B_inf invertible (the
    expansion raises AssumptionError on a singular leading coefficient);
    no spectral positivity and no nonresonance between eigenvalues.
    """
    if g.dim != system.size:
        raise ValueError("right-hand side dimension mismatch")
    exact = system.exact
    work = g if exact else g.trim(tol)
    s = system.s
    if work.degree <= s:
        return CorrectionResult(phi=work, y=VecPoly.zero(system.size, exact))
    lowered = RodriguesFamily(shifted_system(system))
    coeffs = lowered.expand(work, tol)
    phi = VecPoly.from_coeffs(coeffs[: s + 1], exact, dim=system.size)
    base = RodriguesFamily(system)
    y = VecPoly.zero(system.size, exact)
    for n in range(s + 1, len(coeffs)):
        vec = coeffs[n]
        if vec_is_zero(vec):
            continue
        y = y + base.member_times_vector(n - s - 1, tuple(vec))
    return CorrectionResult(phi=phi, y=y)


def local_taylor(system, pole_index, rhs, order, tol=1e-12):
    """Taylor solution of y' + B y = rhs / Q at pole ``pole_index``.

    Multiplying by t = x - p_j gives t y' + (B_j + t C(x)) y = G(t) with
    G = rhs / (Q / (x - p_j)); the coefficients satisfy

        (k + B_j) y_k = G_k - sum_{l<k} C_l y_{k-1-l},

    solvable term by term whenever the integer shifts of B_j are
    invertible.
    """
    exact = system.exact
    d = system.size
    center = system.poles[pole_index]
    count = order + 1

    num = _padded_taylor(rhs, center, count, d, exact)
    cof = system.cofactor(pole_index)
    den = _scalar_taylor(cof, center, count, exact)
    g_series = _divide_series(num, den, count, d, exact)

    c_blocks = _neighbor_series(system, pole_index, count)

    b_j = system.residues[pole_index]
    ys = []
    for k in range(count):
        acc = g_series[k]
        for l in range(k):
            acc = vec_sub(acc, c_blocks[l].matvec(ys[k - 1 - l]))
        try:
            yk = solve_linear(b_j.add_scaled_identity(k), acc, tol)
        except SingularMatrixError as err:
            raise AssumptionError(
                f"k + B_{pole_index} singular at k={k}: {err}"
            ) from None
        ys.append(yk)
    return TaylorSolution(pole_index, center, ys)


def shift_up(system, g, tol=1e-12):
    """Trade spectra for degree: move the problem to residues B_j + I.

    Splits g into its interpolant at the poles plus a multiple of Q,
    solves the residue equations B_j y_0(p_j) = g(p_j)/Q'(p_j) to build
    the particular part y_0, and returns the lifted system with the new
    polynomial right-hand side for ytilde in y = y_0 + Q ytilde.
    """
    exact = system.exact
    d = system.size
    if g.dim != d:
        raise ValueError("right-hand side dimension mismatch")
    q = system.q_poly()
    qprime = system.q_prime()

    # residues of g/Q and the particular part y_0 via Lagrange basis
    y0 = VecPoly.zero(d, exact)
    g_interp = VecPoly.zero(d, exact)
    for j in range(system.n_poles):
        p_j = system.poles[j]
        gj_val = g.eval(p_j)
        lag = system.lagrange_basis(j)
        g_interp = g_interp + VecPoly.constant(gj_val, exact).mul_sp(lag)
        resid = vec_scale(
            from_int(1, exact) / sp_eval(qprime, p_j), gj_val
        )
        try:
            cj = solve_linear(system.residues[j], resid, tol)
        except SingularMatrixError as err:
            raise AssumptionError(
                f"residue B_{j} singular; ladder step undefined: {err}"
            ) from None
        y0 = y0 + VecPoly.constant(cj, exact).mul_sp(lag)

    # (g - interpolant)/Q exactly, plus the polynomial part of g_P/Q - B y_0
    g_tail = (g - g_interp).div_exact_sp(q, tol)
    poly_part = (g_interp - system.qb_poly().mul_vec(y0)).div_exact_sp(q, tol)
    new_rhs = g_tail - y0.derivative() + poly_part
    return ShiftStep(system=system.shift(1), rhs=new_rhs, particular=y0)


def pull_back_correction(system, phi_lifted, tol=1e-12):
    """Carry a degree <= S correction of the lifted system down one rung.

    With y = y_0 + Q ytilde and ytilde solving the lifted problem corrected
    by phi_lifted, the original correction solves the short polynomial
    problem with right-hand side Q * phi_lifted; its solution y_1 (degree
    <= S+1) joins the ladder as y = y_0 + y_1 + Q ytilde.
    """
    rhs = phi_lifted.mul_sp(system.q_poly())
    result = solve_polynomial(system, rhs, tol)
    return result.phi, result.y


def solution_uniqueness_check(system, degree, tol=1e-12, k_max=0):
    """Does the polynomial problem have a trivial kernel up to ``degree``?

    True when every leading coefficient of both families involved is
    invertible through the given right-hand-side degree -- then expansion
    coefficients, hence (phi, y), are uniquely determined.  Returns None
    (with a warning) when the integer-shift invertibility that the check
    itself rests on fails.
    """
    report = check_linear_assumption(system, k_max=max(k_max, degree), tol=max(tol, 1e-9))
    if not report.passed:
        warnings.warn(
            "uniqueness check skipped: integer-shift invertibility fails "
            f"(first violation: residue {report.violations[0].residue}, "
            f"k={report.violations[0].k})",
            stacklevel=2,
        )
        return None
    lowered = RodriguesFamily(shifted_system(system))
    base = RodriguesFamily(system)
    for n in range(degree + 1):
        if not is_invertible(lowered.leading_coeff(n), tol):
            return False
        if not is_invertible(base.leading_coeff(n), tol):
            return False
    return True


# ----------------------------------------------------------------------
# series helpers
# ----------------------------------------------------------------------


def _padded_taylor(p, center, count, dim, exact):
    coeffs = p.taylor_at(center)
    zero = vec_zero(dim, exact)
    return [coeffs[k] if k < len(coeffs) else zero for k in range(count)]


def _scalar_taylor(sp, center, count, exact):
    shifted = sp_taylor(sp, center, exact)
    zero = from_int(0, exact)
    return [shifted[k] if k < len(shifted) else zero for k in range(count)]


def _divide_series(num, den, count, dim, exact):
    """Vector series / scalar series with den[0] != 0, to ``count`` terms."""
    if not den or (not den[0] if exact else abs(den[0]) == 0.0):
        raise ZeroDivisionError("series division by a vanishing leading term")
    inv0 = from_int(1, exact) / den[0]
    out = []
    for k in range(count):
        acc = num[k]
        for l in range(k):
            acc = vec_sub(acc, vec_scale(den[k - l], out[l]))
        out.append(vec_scale(inv0, acc))
    return out


def _neighbor_series(system, pole_index, count):
    """Taylor blocks of sum_{k != j} B_k/(x - p_k) at pole j.

    Block l is sum_k (-1)^l B_k / (p_j - p_k)^{l+1}.
    """
    exact = system.exact
    p_j = system.poles[pole_index]
    out = []
    for l in range(count):
        acc = None
        for k in range(system.n_poles):
            if k == pole_index:
                continue
            delta = p_j - system.poles[k]
            factor = from_int((-1) ** l, exact) / delta ** (l + 1)
            term = system.residues[k].scale(factor)
            acc = term if acc is None else acc + term
        out.append(acc)
    return out
