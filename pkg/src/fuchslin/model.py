"""System descriptions and non-degeneracy checks.

A Fuchsian right-hand side is the rational matrix function

    B(x) = sum_j B_j / (x - p_j),    j = 0 .. S+1,

with distinct finite poles p_j and constant square residue matrices B_j.
``FuchsianSystem`` stores the poles and residues and caches the derived
objects everyone needs: the monic pole polynomial Q = prod (x - p_j), its
derivative, the cofactors Q/(x - p_j) (assembled as products, never by
division), the product Q(x)B(x) as a matrix polynomial, and the residue sum
at infinity.

``NonlinearSystem`` couples such a linear part with a polynomial
nonlinearity given term-by-term: for each monomial u^m (|m| >= 2) a vector
of coefficients that may depend polynomially on x.

The two check functions certify the non-degeneracy assumptions under which
the solvers are valid:

* linear: k + B_j invertible for every natural k and every residue,
  including the residue sum at infinity;
* nonlinear: k + (lambda, m) - lambda_i never vanishes for natural k and
  monomial orders 2 .. order_max, per residue spectrum lambda.

Both reduce to finitely many tests because |k + z| > 0 is automatic once
k exceeds |z|; the reports record the bound actually swept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .exact import from_int
from .matrices import ShapeError, mat_eigenvalues
from .poly import MatPoly, sp_diff, sp_eval, sp_from_roots


class AssumptionError(ValueError):
    """A solver precondition (invertibility / nonresonance) fails."""


class FuchsianSystem:
    """Poles and residues of a Fuchsian linear part, with cached algebra."""

    __slots__ = (
        "poles", "residues", "exact", "_cache",
    )

    def __init__(self, poles, residues, min_pole_gap_tol=1e-12):
        poles = tuple(poles)
        residues = tuple(residues)
        if len(poles) < 2:
            raise ShapeError("need at least two poles (S >= 0)")
        if len(poles) != len(residues):
            raise ShapeError("pole/residue count mismatch")
        size = residues[0].n_rows
        for m in residues:
            if not m.is_square or m.n_rows != size:
                raise ShapeError("residues must be square and equally sized")
        exact = residues[0].exact
        if any(m.exact != exact for m in residues):
            raise ShapeError("mixed exact/float residues")
        for a in range(len(poles)):
            for b in range(a + 1, len(poles)):
                if abs(complex(poles[a]) - complex(poles[b])) <= min_pole_gap_tol:
                    raise ValueError(
                        f"poles {a} and {b} coincide within tolerance"
                    )
        self.poles = poles
        self.residues = residues
        self.exact = exact
        self._cache = {}

    # -- basic shape -----------------------------------------------------

    @property
    def size(self):
        """Dimension of the vectors the system acts on."""
        return self.residues[0].n_rows

    @property
    def s(self):
        """S in the pole count S+2."""
        return len(self.poles) - 2

    @property
    def n_poles(self):
        return len(self.poles)

    # -- cached derived objects ------------------------------------------

    def b_infinity(self):
        """Residue at infinity: the sum of all residues."""
        if "binf" not in self._cache:
            acc = self.residues[0]
            for m in self.residues[1:]:
                acc = acc + m
            self._cache["binf"] = acc
        return self._cache["binf"]

    def q_poly(self):
        """Monic scalar polynomial with simple zeros at the poles."""
        if "q" not in self._cache:
            self._cache["q"] = sp_from_roots(self.poles, self.exact)
        return self._cache["q"]

    def q_prime(self):
        if "qp" not in self._cache:
            self._cache["qp"] = sp_diff(self.q_poly())
        return self._cache["qp"]

    def cofactor(self, j):
        """Q(x)/(x - p_j), built as the product of the other linear factors."""
        key = ("cof", j)
        if key not in self._cache:
            roots = [p for k, p in enumerate(self.poles) if k != j]
            self._cache[key] = sp_from_roots(roots, self.exact)
        return self._cache[key]

    def qb_poly(self):
        """Q(x)B(x) = sum_j cofactor_j(x) * B_j as a matrix polynomial."""
        if "qb" not in self._cache:
            acc = MatPoly.zero(self.size, self.size, self.exact)
            for j, res in enumerate(self.residues):
                acc = acc + MatPoly.constant(res).mul_sp(self.cofactor(j))
            self._cache["qb"] = acc
        return self._cache["qb"]

    def lagrange_basis(self, j):
        """The degree-(S+1) polynomial that is 1 at p_j and 0 at other poles."""
        key = ("lag", j)
        if key not in self._cache:
            denom = sp_eval(self.cofactor(j), self.poles[j])
            inv = from_int(1, self.exact) / denom
            self._cache[key] = tuple(inv * c for c in self.cofactor(j))
        return self._cache[key]

    def residue_spectrum(self, j):
        """Float eigenvalues of residue j ('inf' for the residue sum)."""
        key = ("spec", j)
        if key not in self._cache:
            m = self.b_infinity() if j == "inf" else self.residues[j]
            self._cache[key] = mat_eigenvalues(m)
        return self._cache[key]

    def all_spectra(self):
        """(label, eigenvalues) for every residue and the residue sum."""
        out = [(j, self.residue_spectrum(j)) for j in range(self.n_poles)]
        out.append(("inf", self.residue_spectrum("inf")))
        return out

    # -- derived systems -------------------------------------------------

    def shift(self, delta):
        """Same poles, residues B_j + delta*I (delta an integer)."""
        return FuchsianSystem(
            self.poles,
            tuple(m.add_scaled_identity(delta) for m in self.residues),
        )

    def with_residues(self, residues):
        return FuchsianSystem(self.poles, tuple(residues))

    def __repr__(self):
        kind = "exact" if self.exact else "float"
        return (
            f"FuchsianSystem(size={self.size}, poles={self.n_poles}, {kind})"
        )


# ----------------------------------------------------------------------
# assumption reports
# ----------------------------------------------------------------------


@dataclass
class LinearViolation:
    residue: object          # pole index or 'inf'
    k: int
    eigenvalue: complex
    margin: float


@dataclass
class LinearAssumptionReport:
    passed: bool
    k_checked: int
    min_margin: float
    violations: list = field(default_factory=list)


@dataclass
class NonlinearViolation:
    residue: object
    monomial: tuple
    component: int
    k: int
    value: complex
    margin: float


@dataclass
class NonlinearAssumptionReport:
    passed: bool
    order_max: int
    min_margin: float
    violations: list = field(default_factory=list)


def check_linear_assumption(system, k_max=0, tol=1e-9):
    """Certify that k + B_j is invertible for all natural k.

    For each residue (and the residue sum) the sweep runs k from 0 to
    max(k_max, ceil(max |eigenvalue|) + 1); beyond that |k + lambda| grows
    with k, so the finite sweep decides the full condition.
    """
    violations = []
    min_margin = math.inf
    k_checked = 0
    for label, spectrum in system.all_spectra():
        radius = max((abs(ev) for ev in spectrum), default=0.0)
        bound = max(int(k_max), int(math.ceil(radius)) + 1)
        k_checked = max(k_checked, bound)
        for ev in spectrum:
            for k in range(bound + 1):
                margin = abs(ev + k)
                min_margin = min(min_margin, margin)
                if margin <= tol:
                    violations.append(LinearViolation(label, k, ev, margin))
    return LinearAssumptionReport(
        passed=not violations,
        k_checked=k_checked,
        min_margin=float(min_margin),
        violations=violations,
    )


def check_nonlinear_assumption(nonlinear, order_max, tol=1e-9):
    """Certify k + <lambda, m> - lambda_i != 0 up to monomial order order_max.

    Runs per residue spectrum of the linear part (including the residue
    sum).  For each monomial order the k sweep stops at
    ceil((|m|+1) * max|lambda|) + 1, past which no cancellation is possible.
    """
    from .pnspace import multiindices

    system = nonlinear.linear
    d = system.size
    violations = []
    min_margin = math.inf
    for label, spectrum in system.all_spectra():
        radius = max((abs(ev) for ev in spectrum), default=0.0)
        for order in range(2, order_max + 1):
            bound = int(math.ceil((order + 1) * radius)) + 1
            for m in multiindices(d, order):
                shift = sum(mi * ev for mi, ev in zip(m, spectrum))
                for i, ev_i in enumerate(spectrum):
                    base = shift - ev_i
                    for k in range(bound + 1):
                        margin = abs(base + k)
                        min_margin = min(min_margin, margin)
                        if margin <= tol:
                            violations.append(
                                NonlinearViolation(
                                    label, m, i, k, base + k, margin
                                )
                            )
    return NonlinearAssumptionReport(
        passed=not violations,
        order_max=order_max,
        min_margin=float(min_margin),
        violations=violations,
    )


# ----------------------------------------------------------------------
# nonlinear system
# ----------------------------------------------------------------------


class NonlinearSystem:
    """du/dx = A(x)u + (1/Q) f(x, u) with Fuchsian A and polynomial f.

    The nonlinearity is a mapping {multi-index m: vector polynomial in x}
    holding the coefficient of u^m; every multi-index has total degree at
    least 2 and length equal to the system size.
    """

    __slots__ = ("linear", "nonlinearity")

    def __init__(self, linear, nonlinearity):
        d = linear.size
        terms = {}
        for m, coeff in nonlinearity.items():
            m = tuple(int(v) for v in m)
            if len(m) != d:
                raise ShapeError(
                    f"monomial {m} has length {len(m)}, system size is {d}"
                )
            if any(v < 0 for v in m):
                raise ValueError(f"negative exponent in monomial {m}")
            if sum(m) < 2:
                raise ValueError(
                    f"monomial {m} has order {sum(m)} < 2; linear terms "
                    "belong to the linear part"
                )
            if coeff.dim != d:
                raise ShapeError("nonlinearity coefficient dimension mismatch")
            if coeff.exact != linear.exact:
                raise ShapeError("mixed exact/float nonlinearity")
            if not coeff.is_zero():
                terms[m] = coeff
        self.linear = linear
        self.nonlinearity = terms

    @property
    def size(self):
        return self.linear.size

    @property
    def exact(self):
        return self.linear.exact

    def order_max(self):
        return max((sum(m) for m in self.nonlinearity), default=0)

    def terms_sorted(self):
        return sorted(self.nonlinearity.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def terms_of_order(self, n):
        return {m: c for m, c in self.nonlinearity.items() if sum(m) == n}

    def x_degree(self):
        return max((c.degree for c in self.nonlinearity.values()), default=-1)

    def __repr__(self):
        return (
            f"NonlinearSystem(size={self.size}, "
            f"terms={len(self.nonlinearity)}, order<={self.order_max()})"
        )
