"""Formal linearization and normal forms, order by order.

For du/dx = A(x)u + (1/Q) f(x, u) with Fuchsian A and polynomial f, seek a
substitution u = w + h(x, w) (h of order >= 2 in w) transforming the system
into dw/dx = A(x)w + (1/Q) phi(x, w).  Matching orders in w, each
homogeneous degree n satisfies a linear problem

    d_x h_n + (d_w h_n) A w - A h_n = (1/Q) (g_n - phi_n)

whose left-hand operator, written in the canonical monomial basis, is
exactly a Fuchsian system of the induced size -- so the polynomial
correction solver produces the unique obstruction phi_n of x-degree <= S
and the coefficient h_n in one stroke.  The right-hand side g_n collects
the already-known orders: compositions of f and of the lower obstruction
terms with w + h.

Two modes:

* ``obstruction``: the correction phi is substituted along with f, so the
  blocks subtract the composition [phi_{<n}(x, w + h)]_n.  The corrected
  equation u' = Au + (f - phi)/Q is then exactly linearizable.
* ``normal-form``: the target system keeps psi(x, w) at w itself
  (w' = Aw + psi/Q), so the blocks subtract the Jacobian product
  [(d_w h) psi_{<n}]_n instead.

The two right-hand sides coincide at order 2 (both reduce to f_2) but not
in general beyond it, so psi and phi agree at order 2 and may diverge from
order 3 on -- they are different canonical objects answering different
questions.  ``compare_modes`` reports where they separate;
``verify_conjugacy`` checks each mode against its own identity.

All series loops iterate keys in sorted order, so results are
bit-for-bit reproducible regardless of how the nonlinearity table was
assembled (float addition is not associative; a fixed order makes it
deterministic).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .correction import solve_polynomial
from .exact import from_int
from .model import AssumptionError, check_nonlinear_assumption
from .pnspace import devectorize, induced_system, vectorize
from .poly import VecPoly, sp_add, sp_mul, sp_scale, sp_sub
from .matrices import ShapeError


class SeriesTable:
    """Homogeneous term table: {monomial m: vector polynomial in x}.

    Holds all orders of one formal series (h, phi, or psi); order n is the
    slice with |m| = n.
    """

    __slots__ = ("dim", "exact", "terms")

    def __init__(self, dim, exact, terms=None):
        self.dim = dim
        self.exact = exact
        self.terms = {}
        if terms:
            for m, p in terms.items():
                self.set(m, p)

    def set(self, m, p):
        m = tuple(int(v) for v in m)
        if len(m) != self.dim:
            raise ShapeError(f"monomial {m} does not match dimension {self.dim}")
        if p.dim != self.dim:
            raise ShapeError("table entry has wrong vector dimension")
        if p.is_zero():
            self.terms.pop(m, None)
        else:
            self.terms[m] = p

    def get(self, m):
        return self.terms.get(tuple(m))

    def order_slice(self, n):
        return {m: p for m, p in self.terms.items() if sum(m) == n}

    def items_sorted(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def max_order(self):
        return max((sum(m) for m in self.terms), default=0)

    def copy(self):
        return SeriesTable(self.dim, self.exact, dict(self.terms))

    def max_abs(self):
        return max((p.max_abs() for p in self.terms.values()), default=0.0)

    def __iter__(self):
        return iter(self.items_sorted())

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return (
            f"SeriesTable(dim={self.dim}, terms={len(self.terms)}, "
            f"order<={self.max_order()})"
        )


@dataclass
class ConjugacyReport:
    """Cleared-denominator residual of the conjugacy identity, per order."""

    mode: str
    tol: float
    residuals: dict = field(default_factory=dict)

    @property
    def max_residual(self):
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self):
        return self.max_residual <= self.tol


# ----------------------------------------------------------------------
# truncated multivariate series over x-polynomials
# ----------------------------------------------------------------------


def _ser_mul(a, b, n_max, exact):
    out = {}
    for ma in sorted(a):
        ca = a[ma]
        for mb in sorted(b):
            total = tuple(x + y for x, y in zip(ma, mb))
            if sum(total) > n_max:
                continue
            prod = sp_mul(ca, b[mb], exact)
            if not prod:
                continue
            cur = out.get(total)
            out[total] = sp_add(cur, prod) if cur is not None else prod
    return out


def _substitution_components(h_table, dim, exact, n_max):
    """Component series of w + h(x, w), each a {monomial: x-poly} dict."""
    one = (from_int(1, exact),)
    subs = []
    for i in range(dim):
        base = {}
        unit = tuple(1 if j == i else 0 for j in range(dim))
        base[unit] = one
        for m, p in sorted(h_table.terms.items()):
            if sum(m) > n_max:
                continue
            comp = p.component(i)
            if comp:
                base[m] = comp
        subs.append(base)
    return subs


def _power_chain(series, k_max, n_max, exact, dim):
    """[series^0, series^1, ..., series^k_max] truncated at degree n_max."""
    one = {(0,) * dim: (from_int(1, exact),)}
    chain = [one]
    for _ in range(k_max):
        chain.append(_ser_mul(chain[-1], series, n_max, exact))
    return chain


def compose_series(f_terms, h_table, extra, n, mode="obstruction"):
    """Degree-n homogeneous part of the composed right-hand side.

    ``f_terms`` is a {monomial: VecPoly} table; ``h_table`` a SeriesTable
    with all orders below n already filled; ``extra`` holds the lower
    obstruction (phi) or normal-form (psi) terms, or None.

    obstruction:  [(f - extra)(x, w + h)]_n
    normal-form:  [f(x, w + h)]_n - [(d_w h) extra(x, w)]_n
    """
    if mode not in ("obstruction", "normal-form"):
        raise ValueError(f"unknown mode {mode!r}")
    dim = h_table.dim
    exact = h_table.exact

    table = {m: p for m, p in f_terms.items()}
    if mode == "obstruction" and extra is not None:
        for m, p in extra.items_sorted():
            cur = table.get(m)
            table[m] = (cur - p) if cur is not None else -p

    subs = _substitution_components(h_table, dim, exact, n)
    max_pow = [0] * dim
    for m in table:
        for i in range(dim):
            max_pow[i] = max(max_pow[i], m[i])
    chains = [
        _power_chain(subs[i], max_pow[i], n, exact, dim) for i in range(dim)
    ]

    acc = {}
    for mt in sorted(table):
        coeff = table[mt]
        prod = chains[0][mt[0]]
        for i in range(1, dim):
            prod = _ser_mul(prod, chains[i][mt[i]], n, exact)
        for mu in sorted(prod):
            if sum(mu) != n:
                continue
            spoly = prod[mu]
            slot = acc.setdefault(mu, [() for _ in range(dim)])
            for i in range(dim):
                comp = coeff.component(i)
                if comp:
                    slot[i] = sp_add(slot[i], sp_mul(comp, spoly, exact))

    if mode == "normal-form" and extra is not None:
        for mh in sorted(h_table.terms):
            hp = h_table.terms[mh]
            for mp, psip in extra.items_sorted():
                if sum(mh) - 1 + sum(mp) != n:
                    continue
                for l in range(dim):
                    if mh[l] == 0:
                        continue
                    target = list(mh)
                    target[l] -= 1
                    target = tuple(
                        t + e for t, e in zip(target, mp)
                    )
                    factor = psip.component(l)
                    if not factor:
                        continue
                    slot = acc.setdefault(target, [() for _ in range(dim)])
                    for i in range(dim):
                        comp = hp.component(i)
                        if comp:
                            slot[i] = sp_sub(
                                slot[i],
                                sp_scale(
                                    from_int(mh[l], exact),
                                    sp_mul(comp, factor, exact),
                                ),
                            )

    out = {}
    for mu in sorted(acc):
        p = _components_to_vecpoly(acc[mu], dim, exact)
        if not p.is_zero():
            out[mu] = p
    return out


def _components_to_vecpoly(comps, dim, exact):
    deg = max((len(c) for c in comps), default=0)
    coeffs = [
        tuple(
            comps[i][k] if k < len(comps[i]) else from_int(0, exact)
            for i in range(dim)
        )
        for k in range(deg)
    ]
    return VecPoly.from_coeffs(coeffs, exact, dim=dim)


# ----------------------------------------------------------------------
# the order-by-order engine
# ----------------------------------------------------------------------


def linearize(nonlinear, order_max, tol=1e-12, resonance_tol=1e-9,
              basis_factory=None):
    """Formal linearization through monomial order ``order_max``.

    Returns (phi, h): the obstruction series (each term of x-degree <= S)
    and the substitution series u = w + h(x, w) that linearizes the
    phi-corrected system.  Raises AssumptionError when the nonresonance
    sweep fails.  ``basis_factory(d, n)`` may override the block basis
    enumeration; the output is enumeration-independent.
    """
    return _run_engine(nonlinear, order_max, "obstruction", tol,
                       resonance_tol, basis_factory)


def normal_form(nonlinear, order_max, tol=1e-12, resonance_tol=1e-9,
                basis_factory=None):
    """Normal-form variant: the corrected terms ride along in w itself.

    Returns (psi, h) with w' = Aw + psi(x, w)/Q the target system and
    u = w + h(x, w) the conjugacy from the original equation.  The block
    right-hand sides differ from ``linearize``'s (a Jacobian product
    d_w h * psi replaces the composition of the correction with w + h), so
    psi matches the obstruction series at order 2 but in general diverges
    from it at higher orders; see ``compare_modes``.
    """
    return _run_engine(nonlinear, order_max, "normal-form", tol,
                       resonance_tol, basis_factory)


def _run_engine(nonlinear, order_max, mode, tol, resonance_tol,
                basis_factory=None):
    report = check_nonlinear_assumption(nonlinear, order_max, resonance_tol)
    if not report.passed:
        v = report.violations[0]
        raise AssumptionError(
            f"nonlinear nonresonance fails at residue {v.residue}, monomial "
            f"{v.monomial}, component {v.component}, k={v.k} "
            f"(|value| = {v.margin:.3e})"
        )
    d = nonlinear.size
    exact = nonlinear.exact
    h = SeriesTable(d, exact)
    out = SeriesTable(d, exact)
    linear = nonlinear.linear

    for n in range(2, order_max + 1):
        g_table = compose_series(
            nonlinear.nonlinearity, h, out, n, mode=mode
        )
        custom = None if basis_factory is None else basis_factory(d, n)
        block, basis = induced_system(linear, n, basis=custom)
        g_vec = vectorize(g_table, basis, exact)
        result = solve_polynomial(block, g_vec, tol)
        for m, p in sorted(devectorize(result.phi, basis, exact).items()):
            out.set(m, p)
        for m, p in sorted(devectorize(result.y, basis, exact).items()):
            h.set(m, p)
    return out, h


# ----------------------------------------------------------------------
# verification
# ----------------------------------------------------------------------


def verify_conjugacy(nonlinear, series, h, order_max, mode="obstruction",
                     tol=1e-9):
    """Residual of the conjugacy identity with denominators cleared.

    obstruction:  Q d_x h + (d_w h)(QA)w - (QA)h = [f - series](x, w + h)
    normal-form:  ... = f(x, w + h) - series(x, w) - (d_w h) series(x, w)

    checked order by order through ``order_max``; the report holds the
    maximal absolute coefficient of the difference per order.  In exact
    arithmetic the residuals are exact zeros.
    """
    if mode not in ("obstruction", "normal-form"):
        raise ValueError(f"unknown mode {mode!r}")
    linear = nonlinear.linear
    d = nonlinear.size
    exact = nonlinear.exact
    q = linear.q_poly()
    qa = linear.qb_poly()

    report = ConjugacyReport(mode=mode, tol=tol)
    for n in range(2, order_max + 1):
        lhs = {}
        for m, hp in sorted(h.order_slice(n).items()):
            slot = lhs.setdefault(m, [() for _ in range(d)])
            dx = hp.derivative().mul_sp(q)
            flow = qa.mul_vec(hp)
            for i in range(d):
                slot[i] = sp_add(slot[i], dx.component(i))
                slot[i] = sp_sub(slot[i], flow.component(i))
            for l in range(d):
                if m[l] == 0:
                    continue
                for s_idx in range(d):
                    entry = qa.entry(l, s_idx)
                    if not entry:
                        continue
                    target = list(m)
                    target[l] -= 1
                    target[s_idx] += 1
                    tslot = lhs.setdefault(
                        tuple(target), [() for _ in range(d)]
                    )
                    for i in range(d):
                        comp = hp.component(i)
                        if comp:
                            tslot[i] = sp_add(
                                tslot[i],
                                sp_scale(
                                    from_int(m[l], exact),
                                    sp_mul(comp, entry, exact),
                                ),
                            )

        if mode == "obstruction":
            rhs = compose_series(
                nonlinear.nonlinearity, h, series, n, mode="obstruction"
            )
        else:
            rhs = compose_series(
                nonlinear.nonlinearity, h, series, n, mode="normal-form"
            )
            for m, p in sorted(series.order_slice(n).items()):
                cur = rhs.get(m)
                rhs[m] = (cur - p) if cur is not None else -p

        worst = 0.0
        keys = sorted(set(lhs) | set(rhs))
        for m in keys:
            left = lhs.get(m)
            lp = (
                _components_to_vecpoly(left, d, exact)
                if left is not None
                else VecPoly.zero(d, exact)
            )
            rp = rhs.get(m, VecPoly.zero(d, exact))
            diff = lp - rp
            worst = max(worst, float(diff.max_abs()))
        report.residuals[n] = worst
    return report


@dataclass
class ModeComparison:
    """Where (and whether) the two canonical corrections separate."""

    order_max: int
    phi: SeriesTable
    psi: SeriesTable
    h_obstruction: SeriesTable
    h_normal_form: SeriesTable
    differences: dict = field(default_factory=dict)

    @property
    def agree(self):
        return not self.differences

    @property
    def first_divergence(self):
        if not self.differences:
            return None
        return min(sum(m) for m in self.differences)


def compare_modes(nonlinear, order_max, tol=1e-12, resonance_tol=1e-9):
    """Run both modes and tabulate termwise differences of the corrections.

    The obstruction series and the normal-form correction solve different
    conjugacy identities; they always agree at order 2, generally not
    beyond.  Returns a ModeComparison whose ``differences`` maps each
    monomial where the corrections differ to the max absolute coefficient
    of the difference (floats, even in exact mode, for easy inspection).
    """
    phi, h1 = linearize(nonlinear, order_max, tol, resonance_tol)
    psi, h2 = normal_form(nonlinear, order_max, tol, resonance_tol)
    diffs = {}
    keys = sorted(set(m for m, _ in phi) | set(m for m, _ in psi))
    d = nonlinear.size
    exact = nonlinear.exact
    for m in keys:
        a = phi.get(m) or VecPoly.zero(d, exact)
        b = psi.get(m) or VecPoly.zero(d, exact)
        delta = a - b
        if not delta.is_zero():
            diffs[m] = float(delta.max_abs())
    return ModeComparison(
        order_max=order_max,
        phi=phi,
        psi=psi,
        h_obstruction=h1,
        h_normal_form=h2,
        differences=diffs,
    )
