"""Planar closed-form solutions from an independent eigenfunction pair.

Pipeline: map the initial condition into eigenfunction space, propagate
linearly (phi_i(t) = phi_i(0) e^{lambda_i t}), invert the eigenfunction
pair back to the state symbolically when both eigenfunctions are ratios
of polynomials affine in a two-monomial basis (Cramer on the cleared
equations), and fall back to warm-started Newton otherwise.  The
assembled solutions are ratios of exponential sums, possibly under an
m-th root with the sign frozen from the initial condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import (
    Polynomial,
    RationalFunction,
    is_exact,
    rational_parts,
    to_complex,
)
from .eigen import EigenPair, PoleAtManifold

PHI_VARS = ("phi1", "phi2")


class DegeneratePairError(ValueError):
    """The symbolic 2x2 inversion determinant vanishes identically."""


class NoExactInversionError(ValueError):
    """No two-monomial affine structure; use the numeric fallback."""


class SingularInitialConditionError(ValueError):
    """Initial condition sits on a manifold that degenerates the solution."""


# -- exponential sums -------------------------------------------------------


@dataclass(frozen=True)
class ExpPoly:
    """Finite sum of c * exp(mu t) terms; rates exact, deduplicated,
    sorted fastest-growing first."""

    terms: tuple  # ((coeff, rate) ...)

    @staticmethod
    def build(raw_terms) -> "ExpPoly":
        by_rate: dict = {}
        for coeff, rate in raw_terms:
            key = _rate_key(rate)
            if key in by_rate:
                c0, r0 = by_rate[key]
                by_rate[key] = (c0 + coeff, r0)
            else:
                by_rate[key] = (coeff, rate)
        cleaned = [
            (c, r)
            for c, r in by_rate.values()
            if (abs(to_complex(c)) > 0 if not is_exact(c) else bool(c))
        ]
        cleaned.sort(key=lambda cr: -_rate_key(cr[1]))
        return ExpPoly(tuple(cleaned))

    def rates(self) -> tuple:
        return tuple(r for _, r in self.terms)

    def value_at_zero(self):
        total = 0
        for c, _ in self.terms:
            total = total + c
        return total

    def eval(self, t: float) -> float:
        total = 0.0
        for c, r in self.terms:
            total += to_complex(c).real * math.exp(_rate_key(r) * t)
        return total

    def format_expr(self) -> str:
        from .algebra import sign_key
        from .sysparse import format_scalar

        if not self.terms:
            return "0"
        parts = []
        for c, r in self.terms:
            if is_exact(c):
                neg = sign_key(c) < 0
                cs = format_scalar(-c if neg else c)
            else:
                cr = to_complex(c).real
                neg = cr < 0
                cs = repr(abs(cr))
            rk = _rate_key(r)
            if rk == 0:
                term = cs
            else:
                rs = format_scalar(r) if is_exact(r) else repr(rk)
                if rs == "1":
                    core = "exp(t)"
                elif rs == "-1":
                    core = "exp(-t)"
                elif any(ch in rs for ch in "+- "):
                    core = f"exp(({rs})*t)"
                else:
                    core = f"exp({rs}*t)"
                term = core if cs == "1" else f"{cs}*{core}"
                if "/" in cs or " " in cs:
                    term = core if cs == "1" else f"({cs})*{core}"
            joiner = "- " if neg else "+ "
            parts.append((joiner, term))
        first_sign, first_term = parts[0]
        out = ("-" if first_sign == "- " else "") + first_term
        for sign, term in parts[1:]:
            out += f" {sign}{term}"
        return out


def _rate_key(rate) -> float:
    z = to_complex(rate)
    if abs(z.imag) > 1e-12:
        raise ValueError("complex propagation rates are out of scope")
    return z.real


# -- symbolic inversion ------------------------------------------------------


@dataclass(frozen=True)
class VariableRecovery:
    """One state variable as sign * (num/den)^(1/m) in (phi1, phi2)."""

    expr: RationalFunction
    root_index: int
    needs_sign: bool


@dataclass(frozen=True)
class Inversion2D:
    state_vars: tuple
    u_monomials: tuple  # exponent tuples of the affine basis
    recoveries: tuple  # VariableRecovery per state variable


def _affine_parts(p: Polynomial, u1, u2):
    """Coefficients (c0, c1, c2) with p = c0 + c1*u1 + c2*u2, or None."""
    zero = Fraction(0)
    c0 = c1 = c2 = zero
    for e, c in p.terms.items():
        if sum(e) == 0:
            c0 = c
        elif e == u1:
            c1 = c
        elif e == u2:
            c2 = c
        else:
            return None
    return c0, c1, c2


def invert_exact(e1: EigenPair, e2: EigenPair) -> Inversion2D:
    """Symbolic (phi1, phi2) -> (x, y) when the pair is monomial-linear.

    Both eigenfunctions must be ratios of polynomials affine in a common
    two-monomial basis (u1, u2); clearing denominators gives a linear
    system solved by Cramer, and back-substituting the monomials attaches
    a root index and sign resolver per even power.
    """
    rfs = [e1.as_rational(), e2.as_rational()]
    if any(rf is None for rf in rfs):
        raise NoExactInversionError("non-integer exponents in the eigenfunctions")
    state_vars = rfs[0].vars
    if len(state_vars) != 2:
        raise ValueError("exact inversion is a planar operation")
    monos = set()
    for rf in rfs:
        for p in (rf.num, rf.den):
            for e in p.terms:
                if sum(e):
                    monos.add(e)
    if len(monos) > 2 or not monos:
        raise NoExactInversionError(
            f"{len(monos)} distinct monomials; need an affine basis of two"
        )
    monos = sorted(monos, key=lambda e: (sum(e), tuple(reversed(e))))
    if len(monos) == 1:
        raise NoExactInversionError("only one monomial; cannot recover two variables")
    u1, u2 = monos

    # equations  phi_i * den_i(u) - num_i(u) = 0, linear in (u1, u2)
    # with coefficients polynomial in (phi1, phi2)
    a_rows = []
    b_rhs = []
    for i, rf in enumerate(rfs):
        num_parts = _affine_parts(rf.num, u1, u2)
        den_parts = _affine_parts(rf.den, u1, u2)
        if num_parts is None or den_parts is None:
            raise NoExactInversionError("eigenfunction is not affine in the basis")
        phi = Polynomial.variable(PHI_VARS, PHI_VARS[i])
        one = Polynomial.const(PHI_VARS, 1)
        row = [
            phi * den_parts[1] - one * num_parts[1],
            phi * den_parts[2] - one * num_parts[2],
        ]
        a_rows.append(row)
        b_rhs.append(one * num_parts[0] - phi * den_parts[0])

    det = a_rows[0][0] * a_rows[1][1] - a_rows[0][1] * a_rows[1][0]
    if not det:
        raise DegeneratePairError("symbolic inversion determinant is zero")
    u1_expr = RationalFunction(
        b_rhs[0] * a_rows[1][1] - b_rhs[1] * a_rows[0][1], det
    )
    u2_expr = RationalFunction(
        a_rows[0][0] * b_rhs[1] - a_rows[1][0] * b_rhs[0], det
    )

    # internal consistency: substituting back must reproduce each phi_i
    for i, rf in enumerate(rfs):
        num_parts = _affine_parts(rf.num, u1, u2)
        den_parts = _affine_parts(rf.den, u1, u2)
        phi = RationalFunction(Polynomial.variable(PHI_VARS, PHI_VARS[i]))
        num_sub = u1_expr * num_parts[1] + u2_expr * num_parts[2] + num_parts[0]
        den_sub = u1_expr * den_parts[1] + u2_expr * den_parts[2] + den_parts[0]
        if phi * den_sub - num_sub:
            raise AssertionError("inversion failed its own substitution check")

    # back-substitute the monomial basis:  u1 = x^a1 y^b1, u2 = x^a2 y^b2,
    # so x = (u1^b2 u2^-b1)^(1/D) and y = (u1^-a2 u2^a1)^(1/D)
    (a1, b1), (a2, b2) = u1, u2
    dmat = a1 * b2 - a2 * b1
    if dmat == 0:
        raise NoExactInversionError("monomial exponents are linearly dependent")
    recoveries = []
    for alpha, beta in ((b2, -b1), (-a2, a1)):
        g = math.gcd(math.gcd(abs(alpha), abs(beta)), abs(dmat))
        alpha, beta, m = alpha // g, beta // g, dmat // g
        if m < 0:
            alpha, beta, m = -alpha, -beta, -m
        expr = u1_expr**alpha * u2_expr**beta
        recoveries.append(VariableRecovery(expr, m, m % 2 == 0))
    return Inversion2D(state_vars, (u1, u2), tuple(recoveries))


# -- initial conditions and assembly ---------------------------------------------


def map_ic(pair: tuple[EigenPair, EigenPair], x0y0):
    """(phi1(x0, y0), phi2(x0, y0)), exact for exact inputs.

    Raises PoleAtManifold, naming the manifold, when the point sits on a
    singular factor.
    """
    exact_point = all(is_exact(v) for v in x0y0)
    out = []
    for e in pair:
        if exact_point and e.integer_exponents():
            out.append(e.eval_exact(x0y0))
        else:
            z = e.eval_complex(x0y0)
            out.append(z.real if abs(z.imag) <= 1e-12 * (1 + abs(z)) else z)
    return tuple(out)


@dataclass(frozen=True)
class SolutionVariable:
    name: str
    num: ExpPoly
    den: ExpPoly
    root_index: int
    sign: int  # +1 / -1; meaningful when root_index is even

    def format_expr(self) -> str:
        base = f"({self.num.format_expr()}) / ({self.den.format_expr()})"
        if self.root_index == 1:
            return f"{self.name}(t) = {base}"
        sign = ""
        if self.root_index % 2 == 0:
            sign = "-" if self.sign < 0 else ""
        return f"{self.name}(t) = {sign}({base})^(1/{self.root_index})"


@dataclass(frozen=True)
class PoleAt:
    t: float
    bracket: tuple


@dataclass(frozen=True)
class ClosedFormSolution2D:
    variables: tuple  # SolutionVariable per state variable
    eigenpair: tuple  # (EigenPair, EigenPair)
    phi0: tuple
    ic: tuple

    def format_expr(self) -> str:
        return "\n".join(v.format_expr() for v in self.variables)

    def at(self, t: float):
        """State at time t; raises SolutionPole when a denominator
        vanishes (|den| < 1e-12)."""
        out = []
        for v in self.variables:
            den = v.den.eval(t)
            if abs(den) < 1e-12:
                raise SolutionPole(t, self.pole_bracket(t))
            base = v.num.eval(t) / den
            if v.root_index == 1:
                out.append(base)
            elif v.root_index % 2 == 0:
                if base < -1e-9:
                    raise ValueError(
                        f"negative radicand for even root at t = {t}"
                    )
                out.append(v.sign * max(base, 0.0) ** (1.0 / v.root_index))
            else:
                out.append(
                    math.copysign(abs(base) ** (1.0 / v.root_index), base)
                )
        return tuple(out)

    def pole_bracket(self, t: float, width: float = 1e-6):
        return (t - width, t + width)

    def pole_times(self, horizon: float, samples: int = 4096) -> list[float]:
        """All denominator zeros in (0, horizon], bisected from a sign scan."""
        out = []
        seen = []
        for v in self.variables:
            f = v.den.eval
            prev_t, prev_v = 0.0, f(0.0)
            for i in range(1, samples + 1):
                t = horizon * i / samples
                val = f(t)
                if prev_v == 0.0:
                    out.append(prev_t)
                elif val == 0.0 or (prev_v < 0) != (val < 0):
                    a, b = prev_t, t
                    fa = prev_v
                    for _ in range(200):
                        mid = 0.5 * (a + b)
                        fm = f(mid)
                        if fm == 0.0 or b - a < 1e-15:
                            break
                        if (fa < 0) != (fm < 0):
                            b = mid
                        else:
                            a, fa = mid, fm
                    out.append(0.5 * (a + b))
                prev_t, prev_v = t, val
        uniq = []
        for t in sorted(out):
            if t > 1e-12 and all(abs(t - s) > 1e-9 for s in uniq):
                uniq.append(t)
        return uniq


class SolutionPole(ArithmeticError):
    def __init__(self, t: float, bracket):
        super().__init__(f"denominator pole at t = {t}")
        self.t = t
        self.bracket = bracket


def eval_solution(sol: ClosedFormSolution2D, t: float):
    """State tuple, or a PoleAt record when the denominator vanishes."""
    try:
        return sol.at(t)
    except SolutionPole as pole:
        return PoleAt(pole.t, pole.bracket)


def assemble_solution(
    pair: tuple[EigenPair, EigenPair], inversion: Inversion2D, x0y0
) -> ClosedFormSolution2D:
    """Substitute phi_i(t) = phi_i(0) e^{lambda_i t} into the inversion."""
    phi0 = map_ic(pair, x0y0)
    lam1, lam2 = pair[0].lam, pair[1].lam
    variables = []
    for name, rec, ic_comp in zip(
        inversion.state_vars, inversion.recoveries, x0y0
    ):
        num = _exp_poly_of(rec.expr.num, phi0, lam1, lam2)
        den = _exp_poly_of(rec.expr.den, phi0, lam1, lam2)
        if abs(den.eval(0.0)) < 1e-12:
            raise SingularInitialConditionError(
                "initial condition degenerates the closed form "
                "(it lies on an invariant manifold of the pair)"
            )
        sign = 1
        if rec.needs_sign:
            ic_f = to_complex(ic_comp).real
            sign = -1 if ic_f < 0 else 1
        variables.append(
            SolutionVariable(name, num, den, rec.root_index, sign)
        )
    return ClosedFormSolution2D(tuple(variables), tuple(pair), phi0, tuple(x0y0))


def _exp_poly_of(p: Polynomial, phi0, lam1, lam2) -> ExpPoly:
    terms = []
    exact_ic = all(is_exact(v) for v in phi0)
    for (i, j), c in p.terms.items():
        if exact_ic and is_exact(c):
            coeff = c * phi0[0] ** i * phi0[1] ** j
        else:
            coeff = to_complex(c) * to_complex(phi0[0]) ** i * to_complex(phi0[1]) ** j
        rate = lam1 * i + lam2 * j
        terms.append((coeff, rate))
    return ExpPoly.build(terms)


# -- numeric fallback ------------------------------------------------------------


def invert_numeric(
    pair: tuple[EigenPair, EigenPair], values, previous, tol: float = 1e-12
):
    """Newton inversion of (phi1, phi2) = values warm-started at `previous`.

    Uses the exact rational Jacobian d(phi_i)/dx_j = phi_i * sum_k p_k
    dM_k/dx_j / M_k evaluated numerically, with up to 10 step halvings.
    """
    state_vars = pair[0].pairs[0].M.vars
    z = np.array([to_complex(v).real for v in previous], dtype=float)
    targets = np.array([to_complex(v) for v in values])

    def phi_vals(point):
        return np.array([e.eval_complex(point) for e in pair])

    def jacobian(point):
        rows = []
        for e in pair:
            val = e.eval_complex(point)
            row = []
            for name in state_vars:
                s = 0j
                for mp, c in e.factors:
                    mv = mp.M.eval_complex(point)
                    if mv == 0:
                        raise ZeroDivisionError("iterate hit a manifold")
                    s += to_complex(c) * mp.M.partial(name).eval_complex(point) / mv
                row.append(val * s)
            rows.append(row)
        return np.array(rows)

    res = phi_vals(z) - targets
    for _ in range(100):
        if float(np.max(np.abs(res))) < tol:
            return tuple(z)
        jac = jacobian(z)
        try:
            step = np.linalg.solve(jac, res)
        except np.linalg.LinAlgError:
            raise RuntimeError("singular Jacobian during numeric inversion")
        scale = 1.0
        for _ in range(10):
            z_new = z - scale * np.real(step)
            try:
                res_new = phi_vals(z_new) - targets
            except ZeroDivisionError:
                scale *= 0.5
                continue
            if float(np.max(np.abs(res_new))) < float(np.max(np.abs(res))):
                z, res = z_new, res_new
                break
            scale *= 0.5
        else:
            raise RuntimeError("numeric inversion stalled (step halving failed)")
    raise RuntimeError("numeric inversion did not converge in 100 iterations")


def plan_inversion(independent: list[tuple[EigenPair, EigenPair]]):
    """First pair with an exact inversion, else the first pair for the
    numeric route.  Returns (pair, Inversion2D | None)."""
    if not independent:
        raise ValueError("no independent eigenpair available")
    for e1, e2 in independent:
        try:
            return (e1, e2), invert_exact(e1, e2)
        except (NoExactInversionError, DegeneratePairError):
            continue
    return independent[0], None
