"""Scalar pipeline: dx/dt = f(x) solved through a single eigenfunction.

The eigenfunction is exp(E(x)) * prod_i (x - x_i)^{p_i} where the p_i
are the order-1 partial-fraction numerators of lambda / f and E collects
the repeated-root terms.  phi is complex-valued in general (complex
roots, or negative bases under fractional powers); the inversion works
on log|phi|, which is real and strictly monotone between adjacent real
roots of f, so trajectories never jump branches or brackets.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    Polynomial,
    QuadExt,
    RationalFunction,
    is_exact,
    quad,
    square_free_decompose,
    to_complex,
)
from .numerics import roots_univariate_numeric


class PoleError(ZeroDivisionError):
    """Evaluation at a singular root of the eigenfunction."""


class BlowUpError(RuntimeError):
    """Trajectory escapes to infinity inside the requested time grid."""

    def __init__(self, t_reached: float, escape_time: float, partial: list):
        super().__init__(
            f"finite-time blow-up: escape near t = {escape_time:.6g} "
            f"(solved up to t = {t_reached:.6g})"
        )
        self.t_reached = t_reached
        self.escape_time = escape_time
        self.partial = partial


def _rational_roots(coeffs: list[Fraction]):
    """All rational roots (by the rational-root test) of an exact
    univariate coefficient list, lowest degree first."""
    lcm = 1
    for c in coeffs:
        lcm = math.lcm(lcm, c.denominator)
    ints = [int(c * lcm) for c in coeffs]
    c0, cn = ints[0], ints[-1]
    assert c0 != 0

    def divisors(n):
        n = abs(n)
        out = set()
        i = 1
        while i * i <= n:
            if n % i == 0:
                out.add(i)
                out.add(n // i)
            i += 1
        return sorted(out)

    found = []
    for p in divisors(c0):
        for q in divisors(cn):
            for cand in (Fraction(p, q), Fraction(-p, q)):
                if sum(c * cand**k for k, c in enumerate(coeffs)) == 0:
                    if cand not in found:
                        found.append(cand)
    return sorted(found)


def _divide_out_root(coeffs, root):
    """Synthetic division by (x - root); exact for exact inputs."""
    n = len(coeffs) - 1
    out = [None] * n
    acc = coeffs[n]
    for k in range(n - 1, -1, -1):
        out[k] = acc
        acc = coeffs[k] + acc * root
    return out  # remainder acc is zero by assumption


def roots_1d(f: Polynomial, ext_d: int | None = None):
    """Roots of a univariate polynomial with multiplicities.

    Rational roots and quadratic-formula roots in Q(sqrt(d)) (including
    d < 0, e.g. Gaussian values) are exact; leftover factors are rooted
    numerically (simultaneous iteration, Newton polish) with
    multiplicities from clustering at 1e-8.
    """
    if not f:
        raise ZeroDivisionError("zero polynomial has no root structure")
    name = f.active_vars()[0] if f.active_vars() else f.vars[0]
    coeffs = f.univariate_coeffs(name)
    if len(coeffs) < 2:
        raise ValueError("degree must be at least 1")
    roots: list[tuple] = []

    # root at the origin
    k0 = 0
    while not coeffs[0]:
        coeffs = coeffs[1:]
        k0 += 1
    if k0:
        roots.append((Fraction(0), k0))

    exact = all(is_exact(c) and not isinstance(c, QuadExt) for c in coeffs)
    if exact and len(coeffs) > 1:
        for r in _rational_roots(coeffs):
            mult = 0
            while len(coeffs) > 1:
                quotient = _divide_out_root(coeffs, r)
                if sum(c * r**k for k, c in enumerate(coeffs)) != 0:
                    break
                coeffs = quotient
                mult += 1
            if mult:
                roots.append((r, mult))

    if len(coeffs) == 3 and all(is_exact(c) for c in coeffs):
        c, b, a = coeffs
        disc = b * b - 4 * a * c
        root_val = _exact_sqrt(disc, ext_d)
        if root_val is not None:
            r1 = (-b + root_val) / (2 * a)
            r2 = (-b - root_val) / (2 * a)
            if r1 == r2:
                roots.append((r1, 2))
            else:
                roots.extend([(r1, 1), (r2, 1)])
            coeffs = coeffs[:1]
    if len(coeffs) == 2:
        roots.append((-coeffs[0] / coeffs[1], 1))
        coeffs = coeffs[:1]

    if len(coeffs) > 1:
        numeric = roots_univariate_numeric(coeffs)
        clusters: list[list[complex]] = []
        for z in numeric:
            for cl in clusters:
                if abs(z - cl[0]) < 1e-8:
                    cl.append(z)
                    break
            else:
                clusters.append([z])
        for cl in clusters:
            center = sum(cl) / len(cl)
            roots.append((center, len(cl)))

    return sorted(
        roots, key=lambda rm: (to_complex(rm[0]).real, to_complex(rm[0]).imag)
    )


def _exact_sqrt(disc, ext_d):
    """sqrt of an exact rational as a field element, or None."""
    if isinstance(disc, QuadExt):
        return None
    if disc == 0:
        return Fraction(0)
    num, den = disc.numerator, disc.denominator
    s, d0 = square_free_decompose(num * den)
    if d0 == 1:
        return Fraction(s, den)
    if ext_d is None or d0 == ext_d:
        return quad(0, Fraction(s, den), d0)
    return None


@dataclass(frozen=True)
class Eigenfunction1D:
    """phi(x) = exp(E(x)) * prod (x - x_i)^{p_i} with eigenvalue lam."""

    var: str
    f: Polynomial
    lam: object
    factors: tuple  # (root, exponent), zero exponents dropped
    exp_part: RationalFunction

    def format_expr(self) -> str:
        from .sysparse import format_rational, format_scalar

        parts = []
        if self.exp_part.num:
            parts.append(f"exp({format_rational(self.exp_part)})")
        for root, p in self.factors:
            sr = format_scalar(root) if not isinstance(root, complex) else repr(root)
            base = f"({self.var} - ({sr}))" if str(sr) != "0" else self.var
            parts.append(f"{base}^({format_scalar(p) if not isinstance(p, complex) else repr(p)})")
        return " * ".join(parts) if parts else "1"


def partial_fraction_exponents(f: Polynomial, lam) -> Eigenfunction1D:
    """Eigenfunction of phi' f = lam phi by generalized partial fractions.

    Simple roots contribute log factors with the classical numerators
    lam / (c * prod_{j!=i} (x_i - x_j)); repeated roots additionally
    contribute the rational part E(x) from integrating the order >= 2
    partial-fraction terms.
    """
    if not lam:
        raise ValueError("lambda must be nonzero")
    name = f.active_vars()[0] if f.active_vars() else f.vars[0]
    roots = roots_1d(f)
    lead = f.univariate_coeffs(name)[-1]

    all_exact = all(not isinstance(r, complex) for r, _ in roots) and is_exact(lam)
    if not all_exact:
        roots = [(to_complex(r), m) for r, m in roots]
        lead = to_complex(lead)
        lam = to_complex(lam)

    xs = Polynomial.variable(f.vars, name)
    one = Polynomial.const(f.vars, 1)
    factors = []
    e_num = Polynomial.zero(f.vars)
    e_den = one
    for i, (xi, mi) in enumerate(roots):
        # g_i = lam / (c * prod_{j != i} (x - x_j)^{m_j})
        den = one * lead
        for j, (xj, mj) in enumerate(roots):
            if j != i:
                den = den * (xs - xj) ** mj
        g = RationalFunction(Polynomial.const(f.vars, lam), den)
        # Taylor coefficients of g at x_i give the A_{i,k}
        derivative = g
        fact = 1
        for order in range(mi):
            k = mi - order  # order of the pole term this coefficient feeds
            a_ik = derivative.eval([xi if v == name else 0 for v in f.vars]) / fact
            if k == 1:
                if a_ik:
                    factors.append((xi, a_ik))
            elif a_ik:
                # integral of a/(x-xi)^k is -a/((k-1)(x-xi)^(k-1))
                term_den = (xs - xi) ** (k - 1)
                coeff = -a_ik / (k - 1)
                e_num = e_num * term_den + e_den * coeff
                e_den = e_den * term_den
            derivative = derivative.partial(name)
            fact *= order + 1
    exp_part = RationalFunction(e_num, e_den)
    return Eigenfunction1D(name, f, lam, tuple(factors), exp_part)


def eval_phi(e: Eigenfunction1D, x) -> complex:
    """Principal-branch complex evaluation of phi."""
    z = to_complex(x)
    point = [z if v == e.var else 0j for v in e.f.vars]
    value = 1 + 0j
    for root, p in e.factors:
        base = z - to_complex(root)
        pc = to_complex(p)
        if base == 0:
            if pc.real < 0:
                raise PoleError(f"x = {x} is a singular root of phi")
            return 0j
        value *= base**pc
    if e.exp_part.num:
        den = e.exp_part.den.eval_complex(point)
        if den == 0:
            raise PoleError(f"x = {x} is an essential singularity of phi")
        value *= cmath.exp(e.exp_part.num.eval_complex(point) / den)
    return value


def log_magnitude(e: Eigenfunction1D, x: float) -> float:
    """log |phi(x)| for real x; real, monotone between adjacent real roots."""
    point = [x if v == e.var else 0.0 for v in e.f.vars]
    total = 0.0
    for root, p in e.factors:
        base = complex(x, 0) - to_complex(root)
        if base == 0:
            return -math.inf if to_complex(p).real > 0 else math.inf
        total += (to_complex(p) * cmath.log(base)).real
    if e.exp_part.num:
        total += (
            e.exp_part.num.eval_complex(point) / e.exp_part.den.eval_complex(point)
        ).real
    return total


def _real_roots(e: Eigenfunction1D):
    out = []
    for r, _ in roots_1d(e.f):
        z = to_complex(r)
        if abs(z.imag) < 1e-10:
            out.append(z.real)
    return sorted(set(out))


def solve_1d(e: Eigenfunction1D, x0: float, t_grid) -> list[float]:
    """Invert phi(x(t)) = phi(x0) e^{lam t} along an ascending time grid.

    Damped/bisected Newton on log|phi| continued from the previous grid
    point; the trajectory is confined to the invariant interval between
    adjacent real roots of f.  Raises BlowUpError with an escape-time
    estimate when the state leaves every bounded interval.
    """
    lam = to_complex(e.lam)
    if abs(lam.imag) > 1e-12:
        raise ValueError("inversion requires a real eigenvalue")
    lam = lam.real
    t_grid = list(t_grid)
    if t_grid and (t_grid[0] < 0 or any(b <= a for a, b in zip(t_grid, t_grid[1:]))):
        raise ValueError("time grid must ascend from 0")

    fpoly = e.f
    point = [x0 if v == e.var else 0.0 for v in fpoly.vars]
    if abs(fpoly.eval_complex(point)) < 1e-15:
        return [x0 for _ in t_grid]  # stationary point

    roots = _real_roots(e)
    lo, hi = -math.inf, math.inf
    for r in roots:
        if r < x0:
            lo = max(lo, r)
        elif r > x0:
            hi = min(hi, r)

    def u(x):
        return log_magnitude(e, x)

    def f_val(x):
        return fpoly.eval_complex([x if v == e.var else 0.0 for v in fpoly.vars]).real

    u0 = u(x0)
    out = []
    x = x0
    deg = len(fpoly.univariate_coeffs(e.var)) - 1
    u_inf = 0.0 if deg >= 2 else None
    for t in t_grid:
        if t == 0:
            out.append(x0)
            x = x0
            continue
        target = u0 + lam * t
        x = _invert_at(u, f_val, lam, x, target, lo, hi, u_inf, u0, t, out)
        out.append(x)
    return out


def _invert_at(u, f_val, lam, x_prev, target, lo, hi, u_inf, u0, t, partial):
    # establish a bracket around the solution, expanding from x_prev
    a = b = x_prev
    ua = ub = u(x_prev) - target
    step = max(1e-6, 1e-3 * (1 + abs(x_prev)))
    # expand on both sides until the residual changes sign
    for _ in range(200):
        if ua == 0:
            return a
        if ub == 0:
            return b
        if ua * ub < 0:
            break
        grew = False
        if a > lo:
            a_new = max(a - step, (a + lo) / 2 if lo > -math.inf else a - step)
            if a_new < a:
                a, ua = a_new, u(a_new) - target
                grew = True
        if ua * ub < 0:
            break
        if b < hi:
            b_new = min(b + step, (b + hi) / 2 if hi < math.inf else b + step)
            if b_new > b:
                b, ub = b_new, u(b_new) - target
                grew = True
        step *= 2.0
        if abs(a) > 1e13 or abs(b) > 1e13:
            escape = t if u_inf is None else (u_inf - u0) / lam
            raise BlowUpError(t, escape, partial)
        if not grew and ua * ub > 0:
            raise RuntimeError(f"failed to bracket the trajectory at t = {t}")
    else:
        raise RuntimeError(f"failed to bracket the trajectory at t = {t}")

    # safeguarded Newton: u'(x) = lam / f(x)
    x = 0.5 * (a + b)
    for _ in range(100):
        ux = u(x) - target
        if abs(ux) < 1e-13:
            return x
        if ux * ua < 0:
            b, ub = x, ux
        else:
            a, ua = x, ux
        fv = f_val(x)
        x_newton = x - ux * fv / lam if fv != 0 and lam != 0 else x
        if min(a, b) < x_newton < max(a, b):
            x = x_newton
        else:
            x = 0.5 * (a + b)
        if abs(b - a) < 1e-16 * (1 + abs(x)):
            return x
    raise RuntimeError("Newton did not converge in 100 iterations")


def verify_logarithmic_identity(e: Eigenfunction1D):
    """Check E' f + sum p_i f/(x - x_i) - lam = 0.

    Returns ("exact", 0.0) when the identity is an exact zero over the
    field, otherwise ("sampled", worst) with the max residual over 20
    complex sample points (tolerance 1e-10 is the caller's business).
    """
    name = e.var
    exact = all(not isinstance(r, complex) for r, _ in e.factors) and e.f.is_exact()
    if exact and not isinstance(e.lam, complex):
        total = RationalFunction(Polynomial.zero(e.f.vars))
        total = total + e.exp_part.partial(name) * e.f
        xs = Polynomial.variable(e.f.vars, name)
        ok = True
        for root, p in e.factors:
            quotient = e.f.divide_exact(xs - root)
            if quotient is None:
                ok = False
                break
            total = total + RationalFunction(quotient * p)
        if ok:
            total = total - e.lam
            return "exact", 0.0 if not total.num else math.inf
    worst = 0.0
    for k in range(20):
        x = -2.3 + 4.6 * (k + 0.5) / 20 + 0.31j
        point = [x if v == name else 0j for v in e.f.vars]
        fx = e.f.eval_complex(point)
        val = e.exp_part.partial(name).eval_complex(point) * fx
        for root, p in e.factors:
            val += to_complex(p) * fx / (x - to_complex(root))
        worst = max(worst, abs(val - to_complex(e.lam)))
    return "sampled", worst
