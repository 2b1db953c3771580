"""Sparse multivariate polynomials and rational functions over exact scalars.

A Polynomial maps exponent tuples (one entry per ambient variable) to
nonzero coefficients.  Coefficients are Fraction, QuadExt, or -- for the
numeric fallback paths -- complex.  All operations are pure and return
new objects; instances are treated as immutable and are hashable.

Canonical term order: graded, ties broken lexicographically with the
LAST declared variable most significant.  For vars (x, y) this ranks
y^2 > x*y > x^2 > y > x > 1, which matches the conventional way planar
systems are written (y-leading).  The zero polynomial has degree -inf.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .scalars import (
    MixedExtensionError,
    QuadExt,
    ext_of,
    is_exact,
    rational_parts,
    sign_key,
    to_complex,
)

Exponent = tuple[int, ...]


class VariableMismatchError(ValueError):
    """Operands declare different ambient variable lists."""


def term_key(exp: Exponent):
    """Sort key: larger key = later term.  Use reverse=True for leading-first."""
    return (sum(exp), tuple(reversed(exp)))


class Polynomial:
    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, variables, terms):
        object.__setattr__(self, "vars", tuple(variables))
        clean = {}
        d_seen = None
        for exp, c in terms.items():
            if len(exp) != len(self.vars):
                raise VariableMismatchError(
                    f"exponent {exp} does not fit variables {self.vars}"
                )
            if isinstance(c, int):
                c = Fraction(c)
            if isinstance(c, float):
                c = complex(c)
            if not c:
                continue
            de = ext_of(c)
            if de is not None:
                if d_seen is not None and de != d_seen:
                    raise MixedExtensionError(
                        f"coefficients mix sqrt({d_seen}) and sqrt({de})"
                    )
                d_seen = de
            clean[tuple(exp)] = c
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *_):
        raise AttributeError("Polynomial is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, variables) -> "Polynomial":
        return cls(variables, {})

    @classmethod
    def const(cls, variables, c) -> "Polynomial":
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def variable(cls, variables, name) -> "Polynomial":
        variables = tuple(variables)
        if name not in variables:
            raise VariableMismatchError(f"unknown variable {name!r} in {variables}")
        exp = [0] * len(variables)
        exp[variables.index(name)] = 1
        return cls(variables, {tuple(exp): Fraction(1)})

    # -- basic queries ----------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self):
        """Coefficient of the constant monomial (0 if absent)."""
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    @property
    def degree(self):
        if not self.terms:
            return -math.inf
        return max(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        i = self._var_index(name)
        if not self.terms:
            return 0
        return max(e[i] for e in self.terms)

    def _var_index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise VariableMismatchError(
                f"unknown variable {name!r} in {self.vars}"
            ) from None

    def ordered_terms(self):
        """Terms as (exponent, coeff), leading term first."""
        return sorted(self.terms.items(), key=lambda t: term_key(t[0]), reverse=True)

    def leading(self):
        """(exponent, coefficient) of the leading term; None for zero."""
        if not self.terms:
            return None
        exp = max(self.terms, key=term_key)
        return exp, self.terms[exp]

    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self.terms.values())

    def extension(self) -> int | None:
        for c in self.terms.values():
            d = ext_of(c)
            if d is not None:
                return d
        return None

    # -- equality / hashing ------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.vars, frozenset(self.terms.items())))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        from .. import sysparse  # late import: printer lives with the parser

        return f"<poly {sysparse.print_expr(self)}>"

    # -- arithmetic ---------------------------------------------------------

    def _check_vars(self, other: "Polynomial"):
        if self.vars != other.vars:
            raise VariableMismatchError(
                f"variable lists differ: {self.vars} vs {other.vars}"
            )

    def __add__(self, other):
        if isinstance(other, (int, Fraction, QuadExt, float, complex)):
            other = Polynomial.const(self.vars, other)
        self._check_vars(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, QuadExt, float, complex)):
            other = Polynomial.const(self.vars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QuadExt, float, complex)):
            return Polynomial(
                self.vars, {e: c * other for e, c in self.terms.items()}
            )
        self._check_vars(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self.vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = Polynomial.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c):
        return self * c

    def map_coefficients(self, f):
        return Polynomial(self.vars, {e: f(c) for e, c in self.terms.items()})

    # -- calculus and evaluation --------------------------------------------

    def partial(self, name: str) -> "Polynomial":
        """Exact formal partial derivative with respect to one variable."""
        i = self._var_index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            e2 = list(e)
            e2[i] -= 1
            out[tuple(e2)] = c * e[i]
        return Polynomial(self.vars, out)

    def eval(self, point):
        """Evaluate at a point (mapping var -> value, or positional sequence).

        Exact inputs give exact results; float/complex inputs give complex.
        """
        if isinstance(point, dict):
            values = [point[v] for v in self.vars]
        else:
            values = list(point)
            if len(values) != len(self.vars):
                raise VariableMismatchError("point dimension mismatch")
        total = 0
        for e, c in self.terms.items():
            term = c
            for v, k in zip(values, e):
                if k:
                    term = term * v**k
            total = total + term
        return total

    def eval_complex(self, point) -> complex:
        values = [to_complex(v) for v in point]
        total = 0j
        for e, c in self.terms.items():
            term = to_complex(c)
            for v, k in zip(values, e):
                if k:
                    term *= v**k
            total += term
        return total

    def to_py_expr(self) -> str:
        """Python source expression (floats) for fast numeric evaluation."""
        if not self.terms:
            return "0.0"
        parts = []
        for e, c in self.ordered_terms():
            fac = [repr(to_complex(c).real if abs(to_complex(c).imag) == 0 else to_complex(c))]
            for v, k in zip(self.vars, e):
                if k == 1:
                    fac.append(v)
                elif k > 1:
                    fac.append(f"{v}**{k}")
            parts.append("*".join(fac))
        return " + ".join(parts)

    # -- univariate views ----------------------------------------------------

    def active_vars(self) -> tuple[str, ...]:
        active = set()
        for e in self.terms:
            for v, k in zip(self.vars, e):
                if k:
                    active.add(v)
        return tuple(v for v in self.vars if v in active)

    def as_univariate(self, name: str) -> list["Polynomial"]:
        """Dense coefficient list in `name`: [c0, c1, ...], cs over remaining vars."""
        i = self._var_index(name)
        n = self.degree_in(name)
        buckets: list[dict] = [dict() for _ in range(n + 1)]
        for e, c in self.terms.items():
            k = e[i]
            e2 = list(e)
            e2[i] = 0
            buckets[k][tuple(e2)] = buckets[k].get(tuple(e2), 0) + c
        return [Polynomial(self.vars, b) for b in buckets]

    @staticmethod
    def from_univariate(coeffs, name: str) -> "Polynomial":
        """Inverse of as_univariate."""
        if not coeffs:
            raise ValueError("empty coefficient list")
        variables = coeffs[0].vars
        i = variables.index(name)
        out = {}
        for k, p in enumerate(coeffs):
            for e, c in p.terms.items():
                e2 = list(e)
                e2[i] += k
                key = tuple(e2)
                out[key] = out.get(key, 0) + c
        return Polynomial(variables, out)

    def univariate_coeffs(self, name: str):
        """Scalar coefficient list [c0..cn] when only `name` occurs."""
        others = [v for v in self.active_vars() if v != name]
        if others:
            raise VariableMismatchError(
                f"polynomial involves {others}, not univariate in {name!r}"
            )
        i = self._var_index(name)
        n = self.degree_in(name)
        out = [Fraction(0)] * (n + 1)
        for e, c in self.terms.items():
            out[e[i]] = c
        return out

    # -- division, content, gcd ----------------------------------------------

    def divide_exact(self, divisor: "Polynomial"):
        """Quotient q with self == divisor * q exactly, else None.

        Recursive division against the graded-lex leading term; the result
        is verified by multiplication before being returned.
        """
        self._check_vars(divisor)
        if not divisor:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self:
            return Polynomial.zero(self.vars)
        lead_d, lc_d = divisor.leading()
        q_terms = {}
        rem = self
        while rem:
            lead_r, lc_r = rem.leading()
            diff = tuple(a - b for a, b in zip(lead_r, lead_d))
            if any(k < 0 for k in diff):
                return None
            coeff = lc_r / lc_d
            q_terms[diff] = q_terms.get(diff, 0) + coeff
            rem = rem - Polynomial(self.vars, {diff: coeff}) * divisor
        q = Polynomial(self.vars, q_terms)
        if divisor * q != self:
            return None
        return q

    def content_primitive(self):
        """(content, primitive): content clears denominators and integer gcd,
        and carries the sign so the primitive part has positive leading
        coefficient.  Exact coefficients only."""
        if not self:
            return Fraction(1), self
        lcm = 1
        for c in self.terms.values():
            a, b = rational_parts(c)
            lcm = math.lcm(lcm, a.denominator, b.denominator)
        g = 0
        for c in self.terms.values():
            a, b = rational_parts(c)
            g = math.gcd(g, abs(int(a * lcm)), abs(int(b * lcm)))
        content = Fraction(g, lcm)
        prim = self.map_coefficients(lambda c: c / content)
        if sign_key(prim.leading()[1]) < 0:
            prim = -prim
            content = -content
        return content, prim

    def primitive(self) -> "Polynomial":
        return self.content_primitive()[1]


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    """add / sub / mul on polynomials sharing a variable list."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def poly_divide_exact(num: Polynomial, div: Polynomial):
    return num.divide_exact(div)


def partial_derivative(p: Polynomial, name: str) -> Polynomial:
    return p.partial(name)


# -- gcd ---------------------------------------------------------------------


def _gcd_univariate(a: Polynomial, b: Polynomial, name: str) -> Polynomial:
    """Monic Euclid on genuinely univariate polynomials (field coefficients)."""
    fa = a.univariate_coeffs(name)
    fb = b.univariate_coeffs(name)

    def strip(c):
        while c and not c[-1]:
            c.pop()
        return c

    fa, fb = strip(list(fa)), strip(list(fb))
    while fb:
        # remainder of fa mod fb
        while len(fa) >= len(fb) and fa:
            factor = fa[-1] / fb[-1]
            shift = len(fa) - len(fb)
            for i, c in enumerate(fb):
                fa[i + shift] = fa[i + shift] - factor * c
            strip(fa)
        fa, fb = fb, fa
    terms = {}
    i = a._var_index(name)
    for k, c in enumerate(fa):
        if c:
            e = [0] * len(a.vars)
            e[i] = k
            terms[tuple(e)] = c
    g = Polynomial(a.vars, terms)
    return g.primitive() if g.is_exact() else g


def poly_gcd(a: Polynomial, b: Polynomial, _depth: int = 0):
    """Primitive gcd of exact polynomials; None if the reduction gives up.

    Handles the cases the rational-function normal form needs: content /
    primitive extraction plus a primitive pseudo-remainder Euclid,
    recursing on coefficient gcds.  Inexact coefficients are not reduced.
    """
    if not (a.is_exact() and b.is_exact()):
        return None
    if not a:
        return b.primitive() if b else b
    if not b:
        return a.primitive()
    if a.is_constant() or b.is_constant():
        return Polynomial.const(a.vars, 1)
    if _depth > 8:
        return None

    active = [v for v in a.vars if v in set(a.active_vars()) | set(b.active_vars())]
    main = active[-1]
    if len(a.active_vars()) <= 1 and len(b.active_vars()) <= 1:
        if a.active_vars() == b.active_vars():
            return _gcd_univariate(a, b, a.active_vars()[0])
        return Polynomial.const(a.vars, 1)

    ca = a.as_univariate(main)
    cb = b.as_univariate(main)
    cont_a = _list_gcd(ca, _depth + 1)
    cont_b = _list_gcd(cb, _depth + 1)
    if cont_a is None or cont_b is None:
        return None
    cont = poly_gcd(cont_a, cont_b, _depth + 1)
    if cont is None:
        return None

    pa = _divide_list(ca, cont_a)
    pb = _divide_list(cb, cont_b)
    if pa is None or pb is None:
        return None

    # primitive pseudo-remainder sequence in `main`
    for _ in range(64):
        if len(pb) > len(pa):
            pa, pb = pb, pa
        # pseudo-remainder of pa by pb
        r = [p for p in pa]
        lead_b = pb[-1]
        steps = len(pa) - len(pb) + 1
        for _ in range(steps):
            if len(r) < len(pb):
                break
            lc = r[-1]
            shift = len(r) - len(pb)
            r = [c * lead_b for c in r]
            for i, c in enumerate(pb):
                r[i + shift] = r[i + shift] - lc * c
            while r and not r[-1]:
                r.pop()
        if not r:
            g_main = Polynomial.from_univariate(pb, main)
            g = g_main.primitive() * cont
            return g.primitive()
        if len(r) == 1:
            return cont.primitive()
        rc = _list_gcd(r, _depth + 1)
        if rc is None:
            return None
        pa, pb = pb, _divide_list(r, rc)
        if pb is None:
            return None
    return None


def _list_gcd(polys, depth):
    g = None
    for p in polys:
        if not p:
            continue
        g = p.primitive() if g is None else poly_gcd(g, p, depth)
        if g is None:
            return None
        if g.is_constant():
            return Polynomial.const(p.vars, 1)
    return g


def _divide_list(polys, divisor):
    out = []
    for p in polys:
        if not p:
            out.append(p)
            continue
        q = p.divide_exact(divisor)
        if q is None:
            return None
        out.append(q)
    return out


# -- rational functions --------------------------------------------------------


class RationalFunction:
    """Quotient of polynomials in canonical reduced form.

    The pair is reduced by exact gcd where the coefficient field supports
    it and the denominator's leading coefficient is normalized to 1.  When
    reduction is not available (inexact coefficients, gcd gave up) the
    unreduced pair is kept and `reduced` is False; equality still works by
    cross-multiplication.
    """

    __slots__ = ("num", "den", "reduced")

    def __init__(self, num: Polynomial, den: Polynomial | None = None):
        if den is None:
            den = Polynomial.const(num.vars, 1)
        num._check_vars(den)
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        reduced = False
        if num.is_exact() and den.is_exact():
            g = poly_gcd(num, den)
            if g is not None:
                if not g.is_constant():
                    num = num.divide_exact(g)
                    den = den.divide_exact(g)
                reduced = True
        lc = den.leading()[1]
        num = num.map_coefficients(lambda c: c / lc)
        den = den.map_coefficients(lambda c: c / lc)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "reduced", reduced)

    def __setattr__(self, *_):
        raise AttributeError("RationalFunction is immutable")

    @property
    def vars(self):
        return self.num.vars

    def __bool__(self):
        return bool(self.num)

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            other = RationalFunction(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        from .. import sysparse

        return f"<ratfunc {sysparse.print_expr(self)}>"

    def __add__(self, other):
        other = _as_rf(other, self.vars)
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_as_rf(other, self.vars))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_rf(other, self.vars)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rf(other, self.vars)
        if not other.num:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _as_rf(other, self.vars) / self

    def __pow__(self, k: int):
        if k < 0:
            return RationalFunction(self.den, self.num) ** (-k)
        return RationalFunction(self.num**k, self.den**k)

    def partial(self, name: str) -> "RationalFunction":
        """Quotient-rule derivative."""
        return RationalFunction(
            self.num.partial(name) * self.den - self.num * self.den.partial(name),
            self.den * self.den,
        )

    def eval(self, point):
        d = self.den.eval(point)
        if not d:
            raise ZeroDivisionError("evaluation at a pole")
        return self.num.eval(point) / d

    def eval_complex(self, point) -> complex:
        return self.num.eval_complex(point) / self.den.eval_complex(point)


def _as_rf(x, variables) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x)
    return RationalFunction(Polynomial.const(variables, x))


# -- vector fields ---------------------------------------------------------------


class VectorField:
    """Polynomial autonomous vector field: one component per variable."""

    __slots__ = ("vars", "components")

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ValueError("empty vector field")
        variables = components[0].vars
        for c in components:
            if c.vars != variables:
                raise VariableMismatchError("components disagree on variables")
        if len(components) != len(variables):
            raise VariableMismatchError(
                f"{len(components)} components for variables {variables}"
            )
        object.__setattr__(self, "vars", variables)
        object.__setattr__(self, "components", components)

    def __setattr__(self, *_):
        raise AttributeError("VectorField is immutable")

    @property
    def dim(self) -> int:
        return len(self.components)

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def eval(self, point):
        return tuple(c.eval(point) for c in self.components)

    def degree(self):
        return max(c.degree for c in self.components)

    def jacobian(self):
        """Matrix of exact partials [dF_i/dx_j]."""
        return [
            [c.partial(v) for v in self.vars]
            for c in self.components
        ]
