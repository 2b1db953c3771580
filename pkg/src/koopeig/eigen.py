"""Eigenvalue/eigenfunction pairs assembled from verified manifold pairs.

A weight vector p with sum_i p_i * N_i constant turns the power product
prod_i M_i^{p_i} into an eigenfunction with eigenvalue lambda equal to
that constant.  Weight vectors proportional to each other give the same
equivalence class (powers/multiples of one eigenfunction) and cannot be
paired for solving; independence of the weight vectors is the exact
rank-2 test.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    Polynomial,
    RationalFunction,
    VectorField,
    canonical_vector,
    nullspace_exact,
    rank,
    rational_parts,
    sign_key,
    to_complex,
)
from .manifold import ManifoldPair, lie_derivative


class PoleAtManifold(ZeroDivisionError):
    """Evaluation hit the zero set of a manifold raised to a negative power."""

    def __init__(self, pair: ManifoldPair):
        from .sysparse import format_polynomial

        self.pair = pair
        super().__init__(
            f"point lies on the singular manifold {format_polynomial(pair.M)} = 0"
        )


@dataclass(frozen=True)
class WeightVector:
    entries: tuple

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def _nonconstant_rows(pairs):
    monomials = set()
    for p in pairs:
        for e in p.N.terms:
            if sum(e):
                monomials.add(e)
    return sorted(monomials, key=lambda e: (sum(e), tuple(reversed(e))))


def constant_combinations(pairs) -> list[WeightVector]:
    """Canonical basis of weight vectors annihilating every nonconstant
    monomial across the cofactors."""
    if not pairs:
        raise ValueError("need at least one manifold pair")
    rows = [
        [p.N.terms.get(e, Fraction(0)) for p in pairs]
        for e in _nonconstant_rows(pairs)
    ]
    if not rows:
        rows = [[Fraction(0)] * len(pairs)]
    return [WeightVector(tuple(v)) for v in nullspace_exact(rows)]


def induced_lambda(pairs, w):
    lam = Fraction(0)
    for p, c in zip(pairs, w):
        lam = lam + c * p.N.constant_value()
    return lam


@dataclass(frozen=True)
class EigenPair:
    lam: object
    pairs: tuple  # full ManifoldPair basis, positionally matching weight
    weight: tuple

    @property
    def factors(self) -> tuple:
        """(ManifoldPair, exponent) with zero exponents dropped."""
        return tuple((p, c) for p, c in zip(self.pairs, self.weight) if c)

    def format_expr(self) -> str:
        from .sysparse import format_rational, format_scalar

        rf = self.as_rational()
        if rf is not None:
            return format_rational(rf)
        from .sysparse import format_polynomial

        parts = []
        for pair, c in self.factors:
            base = f"({format_polynomial(pair.M)})"
            parts.append(f"{base}^({format_scalar(c)})")
        return " * ".join(parts) if parts else "1"

    def integer_exponents(self) -> bool:
        for _, c in self.factors:
            a, b = rational_parts(c)
            if b != 0 or a.denominator != 1:
                return False
        return True

    def as_rational(self) -> RationalFunction | None:
        """Expanded num/den form; None for non-integer exponents."""
        if not self.integer_exponents():
            return None
        variables = self.pairs[0].M.vars
        num = Polynomial.const(variables, 1)
        den = Polynomial.const(variables, 1)
        for pair, c in self.factors:
            k = int(rational_parts(c)[0])
            if k > 0:
                num = num * pair.M**k
            else:
                den = den * pair.M ** (-k)
        return RationalFunction(num, den)

    def eval_exact(self, point):
        """Exact value at an exact point (integer exponents only)."""
        if not self.integer_exponents():
            raise ValueError("exact evaluation needs integer exponents")
        value = Fraction(1)
        for pair, c in self.factors:
            k = int(rational_parts(c)[0])
            base = pair.M.eval(point)
            if not base and k < 0:
                raise PoleAtManifold(pair)
            if not base:
                return Fraction(0)
            value = value * base**k
        return value

    def eval_complex(self, point) -> complex:
        value = 1 + 0j
        for pair, c in self.factors:
            base = pair.M.eval_complex(point)
            exp = to_complex(c)
            if base == 0:
                if exp.real < 0:
                    raise PoleAtManifold(pair)
                return 0j
            value *= base**exp
        return value

    def gradient_dot_field(self, F: VectorField) -> RationalFunction | None:
        rf = self.as_rational()
        if rf is None:
            return None
        total = RationalFunction(Polynomial.zero(rf.vars))
        for name, comp in zip(F.vars, F.components):
            total = total + rf.partial(name) * comp
        return total


def build_eigenpair(pairs, w) -> EigenPair:
    """Assemble the eigenpair for a weight vector from constant_combinations."""
    entries = tuple(w)
    if len(entries) != len(pairs):
        raise ValueError("weight length does not match pair list")
    combo = Polynomial.zero(pairs[0].N.vars)
    for p, c in zip(pairs, entries):
        combo = combo + p.N * c
    if not combo.is_constant():
        raise AssertionError(
            "weight vector does not annihilate the nonconstant cofactor part"
        )
    lam = combo.constant_value()
    return EigenPair(lam, tuple(pairs), entries)


def candidate_weights(pairs) -> list[WeightVector]:
    """Weight vectors for the eigenpair table: the canonical nullspace
    basis enriched with annihilating unit vectors and pairwise
    differences (the combinations that give single-quotient
    eigenfunctions), deduplicated by canonical scaling."""
    k = len(pairs)
    seen: dict[tuple, WeightVector] = {}

    def consider(vec):
        combo = Polynomial.zero(pairs[0].N.vars)
        for p, c in zip(pairs, vec):
            combo = combo + p.N * c
        if not combo.is_constant():
            return
        canon = tuple(canonical_vector(list(vec)))
        if any(canon) and canon not in seen:
            seen[canon] = WeightVector(canon)

    for w in constant_combinations(pairs):
        consider(w.entries)
    for i in range(k):
        e = [Fraction(0)] * k
        e[i] = Fraction(1)
        consider(tuple(e))
        for j in range(k):
            if i != j:
                d = [Fraction(0)] * k
                d[i], d[j] = Fraction(1), Fraction(-1)
                consider(tuple(d))
    return sorted(
        seen.values(),
        key=lambda w: (
            sum(abs(a) + abs(b) for a, b in map(rational_parts, w.entries)),
            tuple(map(rational_parts, w.entries)),
        ),
    )


def eigenpair_table(pairs) -> list[EigenPair]:
    return [build_eigenpair(pairs, w.entries) for w in candidate_weights(pairs)]


def same_class(e1: EigenPair, e2: EigenPair) -> bool:
    """Proportional weight vectors: powers/multiples of one eigenfunction."""
    return rank([list(e1.weight), list(e2.weight)]) < 2


def _weight_size(e: EigenPair):
    return sum(abs(a) + abs(b) for a, b in map(rational_parts, e.weight))


def independent_pairs(eps) -> list[tuple[EigenPair, EigenPair]]:
    """All rank-2 eigenpair pairs, best solving candidates first.

    Preference: both eigenvalues nonzero with opposite signs, then both
    nonzero, then smallest integer weights, tie-broken lexicographically.
    Same-class combinations never appear.
    """
    out = []
    for i in range(len(eps)):
        for j in range(i + 1, len(eps)):
            e1, e2 = eps[i], eps[j]
            if len(e1.weight) != len(e2.weight):
                raise ValueError("eigenpairs come from different manifold lists")
            if same_class(e1, e2):
                continue
            out.append((e1, e2))

    def key(pair):
        e1, e2 = pair
        s1, s2 = sign_key(e1.lam), sign_key(e2.lam)
        both_nonzero = bool(s1) and bool(s2)
        opposite = s1 * s2 < 0
        return (
            not both_nonzero,
            not opposite,
            _weight_size(e1) + _weight_size(e2),
            tuple(map(rational_parts, e1.weight)),
            tuple(map(rational_parts, e2.weight)),
        )

    return sorted(out, key=key)


def combine(e1: EigenPair, e2_or_c, op: str) -> EigenPair:
    """Eigenfunction algebra: product/quotient add/subtract weights and
    eigenvalues; power scales both by a field constant."""
    if op == "power":
        c = e2_or_c
        entries = tuple(w * c for w in e1.weight)
        return build_eigenpair(e1.pairs, entries)
    e2 = e2_or_c
    if e1.pairs != e2.pairs:
        raise ValueError("eigenpairs must share the manifold basis")
    if op == "product":
        entries = tuple(a + b for a, b in zip(e1.weight, e2.weight))
    elif op == "quotient":
        entries = tuple(a - b for a, b in zip(e1.weight, e2.weight))
    else:
        raise ValueError(f"unknown op {op!r}")
    return build_eigenpair(e1.pairs, entries)


@dataclass(frozen=True)
class PdeCheck:
    label: str
    residual_is_zero: bool
    residual_text: str


@dataclass(frozen=True)
class PdeReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.residual_is_zero for c in self.checks)

    def lines(self):
        out = []
        for c in self.checks:
            status = "exact zero" if c.residual_is_zero else f"NONZERO: {c.residual_text}"
            out.append(f"{c.label}: {status}")
        return out


def verify_pde(e: EigenPair, F: VectorField) -> PdeReport:
    """Exact proof that grad(phi) . F = lambda * phi.

    Checks each factor identity Lie(M_i) = M_i N_i, the constant
    combination sum p_i N_i - lambda = 0, and -- for integer exponents --
    the expanded rational identity itself.
    """
    from .sysparse import format_polynomial, format_rational

    checks = []
    for pair, _ in e.factors:
        res = lie_derivative(pair.M, F) - pair.M * pair.N
        checks.append(
            PdeCheck(
                f"Lie(M) - M*N for M = {format_polynomial(pair.M)}",
                not res,
                format_polynomial(res),
            )
        )
    vars_ = F.vars
    combo = Polynomial.zero(vars_)
    for p, c in zip(e.pairs, e.weight):
        combo = combo + p.N * c
    res = combo - Polynomial.const(vars_, e.lam)
    checks.append(
        PdeCheck("sum p_i N_i - lambda", not res, format_polynomial(res))
    )
    if e.integer_exponents() and e.factors:
        rf = e.as_rational()
        residual = e.gradient_dot_field(F) - rf * e.lam
        checks.append(
            PdeCheck(
                "grad(phi) . F - lambda*phi",
                not residual.num,
                format_rational(residual),
            )
        )
    return PdeReport(tuple(checks))
