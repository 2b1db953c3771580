import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from koopeig.algebra import Polynomial, QuadExt, RationalFunction
from koopeig.sysparse import (
    SysParseError,
    format_polynomial,
    parse_system,
    print_expr,
)

V = ("x", "y")
X = Polynomial.variable(V, "x")
Y = Polynomial.variable(V, "y")


def test_parse_planar_system():
    spec = parse_system("vars x y\ndx/dt = x*y\ndy/dt = y^2 - x - 1")
    assert spec.field.components[0] == X * Y
    assert spec.field.components[1] == Y**2 - X - 1
    assert spec.dim == 2


def test_parse_scalar_system():
    spec = parse_system("vars x\ndx/dt = x^2")
    x = Polynomial.variable(("x",), "x")
    assert spec.field.components[0] == x**2


def test_parse_field_extension_manifold():
    spec = parse_system(
        "vars x y\nfield sqrt(2)\ndx/dt = x\ndy/dt = y\n"
        "manifold y - (1+sqrt(2))*x"
    )
    m = spec.manifolds[0]
    coeff = m.terms[(1, 0)]
    assert isinstance(coeff, QuadExt)
    assert coeff == -(1 + QuadExt(Fraction(0), Fraction(1), 2))
    assert spec.ext_d == 2


def test_parse_options_and_ics():
    spec = parse_system(
        "vars x y\ndx/dt = x\ndy/dt = y\nic 1 1/2\nic 0.25 -3\n"
        "horizon 2.5\nrtol 1e-8\natol 1e-10\n# trailing comment\n"
    )
    assert spec.ics[0] == (Fraction(1), Fraction(1, 2))
    assert spec.ics[1] == (0.25, Fraction(-3))
    assert spec.horizon == 2.5 and spec.rtol == 1e-8 and spec.atol == 1e-10


def test_print_canonical_order():
    assert format_polynomial(Y**2 - X * Y - X - 1) == "y^2 - x*y - x - 1"
    assert format_polynomial(Polynomial.zero(V)) == "0"
    assert print_expr(RationalFunction(X, Y + X + 1)) == "x / (y + x + 1)"
    assert format_polynomial(X * Fraction(1, 2)) == "1/2*x"


def test_parse_errors_are_positioned():
    cases = [
        "vars x y\ndx/dt = x*z",  # undeclared variable
        "vars x\ndx/dt = 1.5*x",  # float in polynomial
        "vars x\ndx/dt = x^y",  # non-integer exponent
        "vars x\ndx/dt = x^-2",  # negative exponent
        "vars x\ndx/dt = sqrt(2)*x",  # sqrt without field
        "vars x\nfield sqrt(2)\ndx/dt = sqrt(3)*x",  # mixed extension
        "vars x\ndx/dt = x/(x+1)",  # non-constant divisor
        "vars x\ndx/dt = x +",  # dangling operator
        "vars x\ndy/dt = x",  # equation for undeclared variable
        "dx/dt = x",  # vars missing
        "vars x\nic 1 2\ndx/dt = x",  # wrong ic arity
        "vars x\nnonsense x\ndx/dt = x",  # unknown directive
    ]
    for text in cases:
        with pytest.raises(SysParseError) as err:
            parse_system(text)
        assert err.value.line >= 1
        assert "line" in str(err.value)


def test_missing_equation_rejected():
    with pytest.raises(SysParseError):
        parse_system("vars x y\ndx/dt = x")


def test_mutated_token_streams_rejected():
    # mutate single characters of a valid file into junk; the parser must
    # fail with a positioned diagnostic, never crash or accept silently
    base = "vars x y\ndx/dt = x*y\ndy/dt = y^2 - x - 1\nmanifold y - x - 1\n"
    rng = random.Random(5)
    junk = "~`$&@!?%"
    rejected = 0
    for _ in range(60):
        i = rng.randrange(len(base))
        if base[i] in "\n":
            continue
        mutated = base[:i] + rng.choice(junk) + base[i + 1 :]
        try:
            parse_system(mutated)
        except SysParseError as err:
            assert err.line >= 1 and err.col >= 1
            rejected += 1
    assert rejected >= 40  # almost every mutation is detectable


@st.composite
def rational_polys(draw):
    n_terms = draw(st.integers(1, 5))
    terms = {}
    for _ in range(n_terms):
        e = (draw(st.integers(0, 4)), draw(st.integers(0, 4)))
        num = draw(st.integers(-30, 30))
        den = draw(st.integers(1, 12))
        terms[e] = Fraction(num, den)
    return Polynomial(V, terms)


@settings(max_examples=200, deadline=None)
@given(rational_polys())
def test_print_parse_round_trip(p):
    text = format_polynomial(p)
    spec = parse_system(f"vars x y\ndx/dt = {text}\ndy/dt = 0")
    assert spec.field.components[0] == p


@settings(max_examples=60, deadline=None)
@given(rational_polys(), rational_polys())
def test_round_trip_sqrt_field(p, q):
    from koopeig.algebra import quad

    s2 = quad(0, 1, 2)
    mixed = p + q * s2
    text = format_polynomial(mixed)
    spec = parse_system(f"vars x y\nfield sqrt(2)\ndx/dt = {text}\ndy/dt = 0")
    assert spec.field.components[0] == mixed
