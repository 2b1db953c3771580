import math
from fractions import Fraction

import pytest

from koopeig.algebra import (
    MixedExtensionError,
    QuadExt,
    quad,
    sign_key,
    square_free_decompose,
)


def test_square_free_decompose():
    assert square_free_decompose(8) == (2, 2)
    assert square_free_decompose(12) == (2, 3)
    assert square_free_decompose(1) == (1, 1)
    assert square_free_decompose(-4) == (2, -1)
    assert square_free_decompose(49) == (7, 1)
    assert square_free_decompose(-18) == (3, -2)


def test_quad_normalizes_discriminant():
    s8 = quad(0, 1, 8)  # sqrt(8) = 2 sqrt(2)
    assert isinstance(s8, QuadExt)
    assert (s8.a, s8.b, s8.d) == (0, 2, 2)
    assert quad(3, 0, 2) == Fraction(3)  # b = 0 demotes to Fraction
    assert quad(1, 1, 9) == Fraction(4)  # sqrt(9) = 3


def test_conjugate_product_is_rational():
    # (a + b sqrt(d)) (a - b sqrt(d)) = a^2 - d b^2
    for a, b, d in [(1, 1, 2), (3, -2, 5), (Fraction(1, 2), Fraction(3, 4), -1)]:
        z = quad(a, b, d)
        w = quad(a, -b, d)
        prod = z * w
        assert isinstance(prod, Fraction)
        assert prod == Fraction(a) ** 2 - d * Fraction(b) ** 2


def test_field_axioms_random():
    import random

    rng = random.Random(42)
    for _ in range(200):
        d = rng.choice([2, 3, 5, -1, -2])
        mk = lambda: quad(
            Fraction(rng.randint(-5, 5), rng.randint(1, 4)),
            Fraction(rng.randint(-5, 5), rng.randint(1, 4)),
            d,
        )
        x, y, z = mk(), mk(), mk()
        assert (x + y) + z == x + (y + z)
        assert x * (y + z) == x * y + x * z
        if y != 0:
            assert (x / y) * y == x


def test_mixed_extensions_rejected():
    with pytest.raises(MixedExtensionError):
        quad(1, 1, 2) + quad(1, 1, 3)
    with pytest.raises(MixedExtensionError):
        quad(0, 1, 5) * quad(0, 1, -1)


def test_power_and_division():
    z = quad(1, 1, 2)
    assert z**2 == quad(3, 2, 2)
    assert z**0 == 1
    assert z**-1 == quad(-1, 1, 2)  # 1/(1+sqrt2) = sqrt2 - 1
    assert 1 / z == z**-1


def test_numeric_conversions():
    z = quad(1, 1, 2)
    assert math.isclose(float(z), 1 + math.sqrt(2))
    g = quad(1, 1, -1)
    assert complex(g) == 1 + 1j
    with pytest.raises(ValueError):
        float(g)


def test_sign_key():
    assert sign_key(Fraction(-3, 2)) == -1
    assert sign_key(Fraction(0)) == 0
    assert sign_key(quad(1, 1, 2)) == 1
    assert sign_key(quad(1, -1, 2)) == -1  # 1 - sqrt(2) < 0
    assert sign_key(quad(-1, 1, 2)) == 1  # sqrt(2) - 1 > 0
    assert sign_key(quad(2, -1, 2)) == 1  # 2 - sqrt(2) > 0


def test_equality_across_kinds():
    assert quad(Fraction(1, 2), 0, 2) == Fraction(1, 2)
    assert quad(1, 1, 2) != quad(1, 1, 3)
    assert hash(quad(3, 0, 5)) == hash(Fraction(3))
