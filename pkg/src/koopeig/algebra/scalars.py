"""Exact scalars: rationals and quadratic extensions Q(sqrt(d)).

Three scalar kinds circulate through the package:

  Fraction          -- exact rational (stdlib fractions.Fraction)
  QuadExt           -- a + b*sqrt(d) with a, b rational and d a fixed
                       square-free integer (d < 0 gives complex values,
                       d = -1 the Gaussian rationals)
  complex / float   -- inexact fallback for purely numeric work

A QuadExt with b == 0 is always demoted to a plain Fraction on
construction, so exact values have a unique representation and compare
equal across kinds.  Exactly one extension discriminant d is allowed per
computation; combining values from two different extensions raises
MixedExtensionError rather than silently widening.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Rat = Union[int, Fraction]


class MixedExtensionError(TypeError):
    """Raised when scalars from two different quadratic extensions meet."""


def square_free_decompose(n: int) -> tuple[int, int]:
    """Write n = s^2 * d with d square-free; return (s, d)."""
    if n == 0:
        return 0, 0
    sign = -1 if n < 0 else 1
    n = abs(n)
    s, d = 1, 1
    p = 2
    while p * p <= n:
        k = 0
        while n % p == 0:
            n //= p
            k += 1
        s *= p ** (k // 2)
        if k % 2:
            d *= p
        p += 1 if p == 2 else 2
    return s, sign * d * n


class QuadExt:
    """Element a + b*sqrt(d) of a quadratic extension of the rationals.

    Instances are immutable.  Use quad() to construct: it normalizes d to
    its square-free part and demotes b == 0 results to Fraction.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a: Fraction, b: Fraction, d: int):
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, *_):
        raise AttributeError("QuadExt is immutable")

    # -- helpers ------------------------------------------------------

    def _coerce(self, other) -> "QuadExt | None":
        if isinstance(other, QuadExt):
            if other.d != self.d:
                raise MixedExtensionError(
                    f"cannot mix sqrt({self.d}) and sqrt({other.d}) values"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return QuadExt(Fraction(other), Fraction(0), self.d)
        return None

    def conjugate(self) -> "QuadExt":
        return QuadExt(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        """Field norm a^2 - d*b^2 (a rational; zero only for the zero element)."""
        return self.a * self.a - self.d * self.b * self.b

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) + other
            return NotImplemented
        return quad(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) - other
            return NotImplemented
        return quad(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) * other
            return NotImplemented
        return quad(
            self.a * o.a + self.d * self.b * o.b,
            self.a * o.b + self.b * o.a,
            self.d,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) / other
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic extension")
        c = o.conjugate()
        num = self * c
        if isinstance(num, QuadExt):
            return quad(num.a / n, num.b / n, self.d)
        return Fraction(num) / n

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return 1 / (self ** (-k))
        result = Fraction(1)
        base = self
        while k:
            if k & 1:
                result = base * result
            base = base * base
            k >>= 1
        return result

    # -- comparisons / conversions -------------------------------------

    def __eq__(self, other):
        if isinstance(other, QuadExt):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, (float, complex)):
            return complex(self) == complex(other)
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __complex__(self):
        if self.d < 0:
            return complex(self.a) + complex(self.b) * 1j * math.sqrt(-self.d)
        return complex(self.a + self.b * _sqrt_frac(self.d))

    def __float__(self):
        if self.d < 0 and self.b != 0:
            raise ValueError("complex quadratic value has no float form")
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        return f"QuadExt({self.a!r}, {self.b!r}, d={self.d})"


def _sqrt_frac(d: int) -> float:
    return math.sqrt(d)


def quad(a, b, d: int):
    """Build a + b*sqrt(d), normalizing d square-free and demoting b == 0."""
    a, b = Fraction(a), Fraction(b)
    if b == 0:
        return a
    if d in (0, 1):
        raise ValueError("extension discriminant must not be 0 or 1")
    s, d0 = square_free_decompose(d)
    if d0 == 1:
        return a + b * s
    return QuadExt(a, b * s, d0)


# -- generic scalar helpers ------------------------------------------------

Scalar = Union[int, Fraction, QuadExt, float, complex]


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, QuadExt))


def to_complex(x) -> complex:
    if isinstance(x, QuadExt):
        return complex(x)
    return complex(x)


def to_float(x) -> float:
    if isinstance(x, complex):
        if abs(x.imag) > 1e-12 * (1 + abs(x.real)):
            raise ValueError(f"value {x} is not real")
        return x.real
    return float(x)


def ext_of(x) -> int | None:
    """Discriminant of x's extension, or None for rational/inexact scalars."""
    return x.d if isinstance(x, QuadExt) else None


def sign_key(x) -> int:
    """Deterministic sign of an exact scalar: -1, 0, or +1.

    For real extensions this is the numeric sign; for d < 0 the
    (a, b)-lexicographic sign, which is only used for canonicalization.
    """
    if isinstance(x, QuadExt):
        if x.d > 0:
            a, b = x.a, x.b
            if a >= 0 and b >= 0:
                return 1 if (a or b) else 0
            if a <= 0 and b <= 0:
                return -1
            # opposite signs: compare a^2 and d*b^2
            lhs = a * a
            rhs = x.d * b * b
            big_is_a = lhs > rhs
            if a > 0:
                return 1 if big_is_a else -1
            return -1 if big_is_a else 1
        if x.a != 0:
            return 1 if x.a > 0 else -1
        return 1 if x.b > 0 else -1
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def rational_parts(x) -> tuple[Fraction, Fraction]:
    """Split an exact scalar into (a, b) with value a + b*sqrt(d)."""
    if isinstance(x, QuadExt):
        return x.a, x.b
    return Fraction(x), Fraction(0)


def scalar_denominator_lcm(x) -> int:
    a, b = rational_parts(x)
    return math.lcm(a.denominator, b.denominator)


def scalar_integer_content(x) -> int:
    """gcd of the integer parts of an integral exact scalar."""
    a, b = rational_parts(x)
    return math.gcd(int(a), int(b))
