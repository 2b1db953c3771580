"""Exact scalar, polynomial, rational-function, and linear-algebra kernel."""

from .linalg import (
    bareiss_determinant,
    canonical_vector,
    linear_solve_exact,
    nullspace_exact,
    rank,
)
from .poly import (
    Polynomial,
    RationalFunction,
    VariableMismatchError,
    VectorField,
    partial_derivative,
    poly_arith,
    poly_divide_exact,
    poly_gcd,
    term_key,
)
from .scalars import (
    MixedExtensionError,
    QuadExt,
    ext_of,
    is_exact,
    quad,
    rational_parts,
    sign_key,
    square_free_decompose,
    to_complex,
    to_float,
)

__all__ = [
    "MixedExtensionError",
    "Polynomial",
    "QuadExt",
    "RationalFunction",
    "VariableMismatchError",
    "VectorField",
    "bareiss_determinant",
    "canonical_vector",
    "ext_of",
    "is_exact",
    "linear_solve_exact",
    "nullspace_exact",
    "partial_derivative",
    "poly_arith",
    "poly_divide_exact",
    "poly_gcd",
    "quad",
    "rank",
    "rational_parts",
    "sign_key",
    "square_free_decompose",
    "term_key",
    "to_complex",
    "to_float",
]
