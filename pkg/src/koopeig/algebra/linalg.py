"""Exact dense linear algebra over Q and Q(sqrt(d)).

Elimination is fraction-free (Bareiss): rows are first scaled to integral
entries, after which every intermediate quantity stays integral in the
coefficient ring.  Matrices are plain lists of lists of scalars; all
functions are pure.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .scalars import (
    rational_parts,
    scalar_denominator_lcm,
    scalar_integer_content,
    sign_key,
)


def _clear_row_denominators(row):
    lcm = 1
    for x in row:
        lcm = math.lcm(lcm, scalar_denominator_lcm(x))
    if lcm == 1:
        return list(row)
    return [x * lcm for x in row]


def _bareiss_echelon(mat):
    """Fraction-free row echelon form.

    Returns (echelon rows, pivot column list).  Input rows are scaled to
    integral entries first; scaling a row never changes rank, nullspace,
    or consistency.
    """
    rows = [_clear_row_denominators(r) for r in mat]
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    pivots = []
    prev = Fraction(1)
    r = 0
    for c in range(n_cols):
        pivot_row = None
        for i in range(r, n_rows):
            if rows[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        piv = rows[r][c]
        for i in range(r + 1, n_rows):
            factor = rows[i][c]
            for j in range(c, n_cols):
                rows[i][j] = (piv * rows[i][j] - factor * rows[r][j]) / prev
        pivots.append(c)
        prev = piv
        r += 1
        if r == n_rows:
            break
    return rows[: len(pivots)], pivots


def rank(mat) -> int:
    if not mat:
        return 0
    _, pivots = _bareiss_echelon(mat)
    return len(pivots)


def canonical_vector(v):
    """Scale to the smallest integral representative: denominators cleared,
    integer content divided out, first nonzero entry positive."""
    v = _clear_row_denominators(v)
    g = 0
    for x in v:
        g = math.gcd(g, scalar_integer_content(x))
    if g > 1:
        v = [x / g for x in v]
    for x in v:
        s = sign_key(x)
        if s:
            if s < 0:
                v = [-y for y in v]
            break
    return v


def nullspace_exact(mat):
    """Basis of the right nullspace, each vector canonically scaled.

    An empty list means the matrix has full column rank.  A matrix with no
    rows (or all-zero rows) yields the standard basis.
    """
    if not mat:
        return []
    n_cols = len(mat[0])
    ech, pivots = _bareiss_echelon(mat)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n_cols
        v[f] = Fraction(1)
        for i in range(len(pivots) - 1, -1, -1):
            p = pivots[i]
            s = Fraction(0)
            for c in range(p + 1, n_cols):
                if v[c]:
                    s = s + ech[i][c] * v[c]
            v[p] = -s / ech[i][p]
        basis.append(canonical_vector(v))
    return basis


def linear_solve_exact(mat, rhs):
    """One exact solution of mat . x = rhs, or None when inconsistent."""
    if not mat:
        return None
    n_cols = len(mat[0])
    aug = [list(row) + [b] for row, b in zip(mat, rhs)]
    ech, pivots = _bareiss_echelon(aug)
    # a pivot in the augmented column means inconsistency
    if pivots and pivots[-1] == n_cols:
        return None
    x = [Fraction(0)] * n_cols
    for i in range(len(pivots) - 1, -1, -1):
        p = pivots[i]
        s = ech[i][n_cols]
        for c in range(p + 1, n_cols):
            if x[c]:
                s = s - ech[i][c] * x[c]
        x[p] = s / ech[i][p]
    return x


def bareiss_determinant(mat, divide=None):
    """Fraction-free determinant over any integral domain.

    `divide(a, b)` must perform the (exact) division of the Bareiss
    recurrence; defaults to scalar division.  Used with polynomial entries
    for resultants.
    """
    n = len(mat)
    if n == 0:
        raise ValueError("empty matrix")
    if divide is None:
        divide = lambda a, b: a / b
    m = [list(r) for r in mat]
    sign = 1
    prev = None
    for k in range(n - 1):
        if not m[k][k]:
            swap = None
            for i in range(k + 1, n):
                if m[i][k]:
                    swap = i
                    break
            if swap is None:
                return m[k][k] * 0  # zero of the ring
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[k][k] * m[i][j] - m[i][k] * m[k][j]
                m[i][j] = num if prev is None else divide(num, prev)
            m[i][k] = m[i][k] * 0
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return det if sign > 0 else -det
