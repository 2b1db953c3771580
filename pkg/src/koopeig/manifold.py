"""Invariant-manifold generating functions and their cofactors.

A polynomial M generates an invariant manifold of dx/dt = F(x) when its
Lie derivative factors exactly as Lie(M, F) = M * N for some polynomial
cofactor N.  This module verifies candidates exactly and discovers new
ones from fixed-point/eigenvector geometry and from a numeric
least-squares ansatz whose accepted output is always re-verified
exactly before anything downstream sees it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import (
    Polynomial,
    VectorField,
    linear_solve_exact,
    nullspace_exact,
    quad,
    to_complex,
)
from .numerics import (
    eig2x2,
    newton_polish,
    roots_univariate_numeric,
    sylvester_resultant,
)

RESIDUAL_TOL = 1e-10
RATIONALIZE_TOL = 1e-8
DEFAULT_DEN_BOUND = 64


class NotInvariantError(ValueError):
    """Candidate polynomial is not an invariant-manifold generator."""


class NonIsolatedFixedPointsError(ValueError):
    """The fixed-point set is positive-dimensional."""


@dataclass(frozen=True)
class ManifoldPair:
    """Generating function M with its exactly verified cofactor N."""

    M: Polynomial
    N: Polynomial
    provenance: str = "user-supplied"

    def key(self):
        from .sysparse import format_polynomial

        return (self.M.degree, format_polynomial(self.M))


@dataclass(frozen=True)
class FixedPoint:
    coords: tuple
    exact: bool
    eigenvalues: tuple = ()
    eigenvectors: tuple = ()
    defective: bool = False

    def is_real(self, tol: float = 1e-9) -> bool:
        for c in self.coords:
            z = to_complex(c)
            if abs(z.imag) > tol:
                return False
        return True


def lie_derivative(M: Polynomial, F: VectorField) -> Polynomial:
    """Derivative of M along the flow: sum_i dM/dx_i * F_i, exact."""
    if M.vars != F.vars:
        raise ValueError(f"variable lists differ: {M.vars} vs {F.vars}")
    out = Polynomial.zero(M.vars)
    for name, comp in zip(F.vars, F.components):
        out = out + M.partial(name) * comp
    return out


def cofactor(M: Polynomial, F: VectorField):
    """N with Lie(M, F) = M * N exactly, or None when M is not invariant."""
    if not M or M.is_constant():
        raise ValueError("cofactor needs a nonconstant M")
    lie = lie_derivative(M, F)
    if not lie:
        return Polynomial.zero(M.vars)
    return lie.divide_exact(M)


def canonical_manifold(M: Polynomial) -> Polynomial:
    """Associate-canonical form: integer content 1, positive leading
    coefficient; over Q(sqrt(d)), where every scalar is a unit, the
    polynomial is first made monic so associates collapse."""
    if M.extension() is not None:
        M = M.map_coefficients(lambda c: c / M.leading()[1])
    return M.primitive()


def make_pair(M: Polynomial, F: VectorField, provenance: str) -> ManifoldPair:
    """Canonicalize M (primitive, positive leading coefficient) and verify."""
    M = canonical_manifold(M)
    N = cofactor(M, F)
    if N is None:
        raise NotInvariantError(
            "Lie derivative is not divisible by the candidate"
        )
    return ManifoldPair(M, N, provenance)


def try_pair(M: Polynomial, F: VectorField, provenance: str):
    try:
        return make_pair(M, F, provenance)
    except NotInvariantError:
        return None


# -- exact reconstruction of numeric values -----------------------------------


def rationalize(v, d: int | None = None, den_bound: int = DEFAULT_DEN_BOUND):
    """Nearest field element to a numeric value, or None.

    Over Q: best continued-fraction convergent with denominator <= bound.
    Over Q(sqrt(d)): search a + b*sqrt(d) over a common denominator <=
    bound.  A reconstruction is only a proposal; callers establish
    exactness downstream (cofactor division, F(P) = 0, ...).
    """
    z = complex(v)
    if d is not None and d < 0:
        a = rationalize(z.real, None, den_bound)
        b = rationalize(z.imag / math.sqrt(-d), None, den_bound)
        if a is None or b is None:
            return None
        return quad(a, b, d)
    if abs(z.imag) > RATIONALIZE_TOL:
        return None
    x = z.real
    best = Fraction(x).limit_denominator(den_bound)
    if d is None:
        return best if abs(best - x) <= RATIONALIZE_TOL else None
    if abs(best - x) <= RATIONALIZE_TOL:
        return best
    sq = math.sqrt(d)
    best_pair, best_err = None, math.inf
    for q in range(1, den_bound + 1):
        jmax = int(2 * (abs(x) + 1) * q / sq) + 2
        target = x * q
        for j in range(-jmax, jmax + 1):
            i = round(target - j * sq)
            err = abs(i + j * sq - target) / q
            if err < best_err:
                best_err = err
                best_pair = (Fraction(i, q), Fraction(j, q))
        if best_err < 1e-14:
            break
    if best_pair is None or best_err > RATIONALIZE_TOL:
        return None
    return quad(best_pair[0], best_pair[1], d)


# -- fixed points ---------------------------------------------------------------


def _complex_univariate(p: Polynomial, name: str, values: dict) -> list[complex]:
    """Coefficients of p as a univariate complex polynomial in `name`,
    with the other variables substituted from `values`."""
    coeffs = p.as_univariate(name)
    out = []
    for c in coeffs:
        point = [complex(values.get(v, 0.0)) for v in p.vars]
        out.append(c.eval_complex(point))
    return out


def _fixed_point_candidates_2d(F: VectorField, eliminate: str) -> list[tuple]:
    keep = [v for v in F.vars if v != eliminate][0]
    r = sylvester_resultant(F.components[0], F.components[1], eliminate)
    if not r:
        return []
    if r.is_constant():
        return []
    xs = roots_univariate_numeric(r.univariate_coeffs(keep))
    candidates = []
    for xv in xs:
        ys = []
        for comp in F.components:
            cs = _complex_univariate(comp, eliminate, {keep: xv})
            if any(abs(c) > 1e-9 for c in cs[1:]):
                ys = roots_univariate_numeric(cs)
                other = F.components[1] if comp is F.components[0] else F.components[0]
                for yv in ys:
                    point = {keep: xv, eliminate: yv}
                    vec = [point[v] for v in F.vars]
                    if abs(other.eval_complex(vec)) < 1e-4 * (1 + abs(yv)) ** 3:
                        candidates.append(tuple(vec))
                break
    return candidates


def fixed_points(F: VectorField, ext_d: int | None = None) -> list[FixedPoint]:
    """All isolated fixed points of a 1D or 2D polynomial field.

    2D points come from a Sylvester-resultant elimination, simultaneous
    numeric rooting, back-substitution, and Newton polishing; exact
    coordinates are reconstructed in the ambient field and verified
    symbolically whenever possible.
    """
    if F.dim == 1:
        comp = F.components[0]
        if not comp:
            raise NonIsolatedFixedPointsError("the zero field fixes every point")
        if comp.is_constant():
            return []
        roots = roots_univariate_numeric(comp.univariate_coeffs(F.vars[0]))
        candidates = [(z,) for z in roots]
    else:
        both_zero = True
        candidates = []
        for eliminate in (F.vars[1], F.vars[0]):
            p, q = F.components
            r = sylvester_resultant(p, q, eliminate)
            if r:
                both_zero = False
                candidates.extend(_fixed_point_candidates_2d(F, eliminate))
        if both_zero:
            raise NonIsolatedFixedPointsError(
                "resultant vanishes identically: non-isolated fixed points"
            )

    polished = []
    for cand in candidates:
        z = newton_polish(list(F.components), cand)
        res = max(abs(c.eval_complex(z)) for c in F.components)
        if res < 1e-10:
            polished.append(z)
    # dedupe within 1e-9
    unique: list[tuple] = []
    for z in sorted(polished, key=lambda w: tuple((round(c.real, 9), round(c.imag, 9)) for c in w)):
        if all(max(abs(a - b) for a, b in zip(z, u)) > 1e-9 for u in unique):
            unique.append(z)

    out = []
    for z in unique:
        exact_coords = [rationalize(c, ext_d) for c in z]
        exact = all(r is not None for r in exact_coords)
        if exact:
            if any(c.eval(exact_coords) != 0 for c in F.components):
                exact = False
        coords = tuple(exact_coords) if exact else z
        evs, vecs, defective = _linearization(F, coords, exact, ext_d)
        out.append(FixedPoint(coords, exact, evs, vecs, defective))
    return out


def _linearization(F, coords, exact, ext_d):
    jac = F.jacobian()
    if F.dim == 1:
        slope = jac[0][0].eval(coords) if exact else jac[0][0].eval_complex(coords)
        return (slope,), ((1,),), False
    if exact:
        entries = [[e.eval(coords) for e in row] for row in jac]
    else:
        entries = [[e.eval_complex(coords) for e in row] for row in jac]
    eig = eig2x2(entries, ambient_d=ext_d)
    return eig.values, eig.vectors, eig.defective


# -- linear candidate seeding -----------------------------------------------------


def _line_through(point, direction, variables, ext_d):
    """Polynomial v2*(x - px) - v1*(y - py); None if it cannot be made exact."""
    px, py = point
    v1, v2 = direction
    values = [v2, -v1, v1 * py - v2 * px]
    if all(not isinstance(c, (float, complex)) for c in values):
        coeffs = values
    else:
        scale = max(abs(to_complex(c)) for c in values)
        if scale == 0:
            return None
        coeffs = [rationalize(to_complex(c) / scale, ext_d) for c in values]
        if any(c is None for c in coeffs):
            return None
    x = Polynomial.variable(variables, variables[0])
    y = Polynomial.variable(variables, variables[1])
    line = x * coeffs[0] + y * coeffs[1] + Polynomial.const(variables, coeffs[2])
    if not line or line.is_constant():
        return None
    return line.primitive()


def seed_linear_candidates(
    F: VectorField, ext_d: int | None = None, points: list[FixedPoint] | None = None
) -> list[ManifoldPair]:
    """Exactly verified invariant lines through fixed points.

    Candidates are the lines along each Jacobian eigenvector at each real
    fixed point plus the lines through every pair of real fixed points;
    only candidates whose cofactor division is exact survive.
    """
    if F.dim != 2:
        raise ValueError("linear seeding is a planar operation")
    if points is None:
        points = fixed_points(F, ext_d)
    real_pts = [p for p in points if p.is_real()]
    candidates = []
    for fp in real_pts:
        if fp.defective:
            continue  # no usable eigen-directions; pair lines may still hit it
        for v in fp.eigenvectors:
            candidates.append(_line_through(fp.coords, v, F.vars, ext_d))
    for i in range(len(real_pts)):
        for j in range(i + 1, len(real_pts)):
            a, b = real_pts[i].coords, real_pts[j].coords
            direction = (b[0] - a[0], b[1] - a[1])
            candidates.append(_line_through(a, direction, F.vars, ext_d))
    found: dict = {}
    for cand in candidates:
        if cand is None:
            continue
        pair = try_pair(cand, F, "eigenvector-seeded")
        if pair is not None and pair.key() not in found:
            found[pair.key()] = pair
    return sorted(found.values(), key=lambda p: p.key())


# -- ansatz discovery ---------------------------------------------------------------


def _monomials_upto(variables, deg):
    n = len(variables)
    out = []

    def rec(prefix, remaining, budget):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for k in range(budget + 1):
            rec(prefix + [k], remaining - 1, budget - k)

    rec([], n, deg)
    out.sort(key=lambda e: (sum(e), tuple(reversed(e))))
    return out


def _coeff_matrix_structures(F: VectorField, max_deg: int):
    """Float matrices for the residual  Lie(M) - M*N  in coefficient space."""
    variables = F.vars
    deg_f = max(1, int(F.degree()))
    m_exps = _monomials_upto(variables, max_deg)
    n_exps = _monomials_upto(variables, deg_f - 1)
    r_exps = _monomials_upto(variables, max_deg + deg_f - 1)
    r_index = {e: i for i, e in enumerate(r_exps)}
    K, L, R = len(m_exps), len(n_exps), len(r_exps)

    lie_mat = np.zeros((R, K))
    for k, e in enumerate(m_exps):
        mono = Polynomial(variables, {e: Fraction(1)})
        lie = lie_derivative(mono, F)
        for ee, c in lie.terms.items():
            lie_mat[r_index[ee], k] += float(c)

    mul_mats = np.zeros((K, R, L))
    for k, e in enumerate(m_exps):
        for l, f in enumerate(n_exps):
            prod = tuple(a + b for a, b in zip(e, f))
            mul_mats[k, r_index[prod], l] = 1.0
    const_idx = m_exps.index((0,) * len(variables))
    return m_exps, n_exps, lie_mat, mul_mats, const_idx


def _als_polish(m, lie_mat, mul_mats, const_idx, rounds=6):
    """Alternating refinement of the bilinear residual near a solution."""
    K = len(m)
    mask = np.ones(K, dtype=bool)
    mask[const_idx] = False
    for _ in range(rounds):
        B = np.tensordot(m, mul_mats, axes=1)
        n, *_ = np.linalg.lstsq(B, lie_mat @ m, rcond=None)
        # residual is linear in m once n is fixed:  (lie_mat - C(n)) m
        A = lie_mat - np.tensordot(mul_mats, n, axes=([2], [0])).T
        a_c = A[:, const_idx : const_idx + 1]
        A_nc = A[:, mask]
        proj = A_nc - a_c @ np.linalg.lstsq(a_c, A_nc, rcond=None)[0]
        _, _, vt = np.linalg.svd(proj, full_matrices=False)
        m_nc = vt[-1]
        m_c = np.linalg.lstsq(a_c, -A_nc @ m_nc, rcond=None)[0]
        m = np.zeros(K)
        m[mask] = m_nc
        m[const_idx] = m_c[0]
        nrm = np.linalg.norm(m[mask])
        if nrm > 0:
            m = m / nrm
    return m


def _residual_norm(m, lie_mat, mul_mats):
    B = np.tensordot(m, mul_mats, axes=1)
    b = lie_mat @ m
    n, *_ = np.linalg.lstsq(B, b, rcond=None)
    r = b - B @ n
    return float(np.sqrt(r @ r))


def _is_product_of(M: Polynomial, factors: list[Polynomial]) -> bool:
    if M.is_constant():
        return True
    if any(M == f for f in factors):
        return True
    for f in factors:
        if f.degree >= M.degree or f.degree < 1:
            continue
        q = M.divide_exact(f)
        if q is not None:
            if q.is_constant():
                return True
            if _is_product_of(q.primitive(), factors):
                return True
    return False


def discover_ansatz(
    F: VectorField,
    max_deg: int,
    attempts: int = 40,
    seed: int = 0,
    ext_d: int | None = None,
    den_bound: int = DEFAULT_DEN_BOUND,
) -> list[ManifoldPair]:
    """Numeric search for bounded-degree generating functions.

    For a unit-norm coefficient vector of a candidate M the best cofactor
    is a linear least-squares solve; the leftover residual is minimized
    over M by multi-start quasi-Newton descent (deterministic for a given
    seed).  Accepted minima are rationalized and must pass the exact
    cofactor gate; associates and products of lower-degree finds are
    dropped.
    """
    from scipy.optimize import minimize

    if not 1 <= max_deg <= 4:
        raise ValueError("max_deg must be between 1 and 4")
    m_exps, _, lie_mat, mul_mats, const_idx = _coeff_matrix_structures(F, max_deg)
    K = len(m_exps)
    mask = np.ones(K, dtype=bool)
    mask[const_idx] = False

    def objective(m):
        s = np.linalg.norm(m[mask])
        if s < 1e-9:
            return 1e6 + float(m @ m), 2.0 * m
        u = m / s
        B = np.tensordot(u, mul_mats, axes=1)
        b = lie_mat @ u
        n, *_ = np.linalg.lstsq(B, b, rcond=None)
        r = b - B @ n
        J = float(r @ r)
        g = 2.0 * (lie_mat.T @ r) - 2.0 * np.einsum("krl,l,r->k", mul_mats, n, r)
        pu = np.where(mask, u, 0.0)
        grad = (g - float(g @ u) * pu) / s
        return J, grad

    rng = np.random.default_rng(seed)
    accepted: dict = {}
    # deterministic starts at each nonconstant monomial catch degenerate
    # solution families (axes, decoupled fields) that random unit starts
    # rationalize poorly; random starts follow
    starts = []
    for k in range(K):
        if k != const_idx:
            e = np.zeros(K)
            e[k] = 1.0
            starts.append(e)
    for _ in range(attempts):
        m0 = rng.standard_normal(K)
        if np.linalg.norm(m0[mask]) < 1e-3:
            m0[mask] += 1.0
        starts.append(m0)
    for m0 in starts:
        res = minimize(
            objective,
            m0,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 300, "ftol": 1e-18, "gtol": 1e-14},
        )
        m = res.x
        s = np.linalg.norm(m[mask])
        if s < 1e-9:
            continue
        m = m / s
        if _residual_norm(m, lie_mat, mul_mats) >= RESIDUAL_TOL:
            m = _als_polish(m, lie_mat, mul_mats, const_idx)
            if _residual_norm(m, lie_mat, mul_mats) >= RESIDUAL_TOL:
                continue
        poly = _rationalize_coefficient_vector(
            m, m_exps, F.vars, ext_d, den_bound
        )
        if poly is None:
            continue
        pair = try_pair(poly, F, "ansatz-discovered")
        if pair is None:
            continue
        if pair.key() not in accepted:
            accepted[pair.key()] = pair

    # drop associates/products of lower-degree finds
    ordered = sorted(accepted.values(), key=lambda p: p.key())
    kept: list[ManifoldPair] = []
    for pair in ordered:
        others = [p.M for p in kept]
        if others and _is_product_of(pair.M, others):
            continue
        kept.append(pair)
    return kept


def _rationalize_coefficient_vector(m, m_exps, variables, ext_d, den_bound):
    """Scale a unit float vector two ways and try exact reconstruction."""
    order = np.argsort(-np.abs(m))
    scales = [m[order[0]]]
    lead = max(
        (i for i in range(len(m)) if abs(m[i]) > 1e-7),
        key=lambda i: (sum(m_exps[i]), tuple(reversed(m_exps[i]))),
        default=None,
    )
    if lead is not None:
        scales.append(m[lead])
    for s in scales:
        if abs(s) < 1e-12:
            continue
        coeffs = {}
        ok = True
        for e, value in zip(m_exps, m / s):
            if abs(value) < 1e-9:
                continue
            r = rationalize(value, ext_d, den_bound)
            if r is None:
                ok = False
                break
            coeffs[e] = r
        if not ok or not coeffs:
            continue
        poly = Polynomial(variables, coeffs)
        if poly and not poly.is_constant():
            return poly.primitive()
    return None


# -- planted systems --------------------------------------------------------------


def generate_planted(M_list, N_list, deg_F: int, seed: int = 0):
    """Vector field of degree <= deg_F admitting every prescribed (M, N).

    The conditions Lie(M_i, F) = M_i * N_i are linear in the unknown
    coefficients of F; returns a seeded random element of the exact
    solution space, or None when the system is infeasible.
    """
    if len(M_list) != len(N_list) or not M_list:
        raise ValueError("need matching nonempty M and N lists")
    variables = M_list[0].vars
    n = len(variables)
    f_exps = _monomials_upto(variables, deg_F)
    T = len(f_exps)
    unknowns = [(i, e) for i in range(n) for e in f_exps]

    row_exps = set()
    col_polys = {}
    rhs_polys = []
    for M, N in zip(M_list, N_list):
        target = M * N
        rhs_polys.append(target)
        row_exps.update(target.terms)
        for i, name in enumerate(variables):
            dM = M.partial(name)
            for e in f_exps:
                contrib = dM * Polynomial(variables, {e: Fraction(1)})
                col_polys.setdefault((len(rhs_polys) - 1, i, e), contrib)
                row_exps.update(contrib.terms)

    rows = []
    rhs = []
    row_list = sorted(row_exps, key=lambda e: (sum(e), tuple(reversed(e))))
    for p_idx, target in enumerate(rhs_polys):
        for r in row_list:
            row = []
            for i, e in unknowns:
                c = col_polys[(p_idx, i, e)].terms.get(r, Fraction(0))
                row.append(c)
            rows.append(row)
            rhs.append(target.terms.get(r, Fraction(0)))

    particular = linear_solve_exact(rows, rhs)
    if particular is None:
        return None
    basis = nullspace_exact(rows)
    rng = np.random.default_rng(seed)
    sol = list(particular)
    for v in basis:
        c = int(rng.integers(-2, 3))
        if c:
            sol = [s + c * x for s, x in zip(sol, v)]

    comps = []
    for i in range(n):
        terms = {}
        for (ci, e), value in zip(unknowns, sol):
            if ci == i and value:
                terms[e] = value
        comps.append(Polynomial(variables, terms))
    F = VectorField(comps)
    for M, N in zip(M_list, N_list):
        if lie_derivative(M, F) - M * N:
            return None
    return F
