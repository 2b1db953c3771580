"""Adaptive integration, root finding, and small numeric linear algebra.

The integrator is an explicit Dormand-Prince 5(4) pair with a PI step
controller (safety 0.9, exponents 0.7/5 and 0.4/5) and optional 4th-order
dense output, i.e. the classical ode45 configuration.  Trajectories stop
at the horizon, on step underflow, or when the state leaves |x| > 1e12
(divergence: finite-time blow-up cannot be followed numerically).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import (
    Polynomial,
    QuadExt,
    VectorField,
    bareiss_determinant,
    quad,
    square_free_decompose,
    to_complex,
)

DIVERGENCE_LIMIT = 1e12

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# dense-output weights (Hairer's contd5 coefficients)
_D = (
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)


@dataclass
class IntegratorConfig:
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = math.inf
    horizon: float = 1.0
    dense: bool = False

    def __post_init__(self):
        if not (0 < self.rtol < 1 and 0 < self.atol < 1):
            raise ValueError("tolerances must lie in (0, 1)")


@dataclass
class Trajectory:
    times: list[float]
    states: list[tuple]
    reason: str  # horizon | step-underflow | divergence
    dense_segments: list = field(default_factory=list)

    @property
    def t_end(self) -> float:
        return self.times[-1]

    def sample(self, t: float):
        """Dense-output evaluation inside the covered interval."""
        if not self.dense_segments:
            raise ValueError("trajectory was integrated without dense output")
        if t <= self.times[0]:
            return self.states[0]
        segs = self.dense_segments
        lo, hi = 0, len(segs) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if segs[mid][1] < t:
                lo = mid + 1
            else:
                hi = mid
        t0, t1, r1, r2, r3, r4, r5 = segs[lo]
        if t > t1 + 1e-12:
            raise ValueError(f"t={t} beyond integrated range {t1}")
        th = (t - t0) / (t1 - t0)
        u = r1 + th * (r2 + (1 - th) * (r3 + th * (r4 + (1 - th) * r5)))
        return tuple(u)


def compile_field(F: VectorField):
    """Compile polynomial components into a fast float callable y -> ndarray."""
    names = list(F.vars)
    exprs = ", ".join(c.to_py_expr() for c in F.components)
    src = f"def _rhs({', '.join(names)}):\n    return ({exprs},)"
    ns: dict = {}
    exec(src, ns)  # generated from our own polynomial printer
    fn = ns["_rhs"]

    def rhs(y):
        return np.array(fn(*y), dtype=float)

    return rhs


def _initial_step(rhs, y0, horizon, rtol, atol):
    # Hairer's starting-step heuristic (order 5)
    sc = atol + rtol * np.abs(y0)
    f0 = rhs(y0)
    d0 = np.sqrt(np.mean((y0 / sc) ** 2)) if y0.size else 0.0
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = rhs(y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, horizon)


def rk45(F: VectorField, x0, cfg: IntegratorConfig) -> Trajectory:
    """Integrate dx/dt = F(x) from x0 over [0, cfg.horizon]."""
    rhs = compile_field(F) if isinstance(F, VectorField) else F
    y = np.array([float(v) for v in x0], dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("initial state must be finite")
    t = 0.0
    times = [0.0]
    states = [tuple(y)]
    dense = []
    if cfg.horizon == 0:
        return Trajectory(times, states, "horizon", dense)

    h = min(_initial_step(rhs, y, cfg.horizon, cfg.rtol, cfg.atol), cfg.max_step)
    err_prev = 1.0
    reason = "horizon"
    min_step = 1e-14 * cfg.horizon
    k = [None] * 7
    while t < cfg.horizon:
        h = min(h, cfg.horizon - t, cfg.max_step)
        if h < min_step:
            # steps collapse approaching a finite-time pole; report escape,
            # not tolerance stagnation, once the state has clearly left
            reason = (
                "divergence" if float(np.max(np.abs(y))) > 1e9 else "step-underflow"
            )
            break
        k[0] = rhs(y)
        failed_eval = False
        for i in range(1, 7):
            yi = y + h * sum(a * k[j] for j, a in enumerate(_A[i]))
            if not np.all(np.isfinite(yi)):
                failed_eval = True
                break
            k[i] = rhs(yi)
        if failed_eval or not all(np.all(np.isfinite(ki)) for ki in k):
            h *= 0.5
            continue
        y_new = y + h * sum(b * k[i] for i, b in enumerate(_B5))
        err_vec = h * sum(e * k[i] for i, e in enumerate(_E))
        sc = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / sc) ** 2))) if y.size else 0.0

        if err <= 1.0 and np.all(np.isfinite(y_new)):
            if cfg.dense:
                ydiff = y_new - y
                bspl = h * k[0] - ydiff
                r4 = ydiff - h * k[6] - bspl
                r5 = h * sum(d * k[i] for i, d in enumerate(_D))
                dense.append((t, t + h, y.copy(), ydiff, bspl, r4, r5))
            t += h
            y = y_new
            times.append(t)
            states.append(tuple(y))
            if float(np.max(np.abs(y))) > DIVERGENCE_LIMIT:
                reason = "divergence"
                break
            fac = 0.9 * (err + 1e-16) ** (-0.7 / 5) * (err_prev + 1e-16) ** (0.4 / 5)
            err_prev = err
            h *= min(5.0, max(0.2, fac))
        else:
            h *= min(1.0, max(0.2, 0.9 * (err + 1e-16) ** (-1 / 5)))
    return Trajectory(times, states, reason, dense)


# -- polynomial roots -----------------------------------------------------------


def roots_univariate_numeric(coeffs) -> list[complex]:
    """All complex roots of c0 + c1 x + ... + cn x^n by Aberth-Ehrlich
    simultaneous iteration, Newton-polished."""
    c = [to_complex(x) for x in coeffs]
    while c and abs(c[-1]) == 0.0:
        c.pop()
    if len(c) <= 1:
        return []
    n = len(c) - 1
    lead = c[-1]
    monic = [x / lead for x in c]

    def p_and_dp(z):
        p = monic[n]
        dp = 0j
        for i in range(n - 1, -1, -1):
            dp = dp * z + p
            p = p * z + monic[i]
        return p, dp

    radius = 1.0 + max(abs(x) for x in monic[:-1])
    z = [
        radius * cmath.exp(2j * cmath.pi * (i + 0.35) / n) * (0.8 + 0.4 * i / max(n, 1))
        for i in range(n)
    ]
    for _ in range(200):
        moved = 0.0
        for i in range(n):
            p, dp = p_and_dp(z[i])
            if p == 0:
                continue
            w = p / dp if dp != 0 else p
            s = sum(1 / (z[i] - z[j]) for j in range(n) if j != i)
            denom = 1 - w * s
            delta = w / denom if denom != 0 else w
            z[i] -= delta
            moved = max(moved, abs(delta) / (1 + abs(z[i])))
        if moved < 1e-15:
            break
    # final Newton polish
    for i in range(n):
        for _ in range(10):
            p, dp = p_and_dp(z[i])
            if abs(p) < 1e-15 or dp == 0:
                break
            z[i] -= p / dp
    return sorted(z, key=lambda w: (round(w.real, 9), round(w.imag, 9)))


def newton_polish(polys, guess, tol=1e-14, max_iter=50):
    """Newton-polish a root of a square polynomial system (numeric point)."""
    names = polys[0].vars
    jac = [[p.partial(v) for v in names] for p in polys]
    z = [to_complex(v) for v in guess]
    for _ in range(max_iter):
        fv = [p.eval_complex(z) for p in polys]
        if max(abs(v) for v in fv) < tol:
            break
        a = np.array([[e.eval_complex(z) for e in row] for row in jac], dtype=complex)
        b = np.array(fv, dtype=complex)
        try:
            step = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            break
        z = [zi - si for zi, si in zip(z, step)]
    return tuple(z)


# -- 2x2 eigen decomposition -------------------------------------------------


@dataclass(frozen=True)
class Eigen2x2:
    values: tuple
    vectors: tuple  # one per eigenvalue (may be shorter when defective)
    exact: bool
    defective: bool = False


def eig2x2(mat, ambient_d: int | None = None) -> Eigen2x2:
    """Closed-form eigenvalues/eigenvectors of a 2x2 matrix.

    Exact when the entries are exact and the characteristic discriminant
    is a perfect square, or s^2 * d for the ambient extension d (d may be
    negative).  Otherwise falls back to complex doubles.
    """
    (a, b), (c, d) = mat
    exact_entries = all(
        not isinstance(x, (float, complex)) for x in (a, b, c, d)
    )
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4 * det

    def vector_for(lam):
        # rows of (A - lam I); a zero row means any direction
        r1 = (a - lam, b)
        r2 = (c, d - lam)
        row = r1 if (r1[0] or r1[1]) else r2
        if not (row[0] or row[1]):
            return (1, 0)
        return (-row[1], row[0])

    if exact_entries and not isinstance(disc, QuadExt):
        num, den = disc.numerator, disc.denominator
        s2, d0 = (0, 1) if num == 0 else square_free_decompose(num * den)
        if d0 == 1:
            root = Fraction(s2, den)
            lam1 = (tr + root) / 2
            lam2 = (tr - root) / 2
            if lam1 == lam2:
                v = vector_for(lam1)
                if (a - lam1, b, c, d - lam1) == (0, 0, 0, 0):
                    return Eigen2x2((lam1, lam2), ((1, 0), (0, 1)), True)
                return Eigen2x2((lam1, lam2), (v,), True, defective=True)
            return Eigen2x2(
                (lam1, lam2), (vector_for(lam1), vector_for(lam2)), True
            )
        if ambient_d is not None and d0 == ambient_d:
            root = quad(0, Fraction(s2, den), d0)
            lam1 = (tr + root) / 2
            lam2 = (tr - root) / 2
            return Eigen2x2(
                (lam1, lam2), (vector_for(lam1), vector_for(lam2)), True
            )

    trc, detc = to_complex(tr), to_complex(det)
    rootc = cmath.sqrt(trc * trc - 4 * detc)
    lam1 = (trc + rootc) / 2
    lam2 = (trc - rootc) / 2
    ac, bc, cc, dc = (to_complex(x) for x in (a, b, c, d))

    def nvec(lam):
        r1 = (ac - lam, bc)
        r2 = (cc, dc - lam)
        row = r1 if max(abs(r1[0]), abs(r1[1])) >= max(abs(r2[0]), abs(r2[1])) else r2
        if max(abs(row[0]), abs(row[1])) < 1e-14:
            return (1 + 0j, 0j)
        return (-row[1], row[0])

    if abs(lam1 - lam2) < 1e-12 * (1 + abs(lam1)):
        if max(abs(bc), abs(cc), abs(ac - dc)) < 1e-14:
            return Eigen2x2((lam1, lam2), ((1, 0), (0, 1)), False)
        return Eigen2x2((lam1, lam2), (nvec(lam1),), False, defective=True)
    return Eigen2x2((lam1, lam2), (nvec(lam1), nvec(lam2)), False)


# -- resultants ---------------------------------------------------------------


def sylvester_resultant(p: Polynomial, q: Polynomial, eliminate: str) -> Polynomial:
    """Resultant of p and q with respect to `eliminate`, exact.

    The Sylvester matrix has polynomial entries (in the remaining
    variables); its determinant is computed fraction-free.
    """
    zero = Polynomial.zero(p.vars)
    cp = p.as_univariate(eliminate)
    cq = q.as_univariate(eliminate)
    m = len(cp) - 1
    n = len(cq) - 1
    if m < 0 or n < 0:
        raise ZeroDivisionError("resultant of the zero polynomial")
    if m == 0 and n == 0:
        return Polynomial.const(p.vars, 1)
    if m == 0:
        return cp[0] ** n
    if n == 0:
        return cq[0] ** m
    size = m + n
    rows = []
    for i in range(n):
        row = [zero] * size
        for j, c in enumerate(reversed(cp)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for j, c in enumerate(reversed(cq)):
            row[i + j] = c
        rows.append(row)

    def div(a, b):
        out = a.divide_exact(b)
        if out is None:
            raise ArithmeticError("non-exact division inside Bareiss resultant")
        return out

    return bareiss_determinant(rows, divide=div)
