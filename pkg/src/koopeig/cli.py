"""Command-line interface.

    koopman verify  FILE             check `manifold` lines, print cofactors
    koopman discover FILE            seeded + ansatz manifold search
    koopman eigen   FILE             weight vectors, eigenvalues, identities
    koopman solve   FILE             full pipeline, closed-form solution file
    koopman check   FILE             closed form vs adaptive integrator, CSV
    koopman solve1d FILE             the scalar pipeline

Exit codes: 0 success, 2 parse error, 3 verification failure, 4 no
independent eigenpair.  Reports are deterministic for a fixed seed; the
optional --dump flag appends machine-readable `key=value` lines.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import eigen as eig
from . import koopman1d as k1
from . import koopman2d as k2
from . import manifold as mf
from .algebra import to_complex, to_float
from .numerics import IntegratorConfig, rk45
from .sysparse import (
    SysParseError,
    SystemSpec,
    format_polynomial,
    format_scalar,
    parse_system,
    print_expr,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VERIFY = 3
EXIT_NO_PAIR = 4

DEFAULT_HORIZON = 1.0
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


class _Report:
    """Collects human-readable lines and structured key=value pairs."""

    def __init__(self):
        self.lines: list[str] = []
        self.kv: list[tuple[str, str]] = []

    def say(self, text: str = ""):
        self.lines.append(text)

    def put(self, key: str, value):
        self.kv.append((key, str(value)))

    def emit(self, dump: bool):
        for line in self.lines:
            print(line)
        if dump:
            print()
            for k, v in self.kv:
                print(f"{k}={v}")


def _load(path: str) -> SystemSpec:
    text = Path(path).read_text(encoding="utf-8")
    return parse_system(text)


def _echo_system(spec: SystemSpec, path: str, rep: _Report):
    rep.say(f"system: {path}")
    rep.say(f"vars: {' '.join(spec.variables)}")
    if spec.ext_d is not None:
        rep.say(f"field: sqrt({spec.ext_d})")
    for name, comp in zip(spec.variables, spec.field.components):
        rep.say(f"d{name}/dt = {format_polynomial(comp)}")
    rep.put("system.path", path)
    rep.put("system.vars", " ".join(spec.variables))
    if spec.ext_d is not None:
        rep.put("system.field_d", spec.ext_d)


def _manifold_pairs(spec: SystemSpec, rep: _Report, args) -> list[mf.ManifoldPair]:
    """User-supplied manifolds (verified) or automatic discovery."""
    if spec.manifolds:
        pairs = []
        for m in spec.manifolds:
            pair = mf.make_pair(m, spec.field, "user-supplied")
            pairs.append(pair)
        return pairs
    pts = mf.fixed_points(spec.field, spec.ext_d)
    pairs = list(mf.seed_linear_candidates(spec.field, spec.ext_d, pts))
    found = mf.discover_ansatz(
        spec.field,
        max_deg=getattr(args, "max_deg", 2),
        attempts=getattr(args, "attempts", 40),
        seed=getattr(args, "seed", 0),
        ext_d=spec.ext_d,
    )
    keys = {p.key() for p in pairs}
    for p in found:
        if p.key() not in keys and not mf._is_product_of(p.M, [q.M for q in pairs]):
            pairs.append(p)
            keys.add(p.key())
    rep.say(f"discovered manifolds: {len(pairs)}")
    return sorted(pairs, key=lambda p: p.key())


def cmd_verify(args) -> int:
    spec = _load(args.file)
    rep = _Report()
    _echo_system(spec, args.file, rep)
    if not spec.manifolds:
        rep.say("no manifold lines to verify")
        rep.emit(args.dump)
        return EXIT_VERIFY
    ok = True
    for i, m in enumerate(spec.manifolds, start=1):
        n = None
        if not m.is_constant():
            n = mf.cofactor(m, spec.field)
        if n is None:
            ok = False
            rep.say(f"manifold {format_polynomial(m)}: NOT INVARIANT")
            rep.put(f"manifold.{i}.invariant", "false")
            continue
        canon = mf.make_pair(m, spec.field, "user-supplied")
        rep.say(f"manifold M = {format_polynomial(canon.M)}")
        rep.say(f"  N = {format_polynomial(canon.N)}")
        rep.say("  Lie(M) - M*N = 0: exact")
        rep.put(f"manifold.{i}.M", format_polynomial(canon.M))
        rep.put(f"manifold.{i}.N", format_polynomial(canon.N))
    rep.emit(args.dump)
    if not ok:
        print("verification failed: candidate is not invariant", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_discover(args) -> int:
    spec = _load(args.file)
    rep = _Report()
    _echo_system(spec, args.file, rep)
    pts = mf.fixed_points(spec.field, spec.ext_d)
    for i, p in enumerate(pts, start=1):
        coords = ", ".join(
            format_scalar(c) if not isinstance(c, complex) else repr(c)
            for c in p.coords
        )
        kind = "exact" if p.exact else "numeric"
        rep.say(f"fixed point ({coords})  [{kind}]")
        rep.put(f"fixed_point.{i}", coords)
    seeded = mf.seed_linear_candidates(spec.field, spec.ext_d, pts)
    found = mf.discover_ansatz(
        spec.field,
        max_deg=args.max_deg,
        attempts=args.attempts,
        seed=args.seed,
        ext_d=spec.ext_d,
    )
    merged: dict = {}
    for p in list(seeded) + list(found):
        if p.key() not in merged and not mf._is_product_of(
            p.M, [q.M for q in merged.values()]
        ):
            merged[p.key()] = p
    for i, p in enumerate(sorted(merged.values(), key=lambda q: q.key()), start=1):
        rep.say(f"manifold M = {format_polynomial(p.M)}")
        rep.say(f"  N = {format_polynomial(p.N)}")
        rep.say(f"  provenance: {p.provenance}")
        rep.put(f"manifold.{i}.M", format_polynomial(p.M))
        rep.put(f"manifold.{i}.N", format_polynomial(p.N))
        rep.put(f"manifold.{i}.provenance", p.provenance)
    rep.emit(args.dump)
    return EXIT_OK


def _eigen_table(spec: SystemSpec, rep: _Report, args):
    pairs = _manifold_pairs(spec, rep, args)
    if not pairs:
        return pairs, []
    table = eig.eigenpair_table(pairs)
    for i, e in enumerate(table, start=1):
        weight = "[" + ", ".join(format_scalar(c) for c in e.weight) + "]"
        rep.say(f"eigenpair {i}: lambda = {format_scalar(e.lam)}")
        rep.say(f"  weight = {weight}")
        rep.say(f"  phi = {print_expr(e)}")
        report = eig.verify_pde(e, spec.field)
        for line in report.lines():
            rep.say(f"  {line}")
        if not report.passed:
            raise mf.NotInvariantError(f"eigenpair {i} failed its exact identities")
        rep.put(f"eigen.{i}.lambda", format_scalar(e.lam))
        rep.put(f"eigen.{i}.weight", weight)
        rep.put(f"eigen.{i}.phi", print_expr(e))
    return pairs, table


def cmd_eigen(args) -> int:
    spec = _load(args.file)
    rep = _Report()
    _echo_system(spec, args.file, rep)
    pairs, table = _eigen_table(spec, rep, args)
    if not table:
        rep.emit(args.dump)
        print(
            "no constant combination of cofactors exists "
            "(every weight vector is trivial)",
            file=sys.stderr,
        )
        return EXIT_NO_PAIR
    independents = eig.independent_pairs(table)
    for e1, e2 in independents:
        i, j = table.index(e1) + 1, table.index(e2) + 1
        rep.say(f"independent pair: ({i}, {j})")
    for a in range(len(table)):
        for b in range(a + 1, len(table)):
            if eig.same_class(table[a], table[b]):
                rep.say(f"same equivalence class: ({a + 1}, {b + 1})")
    rep.emit(args.dump)
    if spec.dim >= 2 and not independents:
        print(
            "no independent eigenpair: all weight vectors are proportional, "
            "so every eigenfunction shares one equivalence class",
            file=sys.stderr,
        )
        return EXIT_NO_PAIR
    return EXIT_OK


def _default_ics(spec: SystemSpec):
    if spec.ics:
        return list(spec.ics)
    return []


def _parse_ics_flag(text: str, dim: int):
    out = []
    for chunk in text.split(";"):
        parts = chunk.split(",")
        if len(parts) != dim:
            raise ValueError(f"--ics needs {dim} comma-separated values per point")
        out.append(tuple(float(p) for p in parts))
    return out


def cmd_solve(args) -> int:
    spec = _load(args.file)
    if spec.dim == 1:
        return _solve_1d_impl(args, lam_flag=None)
    rep = _Report()
    _echo_system(spec, args.file, rep)
    pairs, table = _eigen_table(spec, rep, args)
    if not table:
        rep.emit(args.dump)
        print("no constant combination of cofactors exists", file=sys.stderr)
        return EXIT_NO_PAIR
    independents = eig.independent_pairs(table)
    if not independents:
        rep.emit(args.dump)
        print(
            "no independent eigenpair: weight vectors are pairwise "
            "proportional (rank < 2)",
            file=sys.stderr,
        )
        return EXIT_NO_PAIR
    sel, inversion = k2.plan_inversion(independents)
    i, j = table.index(sel[0]) + 1, table.index(sel[1]) + 1
    rep.say(f"selected pair: ({i}, {j})")
    rep.put("pair.first", i)
    rep.put("pair.second", j)
    rep.say(f"  lambda_1 = {format_scalar(sel[0].lam)}, phi_1 = {print_expr(sel[0])}")
    rep.say(f"  lambda_2 = {format_scalar(sel[1].lam)}, phi_2 = {print_expr(sel[1])}")
    out_lines = []
    if inversion is None:
        rep.say("inversion: numeric (no two-monomial affine structure)")
        rep.put("inversion.kind", "numeric")
        out_lines.append("inversion: numeric")
    else:
        rep.say("inversion: exact")
        rep.put("inversion.kind", "exact")
        for name, rec in zip(inversion.state_vars, inversion.recoveries):
            expr = print_expr(rec.expr)
            if rec.root_index == 1:
                rep.say(f"  {name}(phi1, phi2) = {expr}")
            else:
                sign = "+/-" if rec.needs_sign else ""
                rep.say(
                    f"  {name}(phi1, phi2) = {sign}({expr})^(1/{rec.root_index})"
                )
        out_lines.append("inversion: exact")
    out_lines.append(f"lambda_1 = {format_scalar(sel[0].lam)}")
    out_lines.append(f"phi_1 = {print_expr(sel[0])}")
    out_lines.append(f"lambda_2 = {format_scalar(sel[1].lam)}")
    out_lines.append(f"phi_2 = {print_expr(sel[1])}")

    ics = _default_ics(spec)
    for ic in ics:
        label = "(" + ", ".join(str(v) for v in ic) + ")"
        if inversion is None:
            phi0 = k2.map_ic(sel, ic)
            rep.say(f"ic {label}: phi0 = {tuple(map(str, phi0))} (numeric route)")
            out_lines.append(f"ic {label}: numeric inversion from phi0")
            continue
        sol = k2.assemble_solution(sel, inversion, ic)
        rep.say(f"ic {label}:")
        for line in sol.format_expr().splitlines():
            rep.say(f"  {line}")
            out_lines.append(line)
    path = Path(args.file)
    out_path = path.with_suffix(".solution.txt")
    out_path.write_text("\n".join(out_lines) + "\n", encoding="utf-8")
    rep.say(f"solution written: {out_path}")
    rep.put("solution.path", str(out_path))
    rep.emit(args.dump)
    return EXIT_OK


def _check_grid(horizon: float, t_end: float, n: int = 101):
    top = min(horizon, t_end)
    return [top * k / (n - 1) for k in range(n)]


def cmd_check(args) -> int:
    spec = _load(args.file)
    rep = _Report()
    _echo_system(spec, args.file, rep)
    horizon = args.horizon or spec.horizon or DEFAULT_HORIZON
    rtol = spec.rtol or DEFAULT_RTOL
    atol = spec.atol or DEFAULT_ATOL
    if args.ics:
        ics = _parse_ics_flag(args.ics, spec.dim)
    else:
        ics = [tuple(float(to_complex(v).real) for v in ic) for ic in spec.ics]
    if not ics:
        print("no initial conditions (use --ics or ic lines)", file=sys.stderr)
        return EXIT_PARSE

    if spec.dim == 1:
        return _check_1d(args, spec, rep, ics, horizon, rtol, atol)

    pairs, table = _eigen_table(spec, rep, args)
    if not table:
        rep.emit(args.dump)
        print("no constant combination of cofactors exists", file=sys.stderr)
        return EXIT_NO_PAIR
    independents = eig.independent_pairs(table)
    if not independents:
        rep.emit(args.dump)
        print("no independent eigenpair (rank < 2)", file=sys.stderr)
        return EXIT_NO_PAIR
    sel, inversion = k2.plan_inversion(independents)
    rep.say(f"inversion: {'exact' if inversion is not None else 'numeric'}")

    overall = 0.0
    for idx, ic in enumerate(ics, start=1):
        tag = "" if len(ics) == 1 else str(idx)
        csv_path = Path(args.file).with_suffix(f".check{tag}.csv")
        traj = rk45(
            spec.field,
            ic,
            IntegratorConfig(rtol=rtol, atol=atol, horizon=horizon, dense=True),
        )
        sol = None
        poles = []
        if inversion is not None:
            sol = k2.assemble_solution(sel, inversion, ic)
            poles = sol.pole_times(horizon)
        t_top = min(horizon, traj.t_end)
        if poles:
            t_top = min(t_top, 0.8 * poles[0])
        grid = _check_grid(horizon, t_top)
        rows = []
        worst = 0.0
        prev = ic
        for t in grid:
            numeric = traj.sample(t)
            if sol is not None:
                analytic = sol.at(t)
            else:
                lam = (to_complex(sel[0].lam), to_complex(sel[1].lam))
                phi0 = k2.map_ic(sel, ic)
                targets = [
                    to_complex(p) * np.exp(l * t) for p, l in zip(phi0, lam)
                ]
                analytic = k2.invert_numeric(sel, targets, prev)
                prev = analytic
            err = [abs(a - n) for a, n in zip(analytic, numeric)]
            worst = max(worst, max(err))
            rows.append((t, analytic, numeric, err))
        header = "t," + ",".join(
            f"{v}_analytic" for v in spec.variables
        ) + "," + ",".join(f"{v}_numeric" for v in spec.variables) + "," + ",".join(
            f"abs_err_{v}" for v in spec.variables
        )
        with csv_path.open("w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            for t, analytic, numeric, err in rows:
                cells = (
                    [t]
                    + [float(a) for a in analytic]
                    + [float(n) for n in numeric]
                    + [float(e) for e in err]
                )
                fh.write(",".join(f"{c:.17g}" for c in cells) + "\n")
        label = "(" + ", ".join(str(v) for v in ic) + ")"
        rep.say(f"ic {label}: max abs err = {worst:.3e} over t in [0, {grid[-1]:.6g}]")
        rep.say(f"  numeric termination: {traj.reason} at t = {traj.t_end:.9g}")
        rep.put(f"check.{idx}.max_err", repr(worst))
        rep.put(f"check.{idx}.csv", str(csv_path))
        rep.put(f"check.{idx}.numeric_reason", traj.reason)
        rep.put(f"check.{idx}.numeric_t_end", repr(traj.t_end))
        for p_i, tp in enumerate(poles, start=1):
            rep.say(f"  pole time t* = {tp:.9g}")
            rep.put(f"check.{idx}.pole.{p_i}", repr(tp))
            beyond = k2.eval_solution(sol, tp + 0.1)
            if isinstance(beyond, k2.PoleAt):
                rep.say(f"  closed form at t*+0.1: pole again at t = {beyond.t:.9g}")
            else:
                vals = ", ".join(f"{float(v):.9g}" for v in beyond)
                rep.say(f"  closed form at t*+0.1: ({vals})")
                rep.put(f"check.{idx}.beyond_pole.{p_i}", vals)
        rep.say(f"  csv written: {csv_path}")
        overall = max(overall, worst)
    rep.say(f"max abs err over all ics: {overall:.3e}")
    rep.put("check.max_err", repr(overall))
    rep.emit(args.dump)
    return EXIT_OK


def _check_1d(args, spec, rep, ics, horizon, rtol, atol):
    lam = getattr(args, "lam", None) or -1.0
    f = spec.field.components[0]
    e = k1.partial_fraction_exponents(f, _exactify(lam))
    rep.say(f"lambda = {lam}")
    rep.say(f"phi = {print_expr(e)}")
    overall = 0.0
    for idx, ic in enumerate(ics, start=1):
        tag = "" if len(ics) == 1 else str(idx)
        csv_path = Path(args.file).with_suffix(f".check{tag}.csv")
        x0 = float(to_complex(ic[0]).real)
        traj = rk45(
            spec.field,
            (x0,),
            IntegratorConfig(rtol=rtol, atol=atol, horizon=horizon, dense=True),
        )
        grid = _check_grid(horizon, traj.t_end)
        try:
            xs = k1.solve_1d(e, x0, grid)
        except k1.BlowUpError as blow:
            grid = grid[: len(blow.partial)]
            xs = blow.partial
            rep.say(f"  blow-up: escape time estimate {blow.escape_time:.9g}")
            rep.put(f"check.{idx}.escape_time", repr(blow.escape_time))
        worst = 0.0
        name = spec.variables[0]
        with csv_path.open("w", encoding="utf-8") as fh:
            fh.write(f"t,{name}_analytic,{name}_numeric,abs_err_{name}\n")
            for t, xa in zip(grid, xs):
                xn = traj.sample(t)[0]
                err = abs(xa - xn)
                worst = max(worst, err)
                fh.write(f"{t:.17g},{xa:.17g},{xn:.17g},{err:.17g}\n")
        rep.say(f"ic ({ic[0]}): max abs err = {worst:.3e}")
        rep.say(f"  csv written: {csv_path}")
        rep.put(f"check.{idx}.max_err", repr(worst))
        overall = max(overall, worst)
    rep.say(f"max abs err over all ics: {overall:.3e}")
    rep.put("check.max_err", repr(overall))
    rep.emit(args.dump)
    return EXIT_OK


def _exactify(value: float):
    from fractions import Fraction

    fr = Fraction(value).limit_denominator(10**6)
    return fr if float(fr) == value else value


def _solve_1d_impl(args, lam_flag) -> int:
    spec = _load(args.file)
    if spec.dim != 1:
        print("solve1d needs a one-variable system", file=sys.stderr)
        return EXIT_PARSE
    rep = _Report()
    _echo_system(spec, args.file, rep)
    lam = lam_flag if lam_flag is not None else getattr(args, "lam", None)
    lam = -1.0 if lam is None else lam
    f = spec.field.components[0]
    roots = k1.roots_1d(f, spec.ext_d)
    for r, m in roots:
        rs = format_scalar(r) if not isinstance(r, complex) else repr(r)
        rep.say(f"root {rs}  multiplicity {m}")
    e = k1.partial_fraction_exponents(f, _exactify(lam))
    rep.say(f"lambda = {lam}")
    rep.say(f"phi = {print_expr(e)}")
    mode, residual = k1.verify_logarithmic_identity(e)
    if mode == "exact":
        if residual != 0.0:
            print("logarithmic-derivative identity failed", file=sys.stderr)
            return EXIT_VERIFY
        rep.say("logarithmic-derivative identity: exact zero")
    else:
        rep.say(f"logarithmic-derivative identity: sampled residual {residual:.3e}")
        if residual > 1e-10:
            print("logarithmic-derivative residual too large", file=sys.stderr)
            return EXIT_VERIFY
    out_lines = [f"lambda = {lam}", f"phi = {print_expr(e)}"]
    horizon = spec.horizon or DEFAULT_HORIZON
    grid = [horizon * k / 20 for k in range(21)]
    for ic in spec.ics:
        x0 = float(to_complex(ic[0]).real)
        try:
            xs = k1.solve_1d(e, x0, grid)
            pts = ", ".join(f"({t:.3g}, {x:.9g})" for t, x in zip(grid, xs))
            rep.say(f"ic ({ic[0]}): {pts}")
            out_lines.append(f"ic ({ic[0]}): {pts}")
        except k1.BlowUpError as blow:
            rep.say(
                f"ic ({ic[0]}): finite-time blow-up, escape near t = "
                f"{blow.escape_time:.9g}"
            )
            out_lines.append(f"ic ({ic[0]}): blow-up near t = {blow.escape_time:.9g}")
    out_path = Path(args.file).with_suffix(".solution.txt")
    out_path.write_text("\n".join(out_lines) + "\n", encoding="utf-8")
    rep.say(f"solution written: {out_path}")
    rep.emit(args.dump)
    return EXIT_OK


def cmd_solve1d(args) -> int:
    return _solve_1d_impl(args, lam_flag=None)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="koopman",
        description="Exact eigenfunction solutions for polynomial ODEs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **extra):
        p = sub.add_parser(name)
        p.add_argument("file")
        p.add_argument("--dump", action="store_true", help="append key=value dump")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-deg", dest="max_deg", type=int, default=2)
        p.add_argument("--attempts", type=int, default=40)
        for flag, kw in extra.items():
            p.add_argument(flag, **kw)
        p.set_defaults(fn=fn)
        return p

    add("verify", cmd_verify)
    add("discover", cmd_discover)
    add("eigen", cmd_eigen)
    add("solve", cmd_solve)
    add(
        "check",
        cmd_check,
        **{
            "--ics": dict(default=None, help="semicolon-separated comma points"),
            "--horizon": dict(type=float, default=None),
        },
    )
    add("solve1d", cmd_solve1d, **{"--lambda": dict(dest="lam", type=float, default=None)})

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SysParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except mf.NotInvariantError as err:
        print(f"verification failed: {err}", file=sys.stderr)
        return EXIT_VERIFY
    except mf.NonIsolatedFixedPointsError as err:
        print(f"cannot analyze: {err}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
