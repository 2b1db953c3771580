"""Plain-text system definitions: parser and canonical pretty-printer.

File format (one directive per line, `#` comments):

    vars x y
    field sqrt(2)          # optional quadratic extension for coefficients
    dx/dt = x*y
    dy/dt = y^2 - x - 1
    manifold y - x - 1     # optional candidate invariant manifolds
    ic 1 1                 # optional initial conditions (exact or float)
    horizon 1.0
    rtol 1e-10
    atol 1e-12

Expressions use `+ - * / ^` with `^` binding tightest and exponents
restricted to non-negative integer literals; `/` requires a constant
divisor (so `1/2` and `x/2` parse, `x/y` does not).  `sqrt(k)` is a
coefficient literal and is only legal once `field sqrt(d)` declares the
matching extension.  Floating-point literals are rejected inside
polynomials but fine in `ic` / tolerance lines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .algebra import (
    Polynomial,
    QuadExt,
    RationalFunction,
    VectorField,
    quad,
    rational_parts,
    sign_key,
    square_free_decompose,
)


class SysParseError(ValueError):
    def __init__(self, message: str, line: int, col: int = 0):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


@dataclass(frozen=True)
class SystemSpec:
    variables: tuple
    field: VectorField
    manifolds: tuple = ()
    ics: tuple = ()
    ext_d: int | None = None
    horizon: float | None = None
    rtol: float | None = None
    atol: float | None = None

    @property
    def dim(self) -> int:
        return len(self.variables)


# -- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<float>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\.\d+)"
    r"|(?P<int>\d+)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*/^()=]))"
)


def _tokenize(text: str, line_no: int, col_base: int):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            col = col_base + len(text[:pos]) + (len(text[pos:]) - len(stripped))
            raise SysParseError(f"unexpected character {stripped[0]!r}", line_no, col + 1)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), line_no, col_base + m.start(kind) + 1))
        pos = m.end()
    tokens.append(("end", "", line_no, col_base + len(text) + 1))
    return tokens


class _ExprParser:
    """Recursive-descent parser for polynomial expressions."""

    def __init__(self, tokens, variables, ext_d):
        self.tokens = tokens
        self.i = 0
        self.vars = variables
        self.ext_d = ext_d

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise SysParseError(msg, tok[2], tok[3])

    def parse(self) -> Polynomial:
        p = self.expr()
        kind, text, *_ = self.peek()
        if kind != "end":
            self.error(f"unexpected {text!r} after expression")
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op_tok = self.take()
            q = self.unary()
            if op_tok[1] == "*":
                p = p * q
            else:
                if not q.is_constant():
                    self.error("divisor must be a constant", op_tok)
                c = q.constant_value()
                if not c:
                    self.error("division by zero", op_tok)
                p = p.map_coefficients(lambda x: x / c)
        return p

    def unary(self) -> Polynomial:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[0] == "op" and self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        p = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, text, line, col = self.peek()
            if kind != "int":
                self.error("exponent must be a non-negative integer literal")
            self.take()
            p = p ** int(text)
        return p

    def atom(self) -> Polynomial:
        kind, text, line, col = self.take()
        if kind == "int":
            return Polynomial.const(self.vars, Fraction(int(text)))
        if kind == "float":
            raise SysParseError(
                "floating-point literals are not allowed in polynomials", line, col
            )
        if kind == "name":
            if text == "sqrt":
                return self.sqrt_literal(line, col)
            if text in self.vars:
                return Polynomial.variable(self.vars, text)
            raise SysParseError(f"undeclared variable {text!r}", line, col)
        if kind == "op" and text == "(":
            p = self.expr()
            kind2, text2, line2, col2 = self.take()
            if text2 != ")":
                raise SysParseError("expected ')'", line2, col2)
            return p
        raise SysParseError(f"unexpected {text or 'end of line'!r}", line, col)

    def sqrt_literal(self, line, col) -> Polynomial:
        kind, text, l2, c2 = self.take()
        if text != "(":
            raise SysParseError("expected '(' after sqrt", l2, c2)
        sign = 1
        kind, text, l2, c2 = self.take()
        if kind == "op" and text == "-":
            sign = -1
            kind, text, l2, c2 = self.take()
        if kind != "int":
            raise SysParseError("sqrt argument must be an integer literal", l2, c2)
        k = sign * int(text)
        kind, text, l2, c2 = self.take()
        if text != ")":
            raise SysParseError("expected ')' closing sqrt", l2, c2)
        s, d0 = square_free_decompose(k)
        if d0 == 1:
            return Polynomial.const(self.vars, Fraction(s))
        if self.ext_d is None:
            raise SysParseError(
                f"sqrt({k}) requires a 'field sqrt({d0})' declaration", line, col
            )
        if d0 != self.ext_d:
            raise SysParseError(
                f"sqrt({k}) does not live in the declared field sqrt({self.ext_d})",
                line,
                col,
            )
        return Polynomial.const(self.vars, quad(0, 1, k))


def _parse_number(text: str, line: int, col: int):
    if re.fullmatch(r"[+-]?\d+", text):
        return Fraction(int(text))
    m = re.fullmatch(r"([+-]?\d+)/(\d+)", text)
    if m:
        return Fraction(int(m.group(1)), int(m.group(2)))
    try:
        return float(text)
    except ValueError:
        raise SysParseError(f"bad number {text!r}", line, col) from None


def parse_system(text: str) -> SystemSpec:
    """Parse a system definition; raises SysParseError with line/col."""
    variables: tuple | None = None
    ext_d: int | None = None
    derivatives: dict[str, Polynomial] = {}
    manifolds: list[Polynomial] = []
    ics: list[tuple] = []
    horizon = rtol = atol = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        head = body.split(None, 1)[0]
        rest = body[len(head):].strip()
        rest_col = indent + body.index(rest) + 1 if rest else indent + len(head) + 1

        if head == "vars":
            names = rest.split()
            if not names:
                raise SysParseError("vars line declares no variables", line_no, rest_col)
            for n in names:
                if not re.fullmatch(r"[A-Za-z_]\w*", n):
                    raise SysParseError(f"bad variable name {n!r}", line_no, rest_col)
            if len(set(names)) != len(names):
                raise SysParseError("duplicate variable name", line_no, rest_col)
            variables = tuple(names)
            continue

        if head == "field":
            m = re.fullmatch(r"sqrt\(\s*(-?\d+)\s*\)", rest)
            if not m:
                raise SysParseError("expected: field sqrt(<int>)", line_no, rest_col)
            _, d0 = square_free_decompose(int(m.group(1)))
            if d0 in (0, 1):
                raise SysParseError(
                    "field discriminant must not be a perfect square or zero",
                    line_no,
                    rest_col,
                )
            if ext_d is not None and ext_d != d0:
                raise SysParseError("conflicting field declarations", line_no, rest_col)
            ext_d = d0
            continue

        m = re.fullmatch(r"d([A-Za-z_]\w*)\s*/\s*dt\s*=\s*(.*)", body)
        if m:
            if variables is None:
                raise SysParseError("vars must be declared first", line_no, 1)
            name, expr_text = m.group(1), m.group(2)
            if name not in variables:
                raise SysParseError(f"undeclared variable {name!r}", line_no, indent + 2)
            if name in derivatives:
                raise SysParseError(f"duplicate equation for {name!r}", line_no, 1)
            col_base = indent + m.start(2)
            tokens = _tokenize(expr_text, line_no, col_base)
            derivatives[name] = _ExprParser(tokens, variables, ext_d).parse()
            continue

        if head == "manifold":
            if variables is None:
                raise SysParseError("vars must be declared first", line_no, 1)
            tokens = _tokenize(rest, line_no, rest_col - 1)
            manifolds.append(_ExprParser(tokens, variables, ext_d).parse())
            continue

        if head == "ic":
            if variables is None:
                raise SysParseError("vars must be declared first", line_no, 1)
            parts = rest.split()
            if len(parts) != len(variables):
                raise SysParseError(
                    f"ic needs {len(variables)} values, got {len(parts)}",
                    line_no,
                    rest_col,
                )
            ics.append(tuple(_parse_number(p, line_no, rest_col) for p in parts))
            continue

        if head in ("horizon", "rtol", "atol"):
            try:
                value = float(rest)
            except ValueError:
                raise SysParseError(f"bad {head} value {rest!r}", line_no, rest_col)
            if head == "horizon":
                horizon = value
            elif head == "rtol":
                rtol = value
            else:
                atol = value
            continue

        raise SysParseError(f"unknown directive {head!r}", line_no, indent + 1)

    if variables is None:
        raise SysParseError("missing vars declaration", 1, 1)
    missing = [v for v in variables if v not in derivatives]
    if missing:
        raise SysParseError(f"missing d{missing[0]}/dt equation", 1, 1)
    field = VectorField([derivatives[v] for v in variables])
    return SystemSpec(
        variables=variables,
        field=field,
        manifolds=tuple(manifolds),
        ics=tuple(ics),
        ext_d=ext_d,
        horizon=horizon,
        rtol=rtol,
        atol=atol,
    )


# -- printer -----------------------------------------------------------------


def format_scalar(c) -> str:
    """Standalone rendering of a scalar coefficient."""
    if isinstance(c, QuadExt):
        a, b = c.a, c.b
        parts = []
        if a:
            parts.append(format_scalar(a))
        if b:
            root = f"sqrt({c.d})"
            if b == 1:
                broot = root
            elif b == -1:
                broot = f"-{root}"
            else:
                broot = f"{format_scalar(b)}*{root}"
            if parts and sign_key(b) > 0:
                parts.append(f"+ {broot}")
            elif parts:
                parts.append(f"- {broot.lstrip('-')}")
            else:
                parts.append(broot)
        return " ".join(parts)
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, complex):
        if c.imag == 0:
            return repr(c.real)
        return repr(c)
    return repr(c)


def _coeff_is_composite(c) -> bool:
    if isinstance(c, QuadExt):
        return c.a != 0 and c.b != 0
    if isinstance(c, complex):
        return c.imag != 0
    return False


def _term_str(exp, coeff, variables) -> str:
    mono = []
    for v, k in zip(variables, exp):
        if k == 1:
            mono.append(v)
        elif k > 1:
            mono.append(f"{v}^{k}")
    mono_s = "*".join(mono)
    if not mono_s:
        cs = format_scalar(coeff)
        return f"({cs})" if _coeff_is_composite(coeff) else cs
    if coeff == 1:
        return mono_s
    if coeff == -1:
        return f"-{mono_s}"
    cs = format_scalar(coeff)
    if _coeff_is_composite(coeff):
        cs = f"({cs})"
    return f"{cs}*{mono_s}"


def format_polynomial(p: Polynomial) -> str:
    if not p:
        return "0"
    from .algebra import is_exact as _is_exact

    out = []
    for exp, coeff in p.ordered_terms():
        neg = _is_exact(coeff) and sign_key(coeff) < 0
        s = _term_str(exp, -coeff if neg else coeff, p.vars)
        if not out:
            out.append(f"-{s}" if neg else s)
        elif neg or s.startswith("-"):
            out.append(f"- {s.lstrip('-')}")
        else:
            out.append(f"+ {s}")
    return " ".join(out)


def _maybe_paren(p: Polynomial) -> str:
    s = format_polynomial(p)
    if len(p.terms) > 1 or s.startswith("-") or "*" in s and not p.is_constant():
        return f"({s})"
    return s


def format_rational(r: RationalFunction) -> str:
    if r.den.is_constant() and r.den.constant_value() == 1:
        return format_polynomial(r.num)
    return f"{_maybe_paren(r.num)} / {_maybe_paren(r.den)}"


def print_expr(obj) -> str:
    """Canonical text for any algebra/eigenfunction/solution object.

    Polynomial output round-trips through parse_system expressions.
    """
    if isinstance(obj, Polynomial):
        return format_polynomial(obj)
    if isinstance(obj, RationalFunction):
        return format_rational(obj)
    fmt = getattr(obj, "format_expr", None)
    if fmt is not None:
        return fmt()
    raise TypeError(f"cannot print {type(obj).__name__}")
