"""Scalar expressions over named coordinates.

Expressions are plain :mod:`sympy` objects.  This module owns the textual
grammar (``parse``/``render``), the exact evaluator and the normal form used
to decide equality of the coordinate identities checked elsewhere.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Only ``sin cos exp log sqrt`` may be called.  Decimal literals are rejected
unless ``allow_decimals=True`` (numeric scenario blocks).
"""
from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np
import sympy as sp

Expr = sp.Expr
Number = Union[int, Fraction, float, complex]

FUNCTIONS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "log": sp.log,
    "sqrt": sp.sqrt,
}

__all__ = [
    "Expr", "ParseError", "UnboundSymbolError", "DomainError", "UnknownCoordinateError",
    "parse", "render", "diff", "evaluate", "subst", "normalize", "is_zero", "equal",
    "symbol", "symbols", "free_names", "check_bound", "numeric_residual",
]


class ParseError(ValueError):
    """Syntax error with a 0-based ``position`` and 1-based ``line``/``column``."""

    def __init__(self, message: str, text: str, position: int):
        self.position = position
        self.line = text.count("\n", 0, position) + 1
        self.column = position - (text.rfind("\n", 0, position) + 1) + 1
        self.reason = message
        super().__init__(f"{message} at line {self.line}, column {self.column}")


class UnboundSymbolError(KeyError):
    pass


class DomainError(ArithmeticError):
    pass


class UnknownCoordinateError(ValueError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_decimals: bool, imaginary: str | None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.allow_decimals = allow_decimals
        self.imaginary = imaginary

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, self.text, tok[2])

    def expect(self, value):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != value:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            self.fail(f"expected {value!r}, found {what}")
        return self.take()

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return e

    def expr(self):
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            right = self.term()
            left = sp.Add(left, right) if op == "+" else sp.Add(left, -right)
        return left

    def term(self):
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            right = self.unary()
            left = sp.Mul(left, right) if op == "*" else sp.Mul(left, sp.Pow(right, -1))
        return left

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return -self.unary()
        if tok[0] == "op" and tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return sp.Pow(base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        kind, value, _ = tok
        if kind == "num":
            if re.fullmatch(r"\d+", value):
                return sp.Integer(int(value))
            if not self.allow_decimals:
                self.fail("decimal literal not allowed in a symbolic field", tok)
            return sp.Rational(Fraction(value))
        if kind == "ident":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if value not in FUNCTIONS:
                    self.fail(f"unknown function {value!r}", tok)
                self.take()
                arg = self.expr()
                self.expect(")")
                return FUNCTIONS[value](arg)
            if value in FUNCTIONS:
                self.fail(f"function {value!r} needs an argument", tok)
            if self.imaginary is not None and value == self.imaginary:
                return sp.I
            return sp.Symbol(value)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            self.fail("unexpected end of input", tok)
        self.fail(f"unexpected token {value!r}", tok)


def parse(text: str, *, allow_decimals: bool = False, imaginary: str | None = None) -> Expr:
    """Parse ``text`` into an expression.

    ``imaginary`` names an identifier to read as the imaginary unit (the
    spinor-jet blocks use ``i``).
    """
    if not isinstance(text, str):
        raise TypeError("parse expects a string")
    return _Parser(text, allow_decimals, imaginary).parse()


def symbol(name: str) -> sp.Symbol:
    return sp.Symbol(name)


def symbols(names: Iterable[str]) -> list[sp.Symbol]:
    return [sp.Symbol(n) for n in names]


def free_names(e) -> set[str]:
    return {s.name for s in sp.sympify(e).free_symbols}


def check_bound(e, coords: Iterable[str]) -> None:
    """Raise if ``e`` mentions a symbol outside ``coords``."""
    extra = free_names(e) - set(coords)
    if extra:
        raise UnknownCoordinateError(f"undeclared coordinate(s): {', '.join(sorted(extra))}")


# --------------------------------------------------------------------------- render

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _render_number(q: sp.Rational) -> tuple[str, int]:
    if q.q == 1:
        s = str(q.p)
        return (s, _PREC_NEG) if q.p < 0 else (s, _PREC_ATOM)
    s = f"{q.p}/{q.q}"
    return s, (_PREC_NEG if q.p < 0 else _PREC_MUL)


def _wrap(text_prec: tuple[str, int], need: int) -> str:
    text, prec = text_prec
    return f"({text})" if prec < need else text


def _render(e, imaginary: str) -> tuple[str, int]:
    if e.is_Rational:
        return _render_number(e)
    if e is sp.I:
        return imaginary, _PREC_ATOM
    if e is sp.E:
        return "exp(1)", _PREC_ATOM
    if e.is_Float:
        s = repr(float(e))
        return s, (_PREC_NEG if s.startswith("-") else _PREC_ATOM)
    if e.is_Symbol:
        return e.name, _PREC_ATOM
    if e.is_Add:
        terms = list(e.as_ordered_terms())
        out = _render(terms[0], imaginary)[0]
        for t in terms[1:]:
            coeff, rest = t.as_coeff_Mul()
            if coeff.is_Rational and coeff < 0:
                out += " - " + _wrap(_render(-t, imaginary), _PREC_MUL)
            else:
                out += " + " + _wrap(_render(t, imaginary), _PREC_MUL)
        return out, _PREC_ADD
    if e.is_Mul:
        coeff, rest = e.as_coeff_Mul()
        if coeff.is_Rational and coeff < 0:
            inner = _render(-e, imaginary)
            return "-" + _wrap(inner, _PREC_POW), _PREC_NEG
        num, den = [], []
        for f in e.as_ordered_factors():
            if f.is_Pow and f.exp.is_Rational and f.exp.is_negative:
                den.append(sp.Pow(f.base, -f.exp))
            elif f.is_Rational and f.q != 1:
                if f.p != 1:
                    num.append(sp.Integer(f.p))
                den.append(sp.Integer(f.q))
            else:
                num.append(f)
        out = "*".join(_wrap(_render(f, imaginary), _PREC_POW) for f in num) or "1"
        for f in den:
            out += "/" + _wrap(_render(f, imaginary), _PREC_ATOM)
        return out, _PREC_MUL
    if e.is_Pow:
        if e.exp == sp.Rational(1, 2):
            return f"sqrt({_render(e.base, imaginary)[0]})", _PREC_ATOM
        if e.exp.is_Rational and e.exp.is_negative:
            return f"1/{_wrap(_render(sp.Pow(e.base, -e.exp), imaginary), _PREC_ATOM)}", _PREC_MUL
        base = _wrap(_render(e.base, imaginary), _PREC_ATOM)
        exp = _wrap(_render(e.exp, imaginary), _PREC_POW)
        return f"{base}^{exp}", _PREC_POW
    name = type(e).__name__
    if name in FUNCTIONS and len(e.args) == 1:
        return f"{name}({_render(e.args[0], imaginary)[0]})", _PREC_ATOM
    raise ValueError(f"cannot render {e!r} in the expression grammar")


def render(e, *, imaginary: str = "i") -> str:
    """Render ``e`` in the input grammar; ``parse(render(e))`` reproduces ``e``."""
    return _render(sp.sympify(e), imaginary)[0]


# --------------------------------------------------------------------------- calculus

def diff(e, v: str, coords: Iterable[str] | None = None) -> Expr:
    """Partial derivative of ``e`` with respect to coordinate ``v``.

    When ``coords`` is given, ``v`` must be one of them.
    """
    if coords is not None and v not in set(coords):
        raise UnknownCoordinateError(f"unknown coordinate {v!r}")
    return sp.expand(sp.diff(sp.sympify(e), sp.Symbol(v)))


def subst(e, mapping: Mapping[str, object]) -> Expr:
    """Simultaneous substitution of coordinates by expressions."""
    e = sp.sympify(e)
    if not mapping:
        return e
    table = {sp.Symbol(k): sp.sympify(v) for k, v in mapping.items()}
    return e.xreplace(table)


def _function_atoms(e):
    return [a for a in sp.preorder_traversal(e)
            if isinstance(a, sp.Function) or (a.is_Pow and not a.exp.is_Integer)]


def normalize(e) -> Expr:
    """Expanded rational normal form with function applications as atoms."""
    e = sp.sympify(e)
    atoms = _function_atoms(e)
    if atoms:
        table = {}
        for a in atoms:
            if a.is_Pow:
                table[a] = sp.Pow(normalize(a.base), a.exp)
            else:
                table[a] = a.func(*[normalize(arg) for arg in a.args])
        e = e.xreplace(table)
    e = sp.expand(e)
    if any(p.is_Pow and p.exp.is_negative for p in sp.preorder_traversal(e)):
        e = sp.cancel(sp.together(e))
        num, den = sp.fraction(e)
        e = sp.expand(num) / sp.expand(den)
    return e


def is_zero(e) -> bool:
    """Exact zero test in the normal form."""
    e = sp.expand(sp.sympify(e))
    if e == 0:
        return True
    return normalize(e) == 0


def equal(a, b) -> bool:
    return is_zero(sp.sympify(a) - sp.sympify(b))


# --------------------------------------------------------------------------- evaluation

def _to_number(v) -> Number:
    if isinstance(v, (int, Fraction, float, complex)):
        return v
    if isinstance(v, sp.Basic):
        if v.is_Rational:
            return Fraction(int(v.p), int(v.q))
        return complex(v) if v.has(sp.I) else float(v)
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"not a number: {v!r}")


def _pow(base, exp):
    if isinstance(exp, Fraction) and exp.denominator == 1:
        n = exp.numerator
        if base == 0 and n < 0:
            raise DomainError("division by zero")
        return base ** n
    if isinstance(base, complex) or isinstance(exp, complex):
        if base == 0:
            return 0j
        return complex(base) ** complex(exp)
    b = float(base)
    if b < 0:
        raise DomainError(f"non-integer power of negative value {b}")
    return b ** float(exp)


_EXACT_AT_ZERO = {"exp": Fraction(1), "sin": Fraction(0), "cos": Fraction(1), "sqrt": Fraction(0)}


def _ev(e, b):
    if e.is_Rational:
        return Fraction(int(e.p), int(e.q))
    if e.is_Float:
        return float(e)
    if e is sp.I:
        return 1j
    if e.is_Symbol:
        try:
            return _to_number(b[e.name])
        except KeyError:
            raise UnboundSymbolError(e.name) from None
    if e.is_Add:
        total = 0
        for a in e.args:
            total = total + _ev(a, b)
        return total
    if e.is_Mul:
        prod = 1
        for a in e.args:
            prod = prod * _ev(a, b)
        return prod
    if e.is_Pow:
        return _pow(_ev(e.base, b), _ev(e.exp, b))
    if e in (sp.zoo, sp.nan, sp.oo, -sp.oo):
        raise DomainError(f"undefined value {e}")
    if e is sp.E:
        return math.e
    if e is sp.pi:
        return math.pi
    name = type(e).__name__
    if name in FUNCTIONS:
        arg = _ev(e.args[0], b)
        if isinstance(arg, complex):
            if name == "log" and arg == 0:
                raise DomainError("log of zero")
            return getattr(cmath, name)(arg)
        x = float(arg)
        if name == "log" and x <= 0:
            raise DomainError(f"log of non-positive value {x}")
        if arg == 0 and name in _EXACT_AT_ZERO:
            return _EXACT_AT_ZERO[name]
        return getattr(math, name)(x)
    raise TypeError(f"cannot evaluate {e!r}")


def evaluate(e, bindings: Mapping[str, Number] | None = None) -> Number:
    """Evaluate ``e`` at ``bindings``.

    Exact (``Fraction``) whenever every operation stays rational, otherwise a
    float (complex if the imaginary unit or complex bindings enter).
    """
    b = dict(bindings or {})
    e = sp.sympify(e)
    missing = free_names(e) - set(b)
    if missing:
        raise UnboundSymbolError(", ".join(sorted(missing)))
    try:
        return _ev(e, b)
    except ZeroDivisionError as exc:
        raise DomainError("division by zero") from exc
    except OverflowError as exc:
        raise DomainError(str(exc)) from exc


def numeric_residual(exprs, coords: Iterable[str] | None = None, *, samples: int = 64,
                     seed: int = 42, low: float = -1.0, high: float = 1.0) -> float:
    """Largest |value| of ``exprs`` over uniform random points.

    Points where an expression hits a domain error are skipped.
    """
    exprs = [sp.sympify(e) for e in exprs]
    if coords is None:
        coords = set().union(*map(free_names, exprs)) if exprs else set()
    names = sorted(set(coords))
    rng = np.random.default_rng(seed)
    pts = rng.uniform(low, high, size=(samples, len(names)))
    worst = 0.0
    for row in pts:
        b = dict(zip(names, row.tolist()))
        for e in exprs:
            try:
                val = abs(complex(_ev(e, b)))
            except (DomainError, ZeroDivisionError, OverflowError, ValueError):
                continue
            worst = max(worst, val)
    return worst
