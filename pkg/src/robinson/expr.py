"""Symbolic scalar expressions over a coordinate chart.

Expressions are immutable, hash-consed trees.  Two structurally identical
expressions are the same Python object, which makes memoised differentiation
and evaluation cheap.  Simplification is deliberately shallow: constant
folding, the usual 0/1 identities, merging of like terms and powers, and
pushing complex conjugation down to the leaves.  Numeric evaluation is the
ground truth for every zero test in the package.

All coordinates and parameters are real, so conjugation only acts on complex
literals.  ``conj`` therefore never survives as a node.
"""
from __future__ import annotations

import math
import weakref
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "Expr", "Const", "Sym", "Func", "Add", "Mul", "Pow",
    "ExprError", "ParseError", "EvalError", "DomainError",
    "Chart", "Interval", "PointSample", "SampleSet", "ZeroVerdict",
    "const", "sym", "parse_expr", "diff", "conj", "to_string",
    "evaluate", "eval_expr", "sample_points", "is_zero_field",
    "sin", "cos", "tan", "sec", "exp", "ln", "sqrt", "I", "ZERO", "ONE",
    "as_expr", "free_symbols",
]

Number = Union[int, float, complex, Fraction]


class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError):
    def __init__(self, message: str, source: str = "", position: int = -1):
        self.source = source
        self.position = position
        where = f" at column {position + 1}" if position >= 0 else ""
        super().__init__(f"{message}{where}")


class EvalError(ExprError):
    """Raised on division by a (numerically) vanishing denominator."""


class DomainError(EvalError):
    """Raised in strict mode when ln/sqrt hit their branch cut."""


# ---------------------------------------------------------------------------
# node machinery
# ---------------------------------------------------------------------------

_TABLE: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()


def _crc(s: str) -> int:
    return zlib.crc32(s.encode("utf8"))


def _to_fraction(x: Union[int, float, Fraction]) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if not math.isfinite(x):
        raise ExprError("non-finite literal")
    return Fraction(x)


class Expr:
    """Base class of all expression nodes.

    Nodes are created only through the module-level smart constructors, which
    intern them; equality is identity and the hash is a deterministic
    structural digest (stable across interpreter runs).
    """

    __slots__ = ("_h", "__weakref__")

    _h: int

    # -- identity -----------------------------------------------------------
    def __hash__(self) -> int:
        return self._h

    def __eq__(self, other) -> bool:  # identity thanks to interning
        return self is other

    def __ne__(self, other) -> bool:
        return self is not other

    def sort_key(self) -> int:
        return self._h

    # -- arithmetic sugar ---------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        return power(self, exponent)

    def __repr__(self) -> str:
        return f"Expr({to_string(self)!r})"

    def __str__(self) -> str:
        return to_string(self)

    # -- convenience ----------------------------------------------------------
    def diff(self, name: str) -> "Expr":
        return diff(self, name)

    def conj(self) -> "Expr":
        return conj(self)

    @property
    def is_zero(self) -> bool:
        return self is ZERO


def _intern(cls, key: tuple, init) -> Expr:
    node = _TABLE.get(key)
    if node is None:
        node = object.__new__(cls)
        init(node)
        node._h = hash(tuple(k._h if isinstance(k, Expr) else k for k in key if not isinstance(k, str)))
        _TABLE[key] = node
    return node


class Const(Expr):
    __slots__ = ("re", "im")
    re: Fraction
    im: Fraction

    @property
    def value(self) -> complex:
        return complex(float(self.re), float(self.im))

    @property
    def is_real(self) -> bool:
        return self.im == 0


class Sym(Expr):
    __slots__ = ("name",)
    name: str


class Func(Expr):
    __slots__ = ("name", "arg")
    name: str
    arg: Expr


class Add(Expr):
    __slots__ = ("terms",)
    terms: Tuple[Expr, ...]


class Mul(Expr):
    __slots__ = ("factors",)
    factors: Tuple[Expr, ...]


class Pow(Expr):
    __slots__ = ("base", "exponent")
    base: Expr
    exponent: Fraction


def const(re: Number = 0, im: Number = 0) -> Const:
    if isinstance(re, complex):
        re, im = re.real, re.imag + (im if not isinstance(im, complex) else 0)
    fre, fim = _to_fraction(re), _to_fraction(im)

    def init(node):
        node.re, node.im = fre, fim

    return _intern(Const, (1, fre, fim), init)  # type: ignore[return-value]


def sym(name: str) -> Sym:
    if not name or not (name[0].isalpha() or name[0] == "_"):
        raise ExprError(f"invalid symbol name {name!r}")

    def init(node):
        node.name = name

    return _intern(Sym, (2, _crc(name), name), init)  # type: ignore[return-value]


ZERO = const(0)
ONE = const(1)
I = const(0, 1)
_FUNCS = ("sin", "cos", "tan", "sec", "exp", "ln", "sqrt", "conj")


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex, Fraction)):
        return const(x)
    if isinstance(x, (np.integer, np.floating)):
        return const(float(x))
    if isinstance(x, np.complexfloating):
        return const(complex(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def _split_coeff(e: Expr) -> Tuple[Fraction, Fraction, Expr]:
    """Return (re, im, rest) with e == (re + i im) * rest."""
    if isinstance(e, Const):
        return e.re, e.im, ONE
    if isinstance(e, Mul) and isinstance(e.factors[0], Const):
        c = e.factors[0]
        rest = e.factors[1:]
        return c.re, c.im, rest[0] if len(rest) == 1 else _raw_mul(rest)
    return Fraction(1), Fraction(0), e


def _raw_add(terms: Tuple[Expr, ...]) -> Expr:
    def init(node):
        node.terms = terms

    return _intern(Add, (4,) + terms, init)


def _raw_mul(factors: Tuple[Expr, ...]) -> Expr:
    def init(node):
        node.factors = factors

    return _intern(Mul, (5,) + factors, init)


def add(*args: Expr) -> Expr:
    coeffs: Dict[Expr, List[Fraction]] = {}
    order: List[Expr] = []
    cre, cim = Fraction(0), Fraction(0)
    stack = list(args)
    flat: List[Expr] = []
    while stack:
        a = stack.pop(0)
        if isinstance(a, Add):
            stack[:0] = list(a.terms)
        else:
            flat.append(a)
    for a in flat:
        if isinstance(a, Const):
            cre += a.re
            cim += a.im
            continue
        re, im, rest = _split_coeff(a)
        if rest not in coeffs:
            coeffs[rest] = [Fraction(0), Fraction(0)]
            order.append(rest)
        coeffs[rest][0] += re
        coeffs[rest][1] += im
    terms: List[Expr] = []
    for rest in order:
        re, im = coeffs[rest]
        if re == 0 and im == 0:
            continue
        terms.append(mul(const(re, im), rest) if (re, im) != (1, 0) else rest)
    terms.sort(key=lambda t: t._h)
    if cre != 0 or cim != 0:
        terms.insert(0, const(cre, cim))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return _raw_add(tuple(terms))


def mul(*args: Expr) -> Expr:
    cre, cim = Fraction(1), Fraction(0)
    powers: Dict[Expr, Fraction] = {}
    order: List[Expr] = []
    stack = list(args)
    while stack:
        a = stack.pop(0)
        if isinstance(a, Mul):
            stack[:0] = list(a.factors)
            continue
        if isinstance(a, Const):
            cre, cim = cre * a.re - cim * a.im, cre * a.im + cim * a.re
            continue
        if isinstance(a, Pow):
            base, ex = a.base, a.exponent
        else:
            base, ex = a, Fraction(1)
        if base not in powers:
            powers[base] = Fraction(0)
            order.append(base)
        powers[base] += ex
    if cre == 0 and cim == 0:
        return ZERO
    factors = []
    for base in order:
        ex = powers[base]
        if ex == 0:
            continue
        factors.append(power(base, ex))
    # powers may have produced constants (e.g. merged integer powers)
    if any(isinstance(f, (Const, Mul)) for f in factors):
        return mul(const(cre, cim), *factors)
    factors.sort(key=lambda t: t._h)
    if (cre, cim) != (1, 0):
        factors.insert(0, const(cre, cim))
    if not factors:
        return const(cre, cim)
    if len(factors) == 1:
        return factors[0]
    return _raw_mul(tuple(factors))


def neg(e: Expr) -> Expr:
    return mul(const(-1), e)


def power(base, exponent) -> Expr:
    base = as_expr(base)
    if isinstance(exponent, Const):
        if exponent.im != 0:
            raise ExprError("complex exponents are not supported")
        exponent = exponent.re
    if isinstance(exponent, float):
        exponent = Fraction(exponent).limit_denominator(10**6)
    if isinstance(exponent, Expr):
        raise ExprError("exponent must be a rational literal")
    ex = Fraction(exponent)
    if ex == 0:
        return ONE
    if ex == 1:
        return base
    if isinstance(base, Const):
        if ex.denominator == 1:
            if base.re == 0 and base.im == 0:
                if ex < 0:
                    raise EvalError("division by zero constant")
                return ZERO
            # exact complex integer power
            re, im = Fraction(1), Fraction(0)
            bre, bim = base.re, base.im
            k = abs(ex.numerator)
            for _ in range(k):
                re, im = re * bre - im * bim, re * bim + im * bre
            if ex < 0:
                d = re * re + im * im
                re, im = re / d, -im / d
            return const(re, im)
        if base.im == 0 and base.re > 0:
            # keep exact when the root is rational
            num = _exact_root(base.re, ex)
            if num is not None:
                return const(num)
    if isinstance(base, Pow) and ex.denominator == 1:
        return power(base.base, base.exponent * ex)
    if isinstance(base, Mul) and ex.denominator == 1:
        return mul(*[power(f, ex) for f in base.factors])

    def init(node):
        node.base, node.exponent = base, ex

    return _intern(Pow, (6, base, ex), init)


def _exact_root(x: Fraction, ex: Fraction) -> Optional[Fraction]:
    q = ex.denominator
    p = ex.numerator
    rn = round(x.numerator ** (1.0 / q))
    rd = round(x.denominator ** (1.0 / q))
    if rn ** q == x.numerator and rd ** q == x.denominator:
        return Fraction(rn, rd) ** p
    return None


def func(name: str, arg) -> Expr:
    arg = as_expr(arg)
    if name == "conj":
        return conj(arg)
    if name not in _FUNCS:
        raise ExprError(f"unknown function {name!r}")
    if isinstance(arg, Const) and arg.re == 0 and arg.im == 0:
        folded = {"sin": ZERO, "tan": ZERO, "cos": ONE, "sec": ONE, "exp": ONE, "sqrt": ZERO}
        if name in folded:
            return folded[name]
    if name == "sqrt":
        return power(arg, Fraction(1, 2))
    if name == "ln" and isinstance(arg, Func) and arg.name == "exp" and _is_real(arg.arg):
        return arg.arg
    if name == "exp" and isinstance(arg, Func) and arg.name == "ln":
        return arg.arg

    def init(node):
        node.name, node.arg = name, arg

    return _intern(Func, (3, _crc(name), arg), init)


def _is_real(e: Expr) -> bool:
    return conj(e) is e


def sin(x) -> Expr:
    return func("sin", x)


def cos(x) -> Expr:
    return func("cos", x)


def tan(x) -> Expr:
    return func("tan", x)


def sec(x) -> Expr:
    return func("sec", x)


def exp(x) -> Expr:
    return func("exp", x)


def ln(x) -> Expr:
    return func("ln", x)


def sqrt(x) -> Expr:
    return func("sqrt", x)


# ---------------------------------------------------------------------------
# structural operations
# ---------------------------------------------------------------------------

_CONJ_CACHE: "weakref.WeakKeyDictionary[Expr, Expr]" = weakref.WeakKeyDictionary()


def conj(e) -> Expr:
    """Complex conjugate, assuming every symbol is real."""
    e = as_expr(e)
    hit = _CONJ_CACHE.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = const(e.re, -e.im)
    elif isinstance(e, Sym):
        out = e
    elif isinstance(e, Func):
        out = func(e.name, conj(e.arg))
    elif isinstance(e, Add):
        out = add(*[conj(t) for t in e.terms])
    elif isinstance(e, Mul):
        out = mul(*[conj(f) for f in e.factors])
    elif isinstance(e, Pow):
        out = power(conj(e.base), e.exponent)
    else:  # pragma: no cover
        raise TypeError(type(e))
    _CONJ_CACHE[e] = out
    return out


_DIFF_CACHE: Dict[Tuple[Expr, str], Expr] = {}


def diff(e, name: str) -> Expr:
    """Symbolic partial derivative with respect to the symbol ``name``."""
    e = as_expr(e)
    key = (e, name)
    hit = _DIFF_CACHE.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = ZERO
    elif isinstance(e, Sym):
        out = ONE if e.name == name else ZERO
    elif isinstance(e, Add):
        out = add(*[diff(t, name) for t in e.terms])
    elif isinstance(e, Mul):
        parts = []
        fs = e.factors
        for k, f in enumerate(fs):
            df = diff(f, name)
            if df is ZERO:
                continue
            parts.append(mul(*(fs[:k] + (df,) + fs[k + 1:])))
        out = add(*parts) if parts else ZERO
    elif isinstance(e, Pow):
        db = diff(e.base, name)
        out = ZERO if db is ZERO else mul(const(e.exponent), power(e.base, e.exponent - 1), db)
    elif isinstance(e, Func):
        da = diff(e.arg, name)
        if da is ZERO:
            out = ZERO
        else:
            u = e.arg
            outer = {
                "sin": lambda: cos(u),
                "cos": lambda: neg(sin(u)),
                "tan": lambda: power(sec(u), 2),
                "sec": lambda: mul(sec(u), tan(u)),
                "exp": lambda: e,
                "ln": lambda: power(u, -1),
            }[e.name]()
            out = mul(outer, da)
    else:  # pragma: no cover
        raise TypeError(type(e))
    if len(_DIFF_CACHE) > 2_000_000:
        _DIFF_CACHE.clear()
    _DIFF_CACHE[key] = out
    return out


def free_symbols(e: Expr) -> set:
    out: set = set()
    seen: set = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        if isinstance(x, Sym):
            out.add(x.name)
        elif isinstance(x, Func):
            stack.append(x.arg)
        elif isinstance(x, Add):
            stack.extend(x.terms)
        elif isinstance(x, Mul):
            stack.extend(x.factors)
        elif isinstance(x, Pow):
            stack.append(x.base)
    return out


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _frac_str(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def _const_str(c: Const) -> str:
    if c.im == 0:
        s = _frac_str(c.re)
        return s if c.re.denominator == 1 and c.re >= 0 else f"({s})"
    if c.re == 0:
        if c.im == 1:
            return "i"
        return f"({_frac_str(c.im)}*i)"
    return f"({_frac_str(c.re)}+{_frac_str(c.im)}*i)"


def _prec(e: Expr) -> int:
    if isinstance(e, Add):
        return 1
    if isinstance(e, Mul):
        return 2
    if isinstance(e, Pow):
        return 3
    return 4


def to_string(e: Expr) -> str:
    """Print an expression in the parser's grammar (round-trips exactly)."""
    if isinstance(e, Const):
        return _const_str(e)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, Add):
        out = to_string(e.terms[0])
        for t in e.terms[1:]:
            out += " + " + to_string(t)
        return out
    if isinstance(e, Mul):
        return "*".join(_wrap(f, 2) for f in e.factors)
    if isinstance(e, Pow):
        ex = e.exponent
        exs = str(ex.numerator) if ex.denominator == 1 and ex > 0 else f"({_frac_str(ex)})"
        return f"{_wrap(e.base, 4)}^{exs}"
    raise TypeError(type(e))  # pragma: no cover


def _wrap(e: Expr, level: int) -> str:
    s = to_string(e)
    if _prec(e) < level:
        return f"({s})"
    return s


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, names: Optional[Iterable[str]], defs: Optional[Mapping[str, Expr]] = None):
        self.src = source
        self.pos = 0
        self.names = None if names is None else set(names)
        self.defs = dict(defs or {})

    def error(self, msg: str, pos: Optional[int] = None):
        raise ParseError(msg, self.src, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def eat(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse(self) -> Expr:
        if not self.src.strip():
            self.error("empty expression", 0)
        e = self.expr()
        if self.peek():
            self.error(f"unexpected character {self.peek()!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                e = add(e, self.term())
            elif c == "-":
                self.pos += 1
                e = add(e, neg(self.term()))
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                e = mul(e, self.unary())
            elif c == "/":
                self.pos += 1
                e = mul(e, power(self.unary(), -1))
            else:
                return e

    def unary(self) -> Expr:
        c = self.peek()
        if c == "-":
            self.pos += 1
            return neg(self.unary())
        if c == "+":
            self.pos += 1
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            ex = self.exponent()
            return power(base, ex)
        return base

    def exponent(self) -> Fraction:
        # right-associative: a^b^c = a^(b^c) with literal b, c
        start = self.pos
        val = self.exp_atom()
        if self.peek() == "^":
            self.pos += 1
            rest = self.exponent()
            if rest.denominator != 1:
                self.error("nested exponent must be an integer", start)
            val = val ** int(rest)
        return val

    def exp_atom(self) -> Fraction:
        c = self.peek()
        sign = 1
        while c in "+-" and c:
            if c == "-":
                sign = -sign
            self.pos += 1
            c = self.peek()
        if c == "(":
            self.pos += 1
            start = self.pos
            try:
                inner = self.expr()
            except ParseError:
                raise
            if not self.eat(")"):
                self.error("expected ')'")
            if not isinstance(inner, Const) or inner.im != 0:
                self.error("exponent must be a rational literal", start)
            return sign * inner.re
        if c.isdigit() or c == ".":
            return sign * self.number_value()
        self.error("exponent must be a rational literal")
        raise AssertionError

    def number_value(self) -> Fraction:
        self.skip()
        start = self.pos
        s = self.src
        while self.pos < len(s) and (s[self.pos].isdigit() or s[self.pos] == "."):
            self.pos += 1
        if self.pos < len(s) and s[self.pos] in "eE":
            j = self.pos + 1
            if j < len(s) and s[j] in "+-":
                j += 1
            if j < len(s) and s[j].isdigit():
                self.pos = j
                while self.pos < len(s) and s[self.pos].isdigit():
                    self.pos += 1
        text = s[start:self.pos]
        try:
            return Fraction(text)
        except ValueError:
            self.error(f"malformed number {text!r}", start)
            raise AssertionError

    def atom(self) -> Expr:
        c = self.peek()
        if c == "(":
            self.pos += 1
            e = self.expr()
            if not self.eat(")"):
                self.error("expected ')'")
            return e
        if c.isdigit() or c == ".":
            return const(self.number_value())
        if c.isalpha() or c == "_":
            start = self.pos
            s = self.src
            while self.pos < len(s) and (s[self.pos].isalnum() or s[self.pos] == "_"):
                self.pos += 1
            name = s[start:self.pos]
            if self.peek() == "(":
                if name not in _FUNCS:
                    self.error(f"unknown function {name!r}", start)
                self.pos += 1
                arg = self.expr()
                if not self.eat(")"):
                    self.error("expected ')'")
                return func(name, arg)
            if name == "i":
                return I
            if name == "pi":
                return const(math.pi)
            if name in _FUNCS:
                self.error(f"function {name!r} needs an argument", start)
            if name in self.defs:
                return self.defs[name]
            if self.names is not None and name not in self.names:
                self.error(f"undeclared identifier {name!r}", start)
            return sym(name)
        if not c:
            self.error("unexpected end of input")
        self.error(f"unexpected character {c!r}")
        raise AssertionError


def parse_expr(source: str, chart: Optional["Chart"] = None,
               defs: Optional[Mapping[str, Expr]] = None) -> Expr:
    """Parse infix source text; identifiers must be declared in ``chart``.

    ``defs`` maps auxiliary names (for example a metric function ``X``) to
    already-built expressions that are substituted verbatim.
    """
    if not isinstance(source, str):
        if isinstance(source, (int, float)):
            return as_expr(source)
        raise ParseError(f"expected an expression string, got {type(source).__name__}")
    names = None if chart is None else chart.symbol_names
    return _Parser(source, names, defs).parse()


# ---------------------------------------------------------------------------
# charts and samples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    name: str
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ExprError(f"empty sampling interval for {self.name!r}")


@dataclass(frozen=True)
class Chart:
    """Coordinate chart of dimension n = 2m + 2 with sampled parameters.

    ``guards`` must be nonzero at every sample; ``positive`` expressions must
    be strictly positive (used to keep square roots of metric functions real).
    """

    coordinates: Tuple[Interval, ...]
    parameters: Tuple[Interval, ...] = ()
    guards: Tuple[Expr, ...] = ()
    positive: Tuple[Expr, ...] = ()
    guard_tol: float = 1e-6

    def __post_init__(self):
        n = len(self.coordinates)
        if n < 4 or n % 2:
            raise ExprError(f"chart dimension must be even and at least 4, got {n}")
        names = [c.name for c in self.coordinates] + [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise ExprError("coordinate and parameter names must be unique and disjoint")
        for nm in names:
            if nm in ("i", "pi") or nm in _FUNCS:
                raise ExprError(f"reserved name {nm!r}")
        declared = set(names)
        for g in self.guards + self.positive:
            extra = free_symbols(g) - declared
            if extra:
                raise ExprError(f"guard uses undeclared symbols {sorted(extra)}")

    @classmethod
    def build(cls, coordinates, parameters=(), guards=(), positive=(), guard_tol=1e-6) -> "Chart":
        """Build a chart from loose specs: names, (name, lo, hi) tuples, or Intervals."""

        def iv(x):
            if isinstance(x, Interval):
                return x
            if isinstance(x, str):
                return Interval(x)
            return Interval(str(x[0]), float(x[1]), float(x[2]))

        coords = tuple(iv(c) for c in coordinates)
        params = tuple(iv(p) for p in parameters)
        probe = cls.__new__(cls)
        object.__setattr__(probe, "coordinates", coords)
        object.__setattr__(probe, "parameters", params)
        conv = lambda g: g if isinstance(g, Expr) else parse_expr(g, probe)  # noqa: E731
        return cls(coords, params, tuple(conv(g) for g in guards), tuple(conv(g) for g in positive), guard_tol)

    @property
    def n(self) -> int:
        return len(self.coordinates)

    @property
    def m(self) -> int:
        return (self.n - 2) // 2

    @property
    def coordinate_names(self) -> Tuple[str, ...]:
        return tuple(c.name for c in self.coordinates)

    @property
    def parameter_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    @property
    def symbol_names(self) -> Tuple[str, ...]:
        return self.coordinate_names + self.parameter_names

    def parse(self, source: str) -> Expr:
        return parse_expr(source, self)

    def coord(self, name: str) -> Sym:
        if name not in self.symbol_names:
            raise ExprError(f"undeclared identifier {name!r}")
        return sym(name)


@dataclass(frozen=True)
class PointSample:
    values: Mapping[str, float]
    seed: Optional[int] = None
    index: int = 0


@dataclass
class SampleSet:
    """A batch of admissible sample points, one array entry per sample."""

    chart: Chart
    values: Dict[str, np.ndarray]
    seed: Optional[int] = None

    def __len__(self) -> int:
        first = next(iter(self.values.values()))
        return int(first.shape[0])

    def point(self, k: int) -> PointSample:
        return PointSample({nm: float(v[k]) for nm, v in self.values.items()}, self.seed, k)

    def take(self, idx) -> "SampleSet":
        idx = np.atleast_1d(np.asarray(idx))
        return SampleSet(self.chart, {nm: v[idx] for nm, v in self.values.items()}, self.seed)

    def shifted(self, name: str, h: float) -> "SampleSet":
        vals = dict(self.values)
        vals[name] = vals[name] + h
        return SampleSet(self.chart, vals, self.seed)

    @classmethod
    def from_points(cls, chart: Chart, points: Sequence[Mapping[str, float]]) -> "SampleSet":
        vals = {nm: np.array([float(p[nm]) for p in points]) for nm in chart.symbol_names}
        return cls(chart, vals)


def sample_points(chart: Chart, count: int = 8, seed: int = 0, max_tries: int = 200) -> SampleSet:
    """Draw ``count`` admissible samples uniformly from the chart's intervals."""
    if count < 1:
        raise ExprError("need at least one sample")
    rng = np.random.default_rng(seed)
    kept: Dict[str, List[np.ndarray]] = {nm: [] for nm in chart.symbol_names}
    have = 0
    for _ in range(max_tries):
        batch = max(4 * count, 32)
        vals = {}
        for iv in chart.coordinates + chart.parameters:
            vals[iv.name] = rng.uniform(iv.lo, iv.hi, size=batch)
        ok = np.ones(batch, dtype=bool)
        with np.errstate(all="ignore"):
            for g in chart.guards:
                v = evaluate(g, vals, check=False)
                ok &= np.isfinite(v) & (np.abs(v) > chart.guard_tol)
            for g in chart.positive:
                v = evaluate(g, vals, check=False)
                ok &= np.isfinite(v) & (np.abs(v.imag) <= 1e-12 * (1 + np.abs(v.real))) & (v.real > chart.guard_tol)
        idx = np.nonzero(ok)[0]
        for nm in kept:
            kept[nm].append(vals[nm][idx])
        have += idx.size
        if have >= count:
            break
    if have < count:
        raise ExprError("sampling failed: guards reject (almost) every point; check the intervals")
    return SampleSet(chart, {nm: np.concatenate(v)[:count] for nm, v in kept.items()}, seed)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

DIV_EPS = 1e-14


def evaluate(e: Expr, values: Union[Mapping[str, np.ndarray], SampleSet, PointSample], *,
             strict: bool = False, check: bool = True,
             cache: Optional[Dict[Expr, np.ndarray]] = None) -> np.ndarray:
    """Vectorised complex evaluation over all samples in ``values``.

    ``cache`` may be shared across calls on the same samples to reuse common
    subexpressions.  With ``check`` enabled a near-zero denominator raises
    :class:`EvalError`; ``strict`` additionally rejects ln/sqrt arguments on
    the negative real axis.
    """
    if isinstance(values, SampleSet):
        env = values.values
    elif isinstance(values, PointSample):
        env = {k: np.array([v]) for k, v in values.values.items()}
    else:
        env = values
    if not env:
        shape: Tuple[int, ...] = (1,)
    else:
        shape = np.shape(next(iter(env.values())))
    memo: Dict[Expr, np.ndarray] = {} if cache is None else cache
    return np.broadcast_to(_ev(e, env, memo, strict, check, shape), shape).astype(complex)


def _ev(e: Expr, env, memo, strict, check, shape):
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = np.full(shape, e.value, dtype=complex)
    elif isinstance(e, Sym):
        if e.name not in env:
            raise ExprError(f"no value for symbol {e.name!r}")
        out = np.asarray(env[e.name], dtype=complex)
    elif isinstance(e, Add):
        out = _ev(e.terms[0], env, memo, strict, check, shape)
        for t in e.terms[1:]:
            out = out + _ev(t, env, memo, strict, check, shape)
    elif isinstance(e, Mul):
        out = _ev(e.factors[0], env, memo, strict, check, shape)
        for f in e.factors[1:]:
            out = out * _ev(f, env, memo, strict, check, shape)
    elif isinstance(e, Pow):
        b = _ev(e.base, env, memo, strict, check, shape)
        ex = e.exponent
        if ex < 0 and check and np.any(np.abs(b) < DIV_EPS):
            raise EvalError(f"division by near-zero value in {to_string(e)[:80]}")
        if ex.denominator == 1:
            k = int(ex)
            out = b ** abs(k) if abs(k) != 1 else b
            if k < 0:
                out = 1.0 / out
        else:
            if strict and ex.denominator % 2 == 0 and np.any((np.abs(b.imag) <= 1e-15 * np.abs(b)) & (b.real < 0)):
                raise DomainError(f"root of a negative real in {to_string(e)[:80]}")
            if ex.denominator == 2:
                out = np.sqrt(b) ** ex.numerator if ex > 0 else 1.0 / np.sqrt(b) ** (-ex.numerator)
            else:
                out = np.power(b, float(ex))
    elif isinstance(e, Func):
        a = _ev(e.arg, env, memo, strict, check, shape)
        name = e.name
        if name == "sin":
            out = np.sin(a)
        elif name == "cos":
            out = np.cos(a)
        elif name == "tan":
            out = np.tan(a)
        elif name == "sec":
            c = np.cos(a)
            if check and np.any(np.abs(c) < DIV_EPS):
                raise EvalError("sec of a zero of cos")
            out = 1.0 / c
        elif name == "exp":
            out = np.exp(a)
        elif name == "ln":
            if check and np.any(np.abs(a) < DIV_EPS):
                raise EvalError("ln of zero")
            if strict and np.any((np.abs(a.imag) <= 1e-15 * np.abs(a)) & (a.real < 0)):
                raise DomainError("ln of a negative real")
            out = np.log(a)
        else:  # pragma: no cover
            raise ExprError(f"cannot evaluate function {name}")
    else:  # pragma: no cover
        raise TypeError(type(e))
    memo[e] = out
    return out


def eval_expr(e: Expr, p: Union[PointSample, Mapping[str, float]], strict: bool = False) -> complex:
    """Evaluate at a single point."""
    vals = p.values if isinstance(p, PointSample) else p
    env = {k: np.array([float(v)]) for k, v in vals.items()}
    return complex(evaluate(e, env, strict=strict)[0])


# ---------------------------------------------------------------------------
# zero testing
# ---------------------------------------------------------------------------

@dataclass
class ZeroVerdict:
    """Outcome of a sampled zero test.

    ``verdict`` is "zero" when every sample is below tolerance, "nonzero" when
    a majority of samples exceed it, and "mixed" otherwise (an accidental or
    non-uniform vanishing that should be reported).
    """

    verdict: str
    max_abs: float
    max_rel: float
    witness_index: Optional[int] = None
    witness_value: Optional[complex] = None
    n_samples: int = 0
    n_above: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def is_zero(self) -> bool:
        return self.verdict == "zero"

    @property
    def is_nonzero(self) -> bool:
        return self.verdict == "nonzero"

    def __bool__(self) -> bool:
        return self.is_zero


def zero_verdict(values: np.ndarray, scale: Optional[np.ndarray] = None, tol: float = 1e-9) -> ZeroVerdict:
    """Zero test on an array whose first axis runs over samples."""
    v = np.asarray(values)
    ns = v.shape[0]
    if ns == 0:
        raise ExprError("no samples")
    flat = np.abs(v.reshape(ns, -1)) if v.ndim > 1 else np.abs(v).reshape(ns, 1)
    if flat.shape[1] == 0:
        return ZeroVerdict("zero", 0.0, 0.0, n_samples=ns)
    per = flat.max(axis=1)
    sc = np.ones(ns) if scale is None else 1.0 + np.asarray(scale, dtype=float)
    rel = per / sc
    above = rel >= tol
    k = int(np.argmax(rel))
    n_above = int(above.sum())
    if n_above == 0:
        verdict = "zero"
    elif n_above * 2 > ns:
        verdict = "nonzero"
    else:
        verdict = "mixed"
    wv = None
    if n_above:
        j = int(np.argmax(flat[k]))
        wv = complex(v.reshape(ns, -1)[k, j]) if v.ndim > 1 else complex(v[k])
    return ZeroVerdict(verdict, float(per.max()), float(rel.max()), k if n_above else None, wv, ns, n_above)


def is_zero_field(components: Sequence[Expr], samples: SampleSet, tol: float = 1e-9,
                  scale: Optional[np.ndarray] = None, strict: bool = False) -> ZeroVerdict:
    """Decide whether every expression in ``components`` vanishes on the samples."""
    if len(samples) < 1:
        raise ExprError("all samples rejected")
    cache: Dict[Expr, np.ndarray] = {}
    if not components:
        return ZeroVerdict("zero", 0.0, 0.0, n_samples=len(samples))
    vals = np.stack([evaluate(as_expr(c), samples, strict=strict, cache=cache) for c in components], axis=1)
    return zero_verdict(vals, scale, tol)
