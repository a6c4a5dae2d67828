"""Differentiation, substitution, numeric evaluation and zero testing."""
from __future__ import annotations

import enum
import math
import random
import zlib
from fractions import Fraction
from functools import lru_cache

import mpmath

from ..errors import DomainError, IntegrationError, UnboundSymbol, UnsupportedCoefficient
from .expr import (MINUS_ONE, ONE, ZERO, Builtin, Expr, Opaque, Power, Product,
                   RationalConst, Sum, Symbol, as_expr, const, from_monomials,
                   monomials, normalize)


class ZeroVerdict(enum.Enum):
    ZERO = "Zero"
    NONZERO = "NonZero"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


def combine_verdicts(verdicts) -> ZeroVerdict:
    """Zero if all are Zero, NonZero if any is NonZero, Unknown otherwise."""
    verdicts = list(verdicts)
    if any(v is ZeroVerdict.NONZERO for v in verdicts):
        return ZeroVerdict.NONZERO
    if all(v is ZeroVerdict.ZERO for v in verdicts):
        return ZeroVerdict.ZERO
    return ZeroVerdict.UNKNOWN


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def _diff(e: Expr, var: str) -> Expr:
    if var not in e.free_symbols:
        return ZERO
    if isinstance(e, Symbol):
        return ONE
    if isinstance(e, Sum):
        return Sum(tuple(_diff(t, var) for t in e.terms))
    if isinstance(e, Product):
        terms = []
        for i, f in enumerate(e.factors):
            df = _diff(f, var)
            if df == ZERO:
                continue
            terms.append(Product(e.factors[:i] + (df,) + e.factors[i + 1:]))
        return Sum(tuple(terms)) if terms else ZERO
    if isinstance(e, Power):
        b, x = e.base, e.exponent
        db = _diff(b, var)
        if isinstance(x, RationalConst):
            return Product((x, Power(b, const(x.value - 1)), db))
        dx = _diff(x, var)
        return Product((e, Sum((Product((dx, Builtin("ln", b))),
                                Product((x, db, Power(b, MINUS_ONE)))))))
    if isinstance(e, Builtin):
        a = e.arg
        da = _diff(a, var)
        if e.fn == "ln":
            return Product((da, Power(a, MINUS_ONE)))
        if e.fn == "exp":
            return Product((e, da))
        if e.fn == "sin":
            return Product((Builtin("cos", a), da))
        return Product((MINUS_ONE, Builtin("sin", a), da))
    if isinstance(e, Opaque):
        return Product((Opaque(e.name, e.order + 1, e.arg), _diff(e.arg, var)))
    raise TypeError(f"not an expression: {e!r}")


def differentiate(e, var) -> Expr:
    """Partial derivative of ``e`` with respect to the symbol ``var`` (normalized)."""
    var = var.name if isinstance(var, Symbol) else var
    return normalize(_diff(normalize(as_expr(e)), var))


# ---------------------------------------------------------------------------
# substitution
# ---------------------------------------------------------------------------


def _subst(e: Expr, bindings: dict) -> Expr:
    if not (e.free_symbols & bindings.keys()):
        return e
    if isinstance(e, Symbol):
        return bindings[e.name]
    if isinstance(e, Sum):
        return Sum(tuple(_subst(t, bindings) for t in e.terms))
    if isinstance(e, Product):
        return Product(tuple(_subst(f, bindings) for f in e.factors))
    if isinstance(e, Power):
        return Power(_subst(e.base, bindings), _subst(e.exponent, bindings))
    if isinstance(e, Builtin):
        return Builtin(e.fn, _subst(e.arg, bindings))
    if isinstance(e, Opaque):
        return Opaque(e.name, e.order, _subst(e.arg, bindings))
    return e


def substitute(e, bindings) -> Expr:
    """Simultaneous substitution of symbols by expressions."""
    b = {(k.name if isinstance(k, Symbol) else k): as_expr(v) for k, v in bindings.items()}
    return normalize(_subst(normalize(as_expr(e)), b))


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------


class _FloatBackend:
    ln = staticmethod(math.log)
    exp = staticmethod(math.exp)
    sin = staticmethod(math.sin)
    cos = staticmethod(math.cos)

    @staticmethod
    def num(v: Fraction):
        return float(v)


class _MpBackend:
    ln = staticmethod(mpmath.log)
    exp = staticmethod(mpmath.exp)
    sin = staticmethod(mpmath.sin)
    cos = staticmethod(mpmath.cos)

    @staticmethod
    def num(v: Fraction):
        return mpmath.mpf(v.numerator) / v.denominator


def _eval(e, env, funcs, be):
    if isinstance(e, RationalConst):
        return be.num(e.value)
    if isinstance(e, Symbol):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundSymbol(f"symbol {e.name!r} is unbound") from None
    if isinstance(e, Sum):
        return sum((_eval(t, env, funcs, be) for t in e.terms), be.num(Fraction(0)))
    if isinstance(e, Product):
        out = be.num(Fraction(1))
        for f in e.factors:
            out = out * _eval(f, env, funcs, be)
        return out
    if isinstance(e, Power):
        b = _eval(e.base, env, funcs, be)
        if isinstance(e.exponent, RationalConst):
            q = e.exponent.value
            if b == 0 and q < 0:
                raise DomainError("division by zero")
            if q.denominator == 1:
                return b ** int(q)
            if b < 0:
                if q.denominator % 2 == 1:
                    return -((-b) ** be.num(q)) if q.numerator % 2 else (-b) ** be.num(q)
                raise DomainError("even root of a negative number")
            return b ** be.num(q)
        x = _eval(e.exponent, env, funcs, be)
        if b < 0 or (b == 0 and x <= 0):
            raise DomainError("power with non-positive base and symbolic exponent")
        return b ** x
    if isinstance(e, Builtin):
        a = _eval(e.arg, env, funcs, be)
        if e.fn == "ln":
            if a <= 0:
                raise DomainError("ln of a non-positive number")
            return be.ln(a)
        try:
            return getattr(be, e.fn)(a)
        except OverflowError:
            raise DomainError(f"overflow in {e.fn}") from None
    if isinstance(e, Opaque):
        try:
            fn = funcs[e.name]
        except KeyError:
            raise UnboundSymbol(f"function {e.name!r} is unbound") from None
        return fn(_eval(e.arg, env, funcs, be), e.order)
    raise TypeError(f"not an expression: {e!r}")


def evaluate_numeric(e, bindings, functions=None) -> float:
    """Evaluate with floats.

    ``functions`` maps opaque function names to ``callable(x, order)`` returning
    the ``order``-th derivative at ``x``.
    """
    env = {(k.name if isinstance(k, Symbol) else k): float(v) for k, v in bindings.items()}
    try:
        return float(_eval(normalize(as_expr(e)), env, functions or {}, _FloatBackend))
    except ZeroDivisionError:
        raise DomainError("division by zero") from None


def _seed(name: str) -> int:
    return zlib.crc32(name.encode())


def _witness_function(name):
    """A fixed smooth function with consistent derivatives, derived from the name."""
    rng = random.Random(_seed("fn:" + name))
    a = mpmath.mpf(rng.randint(3, 9)) / 7
    b = mpmath.mpf(rng.randint(5, 13)) / 6
    c = mpmath.mpf(rng.randint(1, 20)) / 11

    def f(x, order):
        return a**order * mpmath.exp(a * x) + b**order * mpmath.sin(b * x + c + order * mpmath.pi / 2)

    return f


class _WitnessFunctions(dict):
    def __missing__(self, name):
        fn = _witness_function(name)
        self[name] = fn
        return fn


def _opaque_names(e):
    if isinstance(e, Opaque):
        return {e.name} | _opaque_names(e.arg)
    out = set()
    for c in e.children():
        out |= _opaque_names(c)
    return out


SAMPLE_POINTS = 3
NONZERO_THRESHOLD = 1e-9


@lru_cache(maxsize=1 << 14)
def _is_zero_normalized(e: Expr) -> ZeroVerdict:
    if e == ZERO:
        return ZeroVerdict.ZERO
    if isinstance(e, RationalConst):
        return ZeroVerdict.NONZERO
    names = sorted(e.free_symbols)
    rng = random.Random(_seed("|".join(names) or "const"))
    funcs = _WitnessFunctions()
    hits = 0
    attempts = 0
    with mpmath.workdps(40):
        while hits < SAMPLE_POINTS and attempts < 4 * SAMPLE_POINTS:
            attempts += 1
            env = {n: mpmath.mpf(rng.randint(23, 97)) / rng.randint(19, 41) for n in names}
            try:
                v = _eval(e, env, funcs, _MpBackend)
            except (DomainError, ZeroDivisionError, OverflowError):
                continue
            hits += 1
            if abs(v) > NONZERO_THRESHOLD:
                return ZeroVerdict.NONZERO
    return ZeroVerdict.UNKNOWN


def is_zero(e) -> ZeroVerdict:
    """Three-valued zero test.

    Zero only when normalization cancels every term; NonZero when the value at
    one of three sampled rational points exceeds 1e-9 in magnitude (opaque
    functions are replaced by fixed smooth witnesses with consistent
    derivatives); Unknown otherwise.
    """
    return _is_zero_normalized(normalize(as_expr(e)))


# ---------------------------------------------------------------------------
# rewrites
# ---------------------------------------------------------------------------


def expand_log(e, positive) -> Expr:
    """Apply ``ln(a*b) = ln a + ln b`` and ``ln(a^k) = k ln a`` for symbols declared positive.

    Only factors whose free symbols are all in ``positive`` (and positive
    constants) are split off; everything else stays inside the logarithm.
    """
    positive = frozenset(p.name if isinstance(p, Symbol) else p for p in positive)

    def is_pos(x):
        x = normalize(x)
        if isinstance(x, RationalConst):
            return x.value > 0
        if isinstance(x, Symbol):
            return x.name in positive
        if isinstance(x, Builtin) and x.fn == "exp":
            return True
        if isinstance(x, Power):
            return is_pos(x.base)
        if isinstance(x, Product):
            return all(is_pos(f) for f in x.factors)
        return False

    def rec(x):
        if isinstance(x, Builtin):
            a = rec(x.arg)
            if x.fn == "ln":
                return _split_ln(normalize(a), is_pos)
            return Builtin(x.fn, a)
        if isinstance(x, Opaque):
            return Opaque(x.name, x.order, rec(x.arg))
        if isinstance(x, Sum):
            return Sum(tuple(rec(t) for t in x.terms))
        if isinstance(x, Product):
            return Product(tuple(rec(f) for f in x.factors))
        if isinstance(x, Power):
            return Power(rec(x.base), rec(x.exponent))
        return x

    return normalize(rec(normalize(as_expr(e))))


def _split_ln(a, is_pos):
    factors = a.factors if isinstance(a, Product) else (a,)
    keep, parts = [], []
    for f in factors:
        if isinstance(f, RationalConst) and f.value > 0 and f != ONE:
            parts.append(Builtin("ln", f))
        elif isinstance(f, Power) and is_pos(f.base):
            parts.append(Product((f.exponent, _split_ln(normalize(f.base), is_pos))))
        elif is_pos(f) and not isinstance(f, RationalConst):
            parts.append(Builtin("ln", f))
        else:
            keep.append(f)
    if keep:
        rest = keep[0] if len(keep) == 1 else Product(tuple(keep))
        parts.append(Builtin("ln", rest))
    return Sum(tuple(parts)) if parts else ZERO


# ---------------------------------------------------------------------------
# polynomial view and antiderivatives
# ---------------------------------------------------------------------------


def as_polynomial(e, variables) -> dict:
    """Coefficients of ``e`` as a polynomial in ``variables``.

    Returns ``{exponent tuple: coefficient expression}``; coefficients are free
    of the variables. Raises UnsupportedCoefficient otherwise.
    """
    names = [v.name if isinstance(v, Symbol) else v for v in variables]
    index = {n: i for i, n in enumerate(names)}
    out: dict = {}
    for c, mono in monomials(as_expr(e)):
        expvec = [0] * len(names)
        rest = []
        for atom, k in mono:
            if isinstance(atom, Symbol) and atom.name in index:
                if k.denominator != 1 or k < 0:
                    raise UnsupportedCoefficient(f"non-polynomial power of {atom.name}")
                expvec[index[atom.name]] = int(k)
            elif atom.free_symbols & index.keys():
                raise UnsupportedCoefficient(f"non-polynomial factor {atom}")
            else:
                rest.append((atom, k))
        key = tuple(expvec)
        out[key] = out.get(key, ZERO) + from_monomials([(c, rest)])
    return {k: v for k, v in out.items() if v != ZERO}


def antiderivative(e, var) -> Expr:
    """An antiderivative of ``e`` in ``var`` over the rational-plus-log table.

    Supported terms: ``c * var^k`` (``k = -1`` gives ``ln(var)``) and
    ``c * exp(a*var + b)`` with ``a``, ``b``, ``c`` free of ``var``.
    """
    name = var.name if isinstance(var, Symbol) else var
    x = Symbol(name)
    out = []
    for c, mono in monomials(as_expr(e)):
        k = Fraction(0)
        rest = []
        special = None
        for atom, p in mono:
            if atom == x:
                k = p
            elif name in atom.free_symbols:
                if special is None and p == 1 and isinstance(atom, Builtin) and atom.fn == "exp":
                    special = atom
                else:
                    raise IntegrationError(f"no antiderivative for factor {atom}")
            else:
                rest.append((atom, p))
        coeff = from_monomials([(c, rest)])
        if special is not None:
            if k != 0:
                raise IntegrationError("polynomial times exponential is not supported")
            slope = differentiate(special.arg, name)
            if name in slope.free_symbols:
                raise IntegrationError(f"exponent {special.arg} is not linear in {name}")
            out.append(normalize(Product((coeff, special, Power(slope, MINUS_ONE)))))
        elif k == -1:
            out.append(normalize(Product((coeff, Builtin("ln", x)))))
        else:
            out.append(normalize(Product((coeff, Power(x, const(k + 1)), const(1 / (k + 1))))))
    return normalize(Sum(tuple(out))) if out else ZERO


# ---------------------------------------------------------------------------
# compilation to Python callables
# ---------------------------------------------------------------------------


def _py(e, names) -> str:
    if isinstance(e, RationalConst):
        v = e.value
        return repr(float(v)) if v.denominator != 1 else f"{v.numerator}.0"
    if isinstance(e, Symbol):
        if e.name not in names:
            raise UnboundSymbol(f"symbol {e.name!r} is unbound")
        return names[e.name]
    if isinstance(e, Sum):
        return "(" + " + ".join(_py(t, names) for t in e.terms) + ")"
    if isinstance(e, Product):
        return "(" + " * ".join(_py(f, names) for f in e.factors) + ")"
    if isinstance(e, Power):
        if isinstance(e.exponent, RationalConst) and e.exponent.value.denominator == 1:
            return f"({_py(e.base, names)} ** {e.exponent.value.numerator})"
        return f"({_py(e.base, names)} ** {_py(e.exponent, names)})"
    if isinstance(e, Builtin):
        fn = "log" if e.fn == "ln" else e.fn
        return f"_m.{fn}({_py(e.arg, names)})"
    raise UnsupportedCoefficient(f"cannot compile {e}")


def lambdify(exprs, arg_names, constants=None):
    """Compile expressions to ``f(*args) -> tuple of floats``.

    ``constants`` binds remaining symbols (parameters) to floats.
    """
    names = {n: f"_a{i}" for i, n in enumerate(arg_names)}
    consts = {}
    for i, (k, v) in enumerate(sorted((constants or {}).items())):
        names.setdefault(k, f"_c{i}")
        consts[names[k]] = float(v)
    body = ", ".join(_py(normalize(as_expr(x)), names) for x in exprs)
    params = ", ".join(f"_a{i}" for i in range(len(arg_names)))
    src = f"def _f({params}):\n    return ({body},)\n"
    ns = {"_m": math, **consts}
    exec(compile(src, "<formlab-lambdify>", "exec"), ns)
    return ns["_f"]
