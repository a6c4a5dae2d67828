"""Pretty-printer emitting the parser's grammar.

For normalized input, ``parse_expr(to_text(e)) == e``.
"""
from __future__ import annotations

from fractions import Fraction

from .expr import (Builtin, Opaque, Power, Product, RationalConst, Sum, Symbol,
                   normalize)

_SUM, _PROD, _UNARY, _POW, _ATOM = range(1, 6)


def to_text(e) -> str:
    return _fmt(e)[0]


def _wrap(pair, level):
    text, prec = pair
    return f"({text})" if prec < level else text


def _call_name(e):
    if isinstance(e, Builtin):
        return e.fn
    return e.name if e.order == 0 else f"{e.name}__d{e.order}"


def _const(v: Fraction):
    if v.denominator == 1:
        return (str(v.numerator), _ATOM if v >= 0 else _UNARY)
    return (f"{v.numerator}/{v.denominator}", _PROD if v > 0 else _UNARY)


def _exponent_text(k):
    if isinstance(k, RationalConst):
        v = k.value
        if v.denominator == 1 and v >= 0:
            return str(v.numerator)
        return f"({_const(v)[0]})"
    return _wrap(_fmt(k), _ATOM)


def _power_text(base, k):
    if k == 1:
        return _wrap(_fmt(base), _PROD + 1)
    return f"{_wrap(_fmt(base), _ATOM)}^{_exponent_text(k)}"


def _split_factors(e):
    """Return (coefficient, [(base, exponent Fraction or Expr)])."""
    factors = e.factors if isinstance(e, Product) else (e,)
    coef = Fraction(1)
    parts = []
    for f in factors:
        if isinstance(f, RationalConst):
            coef *= f.value
        elif isinstance(f, Power) and isinstance(f.exponent, RationalConst):
            parts.append((f.base, f.exponent.value))
        else:
            parts.append((f, Fraction(1)))
    return coef, parts


def _product(e):
    coef, parts = _split_factors(e)
    sign = "-" if coef < 0 else ""
    coef = abs(coef)
    num, den = [], []
    if coef.numerator != 1:
        num.append(str(coef.numerator))
    if coef.denominator != 1:
        den.append(str(coef.denominator))
    for base, k in parts:
        if k > 0:
            num.append(_power_text(base, _as_exp(k)))
        else:
            den.append(_power_text(base, _as_exp(-k)))
    text = "*".join(num) if num else "1"
    if den:
        text += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
    if sign:
        return (sign + text, _UNARY)
    if den or len(num) > 1:
        return (text, _PROD)
    return (text, _POW if "^" in text else _ATOM)


def _as_exp(k: Fraction):
    return 1 if k == 1 else RationalConst(k.numerator, k.denominator)


def _is_negative(term):
    if isinstance(term, RationalConst):
        return term.value < 0
    if isinstance(term, Product) and isinstance(term.factors[0], RationalConst):
        return term.factors[0].value < 0
    return False


def _fmt(e):
    if isinstance(e, RationalConst):
        return _const(e.value)
    if isinstance(e, Symbol):
        return (e.name, _ATOM)
    if isinstance(e, (Builtin, Opaque)):
        return (f"{_call_name(e)}({_fmt(e.arg)[0]})", _ATOM)
    if isinstance(e, Power):
        if isinstance(e.exponent, RationalConst):
            return _product(Product((e,)))
        return (f"{_wrap(_fmt(e.base), _ATOM)}^{_exponent_text(e.exponent)}", _POW)
    if isinstance(e, Product):
        return _product(e)
    if isinstance(e, Sum):
        pieces = []
        for i, t in enumerate(e.terms):
            if _is_negative(t):
                body = _wrap(_fmt(normalize(Product((RationalConst(-1), t)))), _PROD)
                pieces.append(("-" if i == 0 else " - ") + body)
            else:
                pieces.append(("" if i == 0 else " + ") + _wrap(_fmt(t), _SUM + 1))
        return ("".join(pieces), _SUM)
    raise TypeError(f"cannot print {e!r}")
