"""Expression tree and canonical normal form.

A normalized expression is a sum of monomials. Each monomial is a rational
coefficient times a product of *atoms* raised to rational powers. Atoms are
symbols, builtin calls, opaque calls, powers with a non-constant exponent,
and sums that cannot be expanded (negative or fractional exponents).
Integer powers of sums and products of sums are always expanded, so every
polynomial has a unique representation and zero-testing of polynomial and
monomial-denominator rational expressions is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from fractions import Fraction
from functools import cached_property, lru_cache

from ..errors import DomainError

BUILTINS = ("ln", "exp", "sin", "cos")


class Expr:
    """Base class of all expression nodes. Nodes are immutable."""

    # ---- structural identity -------------------------------------------------
    def _fields(self):
        return tuple(getattr(self, f.name) for f in fields(self))

    @cached_property
    def _hash(self):
        return hash((type(self).__name__,) + self._fields())

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self) or self._hash != other._hash:
            return False
        return self._fields() == other._fields()

    def __ne__(self, other):
        return not self == other

    @cached_property
    def sort_key(self):
        raise NotImplementedError

    @cached_property
    def free_symbols(self) -> frozenset:
        out = frozenset()
        for child in self.children():
            out |= child.free_symbols
        return out

    def children(self):
        return ()

    # ---- arithmetic (results are normalized) ---------------------------------
    def __add__(self, other):
        return normalize(Sum((self, as_expr(other))))

    def __radd__(self, other):
        return normalize(Sum((as_expr(other), self)))

    def __sub__(self, other):
        return normalize(Sum((self, Product((MINUS_ONE, as_expr(other))))))

    def __rsub__(self, other):
        return normalize(Sum((as_expr(other), Product((MINUS_ONE, self)))))

    def __mul__(self, other):
        return normalize(Product((self, as_expr(other))))

    def __rmul__(self, other):
        return normalize(Product((as_expr(other), self)))

    def __truediv__(self, other):
        return normalize(Product((self, Power(as_expr(other), MINUS_ONE))))

    def __rtruediv__(self, other):
        return normalize(Product((as_expr(other), Power(self, MINUS_ONE))))

    def __pow__(self, other):
        return normalize(Power(self, as_expr(other)))

    def __rpow__(self, other):
        return normalize(Power(as_expr(other), self))

    def __neg__(self):
        return normalize(Product((MINUS_ONE, self)))

    def __pos__(self):
        return self

    def __str__(self):
        from .printer import to_text

        return to_text(self)

    def __repr__(self):
        return f"{type(self).__name__}({str(self)!r})"


@dataclass(frozen=True, eq=False, repr=False)
class RationalConst(Expr):
    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.denominator <= 0 or math.gcd(self.numerator, self.denominator) != 1:
            raise ValueError(f"non-canonical rational {self.numerator}/{self.denominator}")

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @cached_property
    def sort_key(self):
        return (0, self.value)

    @cached_property
    def free_symbols(self):
        return frozenset()


@dataclass(frozen=True, eq=False, repr=False)
class Symbol(Expr):
    name: str

    @cached_property
    def sort_key(self):
        return (1, self.name)

    @cached_property
    def free_symbols(self):
        return frozenset((self.name,))


@dataclass(frozen=True, eq=False, repr=False)
class Power(Expr):
    base: Expr
    exponent: Expr

    def children(self):
        return (self.base, self.exponent)

    @cached_property
    def sort_key(self):
        return (2, self.base.sort_key, self.exponent.sort_key)


@dataclass(frozen=True, eq=False, repr=False)
class Builtin(Expr):
    fn: str
    arg: Expr

    def __post_init__(self):
        if self.fn not in BUILTINS:
            raise ValueError(f"unknown builtin {self.fn!r}")

    def children(self):
        return (self.arg,)

    @cached_property
    def sort_key(self):
        return (3, self.fn, self.arg.sort_key)


@dataclass(frozen=True, eq=False, repr=False)
class Opaque(Expr):
    """k-th derivative of an undetermined one-argument function."""

    name: str
    order: int
    arg: Expr

    def children(self):
        return (self.arg,)

    @cached_property
    def sort_key(self):
        return (4, self.name, self.order, self.arg.sort_key)


@dataclass(frozen=True, eq=False, repr=False)
class Product(Expr):
    factors: tuple

    def children(self):
        return self.factors

    @cached_property
    def sort_key(self):
        return (5, tuple(f.sort_key for f in self.factors))


@dataclass(frozen=True, eq=False, repr=False)
class Sum(Expr):
    terms: tuple

    def children(self):
        return self.terms

    @cached_property
    def sort_key(self):
        return (6, tuple(t.sort_key for t in self.terms))


def const(value) -> RationalConst:
    value = Fraction(value)
    return RationalConst(value.numerator, value.denominator)


ZERO = RationalConst(0)
ONE = RationalConst(1)
MINUS_ONE = RationalConst(-1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(value, (int, Fraction)):
        return const(value)
    if isinstance(value, str):
        from .parser import parse_expr

        return parse_expr(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an expression (floats are not allowed)")


def sym(name: str) -> Symbol:
    return Symbol(name)


def symbols(names: str):
    return tuple(Symbol(n) for n in names.replace(",", " ").split())


def ln(x):
    return normalize(Builtin("ln", as_expr(x)))


def exp(x):
    return normalize(Builtin("exp", as_expr(x)))


def sin(x):
    return normalize(Builtin("sin", as_expr(x)))


def cos(x):
    return normalize(Builtin("cos", as_expr(x)))


def opaque(name: str, arg, order: int = 0):
    return normalize(Opaque(name, order, as_expr(arg)))


# ---------------------------------------------------------------------------
# Polynomial-over-atoms representation.
#   mono: tuple of (atom, Fraction exponent) sorted by atom.sort_key
#   poly: dict mono -> Fraction coefficient (no zero coefficients)
# ---------------------------------------------------------------------------


def _mono_key(mono):
    return tuple((a.sort_key, k) for a, k in mono)


def _term_order(item):
    mono = item[0]
    return (len(mono) == 0, _mono_key(mono))


def _rational_root(c: Fraction, q: Fraction):
    """Exact value of c**q, or None when irrational."""
    if q.denominator == 1:
        return c ** int(q)
    n = q.denominator
    if c < 0 and n % 2 == 0:
        return None
    sign = -1 if c < 0 else 1
    roots = []
    for part in (abs(c.numerator), c.denominator):
        r = round(part ** (1.0 / n))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand**n == part:
                roots.append(cand)
                break
        else:
            return None
    base = Fraction(sign * roots[0], roots[1])
    return base ** q.numerator


def _make_mono(exps: dict, coef: Fraction) -> dict:
    """Build a poly from merged atom exponents, folding and expanding as needed."""
    kept = []
    expand = []
    for atom, k in exps.items():
        if k == 0:
            continue
        if isinstance(atom, RationalConst) and k.denominator == 1:
            coef *= atom.value ** int(k)
        elif isinstance(atom, Sum) and k.denominator == 1 and k > 0:
            expand.append((atom, int(k)))
        else:
            kept.append((atom, k))
    if coef == 0:
        return {}
    kept.sort(key=lambda ak: ak[0].sort_key)
    poly = {tuple(kept): coef}
    for atom, k in expand:
        poly = _pmul(poly, _ppow(_poly_of(atom), k))
    return poly


def _mono_mul(m1, m2, coef):
    exps = dict(m1)
    for a, k in m2:
        exps[a] = exps.get(a, Fraction(0)) + k
    return _make_mono(exps, coef)


def _padd_into(acc: dict, poly: dict, scale=Fraction(1)):
    for m, c in poly.items():
        v = acc.get(m, Fraction(0)) + c * scale
        if v == 0:
            acc.pop(m, None)
        else:
            acc[m] = v
    return acc


def _pmul(p1: dict, p2: dict) -> dict:
    out: dict = {}
    for m1, c1 in p1.items():
        for m2, c2 in p2.items():
            if not m1 or not m2:
                m = m1 or m2
                v = out.get(m, Fraction(0)) + c1 * c2
                if v == 0:
                    out.pop(m, None)
                else:
                    out[m] = v
            else:
                _padd_into(out, _mono_mul(m1, m2, c1 * c2))
    return out


def _ppow(p: dict, n: int) -> dict:
    result = {(): Fraction(1)}
    base = p
    while n:
        if n & 1:
            result = _pmul(result, base)
        n >>= 1
        if n:
            base = _pmul(base, base)
    return result


def _pythagoras(poly: dict) -> dict:
    """Rewrite c*R*sin(a)^2 + c*R*cos(a)^2 -> c*R until no pair remains."""
    changed = True
    while changed:
        changed = False
        for mono, c in list(poly.items()):
            for i, (atom, k) in enumerate(mono):
                if not (isinstance(atom, Builtin) and atom.fn == "sin" and k >= 2):
                    continue
                cos_atom = Builtin("cos", atom.arg)
                exps = dict(mono)
                exps[atom] = k - 2
                reduced = {a: e for a, e in exps.items() if e != 0}
                partner_exps = dict(reduced)
                partner_exps[cos_atom] = partner_exps.get(cos_atom, Fraction(0)) + 2
                partner = tuple(sorted(((a, e) for a, e in partner_exps.items() if e != 0),
                                       key=lambda ak: ak[0].sort_key))
                if poly.get(partner) == c:
                    del poly[mono]
                    del poly[partner]
                    _padd_into(poly, _make_mono(reduced, c))
                    changed = True
                    break
            if changed:
                break
    return poly


def _primitive(poly: dict):
    """Split a multi-term poly into (content, primitive poly with leading coefficient 1)."""
    lead = min(poly.items(), key=_term_order)[1]
    return lead, {m: c / lead for m, c in poly.items()}


def _single(poly: dict):
    if len(poly) == 1:
        return next(iter(poly.items()))
    return None


def _power_poly(base: Expr, exponent: Expr) -> dict:
    nx = normalize(exponent)
    pb = _poly_of(base)
    if not isinstance(nx, RationalConst):
        nb = _from_poly(pb)
        if nb == ONE:
            return {(): Fraction(1)}
        return {((Power(nb, nx), Fraction(1)),): Fraction(1)}
    q = nx.value
    if q == 0:
        return {(): Fraction(1)}
    if not pb:
        if q > 0:
            return {}
        raise DomainError("division by zero")
    if q.denominator == 1 and q > 0:
        return _ppow(pb, int(q))
    single = _single(pb)
    if single is not None:
        mono, c = single
        if q.denominator == 1:
            return _make_mono({a: k * q for a, k in mono}, c ** int(q))
        if not mono:
            root = _rational_root(c, q)
            if root is not None:
                return {(): root}
            return _make_mono({const(c): q}, Fraction(1))
        if c == 1 and len(mono) == 1 and mono[0][1] == 1:
            return _make_mono({mono[0][0]: q}, Fraction(1))
        return _make_mono({_from_poly(pb): q}, Fraction(1))
    if q.denominator == 1:
        content, prim = _primitive(pb)
        return _make_mono({_from_poly(prim): q}, content ** int(q))
    return _make_mono({_from_poly(pb): q}, Fraction(1))


def _builtin_poly(fn: str, arg: Expr) -> dict:
    a = normalize(arg)
    if fn == "ln":
        if a == ONE:
            return {}
        if isinstance(a, Builtin) and a.fn == "exp":
            return _poly_of(a.arg)
    elif fn == "exp":
        if a == ZERO:
            return {(): Fraction(1)}
        pa = _poly_of(a)
        logs = {}
        rest = {}
        for mono, c in pa.items():
            # exp(k*ln(b)) folds to b^k when ln(b) appears exactly once, to the first power
            lns = [i for i, (atom, k) in enumerate(mono)
                   if isinstance(atom, Builtin) and atom.fn == "ln"]
            if len(lns) == 1 and mono[lns[0]][1] == 1:
                b = mono[lns[0]][0].arg
                _padd_into(logs.setdefault(b, {}), {mono[:lns[0]] + mono[lns[0] + 1:]: c})
            else:
                rest[mono] = c
        if logs:
            poly = {(): Fraction(1)}
            for b, k in logs.items():
                poly = _pmul(poly, _power_poly(b, _from_poly(k)))
            if rest:
                poly = _pmul(poly, {((Builtin("exp", _from_poly(rest)), Fraction(1)),): Fraction(1)})
            return poly
    elif fn == "sin":
        if a == ZERO:
            return {}
    elif fn == "cos":
        if a == ZERO:
            return {(): Fraction(1)}
    return {((Builtin(fn, a), Fraction(1)),): Fraction(1)}


def _product_poly(factors) -> dict:
    # multi-term factors are merged as sum atoms first so (x+1)/(x+1) cancels
    exps: dict = {}
    coef = Fraction(1)
    for f in factors:
        p = _poly_of(f)
        if not p:
            return {}
        single = _single(p)
        if single is not None:
            mono, c = single
            coef *= c
            for a, k in mono:
                exps[a] = exps.get(a, Fraction(0)) + k
        else:
            content, prim = _primitive(p)
            coef *= content
            atom = _from_poly(prim)
            exps[atom] = exps.get(atom, Fraction(0)) + 1
    return _make_mono(exps, coef)


@lru_cache(maxsize=1 << 16)
def _poly_items(e: Expr):
    if isinstance(e, RationalConst):
        poly = {(): e.value} if e.numerator else {}
    elif isinstance(e, Symbol):
        poly = {((e, Fraction(1)),): Fraction(1)}
    elif isinstance(e, Sum):
        poly = {}
        for t in e.terms:
            _padd_into(poly, _poly_of(t))
    elif isinstance(e, Product):
        poly = _product_poly(e.factors)
    elif isinstance(e, Power):
        poly = _power_poly(e.base, e.exponent)
    elif isinstance(e, Builtin):
        poly = _builtin_poly(e.fn, e.arg)
    elif isinstance(e, Opaque):
        if e.order < 0:
            raise ValueError("negative derivative order")
        poly = {((Opaque(e.name, e.order, normalize(e.arg)), Fraction(1)),): Fraction(1)}
    else:
        raise TypeError(f"not an expression: {e!r}")
    if len(poly) > 1:
        poly = _pythagoras(poly)
    return tuple(poly.items())


def _poly_of(e: Expr) -> dict:
    return dict(_poly_items(e))


def _from_poly(poly: dict) -> Expr:
    if not poly:
        return ZERO
    terms = []
    for mono, c in sorted(poly.items(), key=_term_order):
        factors = [a if k == 1 else Power(a, const(k)) for a, k in mono]
        if c != 1 or not factors:
            factors.insert(0, const(c))
        terms.append(factors[0] if len(factors) == 1 else Product(tuple(factors)))
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


@lru_cache(maxsize=1 << 16)
def normalize(e: Expr) -> Expr:
    """Canonical form of ``e``; ``normalize(normalize(e)) == normalize(e)``."""
    return _from_poly(_poly_of(e))


def monomials(e: Expr):
    """Normalized monomials of ``e`` as ``[(coefficient, ((atom, exponent), ...)), ...]``."""
    return [(c, m) for m, c in sorted(_poly_of(e).items(), key=_term_order)]


def from_monomials(items) -> Expr:
    poly: dict = {}
    for c, mono in items:
        _padd_into(poly, _make_mono(dict(mono), Fraction(c)))
    return _from_poly(poly)


def is_constant(e: Expr) -> bool:
    return isinstance(normalize(e), RationalConst)
