"""Differential forms on a single chart.

A p-form is stored as a map from strictly increasing index tuples (0-based
positions in the chart's coordinate list) to normalized coefficients; zero
coefficients are pruned. Forms of degree above the chart dimension are
allowed only as the zero form (the result of ``d`` on a top-degree form or of
a wedge that overflows the dimension).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .chart import Chart, Connection
from .errors import (ArityError, ChartMismatch, ConstraintError, DegreeError,
                     IntegrationError, MetricError, NotClosed, UnsupportedCoefficient,
                     UnsupportedDegree)
from .scalar import (ONE, ZERO, Expr, Power, RationalConst, Sum, Symbol, ZeroVerdict,
                     antiderivative, as_expr, as_polynomial, combine_verdicts, const,
                     differentiate, is_zero, normalize, parse_expr, substitute, to_text)


def _perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (distinct items)."""
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class DifferentialForm:
    """An alternating p-form ``Σ A_I dx^I`` on ``chart``."""

    __slots__ = ("chart", "degree", "_terms")

    def __init__(self, chart: Chart, degree: int, terms=None):
        if degree < 0:
            raise DegreeError("negative degree")
        clean = {}
        for idx, coeff in (terms.items() if isinstance(terms, dict) else (terms or ())):
            idx = tuple(chart.index(i) if not isinstance(i, int) else i for i in idx)
            if len(idx) != degree:
                raise DegreeError(f"index tuple {idx} does not match degree {degree}")
            if any(not 0 <= i < chart.dim for i in idx):
                raise ChartMismatch(f"index out of range in {idx}")
            if len(set(idx)) != len(idx):
                continue
            sign = _perm_sign(idx)
            key = tuple(sorted(idx))
            c = normalize(as_expr(coeff))
            if sign < 0:
                c = -c
            clean[key] = clean[key] + c if key in clean else c
        if degree > chart.dim and clean:
            raise DegreeError(f"degree {degree} exceeds chart dimension {chart.dim}")
        self.chart = chart
        self.degree = degree
        self._terms = tuple(sorted((k, v) for k, v in clean.items() if v != ZERO))

    # ---- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, chart, degree):
        return cls(chart, degree)

    @classmethod
    def scalar(cls, chart, f):
        return cls(chart, 0, {(): f})

    @classmethod
    def basis(cls, chart, *names):
        """``dx^a ∧ dx^b ∧ ...`` for the named coordinates."""
        return cls(chart, len(names), {tuple(chart.index(n) for n in names): ONE})

    @classmethod
    def one_form(cls, chart, coeffs):
        """1-form from a coefficient list in chart order, or a ``{coord: expr}`` map."""
        if isinstance(coeffs, dict):
            return cls(chart, 1, {(chart.index(k),): v for k, v in coeffs.items()})
        coeffs = list(coeffs)
        if len(coeffs) != chart.dim:
            raise ArityError(f"need {chart.dim} coefficients")
        return cls(chart, 1, {(i,): c for i, c in enumerate(coeffs)})

    # ---- access ------------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms

    def coeff(self, *idx) -> Expr:
        key = tuple(self.chart.index(i) if not isinstance(i, int) else i for i in idx)
        sign = _perm_sign(key)
        c = self.terms.get(tuple(sorted(key)), ZERO)
        return c if sign > 0 else -c

    def is_trivially_zero(self) -> bool:
        return not self._terms

    def components(self):
        return [c for _, c in self._terms]

    # ---- algebra -----------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, DifferentialForm):
            raise TypeError("expected a DifferentialForm")
        if other.chart.coords != self.chart.coords:
            raise ChartMismatch(f"charts {self.chart} and {other.chart} differ")

    def __add__(self, other):
        if isinstance(other, (Expr, int, Fraction)) and self.degree == 0:
            other = DifferentialForm.scalar(self.chart, other)
        self._check(other)
        if other.degree != self.degree:
            raise DegreeError(f"cannot add a {self.degree}-form and a {other.degree}-form")
        terms = dict(self._terms)
        for k, v in other._terms:
            terms[k] = terms[k] + v if k in terms else v
        return DifferentialForm(self.chart, self.degree, terms)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f):
        f = as_expr(f)
        return DifferentialForm(self.chart, self.degree, {k: f * v for k, v in self._terms})

    def __mul__(self, other):
        if isinstance(other, DifferentialForm):
            return wedge(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(ONE / as_expr(other))

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        return (isinstance(other, DifferentialForm) and other.chart.coords == self.chart.coords
                and other.degree == self.degree and other._terms == self._terms)

    def __hash__(self):
        return hash((self.chart.coords, self.degree, self._terms))

    def __str__(self):
        return form_to_text(self)

    def __repr__(self):
        return f"DifferentialForm({self.degree}, {form_to_text(self)!r} on {self.chart})"

    def to_json(self) -> dict:
        return {"degree": self.degree, "chart": list(self.chart.coords),
                "terms": [{"indices": list(k), "coeff": to_text(v)} for k, v in self._terms]}

    @classmethod
    def from_json(cls, chart, data):
        return cls(chart, data["degree"],
                   {tuple(t["indices"]): parse_expr(t["coeff"]) for t in data["terms"]})


def form_to_text(w: DifferentialForm) -> str:
    if not w._terms:
        return "0"
    out = ""
    for idx, c in w._terms:
        basis = "^".join("d" + w.chart.coords[i] for i in idx)
        neg = not isinstance(c, Sum) and to_text(c).startswith("-")
        if neg:
            c = -c
        coeff = to_text(c)
        if not basis:
            piece = coeff
        elif c == ONE:
            piece = basis
        elif isinstance(c, Sum):
            piece = f"({coeff})*{basis}"
        else:
            piece = f"{coeff}*{basis}"
        if out:
            out += (" - " if neg else " + ") + piece
        else:
            out = ("-" if neg else "") + piece
    return out


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    """Exterior product; colliding indices annihilate, merge parity gives the sign."""
    a._check(b)
    p = a.degree + b.degree
    if p > a.chart.dim:
        return DifferentialForm.zero(a.chart, p)
    terms: dict = {}
    for I, f in a._terms:
        for J, g in b._terms:
            if set(I) & set(J):
                continue
            key = tuple(sorted(I + J))
            c = f * g
            if _perm_sign(I + J) < 0:
                c = -c
            terms[key] = terms[key] + c if key in terms else c
    return DifferentialForm(a.chart, p, terms)


def exterior_derivative(w: DifferentialForm) -> DifferentialForm:
    """``d(Σ A_I dx^I) = Σ ∂_j A_I dx^j ∧ dx^I``."""
    chart = w.chart
    terms: dict = {}
    for I, f in w._terms:
        for j, name in enumerate(chart.coords):
            if j in I or name not in f.free_symbols:
                continue
            df = differentiate(f, name)
            if df == ZERO:
                continue
            sign = -1 if sum(1 for i in I if i < j) % 2 else 1
            key = tuple(sorted(I + (j,)))
            c = df if sign > 0 else -df
            terms[key] = terms[key] + c if key in terms else c
    return DifferentialForm(chart, w.degree + 1, terms)


d = exterior_derivative


def form_verdict(w: DifferentialForm) -> ZeroVerdict:
    return combine_verdicts(is_zero(c) for c in w.components())


# ---------------------------------------------------------------------------
# commutators and closure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Commutator1:
    """Antisymmetric commutator matrix K of a 1-form, with a per-term breakdown.

    ``contributions[(a, b)]`` lists ``(label, expr)`` summands for a < b:
    ``d<A_b>/d<x_a>``, ``-d<A_a>/d<x_b>`` and, with a connection, one
    ``torsion[s]`` entry per nonzero (Γ^s_{ba} − Γ^s_{ab}) A_s.
    """

    chart: Chart
    K: tuple
    contributions: dict

    def __post_init__(self):
        n = self.chart.dim
        for a in range(n):
            for b in range(n):
                if normalize(self.K[a][b] + self.K[b][a]) != ZERO:
                    raise AssertionError("commutator is not antisymmetric")

    def component(self, a, b) -> Expr:
        a = a if isinstance(a, int) else self.chart.index(a)
        b = b if isinstance(b, int) else self.chart.index(b)
        return self.K[a][b]

    def upper(self):
        n = self.chart.dim
        return {(a, b): self.K[a][b] for a in range(n) for b in range(a + 1, n)}

    def verdict(self) -> ZeroVerdict:
        return combine_verdicts(is_zero(v) for v in self.upper().values())

    def to_form(self) -> DifferentialForm:
        return DifferentialForm(self.chart, 2, self.upper())

    def to_json(self) -> dict:
        names = self.chart.coords
        out = []
        for (a, b), v in self.upper().items():
            if v == ZERO:
                continue
            out.append({"indices": [a, b], "pair": [names[a], names[b]], "value": to_text(v),
                        "contributions": [{"label": lab, "value": to_text(x)}
                                          for lab, x in self.contributions.get((a, b), ())]})
        return {"kind": "commutator", "chart": list(names), "components": out}

    def __str__(self):
        names = self.chart.coords
        parts = [f"K[{names[a]},{names[b]}] = {to_text(v)}" for (a, b), v in self.upper().items()
                 if v != ZERO]
        return "; ".join(parts) if parts else "K = 0"


def commutator_1form(w: DifferentialForm, connection: Connection | None = None) -> Commutator1:
    """K_ab = ∂A_b/∂x^a − ∂A_a/∂x^b + (Γ^s_{ba} − Γ^s_{ab}) A_s."""
    if w.degree != 1:
        raise DegreeError(f"commutator_1form needs a 1-form, got degree {w.degree}")
    chart = w.chart
    n = chart.dim
    if connection is not None and connection.chart.coords != chart.coords:
        raise ChartMismatch("connection lives on a different chart")
    A = [w.coeff(i) for i in range(n)]
    x = chart.coords
    K = [[ZERO] * n for _ in range(n)]
    contributions = {}
    for a in range(n):
        for b in range(a + 1, n):
            parts = [(f"d{{A_{x[b]}}}/d{x[a]}", differentiate(A[b], x[a])),
                     (f"-d{{A_{x[a]}}}/d{x[b]}", -differentiate(A[a], x[b]))]
            if connection is not None:
                G = connection.gamma
                for s in range(n):
                    t = (G[s][b][a] - G[s][a][b]) * A[s]
                    parts.append((f"torsion[{x[s]}]", t))
            parts = [(lab, v) for lab, v in parts if v != ZERO]
            total = ZERO
            for _, v in parts:
                total = total + v
            K[a][b] = total
            K[b][a] = -total
            contributions[(a, b)] = tuple(parts)
    return Commutator1(chart, tuple(tuple(r) for r in K), contributions)


@dataclass(frozen=True)
class ClosureResult:
    verdict: ZeroVerdict
    residual: object  # DifferentialForm or Commutator1

    @property
    def closed(self) -> bool:
        return self.verdict is ZeroVerdict.ZERO


def is_closed(w: DifferentialForm, connection: Connection | None = None) -> ClosureResult:
    """Closure test: residual is ``d(w)``, or the torsion commutator for 1-forms with a connection."""
    if connection is not None:
        if w.degree != 1:
            raise UnsupportedDegree("torsion-augmented closure is defined for 1-forms only")
        K = commutator_1form(w, connection)
        return ClosureResult(K.verdict(), K)
    dw = exterior_derivative(w)
    return ClosureResult(form_verdict(dw), dw)


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------


def _homotopy(w: DifferentialForm) -> DifferentialForm:
    chart = w.chart
    p = w.degree
    xs = chart.symbols
    terms: dict = {}
    for I, c in w._terms:
        poly = as_polynomial(c, chart.coords)
        for expvec, coeff in poly.items():
            mono = coeff
            for x, k in zip(xs, expvec):
                if k:
                    mono = mono * x**k
            scale = const(Fraction(1, sum(expvec) + p))
            for pos, i in enumerate(I):
                key = I[:pos] + I[pos + 1:]
                v = scale * mono * xs[i]
                if pos % 2:
                    v = -v
                terms[key] = terms[key] + v if key in terms else v
    return DifferentialForm(chart, p - 1, terms)


def _axis_quadrature(w: DifferentialForm) -> DifferentialForm:
    """0-form potential of a closed 1-form by successive single-variable antiderivatives."""
    chart = w.chart
    P = ZERO
    for j, name in enumerate(chart.coords):
        remainder = w.coeff(j) - differentiate(P, name)
        for earlier in chart.coords[:j]:
            if is_zero(differentiate(remainder, earlier)) is not ZeroVerdict.ZERO:
                raise UnsupportedCoefficient(
                    f"remainder {remainder} still depends on {earlier}; quadrature failed")
        try:
            P = P + antiderivative(remainder, name)
        except IntegrationError as exc:
            raise UnsupportedCoefficient(str(exc)) from None
    return DifferentialForm.scalar(chart, P)


def potential(w: DifferentialForm) -> DifferentialForm:
    """A (p−1)-form P with d(P) = w for a closed p-form w.

    Polynomial coefficients use the radial homotopy operator. A closed 1-form
    with other coefficients falls back to axis-by-axis antiderivatives over the
    rational-plus-log table. Everything else raises UnsupportedCoefficient.
    """
    if w.degree == 0:
        raise DegreeError("a 0-form has no potential")
    res = is_closed(w)
    if res.verdict is not ZeroVerdict.ZERO:
        raise NotClosed(f"form is not closed (verdict {res.verdict}); residual {res.residual}")
    if w.degree > w.chart.dim:
        return DifferentialForm.zero(w.chart, w.degree - 1)
    try:
        P = _homotopy(w)
    except UnsupportedCoefficient:
        if w.degree != 1:
            raise
        P = _axis_quadrature(w)
    check = exterior_derivative(P) - w
    if form_verdict(check) is not ZeroVerdict.ZERO:
        raise UnsupportedCoefficient(f"potential check failed: d(P) - w = {check}")
    return P


# ---------------------------------------------------------------------------
# Hodge star
# ---------------------------------------------------------------------------


def hodge_star(w: DifferentialForm, diagonal=None) -> DifferentialForm:
    """Hodge dual for a diagonal metric ``diag(g_1..g_n)`` (Euclidean by default).

    ``*(dx^I) = sign(I, I^c) * (Π_{i in I} 1/g_i) * sqrt|det g| dx^{I^c}``. With a
    signature list of ±1 this reduces to a product of signs.
    """
    chart = w.chart
    n = chart.dim
    g = [ONE] * n if diagonal is None else [normalize(as_expr(v)) for v in diagonal]
    if len(g) != n:
        raise MetricError(f"need {n} diagonal entries")
    if any(x == ZERO for x in g):
        raise MetricError("zero diagonal metric entry")
    det = ONE
    for x in g:
        det = det * x
    if isinstance(det, RationalConst):
        vol = abs(det.value)
        vol = normalize(Power(const(vol), const(Fraction(1, 2))))
    else:
        vol = normalize(Power(det, const(Fraction(1, 2))))
    terms: dict = {}
    full = tuple(range(n))
    for I, c in w._terms:
        comp = tuple(i for i in full if i not in I)
        factor = vol
        for i in I:
            factor = factor / g[i]
        v = c * factor
        if _perm_sign(I + comp) < 0:
            v = -v
        terms[comp] = v
    return DifferentialForm(chart, n - w.degree, terms)


# ---------------------------------------------------------------------------
# pullbacks and restrictions
# ---------------------------------------------------------------------------


def pullback(w: DifferentialForm, target: Chart, mapping) -> DifferentialForm:
    """Pull ``w`` back along ``x^a = mapping[a](target coords)``.

    ``mapping`` is a list in source-chart order or a ``{source coord: expr}``
    dict naming every source coordinate.
    """
    src = w.chart
    if isinstance(mapping, dict):
        keys = {k.name if isinstance(k, Symbol) else k for k in mapping}
        if keys != set(src.coords):
            raise ArityError(f"mapping must give every coordinate of {src}")
        exprs = [as_expr(mapping[k] if k in mapping else mapping[Symbol(k)]) for k in src.coords]
    else:
        exprs = [as_expr(m) for m in mapping]
        if len(exprs) != src.dim:
            raise ArityError(f"mapping has {len(exprs)} components, chart {src} needs {src.dim}")
    exprs = [normalize(e) for e in exprs]
    foreign = set(src.coords) - set(target.coords)
    for e in exprs:
        bad = e.free_symbols & foreign
        if bad:
            raise ChartMismatch(f"mapping uses source coordinates {sorted(bad)} not in target {target}")
    binding = dict(zip(src.coords, exprs))
    dphi = [DifferentialForm(target, 1, {(j,): differentiate(e, t) for j, t in enumerate(target.coords)})
            for e in exprs]
    p = w.degree
    out = DifferentialForm.zero(target, p)
    if p > target.dim:
        return out
    for I, c in w._terms:
        piece = DifferentialForm.scalar(target, substitute(c, binding))
        for i in I:
            piece = wedge(piece, dphi[i])
        out = out + piece
    return out


def restrict_to_pseudostructure(w: DifferentialForm, constraints) -> DifferentialForm:
    """Pull ``w`` back to the surface where each constrained coordinate equals its expression.

    ``constraints`` is a ``{coord: expr}`` dict or a list of pairs. Expressions
    may reference other constrained coordinates as long as the chain resolves.
    """
    chart = w.chart
    pairs = list(constraints.items()) if isinstance(constraints, dict) else list(constraints)
    solved = {}
    for name, e in pairs:
        name = name.name if isinstance(name, Symbol) else name
        if name not in chart.coords:
            raise ConstraintError(f"{name!r} is not a coordinate of {chart}")
        if name in solved:
            raise ConstraintError(f"{name!r} constrained twice")
        solved[name] = normalize(as_expr(e))
    remaining = [c for c in chart.coords if c not in solved]
    if not remaining:
        raise ConstraintError("constraints leave no free coordinates")
    for _ in range(len(solved) + 1):
        pending = {k: v for k, v in solved.items() if v.free_symbols & solved.keys()}
        if not pending:
            break
        solved = {k: substitute(v, {s: solved[s] for s in v.free_symbols & solved.keys()})
                  for k, v in solved.items()}
    else:
        raise ConstraintError("circular constraints")
    for k, v in solved.items():
        if k in v.free_symbols:
            raise ConstraintError(f"constraint for {k!r} is not explicit")
    target = Chart(remaining, params=chart.params, positive=chart.positive)
    mapping = {c: (solved[c] if c in solved else Symbol(c)) for c in chart.coords}
    return pullback(w, target, mapping)


def random_polynomial(rng, variables, max_degree=2, max_terms=3, coeff_range=3):
    """Small random polynomial with integer coefficients (test/demo helper)."""
    total = ZERO
    for _ in range(rng.randint(0, max_terms)):
        c = rng.randint(-coeff_range, coeff_range)
        if c == 0:
            continue
        mono = const(c)
        for v in variables:
            k = rng.randint(0, max_degree)
            if k:
                mono = mono * Symbol(v) ** k
        total = total + mono
    return total


def random_form(rng, chart, degree, **kw) -> DifferentialForm:
    terms = {}
    for idx in itertools.combinations(range(chart.dim), degree):
        terms[idx] = random_polynomial(rng, chart.coords, **kw)
    return DifferentialForm(chart, degree, terms)
