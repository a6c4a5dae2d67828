"""Coordinate charts, metrics and connections.

Connection coefficients are stored as ``gamma[s][a][b]`` = Γ^s_{ab}, the upper
index first and the derivative-like index ``a`` second. Torsion uses the
ordering T^s_{ab} = Γ^s_{ba} − Γ^s_{ab}, the same order in which the torsion
term enters the 1-form commutator.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ChartMismatch, MetricError
from .scalar import (ONE, ZERO, Expr, Symbol, ZeroVerdict, as_expr, combine_verdicts,
                     differentiate, is_zero, normalize)


@dataclass(frozen=True)
class Chart:
    """An ordered coordinate system plus parameters and positivity assumptions."""

    coords: tuple
    params: frozenset = frozenset()
    positive: frozenset = frozenset()

    def __init__(self, coords, params=(), positive=()):
        coords = tuple(c.name if isinstance(c, Symbol) else str(c) for c in coords)
        params = frozenset(p.name if isinstance(p, Symbol) else str(p) for p in params)
        if not coords:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(coords)) != len(coords):
            raise ValueError(f"duplicate coordinate names in {coords}")
        if params & set(coords):
            raise ValueError(f"parameters overlap coordinates: {sorted(params & set(coords))}")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "positive", frozenset(positive))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, name) -> int:
        name = name.name if isinstance(name, Symbol) else name
        try:
            return self.coords.index(name)
        except ValueError:
            raise ChartMismatch(f"{name!r} is not a coordinate of chart {self.coords}") from None

    def symbol(self, i) -> Symbol:
        return Symbol(self.coords[i] if isinstance(i, int) else self.coords[self.index(i)])

    @property
    def symbols(self):
        return tuple(Symbol(c) for c in self.coords)

    def __str__(self):
        return "(" + ", ".join(self.coords) + ")"


def _expr_grid(values, shape):
    if len(shape) == 1:
        return tuple(normalize(as_expr(v)) for v in values)
    return tuple(_expr_grid(v, shape[1:]) for v in values)


@dataclass(frozen=True)
class Metric:
    """Symmetric n×n matrix of expressions; identity by default."""

    chart: Chart
    g: tuple = field(default=None)

    def __post_init__(self):
        n = self.chart.dim
        g = self.g
        if g is None:
            g = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
        if len(g) != n or any(len(row) != n for row in g):
            raise MetricError(f"metric must be {n}x{n}")
        g = _expr_grid(g, (n, n))
        object.__setattr__(self, "g", g)
        for i, j in itertools.combinations(range(n), 2):
            if is_zero(g[i][j] - g[j][i]) is not ZeroVerdict.ZERO:
                raise MetricError(f"metric is not symmetric at ({i}, {j})")

    @classmethod
    def diagonal(cls, chart, entries):
        n = chart.dim
        entries = list(entries)
        if len(entries) != n:
            raise MetricError(f"need {n} diagonal entries")
        return cls(chart, [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    def is_diagonal(self):
        n = self.chart.dim
        return all(self.g[i][j] == ZERO for i in range(n) for j in range(n) if i != j)

    def inverse(self):
        return _inverse(self.g)


@dataclass(frozen=True)
class Connection:
    """Connection coefficients ``gamma[s][a][b]`` = Γ^s_{ab}; zero by default."""

    chart: Chart
    gamma: tuple = field(default=None)

    def __post_init__(self):
        n = self.chart.dim
        gamma = self.gamma
        if gamma is None:
            gamma = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
        if len(gamma) != n or any(len(a) != n or any(len(b) != n for b in a) for a in gamma):
            raise ValueError(f"connection must be {n}x{n}x{n}")
        object.__setattr__(self, "gamma", _expr_grid(gamma, (n, n, n)))

    @classmethod
    def from_components(cls, chart, components):
        """Build from ``{(upper, lower1, lower2): expr}`` using names or 0-based indices."""
        n = chart.dim
        gamma = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
        for key, value in components.items():
            s, a, b = (k if isinstance(k, int) else chart.index(k) for k in key)
            gamma[s][a][b] = as_expr(value)
        return cls(chart, gamma)

    def __call__(self, s, a, b) -> Expr:
        return self.gamma[s][a][b]

    def is_zero_array(self):
        return all(x == ZERO for plane in self.gamma for row in plane for x in row)


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = ZERO
    for j in range(n):
        if m[0][j] == ZERO:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _inverse(g):
    n = len(g)
    if all(g[i][j] == ZERO for i in range(n) for j in range(n) if i != j):
        for i in range(n):
            if g[i][i] == ZERO:
                raise MetricError("singular metric")
        return tuple(tuple((ONE / g[i][i]) if i == j else ZERO for j in range(n)) for i in range(n))
    det = _det([list(r) for r in g])
    if det == ZERO:
        raise MetricError("singular metric")
    inv = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:i] + row[i + 1:] for k, row in enumerate(g) if k != j]
            cof = _det([list(r) for r in minor]) if minor else ONE
            inv[i][j] = cof / det if (i + j) % 2 == 0 else -(cof / det)
    return tuple(tuple(r) for r in inv)


def christoffel(metric: Metric) -> Connection:
    """Symmetric (Levi-Civita) connection of ``metric``."""
    chart = metric.chart
    n = chart.dim
    g = metric.g
    ginv = metric.inverse()
    x = chart.coords
    dg = [[[differentiate(g[i][j], x[k]) for k in range(n)] for j in range(n)] for i in range(n)]
    gamma = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for s in range(n):
        for a in range(n):
            for b in range(a, n):
                total = ZERO
                for lam in range(n):
                    if ginv[s][lam] == ZERO:
                        continue
                    total = total + ginv[s][lam] * (dg[lam][b][a] + dg[lam][a][b] - dg[a][b][lam])
                total = total / 2
                gamma[s][a][b] = gamma[s][b][a] = total
    return Connection(chart, gamma)


def torsion(c: Connection):
    """T^s_{ab} = Γ^s_{ba} − Γ^s_{ab} as a nested n×n×n tuple."""
    n = c.chart.dim
    G = c.gamma
    return tuple(tuple(tuple(G[s][b][a] - G[s][a][b] for b in range(n)) for a in range(n))
                 for s in range(n))


def riemann(c: Connection):
    """R^m_{nrs} = ∂_r Γ^m_{sn} − ∂_s Γ^m_{rn} + Γ^m_{rl} Γ^l_{sn} − Γ^m_{sl} Γ^l_{rn}.

    The first lower index of Γ is the differentiation direction, as in the
    torsion-augmented commutator. Returned as ``R[m][nu][r][s]``;
    antisymmetric in the last two indices.
    """
    n = c.chart.dim
    G = c.gamma
    x = c.chart.coords
    R = [[[[ZERO] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for m, nu in itertools.product(range(n), repeat=2):
        for r in range(n):
            for s in range(r + 1, n):
                total = differentiate(G[m][s][nu], x[r]) - differentiate(G[m][r][nu], x[s])
                for lam in range(n):
                    total = total + G[m][r][lam] * G[lam][s][nu] - G[m][s][lam] * G[lam][r][nu]
                R[m][nu][r][s] = total
                R[m][nu][s][r] = -total
    return tuple(tuple(tuple(tuple(row) for row in plane) for plane in block) for block in R)


def _flatten(arr):
    if isinstance(arr, Expr):
        yield arr
        return
    for a in arr:
        yield from _flatten(a)


def array_verdict(arr) -> ZeroVerdict:
    """Combined zero verdict over every component of a nested expression array."""
    return combine_verdicts(is_zero(x) for x in _flatten(arr))


@dataclass(frozen=True)
class MetricClosureReport:
    metric_symmetric: ZeroVerdict
    torsion_zero: ZeroVerdict
    curvature_zero: ZeroVerdict

    def as_dict(self):
        return {"metric_symmetric": str(self.metric_symmetric),
                "torsion_zero": str(self.torsion_zero),
                "curvature_zero": str(self.curvature_zero)}


def metric_closure_report(chart: Chart, metric: Metric | None = None,
                          connection: Connection | None = None) -> MetricClosureReport:
    """Zero verdicts for the metric-form commutators: symmetry, torsion and curvature."""
    metric = metric or Metric(chart)
    connection = connection or Connection(chart)
    if metric.chart.coords != chart.coords or connection.chart.coords != chart.coords:
        raise ChartMismatch("metric and connection must live on the given chart")
    n = chart.dim
    sym = combine_verdicts(is_zero(metric.g[i][j] - metric.g[j][i])
                           for i in range(n) for j in range(n))
    return MetricClosureReport(sym, array_verdict(torsion(connection)),
                               array_verdict(riemann(connection)))
