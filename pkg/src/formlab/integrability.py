"""Relations dψ ≅ ω, integrating factors, the Frobenius test and degree descent."""
from __future__ import annotations

from dataclasses import dataclass, field

from .chart import Connection
from .errors import (DegreeError, IntegrationError, NotClosed, NotClosedOnPseudostructure,
                     NotFound, UnsupportedCoefficient)
from .forms import (DifferentialForm, exterior_derivative, form_verdict, is_closed, potential,
                    restrict_to_pseudostructure, wedge)
from .scalar import (ONE, ZERO, Expr, ZeroVerdict, antiderivative, as_expr, differentiate, exp,
                     is_zero, normalize, to_text)

IDENTICAL = "Identical"
NONIDENTICAL = "Nonidentical"


@dataclass(frozen=True)
class Relation:
    """The relation ``d<lhs_label> ≅ rhs`` and its classification.

    For an identical relation ``potential`` holds P with d(P) = rhs. Otherwise
    ``residual`` holds the obstruction (d(rhs) or a Commutator1) and
    ``unproven`` marks an Unknown zero verdict.
    """

    lhs_label: str
    rhs: DifferentialForm
    status: str
    potential: DifferentialForm | None = None
    residual: object = None
    verdict: ZeroVerdict = ZeroVerdict.ZERO
    unproven: bool = False
    connection: Connection | None = field(default=None, compare=False)

    @property
    def identical(self) -> bool:
        return self.status == IDENTICAL

    @property
    def degree(self) -> int:
        return self.rhs.degree

    def to_json(self) -> dict:
        out = {"lhs": self.lhs_label, "rhs": self.rhs.to_json(), "status": self.status,
               "verdict": self.verdict.value, "unproven": self.unproven}
        if self.potential is not None:
            out["potential"] = self.potential.to_json()
        if self.residual is not None:
            out["residual"] = self.residual.to_json()
        return out

    def __str__(self):
        head = f"d{self.lhs_label} ≅ {self.rhs}: {self.status}"
        if self.identical:
            return f"{head}, potential {self.potential}"
        tail = " (unproven)" if self.unproven else ""
        return f"{head}{tail}, residual {self.residual}"


def classify_relation(psi_label: str, w: DifferentialForm,
                      connection: Connection | None = None) -> Relation:
    res = is_closed(w, connection)
    if res.verdict is ZeroVerdict.ZERO and w.degree > 0:
        try:
            P = potential(w) if connection is None else _torsion_free_potential(w, connection)
        except (UnsupportedCoefficient, NotClosed):
            P = None
        if P is not None:
            return Relation(psi_label, w, IDENTICAL, potential=P, verdict=res.verdict,
                            connection=connection)
    return Relation(psi_label, w, NONIDENTICAL, residual=res.residual, verdict=res.verdict,
                    unproven=res.verdict is not ZeroVerdict.NONZERO, connection=connection)


def _torsion_free_potential(w, connection):
    # a vanishing torsion commutator only yields a potential when d(w) itself vanishes
    if form_verdict(exterior_derivative(w)) is not ZeroVerdict.ZERO:
        return None
    return potential(w)


@dataclass(frozen=True)
class FrobeniusResult:
    product: DifferentialForm
    verdict: ZeroVerdict

    def to_json(self):
        return {"product": self.product.to_json(), "verdict": self.verdict.value}


def frobenius_test(w: DifferentialForm) -> FrobeniusResult:
    """``w ∧ dw`` and its zero verdict; Zero means an integrating factor exists locally."""
    if w.degree != 1:
        raise DegreeError("the Frobenius test takes a 1-form")
    product = wedge(w, exterior_derivative(w))
    if w.chart.dim <= 2:
        return FrobeniusResult(product, ZeroVerdict.ZERO)
    return FrobeniusResult(product, form_verdict(product))


@dataclass(frozen=True)
class IntegratingFactor:
    mu: Expr
    potential: Expr
    variable: str | None

    def to_json(self):
        return {"mu": to_text(self.mu), "potential": to_text(self.potential),
                "variable": self.variable}


def find_integrating_factor(w: DifferentialForm, order=None) -> IntegratingFactor:
    """Integrating factor μ(x_i) of ``M dx1 + N dx2`` from a single-variable ansatz.

    The ladder tries μ(x1) then μ(x2); ``order`` names the coordinates to try
    in a different sequence.
    """
    if w.degree != 1 or w.chart.dim != 2:
        raise DegreeError("find_integrating_factor needs a 1-form on a 2D chart")
    chart = w.chart
    x1, x2 = chart.coords
    M, N = w.coeff(0), w.coeff(1)
    if is_closed(w).verdict is ZeroVerdict.ZERO:
        return IntegratingFactor(ONE, potential(w).coeff(), None)
    gap = differentiate(M, x2) - differentiate(N, x1)
    ladder = {x1: (gap, N, x2), x2: (-gap, M, x1)}
    for var in (order or chart.coords):
        numerator, denom, other = ladder[chart.coords[chart.index(var)]]
        if denom == ZERO:
            continue
        ratio = normalize(numerator / denom)
        if other in ratio.free_symbols or is_zero(differentiate(ratio, other)) is not ZeroVerdict.ZERO:
            continue
        try:
            mu = normalize(exp(antiderivative(ratio, var)))
        except IntegrationError:
            continue
        scaled = w.scale(mu)
        if is_closed(scaled).verdict is not ZeroVerdict.ZERO:
            continue
        try:
            P = potential(scaled)
        except UnsupportedCoefficient:
            continue
        assert is_closed(scaled).verdict is ZeroVerdict.ZERO
        return IntegratingFactor(mu, P.coeff(), var)
    raise NotFound(f"no single-variable integrating factor for {w}")


@dataclass(frozen=True)
class DescentStep:
    """One descent step: the relation restricted to π and the relation one degree lower.

    ``signature`` records (p, k, n): the degree of the restricted form, the
    number of constraints imposed and the dimension of the chart it came from.
    """

    identical_on_pi: Relation
    next: Relation
    constraints: tuple
    signature: tuple

    def to_json(self):
        return {"constraints": [[k, to_text(v)] for k, v in self.constraints],
                "signature": list(self.signature),
                "identical_on_pi": self.identical_on_pi.to_json(),
                "next": self.next.to_json()}


def degree_descent(r: Relation, pi) -> DescentStep:
    """Restrict ``r.rhs`` to the pseudostructure ``pi`` and descend one degree.

    A relation whose right side is already closed descends on the whole chart
    and ``pi`` is ignored.
    """
    if r.identical:
        on_pi, cons = r, ()
    else:
        items = list(pi.items()) if isinstance(pi, dict) else list(pi)
        cons = tuple((str(k), normalize(as_expr(v))) for k, v in items)
        restricted = restrict_to_pseudostructure(r.rhs, cons)
        verdict = is_closed(restricted).verdict
        if verdict is not ZeroVerdict.ZERO:
            raise NotClosedOnPseudostructure(
                f"restriction to {dict((k, to_text(v)) for k, v in cons)} is not closed "
                f"(verdict {verdict.value})")
        if restricted.degree == 0:
            raise DegreeError("nothing left to descend: restriction is a 0-form")
        on_pi = classify_relation(r.lhs_label, restricted)
        if not on_pi.identical:
            raise NotClosedOnPseudostructure("closed restriction has no constructible potential")
    P = on_pi.potential
    check = exterior_derivative(P) - on_pi.rhs
    assert form_verdict(check) is ZeroVerdict.ZERO, "descent potential failed re-differentiation"
    label = f"{r.lhs_label}'"
    nxt = _classify_any(label, P)
    return DescentStep(on_pi, nxt, cons, (on_pi.rhs.degree, len(cons), r.rhs.chart.dim))


def _classify_any(label, P):
    if P.degree == 0:
        # a 0-form relation is the terminal function itself
        return Relation(label, P, IDENTICAL, potential=P, verdict=ZeroVerdict.ZERO)
    return classify_relation(label, P)


def descent_chain(r: Relation, constraints_list) -> list:
    """Run successive descents, one constraint set per step."""
    steps = []
    cur = r
    for pi in constraints_list:
        step = degree_descent(cur, pi)
        steps.append(step)
        cur = step.next
        if cur.degree == 0:
            break
    return steps


def demo_descent_chain():
    """x dy∧dz∧dw on (x, y, z, w), fixing one more coordinate to 1 at each step."""
    from .chart import Chart
    chart = Chart(["x", "y", "z", "w"])
    omega = DifferentialForm(chart, 3, {(1, 2, 3): "x"})
    r = classify_relation("psi", omega)
    return r, descent_chain(r, [{"x": 1}, {"y": 1}, {"z": 1}])
