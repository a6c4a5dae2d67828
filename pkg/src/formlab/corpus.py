"""Worked physical cases: thermodynamics, gas-dynamic instability, electromagnetic waves.

Each case builder returns a CaseReport whose checks carry the value found,
the value expected and a short anchor describing what the check reproduces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .chart import Chart
from .errors import UnmappedCombination
from .forms import (DifferentialForm, commutator_1form, exterior_derivative, form_verdict,
                    restrict_to_pseudostructure)
from .integrability import classify_relation, find_integrating_factor
from .scalar import (ZERO, Builtin, Expr, Opaque, Power, Product, Sum, Symbol, ZeroVerdict,
                     differentiate, evaluate_numeric, expand_log, is_zero, normalize, opaque, parse_expr, substitute, to_text)


@dataclass(frozen=True)
class Check:
    """One named assertion. ``expected`` is a ZeroVerdict, a string, or a float tolerance."""

    name: str
    value: object
    expected: object
    passed: bool
    anchor: str
    detail: str = ""

    def to_json(self):
        def enc(v):
            if isinstance(v, ZeroVerdict):
                return v.value
            if isinstance(v, Expr):
                return to_text(v)
            return v
        return {"name": self.name, "value": enc(self.value), "expected": enc(self.expected),
                "passed": self.passed, "anchor": self.anchor, "detail": self.detail}


@dataclass
class CaseReport:
    case_id: str
    relations: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    anchors: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, name, value, expected, anchor, detail="", tolerance=None):
        if any(c.name == name for c in self.checks):
            raise ValueError(f"duplicate check name {name!r}")
        if tolerance is not None:
            passed = isinstance(value, float) and math.isfinite(value) and abs(value) < tolerance
            expected = f"< {tolerance:g}"
        elif isinstance(expected, ZeroVerdict):
            passed = value is expected
        else:
            passed = value == expected
        self.checks.append(Check(name, value, expected, passed, anchor, detail))
        if anchor not in self.anchors:
            self.anchors.append(anchor)
        return passed

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self):
        return {"case": self.case_id, "passed": self.passed,
                "relations": [r.to_json() for r in self.relations],
                "checks": [c.to_json() for c in self.checks],
                "anchors": list(self.anchors), "notes": list(self.notes)}

    def summary(self) -> str:
        lines = [f"case {self.case_id}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            v = c.value.value if isinstance(c.value, ZeroVerdict) else c.value
            v = to_text(v) if isinstance(v, Expr) else v
            mark = "ok " if c.passed else "BAD"
            lines.append(f"  [{mark}] {c.name} = {v}  ({c.anchor})")
            if c.detail:
                lines.append(f"        {c.detail}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)


def _verdict_diff(a: Expr, b) -> ZeroVerdict:
    return is_zero(normalize(a - b))


def _forms_equal(a: DifferentialForm, b: DifferentialForm) -> ZeroVerdict:
    return form_verdict(a - b)


# ---------------------------------------------------------------------------
# thermodynamics
# ---------------------------------------------------------------------------

THERMO_NUMBERS = {"R": 8.314462618, "c_v": 20.8, "T": 300.0, "V": 0.0224}


def thermo_chart() -> Chart:
    return Chart(["T", "V"], params=["R", "c_v", "V0"], positive=["T", "V", "R", "c_v", "V0"])


def thermo_form(chart=None) -> DifferentialForm:
    """dE + p dV with E = c_v T and p = R T / V."""
    chart = chart or thermo_chart()
    E = parse_expr("c_v*T")
    p = parse_expr("R*T/V")
    dE = exterior_derivative(DifferentialForm.scalar(chart, E))
    return dE + DifferentialForm(chart, 1, {(chart.index("V"),): p})


def thermo_case() -> CaseReport:
    rep = CaseReport("thermo")
    chart = thermo_chart()
    T = Symbol("T")
    omega = thermo_form(chart)
    rel = classify_relation("S", omega)
    rep.relations.append(rel)

    # (a) heat influx is not a differential
    dw = exterior_derivative(omega)
    expected_residual = DifferentialForm(chart, 2, {(0, 1): parse_expr("R/V")})
    rep.add("omega_nonclosed", form_verdict(dw), ZeroVerdict.NONZERO,
            "first principle: dE + p dV is not closed", f"d(omega) = {dw}")
    rep.add("omega_residual_is_R_over_V", _forms_equal(dw, expected_residual), ZeroVerdict.ZERO,
            "first principle: commutator of dE + p dV", f"expected {expected_residual}")
    rep.add("relation_nonidentical", rel.status, "Nonidentical",
            "first principle: nonidentical relation")

    # (b) integrating factor found automatically
    factor = find_integrating_factor(omega)
    rep.add("integrating_factor_is_1_over_T", _verdict_diff(factor.mu, 1 / T), ZeroVerdict.ZERO,
            "temperature as integrating factor", f"mu = {to_text(factor.mu)}")
    scaled = omega.scale(factor.mu)
    rep.add("scaled_form_closed", form_verdict(exterior_derivative(scaled)), ZeroVerdict.ZERO,
            "(dE + p dV)/T is a differential")

    # (c) entropy as potential
    S = factor.potential
    S_expected = parse_expr("c_v*ln(T) + R*ln(V)")
    dS = exterior_derivative(DifferentialForm.scalar(chart, S))
    rep.add("entropy_potential", _verdict_diff(S, S_expected), ZeroVerdict.ZERO,
            "entropy as potential of the scaled form", f"S = {to_text(S)}")
    rep.add("scaled_form_equals_dS", _forms_equal(scaled, dS), ZeroVerdict.ZERO,
            "(dE + p dV)/T = dS")
    rep.add("ddS_zero", form_verdict(exterior_derivative(dS)), ZeroVerdict.ZERO,
            "exact forms are closed")
    rep.relations.append(classify_relation("S", scaled))
    nums = dict(THERMO_NUMBERS)
    s2 = evaluate_numeric(S, {**nums, "T": 2 * nums["T"]})
    s1 = evaluate_numeric(S, nums)
    rep.add("entropy_doubling_T", float(s2 - s1 - nums["c_v"] * math.log(2)), None,
            "entropy change on doubling T at fixed V", tolerance=1e-12)

    # adiabat: the heat form vanishes on the pseudostructure and S is constant there
    adiabat = {"V": parse_expr("V0*T^(-c_v/R)")}
    on_adiabat = restrict_to_pseudostructure(omega, adiabat)
    rep.add("adiabat_pullback_zero", form_verdict(on_adiabat), ZeroVerdict.ZERO,
            "dE + p dV vanishes along the adiabat", f"pullback = {on_adiabat}")
    S_on = expand_log(substitute(S, adiabat), chart.positive)
    rep.add("entropy_constant_on_adiabat", is_zero(differentiate(S_on, "T")), ZeroVerdict.ZERO,
            "entropy is constant only along the integrating direction", f"S = {to_text(S_on)}")

    # (d) extra actions besides heat influx
    dW = DifferentialForm(chart, 1, {(0,): opaque("W", "V")})
    dG = DifferentialForm(chart, 1, {(1,): opaque("G", "T")})
    dQ = omega - dW - dG
    heat_over_T = dQ.scale(1 / T)
    gap = dS - heat_over_T
    extra = (dW + dG).scale(1 / T)
    rep.add("heat_form_not_exact", form_verdict(exterior_derivative(dQ)), ZeroVerdict.NONZERO,
            "heat influx with extra actions is not a differential")
    rep.add("entropy_gap_is_extra_actions", _forms_equal(gap, extra), ZeroVerdict.ZERO,
            "dS = (dQ + dW + dG)/T", f"dS - dQ/T = {gap}")
    names = set()
    for c in exterior_derivative(heat_over_T).components():
        names |= _opaque_names(c)
    rep.add("residual_has_extra_action_terms", ",".join(sorted(names)), "G,W",
            "second principle with inequality",
            "positive dissipation assumed for W and G, so dS > dQ/T")
    rep.notes.append("dS > dQ/T is reported from the declared positivity of the extra "
                     "actions W and G; it is not proven symbolically")
    return rep


def _opaque_names(e) -> set:
    if isinstance(e, Opaque):
        return {e.name} | _opaque_names(e.arg)
    if isinstance(e, (Builtin,)):
        return _opaque_names(e.arg)
    if isinstance(e, Power):
        return _opaque_names(e.base) | _opaque_names(e.exponent)
    if isinstance(e, (Product, Sum)):
        out = set()
        for x in (e.factors if isinstance(e, Product) else e.terms):
            out |= _opaque_names(x)
        return out
    return set()


# ---------------------------------------------------------------------------
# gas dynamics
# ---------------------------------------------------------------------------

NONSTATIONARITY = "nonstationarity"
MULTIPLE_CONNECTIVITY = "multiple_connectivity"
NONPOTENTIAL_FORCE = "nonpotential_force"
TRANSPORT = "transport"

HYPERBOLIC = "Hyperbolic"
ELLIPTIC = "Elliptic"
PARABOLIC = "Parabolic"

SHOCK = "weak_shock_or_shock_wave"
VORTEX = "vortex_large_scale"
TURBULENCE = "turbulent_pulsation"

# momentum-side summands: label -> tag (None: gradient term, never contributes)
A_NU_TERMS = {"grad_h0": None, "U_rot_U": MULTIPLE_CONNECTIVITY,
              "U_F": NONPOTENTIAL_FORCE, "dU_dt": NONSTATIONARITY}
# energy-side summands for viscous heat-conducting gas
A_1_TERMS = {"heat_flux_divergence": TRANSPORT, "heat_flux_temperature": TRANSPORT,
             "viscous_stress": TRANSPORT}


@dataclass(frozen=True)
class InstabilityRule:
    contributing_terms: frozenset
    equation_type: str
    predicted: str


_RULES = (
    InstabilityRule(frozenset({NONSTATIONARITY}), HYPERBOLIC, SHOCK),
    InstabilityRule(frozenset({MULTIPLE_CONNECTIVITY, NONPOTENTIAL_FORCE}), HYPERBOLIC, SHOCK),
    InstabilityRule(frozenset({MULTIPLE_CONNECTIVITY, NONPOTENTIAL_FORCE}), ELLIPTIC, VORTEX),
    InstabilityRule(frozenset({TRANSPORT, MULTIPLE_CONNECTIVITY}), HYPERBOLIC, TURBULENCE),
    InstabilityRule(frozenset({TRANSPORT, MULTIPLE_CONNECTIVITY}), ELLIPTIC, TURBULENCE),
    InstabilityRule(frozenset({TRANSPORT, MULTIPLE_CONNECTIVITY}), PARABOLIC, TURBULENCE),
)


def classify_instability(contributions, equation_type) -> str:
    """Structure predicted for a set of contribution tags and an equation type."""
    tags = frozenset(contributions)
    if not tags:
        raise UnmappedCombination("no contributing terms")
    for rule in _RULES:
        if rule.contributing_terms == tags and rule.equation_type == equation_type:
            return rule.predicted
    raise UnmappedCombination(f"no rule for {sorted(tags)} with {equation_type} equations")


def equation_type_for(mach: float) -> str:
    """Hyperbolic for supersonic flow, elliptic for subsonic."""
    if mach > 1:
        return HYPERBOLIC
    if mach < 1:
        return ELLIPTIC
    raise UnmappedCombination("sonic flow has no listed equation type")


def gas_chart() -> Chart:
    return Chart(["xi1", "xi2"])


def gas_form(active_nu=(), active_1=(), include_gradient=True):
    """ω = A_1 dξ1 + A_2 dξ2 with the selected labeled summands switched on.

    Active summands are opaque functions of ξ1 + ξ2 (on A_2) or of ξ2 (on A_1);
    the gradient term depends on ξ2 alone.
    """
    chart = gas_chart()
    along = parse_expr("xi1 + xi2")
    across = Symbol("xi2")
    A2 = {}
    for label in A_NU_TERMS:
        if label == "grad_h0":
            if include_gradient:
                A2[label] = opaque(label, across)
        elif label in active_nu:
            A2[label] = opaque(label, along)
    A1 = {label: opaque(label, across) for label in A_1_TERMS if label in active_1}
    a1 = sum(A1.values(), ZERO)
    a2 = sum(A2.values(), ZERO)
    return DifferentialForm(chart, 1, {(0,): a1, (1,): a2}), A1, A2


def gas_contributions(A1: dict, A2: dict):
    """Per-label summands of K12 = ∂A_2/∂ξ1 − ∂A_1/∂ξ2 and the tags of nonzero ones."""
    parts = {}
    tags = set()
    for label, e in A2.items():
        c = differentiate(e, "xi1")
        parts[label] = c
        if is_zero(c) is ZeroVerdict.NONZERO:
            tags.add(A_NU_TERMS[label])
    for label, e in A1.items():
        c = -differentiate(e, "xi2")
        parts[label] = c
        if is_zero(c) is ZeroVerdict.NONZERO:
            tags.add(A_1_TERMS[label])
    return parts, tags


GAS_CONFIGURATIONS = (
    ("nonstationary_ideal_flow", ("dU_dt",), (), HYPERBOLIC, {NONSTATIONARITY}, SHOCK,
     "nonstationarity in hyperbolic flow gives weak shocks and shock waves"),
    ("supersonic_body_flow", ("U_rot_U", "U_F"), (), HYPERBOLIC,
     {MULTIPLE_CONNECTIVITY, NONPOTENTIAL_FORCE}, SHOCK,
     "convective instability with U > a gives weak shocks and shock waves"),
    ("subsonic_body_flow", ("U_rot_U", "U_F"), (), ELLIPTIC,
     {MULTIPLE_CONNECTIVITY, NONPOTENTIAL_FORCE}, VORTEX,
     "convective instability with U < a gives vortex structures"),
    ("boundary_layer", ("U_rot_U",), ("heat_flux_temperature", "viscous_stress"), PARABOLIC,
     {TRANSPORT, MULTIPLE_CONNECTIVITY}, TURBULENCE,
     "transport plus multiple connectivity gives turbulent pulsations"),
)


def gasdynamics_case() -> CaseReport:
    rep = CaseReport("gas")
    for name, nu, one, eq_type, tags_expected, outcome, anchor in GAS_CONFIGURATIONS:
        omega, A1, A2 = gas_form(nu, one)
        rel = classify_relation("s", omega)
        rep.relations.append(rel)
        parts, tags = gas_contributions(A1, A2)
        K = commutator_1form(omega).component(0, 1)
        total = sum(parts.values(), ZERO)
        rep.add(f"{name}.commutator_nonzero", is_zero(K), ZeroVerdict.NONZERO, anchor,
                f"K12 = {to_text(K)}")
        rep.add(f"{name}.breakdown_sums_to_K", _verdict_diff(total, K), ZeroVerdict.ZERO,
                "commutator assembled term by term")
        rep.add(f"{name}.tags", ",".join(sorted(tags)), ",".join(sorted(tags_expected)), anchor)
        rep.add(f"{name}.structure", classify_instability(tags, eq_type), outcome, anchor,
                f"{eq_type} equations")
    omega, _, _ = gas_form((), (), include_gradient=False)
    rel = classify_relation("s", omega)
    rep.relations.append(rel)
    rep.add("all_terms_zero.identical", rel.status, "Identical",
            "no contributing term, entropy is a state function")
    omega, A1, A2 = gas_form((), ())
    _, tags = gas_contributions(A1, A2)
    rep.add("gradient_term_silent", len(tags), 0, "the enthalpy gradient term never contributes")
    try:
        classify_instability({NONSTATIONARITY, TRANSPORT}, ELLIPTIC)
        unmapped = "classified"
    except UnmappedCombination:
        unmapped = "UnmappedCombination"
    rep.add("unlisted_combination_rejected", unmapped, "UnmappedCombination",
            "only the three listed configurations are classified")
    return rep


# ---------------------------------------------------------------------------
# electromagnetic field
# ---------------------------------------------------------------------------


def em_chart() -> Chart:
    return Chart(["l1", "t"], params=["c"], positive=["c"])


def em_rhs(chart, I, Q_l, Q_t) -> DifferentialForm:
    """Right side ω = −dI + (Q_l dl1 + Q_t dt); the wave condition is ω = 0."""
    dI = exterior_derivative(DifferentialForm.scalar(chart, I))
    return -dI + DifferentialForm(chart, 1, {(0,): Q_l, (1,): Q_t})


def em_case() -> CaseReport:
    rep = CaseReport("em")
    chart = em_chart()
    phase = parse_expr("l1 - c*t")
    I = opaque("g", phase)

    # (b) independent energetic and force actions: right side nonclosed
    omega = em_rhs(chart, I, opaque("Qi", "t"), opaque("Qe", "l1"))
    rel = classify_relation("S", omega)
    rep.relations.append(rel)
    rep.add("unconjugated_actions_nonclosed", rel.verdict, ZeroVerdict.NONZERO,
            "energetic and force actions are not conjugated",
            f"residual {rel.residual}")
    rep.add("unconjugated_relation", rel.status, "Nonidentical",
            "Poynting module is a functional")

    # (c) plane wave with matched actions
    S = opaque("f", phase)
    Q_l = differentiate(I, "l1")
    Q_t = differentiate(I, "t")
    omega_w = em_rhs(chart, I, Q_l, Q_t)
    rep.add("matched_actions_rhs_vanishes", form_verdict(omega_w), ZeroVerdict.ZERO,
            "right side vanishes when actions match the field derivatives",
            f"Q_l1 = {to_text(Q_l)}, Q_t = {to_text(Q_t)}")
    rel_w = classify_relation("S", omega_w)
    rep.relations.append(rel_w)
    rep.add("matched_relation_identical", rel_w.status, "Identical", "dS = 0 on the wave")
    on_front = restrict_to_pseudostructure(
        exterior_derivative(DifferentialForm.scalar(chart, S)), {"l1": parse_expr("c*t + l0")})
    rep.add("dS_zero_on_front", form_verdict(on_front), ZeroVerdict.ZERO,
            "Poynting module is closed along the wave front", f"pullback = {on_front}")

    # (d) integrating direction
    ratio = normalize(-differentiate(S, "t") / differentiate(S, "l1"))
    rep.add("integrating_direction_is_c", to_text(ratio), "c",
            "integrating direction dl1/dt = c", "exact symbolic equality after normalization")
    rep.add("integrating_direction_verdict", _verdict_diff(ratio, Symbol("c")), ZeroVerdict.ZERO,
            "integrating direction dl1/dt = c")

    # trivial fixture: no actions, constant module
    zero_rel = classify_relation("S", DifferentialForm.zero(chart, 1))
    rep.add("zero_actions_trivially_closed", zero_rel.status, "Identical",
            "constant module with no actions")
    return rep


CASES = {"thermo": thermo_case, "gas": gasdynamics_case, "em": em_case}


def run_case(name: str):
    """Run one case by name, or all of them for ``"all"``."""
    if name == "all":
        return [fn() for fn in CASES.values()]
    if name not in CASES:
        raise KeyError(f"unknown case {name!r}; choose from {sorted(CASES)} or 'all'")
    return [CASES[name]()]
