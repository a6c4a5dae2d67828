import itertools
import math

import pytest

from formlab.corpus import (ELLIPTIC, HYPERBOLIC, MULTIPLE_CONNECTIVITY, NONPOTENTIAL_FORCE,
                            NONSTATIONARITY, PARABOLIC, SHOCK, TRANSPORT, TURBULENCE, VORTEX,
                            CaseReport, classify_instability, em_case, equation_type_for,
                            gas_contributions, gas_form, gasdynamics_case, run_case, thermo_case)
from formlab.errors import UnmappedCombination
from formlab.scalar import ZeroVerdict, evaluate_numeric, parse_expr

ALL_TAGS = (NONSTATIONARITY, MULTIPLE_CONNECTIVITY, NONPOTENTIAL_FORCE, TRANSPORT)


@pytest.fixture(scope="module")
def reports():
    return {r.case_id: r for r in run_case("all")}


def test_all_cases_pass(reports):
    assert set(reports) == {"thermo", "gas", "em"}
    for r in reports.values():
        assert r.passed, r.summary()


def test_equalities_are_decided(reports):
    # every check that expects Zero got Zero, never Unknown
    for r in reports.values():
        for c in r.checks:
            assert c.value is not ZeroVerdict.UNKNOWN


class TestThermo:
    def test_core_checks(self, reports):
        r = reports["thermo"]
        assert r.check("omega_nonclosed").value is ZeroVerdict.NONZERO
        assert r.check("integrating_factor_is_1_over_T").detail == "mu = 1/T"
        assert r.check("entropy_potential").detail == "S = R*ln(V) + c_v*ln(T)"
        assert r.check("ddS_zero").value is ZeroVerdict.ZERO
        assert r.check("entropy_doubling_T").value < 1e-12

    def test_entropy_doubling_by_hand(self):
        S = parse_expr("c_v*ln(T) + R*ln(V)")
        env = {"c_v": 20.8, "R": 8.314, "T": 300.0, "V": 0.02}
        gap = evaluate_numeric(S, {**env, "T": 600.0}) - evaluate_numeric(S, env)
        assert abs(gap - 20.8 * math.log(2)) < 1e-12

    def test_second_principle_structural(self, reports):
        r = reports["thermo"]
        assert r.check("heat_form_not_exact").value is ZeroVerdict.NONZERO
        assert r.check("residual_has_extra_action_terms").value == "G,W"
        assert r.notes

    def test_unique_names(self):
        rep = CaseReport("x")
        rep.add("a", ZeroVerdict.ZERO, ZeroVerdict.ZERO, "anchor")
        with pytest.raises(ValueError):
            rep.add("a", ZeroVerdict.ZERO, ZeroVerdict.ZERO, "anchor")


class TestGas:
    def test_nonstationary_only(self):
        _, A1, A2 = gas_form(("dU_dt",))
        _, tags = gas_contributions(A1, A2)
        assert tags == {NONSTATIONARITY}

    def test_all_zero_identical(self):
        omega, A1, A2 = gas_form(include_gradient=False)
        assert omega.is_trivially_zero()
        _, tags = gas_contributions(A1, A2)
        assert not tags

    def test_viscous(self):
        _, A1, A2 = gas_form(("U_rot_U",), ("viscous_stress",))
        _, tags = gas_contributions(A1, A2)
        assert tags == {TRANSPORT, MULTIPLE_CONNECTIVITY}

    def test_configurations(self, reports):
        r = reports["gas"]
        assert r.check("nonstationary_ideal_flow.structure").value == SHOCK
        assert r.check("subsonic_body_flow.structure").value == VORTEX
        assert r.check("boundary_layer.structure").value == TURBULENCE


class TestClassifier:
    def test_listed(self):
        assert classify_instability({NONSTATIONARITY}, HYPERBOLIC) == SHOCK
        assert classify_instability({MULTIPLE_CONNECTIVITY, NONPOTENTIAL_FORCE}, HYPERBOLIC) == SHOCK
        assert classify_instability({MULTIPLE_CONNECTIVITY, NONPOTENTIAL_FORCE}, ELLIPTIC) == VORTEX
        assert classify_instability({TRANSPORT, MULTIPLE_CONNECTIVITY}, PARABOLIC) == TURBULENCE

    def test_unlisted_all_error(self):
        listed = {
            (frozenset({NONSTATIONARITY}), HYPERBOLIC),
            (frozenset({MULTIPLE_CONNECTIVITY, NONPOTENTIAL_FORCE}), HYPERBOLIC),
            (frozenset({MULTIPLE_CONNECTIVITY, NONPOTENTIAL_FORCE}), ELLIPTIC),
        } | {(frozenset({TRANSPORT, MULTIPLE_CONNECTIVITY}), t)
             for t in (HYPERBOLIC, ELLIPTIC, PARABOLIC)}
        for k in range(0, len(ALL_TAGS) + 1):
            for tags in itertools.combinations(ALL_TAGS, k):
                for eq in (HYPERBOLIC, ELLIPTIC, PARABOLIC):
                    if (frozenset(tags), eq) in listed:
                        classify_instability(tags, eq)
                    else:
                        with pytest.raises(UnmappedCombination):
                            classify_instability(tags, eq)

    def test_mach(self):
        assert equation_type_for(2.0) == HYPERBOLIC
        assert equation_type_for(0.3) == ELLIPTIC
        with pytest.raises(UnmappedCombination):
            equation_type_for(1.0)


class TestEM:
    def test_integrating_direction_is_symbol(self, reports):
        c = reports["em"].check("integrating_direction_is_c")
        assert c.passed and c.value == "c"

    def test_mismatch_nonidentical(self, reports):
        r = reports["em"]
        assert r.check("unconjugated_actions_nonclosed").value is ZeroVerdict.NONZERO
        assert r.check("unconjugated_relation").value == "Nonidentical"
        assert r.check("zero_actions_trivially_closed").value == "Identical"


def test_individual_runners():
    assert thermo_case().passed and gasdynamics_case().passed and em_case().passed
    with pytest.raises(KeyError):
        run_case("nope")
