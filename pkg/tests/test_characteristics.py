import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from formlab import (FirstOrderPDE, canonical_relations, characteristic_system, functional_status,
                     integrate_characteristics, verify_along)
from formlab.characteristics import harmonic_hj, hj_du_consistency
from formlab.errors import DegenerateError, GridError, NonFinite, UnboundSymbol
from formlab.scalar import ZERO, ZeroVerdict, parse_expr

TWO_PI = 2 * math.pi


def P(text):
    return parse_expr(text)


class TestSystem:
    def test_linear(self):
        sys = characteristic_system(FirstOrderPDE(["x"], "p_x - 1"))
        assert sys.dx == (P("1"),) and sys.dp == (ZERO,) and sys.du == P("p_x")

    def test_harmonic(self):
        sys = characteristic_system(harmonic_hj())
        assert sys.dx == (P("1"), P("p_x"))
        assert sys.dp == (ZERO, P("-x"))
        assert sys.du == P("p_t + p_x^2")

    def test_u_dependence(self):
        sys = characteristic_system(FirstOrderPDE(["x", "y"], "p_x*p_y - u"))
        assert sys.dp == (P("p_x"), P("p_y"))
        assert sys.du == P("2*p_x*p_y")

    def test_errors(self):
        with pytest.raises(UnboundSymbol):
            FirstOrderPDE(["x"], "p_x + q")
        with pytest.raises(DegenerateError):
            FirstOrderPDE(["x"], "x^2 - u")

    def test_json(self):
        j = characteristic_system(harmonic_hj()).to_json()
        assert j["dx"] == ["1", "p_x"] and j["du"] == "p_t + p_x^2"


class TestCanonical:
    def test_oscillator(self):
        c = canonical_relations("(p_x^2 + x^2)/2", ["x"])
        assert c.dx == (P("p_x"),) and c.dp == (P("-x"),)

    def test_constant(self):
        c = canonical_relations("3", ["x"])
        assert c.dx == (ZERO,) and c.dp == (ZERO,)

    def test_transport(self):
        c = canonical_relations("p_x*v", ["x"])
        assert c.dx == (P("v"),) and c.dp == (ZERO,)

    def test_du_consistency(self):
        assert hj_du_consistency("(p_x^2 + x^2)/2", ["x"]) is ZeroVerdict.ZERO
        assert hj_du_consistency("p_x^3*t + x*p_y^2 + y", ["x", "y"]) is ZeroVerdict.ZERO


class TestIntegrate:
    def test_harmonic(self):
        sys = characteristic_system(harmonic_hj())
        traj = integrate_characteristics(sys, [0, 0, -0.5, 1, 0], TWO_PI, 1e-3)
        assert len(traj) == math.ceil(TWO_PI / 1e-3) + 1
        assert traj.s[-1] == TWO_PI
        assert abs(traj.x[-1, 1]) < 1e-8 and abs(traj.p[-1, 1] - 1) < 1e-8
        # oracle: u = sin(2s)/4 along the characteristic through (0, 0)
        assert np.max(np.abs(traj.u - np.sin(2 * traj.s) / 4)) < 1e-8
        rep = verify_along(harmonic_hj(), traj)
        assert rep.max_F_residual < 1e-8 and rep.max_theta_residual < 1e-8

    def test_energy_conserved(self):
        c = canonical_relations("(p_x^2 + x^2)/2", ["x"])
        traj = integrate_characteristics(c, {"x": 0.3, "p_x": 0.7, "u": 0}, TWO_PI, 1e-3)
        E = 0.5 * (traj.p[:, 0] ** 2 + traj.x[:, 0] ** 2)
        assert np.max(np.abs(E - E[0])) < 1e-8

    def test_zero_system_constant(self):
        c = canonical_relations("0", ["x"])
        traj = integrate_characteristics(c, [1.5, 2.0, 3.0], 1.0, 0.1)
        assert np.all(traj.x == 1.5) and np.all(traj.p == 2.0) and np.all(traj.u == 3.0)
        assert traj.singular and traj.singular[0] == 0.0

    def test_linear_exact(self):
        sys = characteristic_system(FirstOrderPDE(["x"], "p_x - 1"))
        traj = integrate_characteristics(sys, [0.25, 1, 0], 2.0, 0.1)
        assert np.allclose(traj.x[:, 0], 0.25 + traj.s, atol=1e-14, rtol=0)
        assert not traj.singular

    def test_transport_residuals(self):
        pde = FirstOrderPDE(["t", "x"], "p_t + v*p_x", params=["v"])
        sys = characteristic_system(pde)
        traj = integrate_characteristics(sys, [0, 0, -2, 1, 0], 3.0, 0.01, {"v": 2.0})
        rep = verify_along(pde, traj, {"v": 2.0})
        assert rep.max_F_residual < 1e-13 and rep.max_theta_residual < 1e-13

    def test_missing_param(self):
        pde = FirstOrderPDE(["t", "x"], "p_t + v*p_x", params=["v"])
        with pytest.raises(UnboundSymbol):
            integrate_characteristics(characteristic_system(pde), [0, 0, 0, 0, 0], 1, 0.1)

    def test_blow_up(self):
        sys = characteristic_system(FirstOrderPDE(["x"], "p_x - u^2"))
        # du/ds = p_x = u^2 blows up at s = 1 for u(0) = 1
        with pytest.raises(NonFinite) as info, np.errstate(over="ignore"):
            integrate_characteristics(sys, [0, 1, 1], 5.0, 0.01)
        assert 0.9 < info.value.s < 5.0

    def test_bad_arguments(self):
        sys = characteristic_system(harmonic_hj())
        with pytest.raises(ValueError):
            integrate_characteristics(sys, [0, 0, 0], 1.0, 0.1)
        with pytest.raises(ValueError):
            integrate_characteristics(sys, [0] * 5, 1.0, 0)

    def test_perturbed_theta_fires(self):
        sys = characteristic_system(harmonic_hj())
        traj = integrate_characteristics(sys, [0, 0, -0.5, 1, 0], TWO_PI, 1e-3)
        baseline = verify_along(harmonic_hj(), traj)
        rng = np.random.default_rng(7)
        traj.p = traj.p + rng.uniform(-1e-3, 1e-3, traj.p.shape)
        rep = verify_along(harmonic_hj(), traj)
        # a jitter of size e in p moves theta by about e*|dx|, i.e. e*h per step
        assert rep.max_theta_residual > 1e-7
        assert rep.max_theta_residual > 1e4 * baseline.max_theta_residual
        assert rep.max_F_residual > 1e-4

    def test_rk4_order(self):
        pde = harmonic_hj()
        sys = characteristic_system(pde)
        errs = []
        for h in (0.05, 0.025):
            traj = integrate_characteristics(sys, [0, 0, -0.5, 1, 0], TWO_PI, h)
            rep = verify_along(pde, traj)
            errs.append((rep.max_F_residual, abs(traj.x[-1, 1]), rep.max_theta_residual))
        for coarse, fine in zip(*errs):
            assert coarse / fine >= 8

    def test_csv(self):
        sys = characteristic_system(harmonic_hj())
        traj = integrate_characteristics(sys, [0, 0, -0.5, 1, 0], 0.2, 0.1)
        lines = traj.to_csv().splitlines()
        assert lines[0] == "s,t,x,p_t,p_x,u" and len(lines) == 4


class TestFunctionalStatus:
    grid = np.linspace(0, 1, 101)

    def test_gradient_field(self):
        X, Y = np.meshgrid(self.grid, self.grid, indexing="ij")
        st_ = functional_status(None, self.grid, self.grid, u=X * Y)
        assert st_.is_function

    def test_rotation_field(self):
        X, Y = np.meshgrid(self.grid, self.grid, indexing="ij")
        st_ = functional_status(None, self.grid, self.grid, p=(-Y, X))
        assert st_.kind == "Functional" and st_.commutator_norm == pytest.approx(2.0)

    def test_kink_in_u_stays_function(self):
        # discrete mixed central differences commute, so a break in u alone cannot show up
        X, _ = np.meshgrid(self.grid, self.grid, indexing="ij")
        assert functional_status(None, self.grid, self.grid, u=np.abs(X - 0.5)).is_function

    def test_break_in_momentum_localized(self):
        X, _ = np.meshgrid(self.grid, self.grid, indexing="ij")
        st_ = functional_status(None, self.grid, self.grid,
                                p=(np.zeros_like(X), np.where(X > 0.5, 1.0, 0.0)))
        assert st_.kind == "Functional"
        assert st_.peak()[0] in (50, 51)

    def test_grid_errors(self):
        with pytest.raises(GridError):
            functional_status(None, self.grid, self.grid, u=np.zeros((3, 3)))
        with pytest.raises(GridError):
            functional_status(None, self.grid[::-1], self.grid, u=np.zeros((101, 101)))
        with pytest.raises(GridError):
            functional_status(None, self.grid, self.grid)

    @settings(max_examples=40, deadline=None, suppress_health_check=list(HealthCheck))
    @given(st.lists(st.integers(-3, 3), min_size=9, max_size=9), st.integers(64, 96))
    def test_polynomial_gradients(self, c, n):
        g = np.linspace(-1, 1, n)
        X, Y = np.meshgrid(g, g, indexing="ij")
        u = sum(c[3 * i + j] * X ** i * Y ** j for i in range(3) for j in range(3))
        assert functional_status(None, g, g, u=u).is_function
