"""Characteristics of first-order PDEs and numeric checks along them.

The PDE ``F(x, u, p) = 0`` uses momenta named ``p_<var>`` for each space
variable. Characteristic curves are integrated with fixed-step RK4 and checked
against the PDE residual and the relation du = p_i dx^i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, GridError, NonFinite, UnboundSymbol
from .scalar import (ZERO, Expr, ZeroVerdict, as_expr, differentiate, is_zero, lambdify,
                     normalize, parse_expr, substitute, to_text)


def momentum_name(var: str) -> str:
    return f"p_{var}"


@dataclass(frozen=True)
class FirstOrderPDE:
    """``F(x, u, p) = 0`` over ``space_vars`` with unknown ``unknown``.

    ``params`` lists symbols that stay symbolic (bound to numbers only at
    integration time).
    """

    space_vars: tuple
    F: Expr
    unknown: str = "u"
    params: tuple = ()

    def __init__(self, space_vars, F, unknown="u", params=()):
        space_vars = tuple(str(v) for v in space_vars)
        F = parse_expr(F) if isinstance(F, str) else normalize(as_expr(F))
        object.__setattr__(self, "space_vars", space_vars)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "unknown", unknown)
        object.__setattr__(self, "params", tuple(params))
        allowed = set(space_vars) | set(self.momenta) | {unknown} | set(params)
        extra = F.free_symbols - allowed
        if extra:
            raise UnboundSymbol(f"F uses undeclared symbols {sorted(extra)}")
        if all(differentiate(F, p) == ZERO for p in self.momenta):
            raise DegenerateError("F does not depend on any momentum")

    @property
    def momenta(self):
        return tuple(momentum_name(v) for v in self.space_vars)

    @property
    def state_names(self):
        return self.space_vars + self.momenta + (self.unknown,)


@dataclass(frozen=True)
class CharacteristicSystem:
    """Right-hand sides of the characteristic ODEs in state order (x, p, u)."""

    space_vars: tuple
    momenta: tuple
    unknown: str
    dx: tuple
    dp: tuple
    du: Expr
    parameter: str = "s"

    @property
    def state_names(self):
        return self.space_vars + self.momenta + (self.unknown,)

    @property
    def rhs(self):
        return self.dx + self.dp + (self.du,)

    def to_json(self):
        return {"parameter": self.parameter, "state": list(self.state_names),
                "dx": [to_text(e) for e in self.dx], "dp": [to_text(e) for e in self.dp],
                "du": to_text(self.du)}

    def compile(self, constants=None):
        free = set()
        for e in self.rhs:
            free |= e.free_symbols
        missing = free - set(self.state_names) - set(constants or {})
        if missing:
            raise UnboundSymbol(f"parameters {sorted(missing)} need numeric values")
        return lambdify(self.rhs, self.state_names, constants)


def characteristic_system(pde: FirstOrderPDE) -> CharacteristicSystem:
    """dx^i/ds = F_{p_i}, dp_i/ds = −(F_{x^i} + p_i F_u), du/ds = Σ p_i F_{p_i}."""
    F = pde.F
    Fp = [differentiate(F, p) for p in pde.momenta]
    if all(is_zero(e) is ZeroVerdict.ZERO for e in Fp):
        raise DegenerateError("all dx/ds vanish identically")
    Fu = differentiate(F, pde.unknown)
    dp = []
    for x, p in zip(pde.space_vars, pde.momenta):
        dp.append(normalize(-(differentiate(F, x) + as_expr(p) * Fu)))
    du = ZERO
    for p, e in zip(pde.momenta, Fp):
        du = du + as_expr(p) * e
    return CharacteristicSystem(pde.space_vars, pde.momenta, pde.unknown, tuple(Fp), tuple(dp), du)


def canonical_relations(E, space_vars, time="t", unknown="u") -> CharacteristicSystem:
    """Canonical system of ``u_t + E(t, x, p) = 0`` parameterized by ``time``."""
    E = parse_expr(E) if isinstance(E, str) else normalize(as_expr(E))
    space_vars = tuple(str(v) for v in space_vars)
    momenta = tuple(momentum_name(v) for v in space_vars)
    dx = tuple(differentiate(E, p) for p in momenta)
    dp = tuple(normalize(-differentiate(E, x)) for x in space_vars)
    du = -E
    for p, e in zip(momenta, dx):
        du = du + as_expr(p) * e
    return CharacteristicSystem(space_vars, momenta, unknown, dx, dp, normalize(du), parameter=time)


@dataclass
class Trajectory:
    """Uniformly sampled characteristic curve.

    ``s`` has shape (N,), ``x`` and ``p`` shape (N, n), ``u`` shape (N,).
    ``singular`` lists parameter values where every dx/ds vanished.
    """

    s: np.ndarray
    x: np.ndarray
    p: np.ndarray
    u: np.ndarray
    step: float
    state_names: tuple = ()
    singular: list = field(default_factory=list)

    @property
    def samples(self):
        return [(float(s), list(map(float, x)), list(map(float, p)), float(u))
                for s, x, p, u in zip(self.s, self.x, self.p, self.u)]

    def __len__(self):
        return len(self.s)

    def to_csv(self) -> str:
        header = ",".join(("s",) + tuple(self.state_names))
        rows = [header]
        for s, x, p, u in zip(self.s, self.x, self.p, self.u):
            vals = [s, *x, *p, u]
            rows.append(",".join(format(float(v), ".17g") for v in vals))
        return "\n".join(rows) + "\n"


def _initial_state(system, init):
    names = system.state_names
    if isinstance(init, dict):
        missing = [n for n in names if n not in init]
        if missing:
            raise ValueError(f"initial values missing for {missing}")
        vals = [float(init[n]) for n in names]
    else:
        vals = [float(v) for v in init]
        if len(vals) != len(names):
            raise ValueError(f"need {len(names)} initial values for {names}")
    if not all(math.isfinite(v) for v in vals):
        raise NonFinite("initial values must be finite", 0.0)
    return np.array(vals)


def integrate_characteristics(system: CharacteristicSystem, init, s_end: float, h: float,
                              constants=None) -> Trajectory:
    """Classical RK4 from s = 0 to ``s_end`` with steps of at most ``h``.

    The step is shrunk to ``s_end / ceil(s_end / h)`` so the last sample sits
    exactly at ``s_end``; there are ``ceil(s_end / h) + 1`` samples.
    """
    if not h > 0 or not s_end > 0:
        raise ValueError("h and s_end must be positive")
    f = system.compile(constants)
    y = _initial_state(system, init)
    n = len(system.space_vars)
    steps = math.ceil(s_end / h - 1e-12)
    step = s_end / steps

    def rhs(state, s):
        try:
            out = np.array(f(*state), dtype=float)
        except (OverflowError, ZeroDivisionError, ValueError) as exc:
            raise NonFinite(f"evaluation failed at s={s:.17g}: {exc}", s) from None
        if not np.all(np.isfinite(out)):
            raise NonFinite(f"non-finite derivative at s={s:.17g}", s)
        return out

    Y = np.empty((steps + 1, len(y)))
    Y[0] = y
    singular = []
    for k in range(steps):
        s = k * step
        k1 = rhs(y, s)
        if k == 0 and np.all(np.abs(k1[:n]) < 1e-12):
            singular.append(s)
        k2 = rhs(y + 0.5 * step * k1, s + 0.5 * step)
        k3 = rhs(y + 0.5 * step * k2, s + 0.5 * step)
        k4 = rhs(y + step * k3, s + step)
        y = y + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NonFinite(f"state became non-finite at s={s + step:.17g}", s + step)
        Y[k + 1] = y
        if np.all(np.abs(rhs(y, s + step)[:n]) < 1e-12):
            singular.append(s + step)
    svals = np.arange(steps + 1) * step
    svals[-1] = s_end
    return Trajectory(svals, Y[:, :n].copy(), Y[:, n:2 * n].copy(), Y[:, 2 * n].copy(), step,
                      system.state_names, singular)


@dataclass(frozen=True)
class AlongReport:
    max_F_residual: float
    max_theta_residual: float

    def to_json(self):
        return {"F": self.max_F_residual, "theta": self.max_theta_residual}


def verify_along(pde: FirstOrderPDE, traj: Trajectory, constants=None) -> AlongReport:
    """Max |F| over samples and max per-step |Δu − Σ p̄_i Δx^i| with trapezoidal p̄."""
    F = lambdify([pde.F], pde.state_names, constants)
    fvals = np.array([F(*x, *p, u)[0] for x, p, u in zip(traj.x, traj.p, traj.u)])
    du = np.diff(traj.u)
    dx = np.diff(traj.x, axis=0)
    pbar = 0.5 * (traj.p[1:] + traj.p[:-1])
    theta = du - np.sum(pbar * dx, axis=1)
    return AlongReport(float(np.max(np.abs(fvals))), float(np.max(np.abs(theta))) if len(theta) else 0.0)


@dataclass(frozen=True)
class FieldStatus:
    """``kind`` is "Function" or "Functional"; ``K`` is the discrete commutator grid."""

    kind: str
    commutator_norm: float
    K: np.ndarray
    tolerance: float

    @property
    def is_function(self):
        return self.kind == "Function"

    def peak(self):
        """Grid index of the largest |K|."""
        return np.unravel_index(int(np.argmax(np.abs(self.K))), self.K.shape)

    def to_json(self):
        return {"kind": self.kind, "commutator_norm": self.commutator_norm,
                "tolerance": self.tolerance}


def functional_status(pde, x1, x2, u=None, p=None, rtol=1e-6) -> FieldStatus:
    """Function/functional verdict of a gridded field via K12 = ∂p2/∂x1 − ∂p1/∂x2.

    Give either ``u`` sampled on the grid (momenta from central differences)
    or the momenta ``p = (p1, p2)`` directly. Arrays are indexed ``[i1, i2]``.
    The tolerance is ``rtol * max(1, max|p|)``. ``pde`` is accepted for
    symmetry with the other checks and may be None.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.ndim != 1 or x2.ndim != 1 or len(x1) < 3 or len(x2) < 3:
        raise GridError("grid axes must be 1-D with at least 3 points")
    if np.any(np.diff(x1) <= 0) or np.any(np.diff(x2) <= 0):
        raise GridError("grid axes must be strictly increasing")
    shape = (len(x1), len(x2))
    if (u is None) == (p is None):
        raise GridError("give exactly one of u or p")
    if u is not None:
        u = np.asarray(u, dtype=float)
        if u.shape != shape:
            raise GridError(f"field shape {u.shape} does not match grid {shape}")
        p1, p2 = np.gradient(u, x1, x2, edge_order=1)
    else:
        p1, p2 = (np.asarray(a, dtype=float) for a in p)
        if p1.shape != shape or p2.shape != shape:
            raise GridError(f"momentum shapes do not match grid {shape}")
    K = np.gradient(p2, x1, axis=0, edge_order=1) - np.gradient(p1, x2, axis=1, edge_order=1)
    tol = rtol * max(1.0, float(np.max(np.abs(p1))), float(np.max(np.abs(p2))))
    norm = float(np.max(np.abs(K)))
    return FieldStatus("Function" if norm < tol else "Functional", norm, K, tol)


def hj_du_consistency(E, space_vars, time="t") -> ZeroVerdict:
    """Zero when du/ds of ``p_t + E`` agrees with du/dt of the canonical system on F = 0."""
    E = parse_expr(E) if isinstance(E, str) else normalize(as_expr(E))
    pt = momentum_name(time)
    pde = FirstOrderPDE((time,) + tuple(space_vars), as_expr(pt) + E)
    char = characteristic_system(pde)
    canon = canonical_relations(E, space_vars, time)
    on_shell = substitute(char.du, {pt: -E})
    return is_zero(on_shell - canon.du)


def harmonic_hj() -> FirstOrderPDE:
    return FirstOrderPDE(("t", "x"), "p_t + (p_x^2 + x^2)/2")
