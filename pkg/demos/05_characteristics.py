# # Characteristics of a Hamilton-Jacobi equation
#
# u_t + (u_x^2 + x^2)/2 = 0 is integrated along its characteristics. On the
# curve through x = 0, p_x = 1 the exact solution is x = sin s, p_x = cos s and
# u = sin(2s)/4, which makes a good yardstick for the RK4 integrator.

import math

import numpy as np

from formlab import characteristic_system, functional_status, integrate_characteristics
from formlab import verify_along
from formlab.characteristics import harmonic_hj

pde = harmonic_hj()
system = characteristic_system(pde)
print(system.to_json())

traj = integrate_characteristics(system, [0, 0, -0.5, 1, 0], 2 * math.pi, 1e-3)
rep = verify_along(pde, traj)
print(f"{len(traj)} samples, max |F| {rep.max_F_residual:.2e}, "
      f"max theta {rep.max_theta_residual:.2e}")
print("x(2 pi) =", traj.x[-1, 1], "  p(2 pi) - 1 =", traj.p[-1, 1] - 1)
print("max |u - sin(2s)/4| =", np.max(np.abs(traj.u - np.sin(2 * traj.s) / 4)))

# ## Convergence
# Halving the step should shrink the residuals by at least 8 for a 4th order
# scheme. The theta check uses the trapezoid rule so it converges like h^3.

prev = None
for h in (0.1, 0.05, 0.025, 0.0125):
    t = integrate_characteristics(system, [0, 0, -0.5, 1, 0], 2 * math.pi, h)
    r = verify_along(pde, t)
    now = (r.max_F_residual, abs(t.x[-1, 1]), r.max_theta_residual)
    ratios = "" if prev is None else "  ratios " + ", ".join(f"{a / b:.2f}" for a, b in zip(prev, now))
    print(f"h={h:<7} F {now[0]:.2e}  x-return {now[1]:.2e}  theta {now[2]:.2e}{ratios}")
    prev = now

# ## Function or functional?
# A gradient field has vanishing discrete commutator; a rotation does not.

g = np.linspace(0, 1, 101)
X, Y = np.meshgrid(g, g, indexing="ij")
print("u = x y       ->", functional_status(None, g, g, u=X * Y).kind)
rot = functional_status(None, g, g, p=(-Y, X))
print("p = (-y, x)   ->", rot.kind, "norm", round(rot.commutator_norm, 6))
